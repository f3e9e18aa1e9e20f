#ifndef SCHWARZDD_ASSEMBLY_HPP
#define SCHWARZDD_ASSEMBLY_HPP

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "sparse.hpp"
#include "types.hpp"

namespace schwarzdd {

enum class ProblemKind { poisson, helmholtz };

enum class BcType { dirichlet, neumann, absorbing, incident };

struct BoundaryCondition {
    BcType type = BcType::dirichlet;
    std::function<double(Point)> value;  // Dirichlet value or incident trace
};

/// Model problem parameters. The coefficient multiplies the omega^2 term
/// and is evaluated at cell centroids (core/cladding contrast).
template <typename Scalar>
struct ProblemSpec {
    ProblemKind kind = ProblemKind::poisson;
    double omega = 0.0;
    std::function<double(Point)> coefficient;  // default 1
    std::function<Scalar(Point)> source;       // default 0
    std::map<std::string, BoundaryCondition> bc;
};

template <typename Scalar>
struct AssembledSystem {
    SparseMatrix<Scalar> A;
    Vector<Scalar> b;
    std::vector<index_t> dirichlet_dofs;  // sorted
};

namespace fem {

constexpr double kGauss = 0.5773502691896257645091488;  // 1/sqrt(3)

inline double shape(int i, double xi, double eta) {
    switch (i) {
        case 0: return 0.25 * (1 - xi) * (1 - eta);
        case 1: return 0.25 * (1 + xi) * (1 - eta);
        case 2: return 0.25 * (1 + xi) * (1 + eta);
        default: return 0.25 * (1 - xi) * (1 + eta);
    }
}

inline std::array<double, 2> shape_grad(int i, double xi, double eta) {
    switch (i) {
        case 0: return {-0.25 * (1 - eta), -0.25 * (1 - xi)};
        case 1: return {0.25 * (1 - eta), -0.25 * (1 + xi)};
        case 2: return {0.25 * (1 + eta), 0.25 * (1 + xi)};
        default: return {-0.25 * (1 + eta), 0.25 * (1 - xi)};
    }
}

struct CellGeometry {
    double a, b;       // edge lengths (axis-aligned rectangle)
    Point origin;      // vertex 0
    Point centroid;
};

inline CellGeometry cell_geometry(const std::vector<Point>& vertices,
                                  const std::array<index_t, 4>& cell) {
    const Point& p0 = vertices[static_cast<std::size_t>(cell[0])];
    const Point& p2 = vertices[static_cast<std::size_t>(cell[2])];
    CellGeometry g;
    g.a = p2.x - p0.x;
    g.b = p2.y - p0.y;
    g.origin = p0;
    g.centroid = {p0.x + 0.5 * g.a, p0.y + 0.5 * g.b};
    return g;
}

/// Q1 stiffness element matrix, 2x2 Gauss (exact for bilinear shapes).
inline std::array<std::array<double, 4>, 4> element_stiffness(const CellGeometry& g) {
    std::array<std::array<double, 4>, 4> K{};
    const double jx = 2.0 / g.a, jy = 2.0 / g.b;  // d(xi)/dx, d(eta)/dy
    const double detJ = 0.25 * g.a * g.b;
    for (double xi : {-kGauss, kGauss})
        for (double eta : {-kGauss, kGauss})
            for (int i = 0; i < 4; ++i) {
                const auto gi = shape_grad(i, xi, eta);
                for (int j = 0; j < 4; ++j) {
                    const auto gj = shape_grad(j, xi, eta);
                    K[i][j] += (gi[0] * jx * gj[0] * jx + gi[1] * jy * gj[1] * jy) * detJ;
                }
            }
    return K;
}

inline std::array<std::array<double, 4>, 4> element_mass(const CellGeometry& g) {
    std::array<std::array<double, 4>, 4> M{};
    const double detJ = 0.25 * g.a * g.b;
    for (double xi : {-kGauss, kGauss})
        for (double eta : {-kGauss, kGauss})
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    M[i][j] += shape(i, xi, eta) * shape(j, xi, eta) * detJ;
    return M;
}

/// Consistent edge mass matrix on a straight edge: L/6 * [[2,1],[1,2]].
/// Computed by 2-point Gauss on the linear traces.
inline std::array<std::array<double, 2>, 2> edge_mass(double length) {
    std::array<std::array<double, 2>, 2> S{};
    for (double xi : {-kGauss, kGauss}) {
        const double n0 = 0.5 * (1 - xi), n1 = 0.5 * (1 + xi);
        S[0][0] += n0 * n0 * 0.5 * length;
        S[0][1] += n0 * n1 * 0.5 * length;
        S[1][0] += n1 * n0 * 0.5 * length;
        S[1][1] += n1 * n1 * 0.5 * length;
    }
    return S;
}

inline double edge_length(const std::vector<Point>& vertices, index_t v0, index_t v1) {
    const Point& a = vertices[static_cast<std::size_t>(v0)];
    const Point& b = vertices[static_cast<std::size_t>(v1)];
    return std::hypot(b.x - a.x, b.y - a.y);
}

/// Edge load vector int_e g v ds with 2-point Gauss.
inline std::array<double, 2> edge_load(const std::vector<Point>& vertices, index_t v0,
                                       index_t v1,
                                       const std::function<double(Point)>& g) {
    std::array<double, 2> f{};
    const Point& a = vertices[static_cast<std::size_t>(v0)];
    const Point& b = vertices[static_cast<std::size_t>(v1)];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    for (double xi : {-kGauss, kGauss}) {
        const double n0 = 0.5 * (1 - xi), n1 = 0.5 * (1 + xi);
        const Point p{a.x * n0 + b.x * n1, a.y * n0 + b.y * n1};
        const double gv = g(p);
        f[0] += gv * n0 * 0.5 * len;
        f[1] += gv * n1 * 0.5 * len;
    }
    return f;
}

}  // namespace fem

namespace detail {

template <typename Scalar>
void check_problem(const ProblemSpec<Scalar>& spec) {
    if (spec.kind == ProblemKind::helmholtz && !scalar_traits<Scalar>::is_complex)
        throw std::invalid_argument("helmholtz requires the complex scalar field");
    if (spec.kind == ProblemKind::poisson && spec.omega != 0.0)
        throw std::invalid_argument("poisson admits no wavenumber");
}

template <typename Scalar>
Scalar i_omega(double omega) {
    if constexpr (scalar_traits<Scalar>::is_complex)
        return Scalar(0.0, omega);
    else
        return Scalar(0.0);  // unreachable for helmholtz (checked above)
}

/// Volume terms K - omega^2 M_c over an arbitrary rectangle-cell list.
template <typename Scalar>
void add_volume_terms(const std::vector<Point>& vertices,
                      const std::vector<std::array<index_t, 4>>& cells,
                      const ProblemSpec<Scalar>& spec,
                      std::vector<Triplet<Scalar>>& trips) {
    const double w2 = spec.omega * spec.omega;
    for (const auto& cell : cells) {
        const auto g = fem::cell_geometry(vertices, cell);
        const auto K = fem::element_stiffness(g);
        const double coeff = spec.coefficient ? spec.coefficient(g.centroid) : 1.0;
        if (spec.kind == ProblemKind::helmholtz) {
            const auto M = fem::element_mass(g);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    trips.emplace_back(cell[i], cell[j],
                                       Scalar(K[i][j]) - Scalar(w2 * coeff * M[i][j]));
        } else {
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    trips.emplace_back(cell[i], cell[j], Scalar(K[i][j]));
        }
    }
}

template <typename Scalar>
void add_edge_mass(const std::vector<Point>& vertices, index_t v0, index_t v1,
                   Scalar factor, std::vector<Triplet<Scalar>>& trips) {
    const auto S = fem::edge_mass(fem::edge_length(vertices, v0, v1));
    const index_t v[2] = {v0, v1};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            trips.emplace_back(v[i], v[j], factor * Scalar(S[i][j]));
}

/// Symmetric row/column elimination with unit diagonal on Dirichlet dofs.
/// Column contributions move to the right-hand side when b is given.
template <typename Scalar>
SparseMatrix<Scalar> eliminate_dirichlet(std::vector<Triplet<Scalar>>& trips,
                                         index_t n,
                                         const std::vector<index_t>& dirichlet,
                                         const std::vector<Scalar>& dirichlet_values,
                                         Vector<Scalar>* b) {
    std::vector<char> is_d(static_cast<std::size_t>(n), 0);
    std::vector<Scalar> val(static_cast<std::size_t>(n), Scalar{});
    for (std::size_t k = 0; k < dirichlet.size(); ++k) {
        is_d[static_cast<std::size_t>(dirichlet[k])] = 1;
        val[static_cast<std::size_t>(dirichlet[k])] =
            dirichlet_values.empty() ? Scalar{} : dirichlet_values[k];
    }
    std::vector<Triplet<Scalar>> out;
    out.reserve(trips.size());
    for (const auto& [r, c, v] : trips) {
        if (is_d[static_cast<std::size_t>(r)]) continue;
        if (is_d[static_cast<std::size_t>(c)]) {
            if (b) (*b)[static_cast<std::size_t>(r)] -= v * val[static_cast<std::size_t>(c)];
            continue;
        }
        out.emplace_back(r, c, v);
    }
    for (index_t d : dirichlet) {
        out.emplace_back(d, d, Scalar(1.0));
        if (b) (*b)[static_cast<std::size_t>(d)] = val[static_cast<std::size_t>(d)];
    }
    return csr_from_triplets(std::move(out), n, n);
}

}  // namespace detail

/// Boundary load from the incident-marked sides, consistent with the
/// global weak form.
template <typename Scalar>
Vector<Scalar> assemble_incident_rhs(const Mesh& mesh, const DofMap& dofmap,
                                     const ProblemSpec<Scalar>& spec) {
    Vector<Scalar> b(static_cast<std::size_t>(dofmap.n_dofs), Scalar{});
    for (const auto& be : mesh.boundary_edges) {
        auto it = spec.bc.find(be.mark);
        if (it == spec.bc.end() || it->second.type != BcType::incident) continue;
        if (!it->second.value) continue;
        const auto f = fem::edge_load(mesh.vertices, be.v0, be.v1, it->second.value);
        b[static_cast<std::size_t>(be.v0)] += Scalar(f[0]);
        b[static_cast<std::size_t>(be.v1)] += Scalar(f[1]);
    }
    return b;
}

/// Global system: A = K - omega^2 M_c + i*omega*S on absorbing and
/// incident sides (first-order absorbing closure); Poisson keeps A = K
/// with symmetric Dirichlet elimination. b collects the volume source and
/// incident traces.
template <typename Scalar>
AssembledSystem<Scalar> assemble_global(const Mesh& mesh, const DofMap& dofmap,
                                        const ProblemSpec<Scalar>& spec) {
    detail::check_problem(spec);
    {
        std::set<std::string> present;
        for (const auto& be : mesh.boundary_edges) present.insert(be.mark);
        for (const auto& [mark, bc] : spec.bc)
            if (!present.count(mark))
                throw std::invalid_argument("assemble_global: bc mark '" + mark +
                                            "' not present on mesh");
    }

    std::vector<Triplet<Scalar>> trips;
    detail::add_volume_terms(mesh.vertices, dofmap.cell_dofs, spec, trips);

    std::vector<index_t> dirichlet;
    std::vector<Scalar> dirichlet_values;
    for (const auto& be : mesh.boundary_edges) {
        auto it = spec.bc.find(be.mark);
        if (it == spec.bc.end()) continue;
        const BoundaryCondition& bc = it->second;
        switch (bc.type) {
            case BcType::absorbing:
            case BcType::incident:
                if (spec.kind == ProblemKind::helmholtz)
                    detail::add_edge_mass(mesh.vertices, be.v0, be.v1,
                                          detail::i_omega<Scalar>(spec.omega), trips);
                break;
            case BcType::dirichlet:
                for (index_t v : {be.v0, be.v1}) {
                    dirichlet.push_back(v);
                    dirichlet_values.push_back(
                        bc.value ? Scalar(bc.value(mesh.vertices[static_cast<std::size_t>(v)]))
                                 : Scalar{});
                }
                break;
            case BcType::neumann:
                break;
        }
    }
    {
        // Deduplicate Dirichlet dofs (corners appear on two sides).
        std::vector<std::pair<index_t, Scalar>> pairs;
        for (std::size_t k = 0; k < dirichlet.size(); ++k)
            pairs.emplace_back(dirichlet[k], dirichlet_values[k]);
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        dirichlet.clear();
        dirichlet_values.clear();
        for (const auto& [d, v] : pairs)
            if (dirichlet.empty() || dirichlet.back() != d) {
                dirichlet.push_back(d);
                dirichlet_values.push_back(v);
            }
    }

    AssembledSystem<Scalar> sys;
    sys.b.assign(static_cast<std::size_t>(dofmap.n_dofs), Scalar{});
    if (spec.source) {
        for (const auto& cell : dofmap.cell_dofs) {
            const auto g = fem::cell_geometry(mesh.vertices, cell);
            const double detJ = 0.25 * g.a * g.b;
            for (double xi : {-fem::kGauss, fem::kGauss})
                for (double eta : {-fem::kGauss, fem::kGauss}) {
                    Point p{g.origin.x + 0.5 * g.a * (1 + xi),
                            g.origin.y + 0.5 * g.b * (1 + eta)};
                    const Scalar fv = spec.source(p);
                    for (int i = 0; i < 4; ++i)
                        sys.b[static_cast<std::size_t>(cell[i])] +=
                            fv * Scalar(fem::shape(i, xi, eta) * detJ);
                }
        }
    }
    const auto inc = assemble_incident_rhs(mesh, dofmap, spec);
    for (std::size_t i = 0; i < inc.size(); ++i) sys.b[i] += inc[i];

    sys.A = detail::eliminate_dirichlet(trips, dofmap.n_dofs, dirichlet,
                                        dirichlet_values, &sys.b);
    sys.dirichlet_dofs = std::move(dirichlet);
    return sys;
}

/// Local subdomain matrix B_i on a LocalMesh: volume terms, the global
/// boundary closure on marked edges, and the Robin term alpha * S over the
/// interface-flagged edges. Global-Dirichlet dofs are eliminated as in the
/// global assembly. Rows/columns follow the sorted-global local dof order.
template <typename Scalar>
SparseMatrix<Scalar> assemble_local_robin(const LocalMesh& lm,
                                          const ProblemSpec<Scalar>& spec,
                                          Scalar alpha) {
    detail::check_problem(spec);
    std::vector<Triplet<Scalar>> trips;
    detail::add_volume_terms(lm.vertices, lm.cells, spec, trips);

    std::vector<index_t> dirichlet;
    for (const auto& be : lm.marked_boundary_edges) {
        auto it = spec.bc.find(be.mark);
        if (it == spec.bc.end()) continue;
        switch (it->second.type) {
            case BcType::absorbing:
            case BcType::incident:
                if (spec.kind == ProblemKind::helmholtz)
                    detail::add_edge_mass(lm.vertices, be.v0, be.v1,
                                          detail::i_omega<Scalar>(spec.omega), trips);
                break;
            case BcType::dirichlet:
                dirichlet.push_back(be.v0);
                dirichlet.push_back(be.v1);
                break;
            case BcType::neumann:
                break;
        }
    }
    for (const auto& be : lm.interface_edges)
        detail::add_edge_mass(lm.vertices, be.v0, be.v1, alpha, trips);

    std::sort(dirichlet.begin(), dirichlet.end());
    dirichlet.erase(std::unique(dirichlet.begin(), dirichlet.end()), dirichlet.end());
    return detail::eliminate_dirichlet(trips, lm.n_dofs(), dirichlet,
                                       std::vector<Scalar>{},
                                       static_cast<Vector<Scalar>*>(nullptr));
}

}  // namespace schwarzdd

#endif
