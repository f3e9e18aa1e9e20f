#ifndef SCHWARZDD_PRECONDITIONER_HPP
#define SCHWARZDD_PRECONDITIONER_HPP

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "factorization.hpp"
#include "operators.hpp"
#include "partition.hpp"
#include "sparse.hpp"
#include "types.hpp"

namespace schwarzdd {

enum class Variant { AS, RAS, SAS, OAS, ORAS };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::AS: return "AS";
        case Variant::RAS: return "RAS";
        case Variant::SAS: return "SAS";
        case Variant::OAS: return "OAS";
        default: return "ORAS";
    }
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "AS") return Variant::AS;
    if (s == "RAS") return Variant::RAS;
    if (s == "SAS") return Variant::SAS;
    if (s == "OAS") return Variant::OAS;
    if (s == "ORAS") return Variant::ORAS;
    throw std::invalid_argument("unknown preconditioner variant: " + s);
}

struct SchwarzOptions {
    /// ORAS scaling: restricted binary by default, inverse multiplicity
    /// behind this flag.
    bool oras_inverse_multiplicity = false;
    int n_threads = 1;  // parallel local factorizations at build time
};

/// Interior dof set of subdomain i: V_i minus interface dofs minus global
/// Dirichlet dofs (homogeneous Dirichlet extraction).
inline std::vector<index_t> interior_dofs(const OverlappingDecomposition& decomp,
                                          index_t i,
                                          const std::vector<index_t>& dirichlet) {
    std::vector<index_t> tmp, out;
    const auto& Vi = decomp.dofs[static_cast<std::size_t>(i)];
    const auto& ifc = decomp.interface_dofs[static_cast<std::size_t>(i)];
    std::set_difference(Vi.begin(), Vi.end(), ifc.begin(), ifc.end(),
                        std::back_inserter(tmp));
    std::set_difference(tmp.begin(), tmp.end(), dirichlet.begin(), dirichlet.end(),
                        std::back_inserter(out));
    return out;
}

/// A_i = extract_submatrix(A, int_i, int_i) for every subdomain.
template <typename Scalar>
std::vector<SparseMatrix<Scalar>> local_dirichlet_matrices(
    const SparseMatrix<Scalar>& A, const OverlappingDecomposition& decomp,
    const std::vector<index_t>& dirichlet = {}) {
    std::vector<SparseMatrix<Scalar>> out;
    for (index_t i = 0; i < decomp.n_subdomains; ++i) {
        const auto ints = interior_dofs(decomp, i, dirichlet);
        if (ints.empty())
            throw std::invalid_argument(
                "local_dirichlet_matrices: subdomain " + std::to_string(i) +
                " has no interior dofs; enlarge subdomains or reduce the overlap");
        out.push_back(extract_submatrix(A, ints, ints));
    }
    return out;
}

/// One- or two-level overlapping Schwarz preconditioner.
///
/// AS/RAS/SAS solve with the Dirichlet extraction A_i over interior dofs;
/// OAS/ORAS solve with separately assembled B_i over all of V_i, with the
/// residual zeroed on the interface dofs before the local solve. The
/// global Dirichlet identity rows are passed through unchanged.
template <typename Scalar>
class SchwarzPreconditioner {
 public:
    struct LocalSolve {
        std::vector<index_t> solve_dofs;      // sorted global dofs
        std::vector<double> weights;          // scatter scaling, aligned
        std::vector<index_t> zero_positions;  // rhs entries zeroed pre-solve
        std::optional<Factorization<Scalar>> factor;
    };

    struct CoarseLevel {
        std::vector<std::vector<index_t>> supports;  // Phi columns (entries = 1)
        std::optional<Factorization<Scalar>> factor;
        index_t n_columns() const { return static_cast<index_t>(supports.size()); }
    };

    Variant variant = Variant::AS;
    index_t n = 0;
    std::vector<index_t> dirichlet;  // sorted global identity dofs
    std::vector<LocalSolve> locals;
    std::optional<CoarseLevel> coarse;
    // Retained for coarse-space construction and reports.
    std::vector<std::vector<index_t>> owned_dofs;
    std::vector<std::vector<index_t>> interface_dofs;

    bool two_level() const { return coarse.has_value(); }

    Vector<Scalar> apply(const Vector<Scalar>& r) const {
        if (static_cast<index_t>(r.size()) != n)
            throw std::invalid_argument("SchwarzPreconditioner::apply: dimension mismatch");
        Vector<Scalar> z(r.size(), Scalar{});
        for (index_t d : dirichlet) z[static_cast<std::size_t>(d)] = r[static_cast<std::size_t>(d)];

        if (coarse) {
            const auto& cl = *coarse;
            Vector<Scalar> u(static_cast<std::size_t>(cl.n_columns()), Scalar{});
            for (std::size_t c = 0; c < cl.supports.size(); ++c)
                for (index_t d : cl.supports[c]) u[c] += r[static_cast<std::size_t>(d)];
            const auto w = cl.factor->solve(u);
            for (std::size_t c = 0; c < cl.supports.size(); ++c)
                for (index_t d : cl.supports[c]) z[static_cast<std::size_t>(d)] += w[c];
        }

        for (const auto& ls : locals) {
            Vector<Scalar> rhs(ls.solve_dofs.size());
            for (std::size_t l = 0; l < ls.solve_dofs.size(); ++l)
                rhs[l] = r[static_cast<std::size_t>(ls.solve_dofs[l])];
            for (index_t p : ls.zero_positions) rhs[static_cast<std::size_t>(p)] = Scalar{};
            const auto y = ls.factor->solve(rhs);
            for (std::size_t l = 0; l < ls.solve_dofs.size(); ++l)
                z[static_cast<std::size_t>(ls.solve_dofs[l])] +=
                    Scalar(ls.weights[l]) * y[l];
        }
        return z;
    }

    LinearOperator<Scalar> as_linear_operator() const {
        return {n, [this](const Vector<Scalar>& r) { return apply(r); }};
    }
};

/// Factory for the B_i of OAS/ORAS: subdomain id -> local matrix over the
/// sorted V_i dof order.
template <typename Scalar>
using LocalMatrixBuilder = std::function<SparseMatrix<Scalar>(index_t)>;

template <typename Scalar>
SchwarzPreconditioner<Scalar> build_one_level(
    const SparseMatrix<Scalar>& A, const OverlappingDecomposition& decomp,
    Variant variant,
    const LocalMatrixBuilder<std::type_identity_t<Scalar>>& local_builder = nullptr,
    const std::vector<index_t>& dirichlet = {}, const SchwarzOptions& opts = {}) {
    if (A.n_rows != A.n_cols || A.n_rows != decomp.n_dofs)
        throw std::invalid_argument("build_one_level: matrix/decomposition mismatch");
    const bool optimized = variant == Variant::OAS || variant == Variant::ORAS;
    if (optimized && !local_builder)
        throw std::invalid_argument("build_one_level: OAS/ORAS require a local builder");

    SchwarzPreconditioner<Scalar> M;
    M.variant = variant;
    M.n = A.n_rows;
    M.dirichlet = dirichlet;
    M.owned_dofs = decomp.owned_dofs;
    M.interface_dofs = decomp.interface_dofs;
    M.locals.resize(static_cast<std::size_t>(decomp.n_subdomains));

    std::vector<char> is_dirichlet(static_cast<std::size_t>(M.n), 0);
    for (index_t d : dirichlet) is_dirichlet[static_cast<std::size_t>(d)] = 1;

    for (index_t i = 0; i < decomp.n_subdomains; ++i) {
        auto& ls = M.locals[static_cast<std::size_t>(i)];
        if (optimized) {
            ls.solve_dofs = decomp.dofs[static_cast<std::size_t>(i)];
            const auto& ifc = decomp.interface_dofs[static_cast<std::size_t>(i)];
            for (std::size_t l = 0; l < ls.solve_dofs.size(); ++l) {
                const index_t dof = ls.solve_dofs[l];
                if (std::binary_search(ifc.begin(), ifc.end(), dof) ||
                    is_dirichlet[static_cast<std::size_t>(dof)])
                    ls.zero_positions.push_back(static_cast<index_t>(l));
            }
        } else {
            ls.solve_dofs = interior_dofs(decomp, i, dirichlet);
            if (ls.solve_dofs.empty())
                throw std::invalid_argument(
                    "build_one_level: subdomain " + std::to_string(i) +
                    " has no interior dofs; enlarge subdomains or reduce the overlap");
        }

        ls.weights.assign(ls.solve_dofs.size(), 1.0);
        const bool restricted = variant == Variant::RAS ||
                                (variant == Variant::ORAS &&
                                 !opts.oras_inverse_multiplicity);
        const bool inv_mult = variant == Variant::SAS ||
                              (variant == Variant::ORAS &&
                               opts.oras_inverse_multiplicity);
        if (restricted) {
            for (std::size_t l = 0; l < ls.solve_dofs.size(); ++l)
                ls.weights[l] =
                    decomp.dof_owner[static_cast<std::size_t>(ls.solve_dofs[l])] == i
                        ? 1.0
                        : 0.0;
        } else if (inv_mult) {
            for (std::size_t l = 0; l < ls.solve_dofs.size(); ++l)
                ls.weights[l] =
                    1.0 / static_cast<double>(
                              decomp.multiplicity[static_cast<std::size_t>(ls.solve_dofs[l])]);
        }
        if (optimized) {
            // Dirichlet contributions are handled by the global identity part.
            for (std::size_t l = 0; l < ls.solve_dofs.size(); ++l)
                if (is_dirichlet[static_cast<std::size_t>(ls.solve_dofs[l])])
                    ls.weights[l] = 0.0;
        }
    }

    // Eager local factorizations, optionally in parallel.
    auto factorize_range = [&](index_t begin, index_t end) {
        for (index_t i = begin; i < end; ++i) {
            auto& ls = M.locals[static_cast<std::size_t>(i)];
            try {
                if (optimized) {
                    auto Bi = local_builder(i);
                    if (Bi.n_rows != static_cast<index_t>(ls.solve_dofs.size()))
                        throw std::invalid_argument(
                            "local matrix size does not match V_i");
                    ls.factor.emplace(Bi);
                } else {
                    ls.factor.emplace(
                        extract_submatrix(A, ls.solve_dofs, ls.solve_dofs));
                }
            } catch (const SingularMatrixError&) {
                throw SingularMatrixError(
                    "build_one_level: singular local matrix on subdomain " +
                    std::to_string(i));
            }
        }
    };
    const int n_threads = std::max(1, opts.n_threads);
    if (n_threads == 1 || decomp.n_subdomains < 2) {
        factorize_range(0, decomp.n_subdomains);
    } else {
        const index_t chunk =
            (decomp.n_subdomains + n_threads - 1) / static_cast<index_t>(n_threads);
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) {
            const index_t b = t * chunk;
            const index_t e = std::min(decomp.n_subdomains, b + chunk);
            if (b >= e) break;
            workers.emplace_back([&, t, b, e] {
                try {
                    factorize_range(b, e);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    return M;
}

/// Add the partition-of-unity coarse level: one constant basis function
/// per subdomain, supported on its unique-owner dofs (Dirichlet dofs
/// excluded), combined additively with the first level.
template <typename Scalar>
SchwarzPreconditioner<Scalar> build_two_level(const SchwarzPreconditioner<Scalar>& M1,
                                              const SparseMatrix<Scalar>& A) {
    SchwarzPreconditioner<Scalar> M = M1;
    typename SchwarzPreconditioner<Scalar>::CoarseLevel cl;

    std::vector<char> is_dirichlet(static_cast<std::size_t>(M.n), 0);
    for (index_t d : M.dirichlet) is_dirichlet[static_cast<std::size_t>(d)] = 1;
    for (const auto& owned : M.owned_dofs) {
        std::vector<index_t> support;
        for (index_t d : owned)
            if (!is_dirichlet[static_cast<std::size_t>(d)]) support.push_back(d);
        cl.supports.push_back(std::move(support));
    }

    // A_0 = Phi^T A Phi with binary Phi columns of disjoint support.
    const index_t nc = cl.n_columns();
    std::vector<index_t> column_of(static_cast<std::size_t>(M.n), -1);
    for (index_t c = 0; c < nc; ++c)
        for (index_t d : cl.supports[static_cast<std::size_t>(c)])
            column_of[static_cast<std::size_t>(d)] = c;
    std::vector<Triplet<Scalar>> trips;
    for (index_t c = 0; c < nc; ++c)
        for (index_t d : cl.supports[static_cast<std::size_t>(c)])
            for (index_t k = A.row_offsets[d]; k < A.row_offsets[d + 1]; ++k) {
                const index_t cc = column_of[static_cast<std::size_t>(
                    A.col_indices[static_cast<std::size_t>(k)])];
                if (cc >= 0)
                    trips.emplace_back(c, cc, A.values[static_cast<std::size_t>(k)]);
            }
    cl.factor.emplace(csr_from_triplets(std::move(trips), nc, nc));
    M.coarse = std::move(cl);
    return M;
}

/// Q = M^{-1} A, the Schwarz operator of the preconditioner.
template <typename Scalar>
LinearOperator<Scalar> schwarz_operator(const SchwarzPreconditioner<Scalar>& M,
                                        const SparseMatrix<Scalar>& A) {
    return {M.n, [&M, &A](const Vector<Scalar>& x) { return M.apply(spmv(A, x)); }};
}

}  // namespace schwarzdd

#endif
