#ifndef SCHWARZDD_PARTITION_HPP
#define SCHWARZDD_PARTITION_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "mesh.hpp"
#include "types.hpp"

namespace schwarzdd {

/// Non-overlapping decomposition: one owner per element (element-based)
/// or per dof (node-based).
struct Partition {
    index_t n_subdomains = 0;
    std::vector<index_t> owner;
};

enum class ScalingMode { restricted, multiplicity };

/// Per-subdomain overlapping dof sets and the derived index machinery.
struct OverlappingDecomposition {
    index_t n_subdomains = 0;
    index_t n_dofs = 0;
    int k = 0;             // overlap layers
    double h = 0.0;        // mesh parameter
    double delta = 0.0;    // overlap width k*h
    bool element_based = false;

    std::vector<std::vector<index_t>> elements;        // E_i' (element mode only)
    std::vector<std::vector<index_t>> dofs;            // V_i, sorted
    std::vector<std::vector<index_t>> interface_dofs;  // on dOmega_i' \ dOmega, sorted
    std::vector<std::vector<index_t>> owned_dofs;      // unique-owner sets, sorted
    std::vector<index_t> multiplicity;                 // per global dof
    std::vector<index_t> dof_owner;                    // unique owner per global dof
    std::vector<double> subdomain_diameter;            // H_i, from non-overlapping sets

    /// Max over subdomains of (k*h)/H_i, as a percentage.
    double delta_over_H_percent() const {
        double worst = 0.0;
        for (double H : subdomain_diameter)
            if (H > 0.0) worst = std::max(worst, delta / H);
        return 100.0 * worst;
    }
};

/// Implicit binary restriction R_i over the sorted dof list of V_i.
struct RestrictionMap {
    index_t subdomain = 0;
    index_t n_global = 0;
    std::vector<index_t> dofs;  // sorted

    template <typename Scalar>
    Vector<Scalar> restrict_vec(const Vector<Scalar>& x) const {
        if (static_cast<index_t>(x.size()) != n_global)
            throw std::invalid_argument("RestrictionMap: dimension mismatch");
        Vector<Scalar> local(dofs.size());
        for (std::size_t l = 0; l < dofs.size(); ++l)
            local[l] = x[static_cast<std::size_t>(dofs[l])];
        return local;
    }

    /// y += P_i local  (transpose scatter).
    template <typename Scalar>
    void prolong_add(const Vector<Scalar>& local, Vector<Scalar>& y) const {
        if (static_cast<index_t>(y.size()) != n_global || local.size() != dofs.size())
            throw std::invalid_argument("RestrictionMap: dimension mismatch");
        for (std::size_t l = 0; l < dofs.size(); ++l)
            y[static_cast<std::size_t>(dofs[l])] += local[l];
    }
};

/// Diagonal of D_i, aligned with the sorted dof list of V_i.
struct ScalingVector {
    index_t subdomain = 0;
    std::vector<double> weights;
};

inline Partition partition_geometric(const Mesh& mesh, index_t px, index_t py) {
    if (px < 1 || py < 1 || px > mesh.nx || py > mesh.ny)
        throw std::invalid_argument("partition_geometric: invalid subdomain grid");
    Partition p;
    p.n_subdomains = px * py;
    p.owner.resize(mesh.cells.size());
    for (index_t cy = 0; cy < mesh.ny; ++cy)
        for (index_t cx = 0; cx < mesh.nx; ++cx) {
            const index_t sx = cx * px / mesh.nx;
            const index_t sy = cy * py / mesh.ny;
            p.owner[static_cast<std::size_t>(cy * mesh.nx + cx)] = sy * px + sx;
        }
    return p;
}

/// Greedy BFS region growing over the graph. Each part absorbs
/// ceil(remaining / parts_left) nodes before the next seed is chosen:
/// the lowest-index unassigned node, or a seeded-random one when seed != 0.
inline Partition partition_graph_greedy(const Graph& graph, index_t n_parts,
                                        unsigned seed = 0) {
    if (n_parts < 1 || n_parts > graph.n)
        throw std::invalid_argument("partition_graph_greedy: invalid part count");
    Partition p;
    p.n_subdomains = n_parts;
    p.owner.assign(static_cast<std::size_t>(graph.n), -1);

    std::mt19937 rng(seed);
    index_t remaining = graph.n;
    index_t next_lowest = 0;
    for (index_t part = 0; part < n_parts; ++part) {
        const index_t parts_left = n_parts - part;
        const index_t target = (remaining + parts_left - 1) / parts_left;
        index_t taken = 0;
        std::deque<index_t> queue;
        while (taken < target) {
            if (queue.empty()) {
                index_t s = -1;
                if (seed != 0) {
                    std::vector<index_t> unassigned;
                    for (index_t v = 0; v < graph.n; ++v)
                        if (p.owner[static_cast<std::size_t>(v)] < 0)
                            unassigned.push_back(v);
                    std::uniform_int_distribution<std::size_t> pick(
                        0, unassigned.size() - 1);
                    s = unassigned[pick(rng)];
                } else {
                    while (p.owner[static_cast<std::size_t>(next_lowest)] >= 0)
                        ++next_lowest;
                    s = next_lowest;
                }
                p.owner[static_cast<std::size_t>(s)] = part;
                ++taken;
                queue.push_back(s);
                continue;
            }
            const index_t v = queue.front();
            queue.pop_front();
            for (index_t e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
                const index_t w = graph.neighbors[static_cast<std::size_t>(e)];
                if (taken >= target) break;
                if (p.owner[static_cast<std::size_t>(w)] < 0) {
                    p.owner[static_cast<std::size_t>(w)] = part;
                    ++taken;
                    queue.push_back(w);
                }
            }
        }
        remaining -= taken;
    }
    return p;
}

namespace detail {

/// k-step BFS closure of the seed set in the graph.
inline std::vector<index_t> bfs_closure(const Graph& g,
                                        const std::vector<index_t>& seeds, int k) {
    std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
    std::deque<index_t> queue;
    for (index_t s : seeds) {
        dist[static_cast<std::size_t>(s)] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        const index_t v = queue.front();
        queue.pop_front();
        if (dist[static_cast<std::size_t>(v)] >= k) continue;
        for (index_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            const index_t w = g.neighbors[static_cast<std::size_t>(e)];
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(w);
            }
        }
    }
    std::vector<index_t> out;
    for (index_t v = 0; v < g.n; ++v)
        if (dist[static_cast<std::size_t>(v)] >= 0) out.push_back(v);
    return out;
}

inline void finalize_multiplicity_and_owners(OverlappingDecomposition& d) {
    d.multiplicity.assign(static_cast<std::size_t>(d.n_dofs), 0);
    for (const auto& vi : d.dofs)
        for (index_t dof : vi) ++d.multiplicity[static_cast<std::size_t>(dof)];
    d.owned_dofs.assign(static_cast<std::size_t>(d.n_subdomains), {});
    for (index_t dof = 0; dof < d.n_dofs; ++dof)
        d.owned_dofs[static_cast<std::size_t>(d.dof_owner[static_cast<std::size_t>(dof)])]
            .push_back(dof);
}

}  // namespace detail

namespace detail {

/// Element adjacency through shared dofs (vertex adjacency for Q1). Layer
/// growth on this graph keeps patches simply shaped at subdomain cross
/// points: with edge-only adjacency a re-entrant staircase corner is a
/// patch-boundary dof of every neighboring subdomain at once, which makes
/// the interior Dirichlet extraction singular there. One vertex layer
/// around an owned dof always contains all its incident elements, so for
/// k >= 1 every free dof is interior to at least one patch.
inline Graph vertex_adjacency_graph(const DofMap& dofmap, index_t n_dofs) {
    std::vector<std::vector<index_t>> cells_of_dof(static_cast<std::size_t>(n_dofs));
    for (std::size_t e = 0; e < dofmap.cell_dofs.size(); ++e)
        for (index_t dof : dofmap.cell_dofs[e])
            cells_of_dof[static_cast<std::size_t>(dof)].push_back(
                static_cast<index_t>(e));
    std::vector<std::pair<index_t, index_t>> edges;
    for (const auto& cells : cells_of_dof)
        for (std::size_t a = 0; a < cells.size(); ++a)
            for (std::size_t b = a + 1; b < cells.size(); ++b)
                edges.emplace_back(cells[a], cells[b]);
    return graph_from_edges(static_cast<index_t>(dofmap.cell_dofs.size()),
                            std::move(edges));
}

}  // namespace detail

/// Extend an element-based partition by k layers of elements (elements
/// sharing at least one dof count as adjacent) and derive dof, interface,
/// and ownership sets.
inline OverlappingDecomposition extend_overlap_elements(const Partition& partition,
                                                        const Graph& dual, int k,
                                                        const DofMap& dofmap,
                                                        const Mesh& mesh) {
    if (k < 0) throw std::invalid_argument("extend_overlap_elements: k < 0");
    if (static_cast<index_t>(partition.owner.size()) != dual.n)
        throw std::invalid_argument("extend_overlap_elements: partition/graph mismatch");

    OverlappingDecomposition d;
    d.n_subdomains = partition.n_subdomains;
    d.n_dofs = dofmap.n_dofs;
    d.k = k;
    d.h = mesh.h();
    d.delta = k * d.h;
    d.element_based = true;
    d.elements.resize(static_cast<std::size_t>(d.n_subdomains));
    d.dofs.resize(static_cast<std::size_t>(d.n_subdomains));
    d.interface_dofs.resize(static_cast<std::size_t>(d.n_subdomains));
    d.subdomain_diameter.resize(static_cast<std::size_t>(d.n_subdomains));

    std::vector<std::vector<index_t>> original(static_cast<std::size_t>(d.n_subdomains));
    for (std::size_t e = 0; e < partition.owner.size(); ++e)
        original[static_cast<std::size_t>(partition.owner[e])].push_back(
            static_cast<index_t>(e));

    // Unique owner: lowest subdomain id among those whose original element
    // set contains an incident element.
    d.dof_owner.assign(static_cast<std::size_t>(d.n_dofs),
                       std::numeric_limits<index_t>::max());
    for (index_t i = 0; i < d.n_subdomains; ++i)
        for (index_t e : original[static_cast<std::size_t>(i)])
            for (index_t dof : dofmap.cell_dofs[static_cast<std::size_t>(e)])
                d.dof_owner[static_cast<std::size_t>(dof)] =
                    std::min(d.dof_owner[static_cast<std::size_t>(dof)], i);

    const std::vector<index_t> global_bdry = boundary_vertices(mesh);
    const Graph adjacency = detail::vertex_adjacency_graph(dofmap, d.n_dofs);

    for (index_t i = 0; i < d.n_subdomains; ++i) {
        if (original[static_cast<std::size_t>(i)].empty())
            throw std::invalid_argument("extend_overlap_elements: empty subdomain");
        auto& Ei = d.elements[static_cast<std::size_t>(i)];
        Ei = detail::bfs_closure(adjacency, original[static_cast<std::size_t>(i)], k);

        auto& Vi = d.dofs[static_cast<std::size_t>(i)];
        for (index_t e : Ei)
            for (index_t dof : dofmap.cell_dofs[static_cast<std::size_t>(e)])
                Vi.push_back(dof);
        std::sort(Vi.begin(), Vi.end());
        Vi.erase(std::unique(Vi.begin(), Vi.end()), Vi.end());

        // Patch boundary: edges seen by exactly one element of E_i'.
        std::map<std::uint64_t, std::pair<index_t, index_t>> once;
        for (index_t e : Ei) {
            const auto& cd = dofmap.cell_dofs[static_cast<std::size_t>(e)];
            for (int s = 0; s < 4; ++s) {
                const auto key = detail::edge_key(cd[s], cd[(s + 1) % 4]);
                auto it = once.find(key);
                if (it == once.end())
                    once.emplace(key, std::make_pair(cd[s], cd[(s + 1) % 4]));
                else
                    once.erase(it);
            }
        }
        std::vector<index_t> bdry;
        for (const auto& [key, verts] : once) {
            bdry.push_back(verts.first);
            bdry.push_back(verts.second);
        }
        std::sort(bdry.begin(), bdry.end());
        bdry.erase(std::unique(bdry.begin(), bdry.end()), bdry.end());
        std::set_difference(bdry.begin(), bdry.end(), global_bdry.begin(),
                            global_bdry.end(),
                            std::back_inserter(d.interface_dofs[static_cast<std::size_t>(i)]));

        // H_i from the non-overlapping subdomain bounding box.
        double x0 = std::numeric_limits<double>::max(), x1 = -x0;
        double y0 = x0, y1 = -x0;
        for (index_t e : original[static_cast<std::size_t>(i)])
            for (index_t v : mesh.cells[static_cast<std::size_t>(e)]) {
                const Point& pt = mesh.vertices[static_cast<std::size_t>(v)];
                x0 = std::min(x0, pt.x);
                x1 = std::max(x1, pt.x);
                y0 = std::min(y0, pt.y);
                y1 = std::max(y1, pt.y);
            }
        d.subdomain_diameter[static_cast<std::size_t>(i)] = std::max(x1 - x0, y1 - y0);
    }

    detail::finalize_multiplicity_and_owners(d);
    return d;
}

/// Fully algebraic variant: extend a node-based partition by k layers of
/// adjacent dofs in the node graph. No element sets are produced.
inline OverlappingDecomposition extend_overlap_nodes(
    const Partition& node_partition, const Graph& nodes, int k,
    const std::vector<Point>* dof_coords = nullptr) {
    if (k < 0) throw std::invalid_argument("extend_overlap_nodes: k < 0");
    if (static_cast<index_t>(node_partition.owner.size()) != nodes.n)
        throw std::invalid_argument("extend_overlap_nodes: partition/graph mismatch");

    OverlappingDecomposition d;
    d.n_subdomains = node_partition.n_subdomains;
    d.n_dofs = nodes.n;
    d.k = k;
    d.element_based = false;
    d.dofs.resize(static_cast<std::size_t>(d.n_subdomains));
    d.interface_dofs.resize(static_cast<std::size_t>(d.n_subdomains));
    d.subdomain_diameter.assign(static_cast<std::size_t>(d.n_subdomains), 0.0);
    d.dof_owner = node_partition.owner;

    std::vector<std::vector<index_t>> owned(static_cast<std::size_t>(d.n_subdomains));
    for (index_t dof = 0; dof < d.n_dofs; ++dof)
        owned[static_cast<std::size_t>(node_partition.owner[static_cast<std::size_t>(dof)])]
            .push_back(dof);

    std::vector<char> in_vi(static_cast<std::size_t>(d.n_dofs), 0);
    for (index_t i = 0; i < d.n_subdomains; ++i) {
        if (owned[static_cast<std::size_t>(i)].empty())
            throw std::invalid_argument("extend_overlap_nodes: empty subdomain");
        auto& Vi = d.dofs[static_cast<std::size_t>(i)];
        Vi = detail::bfs_closure(nodes, owned[static_cast<std::size_t>(i)], k);

        // Discrete interface: dofs of V_i with a node-graph neighbor outside.
        std::fill(in_vi.begin(), in_vi.end(), 0);
        for (index_t dof : Vi) in_vi[static_cast<std::size_t>(dof)] = 1;
        for (index_t dof : Vi)
            for (index_t e = nodes.offsets[dof]; e < nodes.offsets[dof + 1]; ++e)
                if (!in_vi[static_cast<std::size_t>(
                        nodes.neighbors[static_cast<std::size_t>(e)])]) {
                    d.interface_dofs[static_cast<std::size_t>(i)].push_back(dof);
                    break;
                }

        if (dof_coords) {
            double x0 = std::numeric_limits<double>::max(), x1 = -x0;
            double y0 = x0, y1 = -x0;
            for (index_t dof : owned[static_cast<std::size_t>(i)]) {
                const Point& pt = (*dof_coords)[static_cast<std::size_t>(dof)];
                x0 = std::min(x0, pt.x);
                x1 = std::max(x1, pt.x);
                y0 = std::min(y0, pt.y);
                y1 = std::max(y1, pt.y);
            }
            d.subdomain_diameter[static_cast<std::size_t>(i)] = std::max(x1 - x0, y1 - y0);
        }
    }

    detail::finalize_multiplicity_and_owners(d);
    return d;
}

inline RestrictionMap restriction(const OverlappingDecomposition& decomp, index_t i) {
    return RestrictionMap{i, decomp.n_dofs, decomp.dofs[static_cast<std::size_t>(i)]};
}

/// D_i diagonals: restricted mode is binary on unique-owner dofs,
/// multiplicity mode scales by inverse multiplicity. Both satisfy
/// sum_i P_i D_i R_i = I.
inline std::vector<ScalingVector> scalings(const OverlappingDecomposition& decomp,
                                           ScalingMode mode) {
    std::vector<ScalingVector> out(static_cast<std::size_t>(decomp.n_subdomains));
    for (index_t i = 0; i < decomp.n_subdomains; ++i) {
        auto& sv = out[static_cast<std::size_t>(i)];
        sv.subdomain = i;
        const auto& Vi = decomp.dofs[static_cast<std::size_t>(i)];
        sv.weights.resize(Vi.size());
        for (std::size_t l = 0; l < Vi.size(); ++l) {
            const index_t dof = Vi[l];
            if (mode == ScalingMode::restricted)
                sv.weights[l] =
                    decomp.dof_owner[static_cast<std::size_t>(dof)] == i ? 1.0 : 0.0;
            else
                sv.weights[l] =
                    1.0 / static_cast<double>(decomp.multiplicity[static_cast<std::size_t>(dof)]);
        }
    }
    return out;
}

inline const std::vector<index_t>& unique_owner_assignment(
    const OverlappingDecomposition& decomp) {
    return decomp.dof_owner;
}

}  // namespace schwarzdd

#endif
