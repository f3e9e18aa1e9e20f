#ifndef SCHWARZDD_MESH_HPP
#define SCHWARZDD_MESH_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparse.hpp"
#include "types.hpp"

namespace schwarzdd {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Named boundary marks per rectangle side.
struct SideMarks {
    std::string bottom = "boundary";  // y = 0
    std::string right = "boundary";   // x = lx
    std::string top = "boundary";     // y = ly
    std::string left = "boundary";    // x = 0
};

/// Boundary edge of a quad cell. Local edge e runs from cell vertex e to
/// vertex (e+1)%4 in counterclockwise order.
struct BoundaryEdge {
    index_t cell = 0;
    int local_edge = 0;
    index_t v0 = 0;
    index_t v1 = 0;
    std::string mark;
};

/// Structured quadrilateral triangulation of a rectangle.
/// Vertices are numbered lexicographically, x fastest.
struct Mesh {
    index_t nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0;
    std::vector<Point> vertices;
    std::vector<std::array<index_t, 4>> cells;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;

    double h() const {
        return std::max(lx / static_cast<double>(nx), ly / static_cast<double>(ny));
    }
};

/// Undirected graph in CSR adjacency form, no self-loops.
struct Graph {
    index_t n = 0;
    std::vector<index_t> offsets;
    std::vector<index_t> neighbors;

    index_t degree(index_t i) const { return offsets[i + 1] - offsets[i]; }
    index_t n_edges() const { return static_cast<index_t>(neighbors.size()) / 2; }
};

/// Build a CSR graph from an undirected edge list; symmetrizes,
/// deduplicates, and drops self-loops.
inline Graph graph_from_edges(index_t n, std::vector<std::pair<index_t, index_t>> edges) {
    std::vector<std::pair<index_t, index_t>> dir;
    dir.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw std::invalid_argument("graph_from_edges: node out of range");
        if (a == b) continue;
        dir.emplace_back(a, b);
        dir.emplace_back(b, a);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    Graph g;
    g.n = n;
    g.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    g.neighbors.reserve(dir.size());
    for (auto [a, b] : dir) {
        g.neighbors.push_back(b);
        ++g.offsets[static_cast<std::size_t>(a) + 1];
    }
    for (index_t i = 0; i < n; ++i)
        g.offsets[static_cast<std::size_t>(i) + 1] += g.offsets[static_cast<std::size_t>(i)];
    return g;
}

/// Q1 degree-of-freedom enumeration: one dof per mesh vertex.
struct DofMap {
    index_t n_dofs = 0;
    std::vector<std::array<index_t, 4>> cell_dofs;
    std::vector<Point> dof_coords;
};

/// Triangulation of one subdomain with global-to-local maps. Interface
/// edges lie on the subdomain boundary but not on the global boundary.
struct LocalMesh {
    std::vector<Point> vertices;
    std::vector<std::array<index_t, 4>> cells;  // local vertex ids
    std::vector<index_t> global_cell_ids;
    std::vector<index_t> global_dof_of_local_dof;  // = global vertex ids (Q1)
    std::vector<BoundaryEdge> marked_boundary_edges;  // on the global boundary
    std::vector<BoundaryEdge> interface_edges;        // mark is empty

    index_t n_dofs() const { return static_cast<index_t>(vertices.size()); }

    /// Inverse of global_dof_of_local_dof; -1 for dofs outside the subdomain.
    std::vector<index_t> local_dof_of_global(index_t n_global) const {
        std::vector<index_t> inv(static_cast<std::size_t>(n_global), -1);
        for (std::size_t l = 0; l < global_dof_of_local_dof.size(); ++l)
            inv[static_cast<std::size_t>(global_dof_of_local_dof[l])] =
                static_cast<index_t>(l);
        return inv;
    }
};

inline Mesh structured_quad_mesh(index_t nx, index_t ny, double lx, double ly,
                                 const SideMarks& marks = SideMarks{}) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("structured_quad_mesh: element counts must be >= 1");
    if (lx <= 0.0 || ly <= 0.0)
        throw std::invalid_argument("structured_quad_mesh: extents must be positive");

    Mesh m;
    m.nx = nx;
    m.ny = ny;
    m.lx = lx;
    m.ly = ly;
    const double hx = lx / static_cast<double>(nx);
    const double hy = ly / static_cast<double>(ny);
    m.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (index_t j = 0; j <= ny; ++j)
        for (index_t i = 0; i <= nx; ++i)
            m.vertices.push_back({i * hx, j * hy});

    auto vid = [nx](index_t i, index_t j) { return j * (nx + 1) + i; };
    m.cells.reserve(static_cast<std::size_t>(nx * ny));
    for (index_t cy = 0; cy < ny; ++cy)
        for (index_t cx = 0; cx < nx; ++cx)
            m.cells.push_back({vid(cx, cy), vid(cx + 1, cy), vid(cx + 1, cy + 1),
                               vid(cx, cy + 1)});

    auto cid = [nx](index_t cx, index_t cy) { return cy * nx + cx; };
    for (index_t cx = 0; cx < nx; ++cx) {
        m.boundary_edges.push_back(
            {cid(cx, 0), 0, vid(cx, 0), vid(cx + 1, 0), marks.bottom});
        m.boundary_edges.push_back(
            {cid(cx, ny - 1), 2, vid(cx + 1, ny), vid(cx, ny), marks.top});
    }
    for (index_t cy = 0; cy < ny; ++cy) {
        m.boundary_edges.push_back(
            {cid(nx - 1, cy), 1, vid(nx, cy), vid(nx, cy + 1), marks.right});
        m.boundary_edges.push_back(
            {cid(0, cy), 3, vid(0, cy + 1), vid(0, cy), marks.left});
    }
    return m;
}

namespace detail {
inline std::uint64_t edge_key(index_t a, index_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}
}  // namespace detail

/// Elements are graph nodes; connected when they share a mesh edge.
inline Graph dual_graph(const Mesh& mesh) {
    std::unordered_map<std::uint64_t, index_t> first_cell;
    std::vector<std::pair<index_t, index_t>> edges;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& cell = mesh.cells[c];
        for (int e = 0; e < 4; ++e) {
            const auto key = detail::edge_key(cell[e], cell[(e + 1) % 4]);
            auto [it, inserted] = first_cell.emplace(key, static_cast<index_t>(c));
            if (!inserted)
                edges.emplace_back(it->second, static_cast<index_t>(c));
        }
    }
    return graph_from_edges(static_cast<index_t>(mesh.cells.size()), std::move(edges));
}

/// Adjacency from the sparsity pattern of A: edge (i,j) iff A[i,j] != 0
/// or A[j,i] != 0, i != j. Explicit stored zeros do not create edges.
template <typename Scalar>
Graph node_graph(const SparseMatrix<Scalar>& A) {
    std::vector<std::pair<index_t, index_t>> edges;
    for (index_t i = 0; i < A.n_rows; ++i)
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            const index_t j = A.col_indices[static_cast<std::size_t>(k)];
            if (j != i && A.values[static_cast<std::size_t>(k)] != Scalar{})
                edges.emplace_back(i, j);
        }
    return graph_from_edges(std::max(A.n_rows, A.n_cols), std::move(edges));
}

inline DofMap q1_dof_map(const Mesh& mesh) {
    DofMap dm;
    dm.n_dofs = static_cast<index_t>(mesh.vertices.size());
    dm.cell_dofs = mesh.cells;
    dm.dof_coords = mesh.vertices;
    return dm;
}

/// Global boundary vertex set (sorted).
inline std::vector<index_t> boundary_vertices(const Mesh& mesh) {
    std::vector<index_t> verts;
    for (const auto& be : mesh.boundary_edges) {
        verts.push_back(be.v0);
        verts.push_back(be.v1);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    return verts;
}

inline LocalMesh build_local_mesh(const Mesh& mesh,
                                  const std::vector<index_t>& element_set) {
    if (element_set.empty())
        throw std::invalid_argument("build_local_mesh: empty element set");

    LocalMesh lm;
    lm.global_cell_ids = element_set;
    std::sort(lm.global_cell_ids.begin(), lm.global_cell_ids.end());

    // Compact vertex renumbering in ascending global order.
    for (index_t c : lm.global_cell_ids)
        for (index_t v : mesh.cells[static_cast<std::size_t>(c)])
            lm.global_dof_of_local_dof.push_back(v);
    std::sort(lm.global_dof_of_local_dof.begin(), lm.global_dof_of_local_dof.end());
    lm.global_dof_of_local_dof.erase(
        std::unique(lm.global_dof_of_local_dof.begin(), lm.global_dof_of_local_dof.end()),
        lm.global_dof_of_local_dof.end());

    std::unordered_map<index_t, index_t> to_local;
    for (std::size_t l = 0; l < lm.global_dof_of_local_dof.size(); ++l) {
        to_local[lm.global_dof_of_local_dof[l]] = static_cast<index_t>(l);
        lm.vertices.push_back(
            mesh.vertices[static_cast<std::size_t>(lm.global_dof_of_local_dof[l])]);
    }
    for (index_t c : lm.global_cell_ids) {
        const auto& cell = mesh.cells[static_cast<std::size_t>(c)];
        lm.cells.push_back(
            {to_local[cell[0]], to_local[cell[1]], to_local[cell[2]], to_local[cell[3]]});
    }

    // Mark lookup for global boundary edges (keys in global vertex ids).
    std::unordered_map<std::uint64_t, const BoundaryEdge*> global_marks;
    for (const auto& be : mesh.boundary_edges)
        global_marks[detail::edge_key(be.v0, be.v1)] = &be;

    // Edges seen by exactly one local cell form the subdomain boundary.
    std::map<std::uint64_t, std::pair<index_t, int>> once;  // key -> (cell, edge)
    for (std::size_t lc = 0; lc < lm.cells.size(); ++lc) {
        const auto& cell = lm.cells[lc];
        for (int e = 0; e < 4; ++e) {
            const auto key = detail::edge_key(cell[e], cell[(e + 1) % 4]);
            auto it = once.find(key);
            if (it == once.end())
                once.emplace(key, std::make_pair(static_cast<index_t>(lc), e));
            else
                once.erase(it);
        }
    }
    for (const auto& [key, where] : once) {
        const auto [lc, e] = where;
        const auto& cell = lm.cells[static_cast<std::size_t>(lc)];
        const index_t lv0 = cell[e], lv1 = cell[(e + 1) % 4];
        const auto gkey = detail::edge_key(lm.global_dof_of_local_dof[lv0],
                                           lm.global_dof_of_local_dof[lv1]);
        auto git = global_marks.find(gkey);
        BoundaryEdge be{lc, e, lv0, lv1, git != global_marks.end() ? git->second->mark
                                                                   : std::string{}};
        if (git != global_marks.end())
            lm.marked_boundary_edges.push_back(be);
        else
            lm.interface_edges.push_back(be);
    }
    return lm;
}

}  // namespace schwarzdd

#endif
