#ifndef SCHWARZDD_SPARSE_HPP
#define SCHWARZDD_SPARSE_HPP

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "types.hpp"

namespace schwarzdd {

/// Compressed-sparse-row matrix over a real or complex double field.
/// Column indices are strictly increasing within each row.
template <typename Scalar>
struct SparseMatrix {
    index_t n_rows = 0;
    index_t n_cols = 0;
    std::vector<index_t> row_offsets;  // length n_rows + 1
    std::vector<index_t> col_indices;
    std::vector<Scalar> values;

    index_t nnz() const { return static_cast<index_t>(values.size()); }

    /// Entry lookup by binary search; zero if not stored.
    Scalar coeff(index_t i, index_t j) const {
        auto first = col_indices.begin() + row_offsets[i];
        auto last = col_indices.begin() + row_offsets[i + 1];
        auto it = std::lower_bound(first, last, j);
        if (it != last && *it == j)
            return values[static_cast<std::size_t>(it - col_indices.begin())];
        return Scalar{};
    }
};

template <typename Scalar>
using Triplet = std::tuple<index_t, index_t, Scalar>;

/// Assemble a CSR matrix from (row, col, value) triplets.
/// Duplicate entries are summed.
template <typename Scalar>
SparseMatrix<Scalar> csr_from_triplets(std::vector<Triplet<Scalar>> triplets,
                                       index_t n_rows, index_t n_cols) {
    for (const auto& [r, c, v] : triplets) {
        if (r < 0 || r >= n_rows || c < 0 || c >= n_cols)
            throw std::invalid_argument("csr_from_triplets: index out of range");
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet<Scalar>& a, const Triplet<Scalar>& b) {
                  if (std::get<0>(a) != std::get<0>(b))
                      return std::get<0>(a) < std::get<0>(b);
                  return std::get<1>(a) < std::get<1>(b);
              });

    SparseMatrix<Scalar> A;
    A.n_rows = n_rows;
    A.n_cols = n_cols;
    A.row_offsets.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
        const index_t r = std::get<0>(triplets[k]);
        const index_t c = std::get<1>(triplets[k]);
        Scalar sum{};
        while (k < triplets.size() && std::get<0>(triplets[k]) == r &&
               std::get<1>(triplets[k]) == c) {
            sum += std::get<2>(triplets[k]);
            ++k;
        }
        A.col_indices.push_back(c);
        A.values.push_back(sum);
        ++A.row_offsets[static_cast<std::size_t>(r) + 1];
    }
    for (index_t i = 0; i < n_rows; ++i)
        A.row_offsets[static_cast<std::size_t>(i) + 1] +=
            A.row_offsets[static_cast<std::size_t>(i)];
    return A;
}

/// y = A x with row-major, ascending-column traversal.
template <typename Scalar>
Vector<Scalar> spmv(const SparseMatrix<Scalar>& A, const Vector<Scalar>& x) {
    if (static_cast<index_t>(x.size()) != A.n_cols)
        throw std::invalid_argument("spmv: dimension mismatch");
    Vector<Scalar> y(static_cast<std::size_t>(A.n_rows), Scalar{});
    for (index_t i = 0; i < A.n_rows; ++i) {
        Scalar sum{};
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            sum += A.values[static_cast<std::size_t>(k)] *
                   x[static_cast<std::size_t>(A.col_indices[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(i)] = sum;
    }
    return y;
}

namespace detail {
inline void check_index_set(const std::vector<index_t>& set, index_t bound,
                            const char* what) {
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (set[k] < 0 || set[k] >= bound)
            throw std::invalid_argument(std::string(what) + ": index out of range");
        if (k > 0 && set[k] <= set[k - 1])
            throw std::invalid_argument(std::string(what) + ": index set not sorted");
    }
}
}  // namespace detail

/// Submatrix A[rows, cols] for sorted index sets; equals R_r A R_c^T with
/// binary restriction matrices.
template <typename Scalar>
SparseMatrix<Scalar> extract_submatrix(const SparseMatrix<Scalar>& A,
                                       const std::vector<index_t>& rows,
                                       const std::vector<index_t>& cols) {
    detail::check_index_set(rows, A.n_rows, "extract_submatrix rows");
    detail::check_index_set(cols, A.n_cols, "extract_submatrix cols");

    std::vector<index_t> col_pos(static_cast<std::size_t>(A.n_cols), -1);
    for (std::size_t l = 0; l < cols.size(); ++l)
        col_pos[static_cast<std::size_t>(cols[l])] = static_cast<index_t>(l);

    SparseMatrix<Scalar> S;
    S.n_rows = static_cast<index_t>(rows.size());
    S.n_cols = static_cast<index_t>(cols.size());
    S.row_offsets.assign(rows.size() + 1, 0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const index_t i = rows[k];
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t lc = col_pos[static_cast<std::size_t>(
                A.col_indices[static_cast<std::size_t>(p)])];
            if (lc >= 0) {
                S.col_indices.push_back(lc);
                S.values.push_back(A.values[static_cast<std::size_t>(p)]);
            }
        }
        S.row_offsets[k + 1] = static_cast<index_t>(S.col_indices.size());
    }
    return S;
}

}  // namespace schwarzdd

#endif
