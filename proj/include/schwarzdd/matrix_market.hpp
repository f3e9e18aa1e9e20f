#ifndef SCHWARZDD_MATRIX_MARKET_HPP
#define SCHWARZDD_MATRIX_MARKET_HPP

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "sparse.hpp"

namespace schwarzdd {

/// MatrixMarket coordinate format (ASCII, 1-based), general symmetry.
template <typename Scalar>
void write_matrix_market(const SparseMatrix<Scalar>& A, std::ostream& os) {
    constexpr bool cplx = scalar_traits<Scalar>::is_complex;
    os << "%%MatrixMarket matrix coordinate " << (cplx ? "complex" : "real")
       << " general\n";
    os << A.n_rows << " " << A.n_cols << " " << A.nnz() << "\n";
    os << std::setprecision(17);
    for (index_t i = 0; i < A.n_rows; ++i) {
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            os << (i + 1) << " " << (A.col_indices[static_cast<std::size_t>(k)] + 1);
            if constexpr (cplx) {
                const auto v = A.values[static_cast<std::size_t>(k)];
                os << " " << v.real() << " " << v.imag() << "\n";
            } else {
                os << " " << A.values[static_cast<std::size_t>(k)] << "\n";
            }
        }
    }
}

template <typename Scalar>
void write_matrix_market(const SparseMatrix<Scalar>& A, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_matrix_market: cannot open " + path);
    write_matrix_market(A, os);
}

template <typename Scalar>
SparseMatrix<Scalar> read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw std::runtime_error("read_matrix_market: missing header");
    const bool cplx = line.find("complex") != std::string::npos;
    if (cplx && !scalar_traits<Scalar>::is_complex)
        throw std::runtime_error("read_matrix_market: complex file, real scalar");
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream head(line);
    index_t n_rows, n_cols, nnz;
    head >> n_rows >> n_cols >> nnz;
    std::vector<Triplet<Scalar>> trips;
    trips.reserve(static_cast<std::size_t>(nnz));
    for (index_t k = 0; k < nnz; ++k) {
        if (!std::getline(is, line))
            throw std::runtime_error("read_matrix_market: truncated file");
        std::istringstream row(line);
        index_t i, j;
        row >> i >> j;
        if constexpr (scalar_traits<Scalar>::is_complex) {
            double re, im = 0.0;
            row >> re;
            if (cplx) row >> im;
            trips.emplace_back(i - 1, j - 1, Scalar(re, im));
        } else {
            double re;
            row >> re;
            trips.emplace_back(i - 1, j - 1, re);
        }
    }
    return csr_from_triplets(std::move(trips), n_rows, n_cols);
}

template <typename Scalar>
SparseMatrix<Scalar> read_matrix_market(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_matrix_market: cannot open " + path);
    return read_matrix_market<Scalar>(is);
}

}  // namespace schwarzdd

#endif
