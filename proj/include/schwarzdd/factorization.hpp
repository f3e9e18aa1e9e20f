#ifndef SCHWARZDD_FACTORIZATION_HPP
#define SCHWARZDD_FACTORIZATION_HPP

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "sparse.hpp"
#include "types.hpp"

namespace schwarzdd {

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sparse LU factorization with partial pivoting and a fill-reducing
/// (column approximate minimum degree) ordering. Solve is reentrant.
template <typename Scalar>
class Factorization {
 public:
    explicit Factorization(const SparseMatrix<Scalar>& A) {
        if (A.n_rows != A.n_cols)
            throw std::invalid_argument("Factorization: matrix not square");
        n_ = A.n_rows;
        Eigen::SparseMatrix<Scalar> M(n_, n_);
        {
            std::vector<Eigen::Triplet<Scalar>> trips;
            trips.reserve(static_cast<std::size_t>(A.nnz()));
            for (index_t i = 0; i < A.n_rows; ++i)
                for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
                    trips.emplace_back(i, A.col_indices[static_cast<std::size_t>(k)],
                                       A.values[static_cast<std::size_t>(k)]);
            M.setFromTriplets(trips.begin(), trips.end());
        }
        lu_ = std::make_shared<Solver>();
        lu_->compute(M);
        if (lu_->info() != Eigen::Success)
            throw SingularMatrixError("Factorization: singular matrix");
    }

    Vector<Scalar> solve(const Vector<Scalar>& b) const {
        if (static_cast<index_t>(b.size()) != n_)
            throw std::invalid_argument("Factorization::solve: dimension mismatch");
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs(n_);
        for (index_t i = 0; i < n_; ++i) rhs[i] = b[static_cast<std::size_t>(i)];
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = lu_->solve(rhs);
        Vector<Scalar> out(static_cast<std::size_t>(n_));
        for (index_t i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = x[i];
        return out;
    }

    index_t size() const { return n_; }

    index_t factor_nnz() const {
        return static_cast<index_t>(lu_->nnzL() + lu_->nnzU());
    }

 private:
    using Solver =
        Eigen::SparseLU<Eigen::SparseMatrix<Scalar>, Eigen::COLAMDOrdering<int>>;
    index_t n_ = 0;
    std::shared_ptr<Solver> lu_;  // shared so preconditioners stay copyable
};

template <typename Scalar>
Factorization<Scalar> factorize(const SparseMatrix<Scalar>& A) {
    return Factorization<Scalar>(A);
}

template <typename Scalar>
Vector<Scalar> solve_factored(const Factorization<Scalar>& F, const Vector<Scalar>& b) {
    return F.solve(b);
}

}  // namespace schwarzdd

#endif
