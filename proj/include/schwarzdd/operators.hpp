#ifndef SCHWARZDD_OPERATORS_HPP
#define SCHWARZDD_OPERATORS_HPP

#include <functional>
#include <stdexcept>
#include <vector>

#include "sparse.hpp"
#include "types.hpp"

namespace schwarzdd {

template <typename Scalar>
struct LinearOperator {
    index_t n = 0;
    std::function<Vector<Scalar>(const Vector<Scalar>&)> apply;

    Vector<Scalar> operator()(const Vector<Scalar>& x) const { return apply(x); }
};

template <typename Scalar>
LinearOperator<Scalar> as_operator(const SparseMatrix<Scalar>& A) {
    return {A.n_rows, [&A](const Vector<Scalar>& x) { return spmv(A, x); }};
}

enum class CombineMode { additive, multiplicative };

/// Combine Schwarz operators: additive sum, or I - prod(I - Q_i) with the
/// product applied right-to-left in listed order.
template <typename Scalar>
LinearOperator<Scalar> combine(std::vector<LinearOperator<Scalar>> ops,
                               CombineMode mode) {
    if (ops.empty()) throw std::invalid_argument("combine: no operators");
    const index_t n = ops.front().n;
    for (const auto& op : ops)
        if (op.n != n) throw std::invalid_argument("combine: dimension mismatch");

    if (mode == CombineMode::additive) {
        return {n, [ops = std::move(ops)](const Vector<Scalar>& x) {
                    Vector<Scalar> y(x.size(), Scalar{});
                    for (const auto& op : ops) {
                        const auto t = op.apply(x);
                        for (std::size_t i = 0; i < y.size(); ++i) y[i] += t[i];
                    }
                    return y;
                }};
    }
    return {n, [ops = std::move(ops)](const Vector<Scalar>& x) {
                Vector<Scalar> t = x;
                for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
                    const auto qt = it->apply(t);
                    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= qt[i];
                }
                Vector<Scalar> y(x.size());
                for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - t[i];
                return y;
            }};
}

}  // namespace schwarzdd

#endif
