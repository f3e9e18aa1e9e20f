#ifndef SCHWARZDD_TYPES_HPP
#define SCHWARZDD_TYPES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace schwarzdd {

using index_t = std::int32_t;

template <typename Scalar>
using Vector = std::vector<Scalar>;

/// Field traits shared by the real and complex double-precision fields.
template <typename Scalar>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    using real_type = double;
    static constexpr bool is_complex = false;
    static double conj(double x) { return x; }
    static double real(double x) { return x; }
    static double abs(double x) { return std::abs(x); }
};

template <>
struct scalar_traits<std::complex<double>> {
    using real_type = double;
    static constexpr bool is_complex = true;
    static std::complex<double> conj(std::complex<double> x) { return std::conj(x); }
    static double real(std::complex<double> x) { return x.real(); }
    static double abs(std::complex<double> x) { return std::abs(x); }
};

/// Conjugated inner product <x, y> = sum conj(x_i) y_i.
template <typename Scalar>
Scalar dot(const Vector<Scalar>& x, const Vector<Scalar>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("dot: dimension mismatch");
    Scalar s{};
    for (std::size_t i = 0; i < x.size(); ++i)
        s += scalar_traits<Scalar>::conj(x[i]) * y[i];
    return s;
}

template <typename Scalar>
double norm2(const Vector<Scalar>& x) {
    double s = 0.0;
    for (const auto& v : x) {
        double a = scalar_traits<Scalar>::abs(v);
        s += a * a;
    }
    return std::sqrt(s);
}

template <typename Scalar>
double norm_inf(const Vector<Scalar>& x) {
    double m = 0.0;
    for (const auto& v : x) m = std::max(m, scalar_traits<Scalar>::abs(v));
    return m;
}

template <typename Scalar>
void axpy(Scalar alpha, const Vector<Scalar>& x, Vector<Scalar>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace schwarzdd

#endif
