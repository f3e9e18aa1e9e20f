#ifndef SCHWARZDD_KRYLOV_HPP
#define SCHWARZDD_KRYLOV_HPP

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "operators.hpp"
#include "types.hpp"

namespace schwarzdd {

struct SolveStats {
    int iterations = 0;
    std::vector<double> residual_history;  // relative residual per iteration
    bool converged = false;
    double wall_time = 0.0;  // seconds
    std::vector<double> lanczos_diag;     // CG only
    std::vector<double> lanczos_offdiag;  // CG only
};

namespace detail {

template <typename Scalar>
void givens(Scalar a, Scalar b, Scalar& c, Scalar& s, Scalar& r) {
    const double na = scalar_traits<Scalar>::abs(a);
    const double nb = scalar_traits<Scalar>::abs(b);
    if (nb == 0.0) {
        c = Scalar(1.0);
        s = Scalar(0.0);
        r = a;
        return;
    }
    const double t = std::sqrt(na * na + nb * nb);
    c = Scalar(na / t);
    // Complex-capable rotation; reduces to the usual one on the real field.
    const Scalar phase = na == 0.0 ? Scalar(1.0) : a / Scalar(na);
    s = phase * scalar_traits<Scalar>::conj(b) / Scalar(t);
    r = phase * Scalar(t);
}

}  // namespace detail

/// Right-preconditioned GMRES with modified Gram-Schmidt (one
/// reorthogonalization pass when the norm drops by more than 1e3) and
/// Givens-rotation least-squares updates. Zero initial guess. The
/// convergence criterion is the true-residual norm of A x = b.
template <typename Scalar>
std::pair<Vector<Scalar>, SolveStats> gmres(
    const LinearOperator<Scalar>& A, const Vector<Scalar>& b,
    const LinearOperator<Scalar>& M = {}, double tol = 1e-8, int maxit = 1000,
    std::optional<int> restart = std::nullopt) {
    if (tol <= 0.0) throw std::invalid_argument("gmres: tol must be positive");
    const index_t n = A.n;
    if (static_cast<index_t>(b.size()) != n)
        throw std::invalid_argument("gmres: dimension mismatch");
    const auto t0 = std::chrono::steady_clock::now();

    auto precond = [&M](const Vector<Scalar>& v) {
        return M.apply ? M.apply(v) : v;
    };

    SolveStats stats;
    Vector<Scalar> x(static_cast<std::size_t>(n), Scalar{});
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        stats.converged = true;
        stats.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return {x, stats};
    }

    const int m = restart.value_or(maxit);
    bool done = false;
    while (!done && stats.iterations < maxit) {
        // r = b - A x
        Vector<Scalar> r = b;
        if (stats.iterations > 0) {
            const auto ax = A.apply(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
        }
        double beta = norm2(r);
        if (beta / bnorm <= tol && stats.iterations > 0) break;

        std::vector<Vector<Scalar>> V;
        V.push_back(r);
        for (auto& v : V.back()) v /= Scalar(beta);
        std::vector<std::vector<Scalar>> H;  // H[j] holds column j (j+2 entries)
        std::vector<Scalar> cs, sn;
        std::vector<Scalar> g{Scalar(beta)};

        int j = 0;
        for (; j < m && stats.iterations < maxit; ++j) {
            Vector<Scalar> w = A.apply(precond(V[static_cast<std::size_t>(j)]));
            const double wnorm0 = norm2(w);
            std::vector<Scalar> h(static_cast<std::size_t>(j) + 2, Scalar{});
            for (int i = 0; i <= j; ++i) {
                const Scalar hij = dot(V[static_cast<std::size_t>(i)], w);
                h[static_cast<std::size_t>(i)] = hij;
                for (std::size_t l = 0; l < w.size(); ++l)
                    w[l] -= hij * V[static_cast<std::size_t>(i)][l];
            }
            if (norm2(w) < 1e-3 * wnorm0) {
                // Severe cancellation: one reorthogonalization pass.
                for (int i = 0; i <= j; ++i) {
                    const Scalar corr = dot(V[static_cast<std::size_t>(i)], w);
                    h[static_cast<std::size_t>(i)] += corr;
                    for (std::size_t l = 0; l < w.size(); ++l)
                        w[l] -= corr * V[static_cast<std::size_t>(i)][l];
                }
            }
            const double hlast = norm2(w);
            h[static_cast<std::size_t>(j) + 1] = Scalar(hlast);
            const bool breakdown = hlast <= 1e-14 * bnorm;
            if (!breakdown) {
                V.push_back(w);
                for (auto& v : V.back()) v /= Scalar(hlast);
            }

            // Apply stored rotations, then the new one.
            for (int i = 0; i < j; ++i) {
                const Scalar t1 = cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] +
                                  sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1];
                const Scalar t2 =
                    -scalar_traits<Scalar>::conj(sn[static_cast<std::size_t>(i)]) *
                        h[static_cast<std::size_t>(i)] +
                    scalar_traits<Scalar>::conj(cs[static_cast<std::size_t>(i)]) *
                        h[static_cast<std::size_t>(i) + 1];
                h[static_cast<std::size_t>(i)] = t1;
                h[static_cast<std::size_t>(i) + 1] = t2;
            }
            Scalar c, s, rr;
            detail::givens(h[static_cast<std::size_t>(j)], h[static_cast<std::size_t>(j) + 1],
                           c, s, rr);
            cs.push_back(c);
            sn.push_back(s);
            h[static_cast<std::size_t>(j)] = rr;
            h[static_cast<std::size_t>(j) + 1] = Scalar{};
            const Scalar gj = g[static_cast<std::size_t>(j)];
            g.push_back(-scalar_traits<Scalar>::conj(s) * gj);
            g[static_cast<std::size_t>(j)] = c * gj;
            H.push_back(std::move(h));

            ++stats.iterations;
            const double rel =
                scalar_traits<Scalar>::abs(g[static_cast<std::size_t>(j) + 1]) / bnorm;
            stats.residual_history.push_back(rel);
            if (rel <= tol || breakdown) {
                ++j;
                done = true;
                break;
            }
        }

        // Back substitution for y, then x += M^{-1} V y.
        std::vector<Scalar> y(static_cast<std::size_t>(j));
        for (int i = j - 1; i >= 0; --i) {
            Scalar s = g[static_cast<std::size_t>(i)];
            for (int l = i + 1; l < j; ++l)
                s -= H[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] *
                     y[static_cast<std::size_t>(l)];
            y[static_cast<std::size_t>(i)] = s / H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        }
        Vector<Scalar> update(static_cast<std::size_t>(n), Scalar{});
        for (int i = 0; i < j; ++i)
            for (std::size_t l = 0; l < update.size(); ++l)
                update[l] += y[static_cast<std::size_t>(i)] * V[static_cast<std::size_t>(i)][l];
        const auto mu = precond(update);
        for (std::size_t l = 0; l < x.size(); ++l) x[l] += mu[l];

        if (!done && restart.has_value()) continue;
        if (!done) break;  // maxit exhausted within a full cycle
    }

    stats.converged = !stats.residual_history.empty() &&
                      stats.residual_history.back() <= tol;
    stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {x, stats};
}

struct NonSpdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Preconditioned conjugate gradients for Hermitian positive definite A
/// and M. Records the Lanczos tridiagonal from the CG scalars.
template <typename Scalar>
std::pair<Vector<Scalar>, SolveStats> pcg(const LinearOperator<Scalar>& A,
                                          const Vector<Scalar>& b,
                                          const LinearOperator<Scalar>& M = {},
                                          double tol = 1e-8, int maxit = 1000) {
    if (tol <= 0.0) throw std::invalid_argument("pcg: tol must be positive");
    const index_t n = A.n;
    if (static_cast<index_t>(b.size()) != n)
        throw std::invalid_argument("pcg: dimension mismatch");
    const auto t0 = std::chrono::steady_clock::now();

    auto precond = [&M](const Vector<Scalar>& v) {
        return M.apply ? M.apply(v) : v;
    };

    SolveStats stats;
    Vector<Scalar> x(static_cast<std::size_t>(n), Scalar{});
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        stats.converged = true;
        return {x, stats};
    }

    Vector<Scalar> r = b;
    Vector<Scalar> z = precond(r);
    Vector<Scalar> p = z;
    Scalar rz = dot(r, z);
    double alpha_prev = 0.0, beta_prev = 0.0;

    for (int it = 0; it < maxit; ++it) {
        const auto Ap = A.apply(p);
        const Scalar pAp = dot(p, Ap);
        if (scalar_traits<Scalar>::real(pAp) <= 0.0)
            throw NonSpdError("pcg: non-positive curvature, operator is not SPD");
        const Scalar alpha = rz / pAp;
        const double a = scalar_traits<Scalar>::real(alpha);

        // Lanczos tridiagonal from the CG recurrence scalars.
        if (it == 0)
            stats.lanczos_diag.push_back(1.0 / a);
        else
            stats.lanczos_diag.push_back(1.0 / a + beta_prev / alpha_prev);

        for (std::size_t l = 0; l < x.size(); ++l) x[l] += alpha * p[l];
        for (std::size_t l = 0; l < r.size(); ++l) r[l] -= alpha * Ap[l];
        ++stats.iterations;
        const double rel = norm2(r) / bnorm;
        stats.residual_history.push_back(rel);
        if (rel <= tol) {
            stats.converged = true;
            break;
        }

        z = precond(r);
        const Scalar rz_next = dot(r, z);
        const Scalar beta = rz_next / rz;
        const double bb = scalar_traits<Scalar>::real(beta);
        stats.lanczos_offdiag.push_back(std::sqrt(std::max(0.0, bb)) / a);
        for (std::size_t l = 0; l < p.size(); ++l) p[l] = z[l] + beta * p[l];
        rz = rz_next;
        alpha_prev = a;
        beta_prev = bb;
    }

    stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {x, stats};
}

/// Condition-number estimate from the CG Lanczos tridiagonal: ratio of
/// extreme eigenvalues.
inline double estimate_condition(const SolveStats& stats) {
    const auto& d = stats.lanczos_diag;
    const auto& e = stats.lanczos_offdiag;
    if (d.empty()) throw std::invalid_argument("estimate_condition: no Lanczos data");
    if (d.size() == 1) return 1.0;  // single Ritz value
    const int k = static_cast<int>(d.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) T(i, i) = d[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < k; ++i) {
        T(i, i + 1) = e[static_cast<std::size_t>(i)];
        T(i + 1, i) = e[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const auto& ev = es.eigenvalues();
    return ev(k - 1) / ev(0);
}

}  // namespace schwarzdd

#endif
