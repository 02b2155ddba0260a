#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "wedd/error.hpp"
#include "wedd/matrix.hpp"

namespace wedd {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Full singular value decomposition A = U diag(sigma) V^T.
///
/// u is m x m, v is n x n, sigma holds min(m, n) values in non-increasing
/// order. rank_tol is the default rank threshold max(m, n) * eps * sigma_1.
struct SvdFactors {
    Matrix u;
    std::vector<double> sigma;
    Matrix v;
    double rank_tol = 0.0;

    std::size_t rows() const noexcept { return u.rows(); }
    std::size_t cols() const noexcept { return v.rows(); }

    /// Number of singular values strictly above tol.
    std::size_t rank(double tol) const {
        return static_cast<std::size_t>(
            std::count_if(sigma.begin(), sigma.end(), [tol](double s) { return s > tol; }));
    }
    std::size_t rank() const { return rank(rank_tol); }

    double sigma_max() const noexcept { return sigma.empty() ? 0.0 : sigma.front(); }
};

struct SvdOptions {
    std::size_t max_sweeps = 60;
};

namespace detail {

struct JacobiResult {
    Matrix w;                  // A V, columns mutually orthogonal
    Matrix v;                  // accumulated rotations
};

// Hestenes one-sided Jacobi on the columns of a (rows >= cols expected).
// A pair is rotated while |w_i . w_j| > tol * ||w_i|| ||w_j||; a sweep with
// no rotation terminates. Columns with norm at most eps * ||A||_F are
// numerically zero (below any rank tolerance) and are not rotated, otherwise
// exactly parallel columns would keep trading rounding noise forever.
inline JacobiResult one_sided_jacobi(const Matrix& a, const SvdOptions& opts) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    // Column-major working copies for contiguous column access.
    std::vector<double> w(m * n);
    std::vector<double> v(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) w[j * m + i] = a(i, j);
        v[j * n + j] = 1.0;
    }
    const double tol = kEps * std::sqrt(static_cast<double>(std::max<std::size_t>(m, 1)));
    const double negligible = kEps * kEps * [&] {
        double s = 0.0;
        for (double x : w) s += x * x;
        return s;
    }();

    double worst = 0.0;
    bool converged = n < 2;
    for (std::size_t sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
        converged = true;
        worst = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            double* wp = &w[p * m];
            double* vp = &v[p * n];
            for (std::size_t q = p + 1; q < n; ++q) {
                double* wq = &w[q * m];
                double* vq = &v[q * n];
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += wp[i] * wp[i];
                    beta += wq[i] * wq[i];
                    gamma += wp[i] * wq[i];
                }
                if (gamma == 0.0 || alpha <= negligible || beta <= negligible) continue;
                const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
                if (rel <= tol) continue;
                worst = std::max(worst, rel);
                converged = false;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = wp[i], y = wq[i];
                    wp[i] = c * x - s * y;
                    wq[i] = s * x + c * y;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = vp[i], y = vq[i];
                    vp[i] = c * x - s * y;
                    vq[i] = s * x + c * y;
                }
            }
        }
    }
    if (!converged) throw ConvergenceError(opts.max_sweeps, worst);

    JacobiResult out{Matrix(m, n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) out.w(i, j) = w[j * m + i];
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v[j * n + i];
    }
    return out;
}

// Extends the first d orthonormal columns of u (m x d) to an orthonormal
// basis of R^m using Householder QR; the trailing m - d columns of Q span
// the orthogonal complement.
inline Matrix complete_orthonormal(const Matrix& u) {
    const std::size_t m = u.rows();
    const std::size_t d = u.cols();
    Matrix r = u;
    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> h(m, 0.0);
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += r(i, k) * r(i, k);
        norm = std::sqrt(norm);
        const double alpha = r(k, k) > 0 ? -norm : norm;
        for (std::size_t i = k; i < m; ++i) h[i] = r(i, k);
        h[k] -= alpha;
        double hn = 0.0;
        for (std::size_t i = k; i < m; ++i) hn += h[i] * h[i];
        if (hn > 0.0) {
            const double inv = 1.0 / std::sqrt(hn);
            for (std::size_t i = k; i < m; ++i) h[i] *= inv;
            for (std::size_t j = k; j < d; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < m; ++i) dot += h[i] * r(i, j);
                for (std::size_t i = k; i < m; ++i) r(i, j) -= 2.0 * dot * h[i];
            }
        }
        reflectors.push_back(std::move(h));
    }
    // Q = H_0 H_1 ... H_{d-1}; apply to I from the right-most reflector.
    Matrix q = Matrix::identity(m);
    for (std::size_t k = d; k-- > 0;) {
        const auto& h = reflectors[k];
        for (std::size_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += h[i] * q(i, j);
            if (dot == 0.0) continue;
            for (std::size_t i = k; i < m; ++i) q(i, j) -= 2.0 * dot * h[i];
        }
    }
    Matrix full(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) full(i, j) = u(i, j);
        for (std::size_t j = d; j < m; ++j) full(i, j) = q(i, j);
    }
    return full;
}

inline SvdFactors svd_tall(const Matrix& a, const SvdOptions& opts) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    JacobiResult jr = one_sided_jacobi(a, opts);

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) norms[j] = frobenius_norm(jr.w.col(j));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    SvdFactors f;
    f.sigma.resize(n);
    f.v = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        f.sigma[j] = norms[order[j]];
        for (std::size_t i = 0; i < n; ++i) f.v(i, j) = jr.v(i, order[j]);
    }

    // Left vectors from normalized columns while they are numerically
    // meaningful; the remainder comes from an orthonormal completion.
    const double floor = f.sigma.empty() ? 0.0 : f.sigma.front() * kEps * kEps;
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = f.sigma[j];
        if (!(s > floor) || s == 0.0) break;
        std::vector<double> u(m);
        for (std::size_t i = 0; i < m; ++i) u[i] = jr.w(i, order[j]) / s;
        // One re-orthogonalization pass cleans rounding drift.
        for (const auto& prev : cols) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += prev[i] * u[i];
            for (std::size_t i = 0; i < m; ++i) u[i] -= dot * prev[i];
        }
        double un = 0.0;
        for (double x : u) un += x * x;
        un = std::sqrt(un);
        if (un < 0.5) break;
        for (double& x : u) x /= un;
        cols.push_back(std::move(u));
    }
    Matrix thin(m, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < m; ++i) thin(i, j) = cols[j][i];
    f.u = complete_orthonormal(thin);
    return f;
}

} // namespace detail

/// Singular value decomposition by cyclic one-sided Jacobi.
///
/// Deterministic for identical input. Ties among singular values keep the
/// original column order. Throws ConvergenceError after opts.max_sweeps.
inline SvdFactors svd(const Matrix& a, const SvdOptions& opts = {}) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    SvdFactors f;
    if (m >= n) {
        f = detail::svd_tall(a, opts);
    } else {
        SvdFactors t = detail::svd_tall(a.transpose(), opts);
        f.u = std::move(t.v);
        f.v = std::move(t.u);
        f.sigma = std::move(t.sigma);
    }
    f.rank_tol = static_cast<double>(std::max(m, n)) * kEps * f.sigma_max();
    return f;
}

/// Largest singular value.
inline double spectral_norm(const Matrix& a) {
    if (a.empty()) return 0.0;
    return svd(a).sigma_max();
}

} // namespace wedd
