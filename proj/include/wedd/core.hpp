#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>

#include "wedd/error.hpp"
#include "wedd/matrix.hpp"
#include "wedd/svd.hpp"

namespace wedd {

/// Default tolerance for subspace comparisons.
inline constexpr double kSubspaceTol = 1e-8;

/// Moore-Penrose pseudoinverse from precomputed factors.
///
/// Singular values at or below tol (default max(m, n) * eps * sigma_1)
/// are treated as zero.
inline Matrix pinv(const SvdFactors& f, std::optional<double> tol = std::nullopt) {
    const std::size_t m = f.rows();
    const std::size_t n = f.cols();
    const std::size_t r = f.rank(tol.value_or(f.rank_tol));
    Matrix out(n, m);
    for (std::size_t k = 0; k < r; ++k) {
        const double inv = 1.0 / f.sigma[k];
        for (std::size_t i = 0; i < n; ++i) {
            const double vik = f.v(i, k) * inv;
            if (vik == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) out(i, j) += vik * f.u(j, k);
        }
    }
    return out;
}

/// Moore-Penrose pseudoinverse. pinv of an m x n zero matrix is the n x m zero matrix.
inline Matrix pinv(const Matrix& a, std::optional<double> tol = std::nullopt) {
    if (a.empty()) return Matrix(a.cols(), a.rows());
    return pinv(svd(a), tol);
}

/// Rank threshold for a computed product F_1 F_2 ... F_k.
///
/// Rounding in the product is of order eps * prod ||F_i||_2, which can be
/// far above eps * sigma_1 of the product itself when the factors cancel.
/// The threshold is d * eps * prod ||F_i||_2 with d the largest dimension
/// involved.
inline double product_rank_tol(std::initializer_list<std::reference_wrapper<const Matrix>> factors) {
    std::size_t d = 0;
    double scale = 1.0;
    for (const Matrix& f : factors) {
        d = std::max({d, f.rows(), f.cols()});
        scale *= f.empty() ? 0.0 : svd(f).sigma_max();
    }
    return static_cast<double>(d) * kEps * scale;
}

/// Count of singular values strictly above tol (default max(m, n) * eps * sigma_1).
inline std::size_t numerical_rank(const Matrix& a, std::optional<double> tol = std::nullopt) {
    if (a.empty()) return 0;
    const SvdFactors f = svd(a);
    return f.rank(tol.value_or(f.rank_tol));
}

/// Orthonormal column basis of a subspace of R^ambient_dim.
class SubspaceBasis {
public:
    SubspaceBasis() = default;

    /// Takes ownership of basis; columns must already be orthonormal.
    explicit SubspaceBasis(Matrix basis) : ambient_(basis.rows()), basis_(std::move(basis)) {
        if (basis_.cols() > ambient_) throw ShapeError("subspace: more basis vectors than ambient dimension");
    }

    /// The zero subspace of R^n.
    static SubspaceBasis trivial(std::size_t n) { return SubspaceBasis(Matrix(n, 0)); }
    static SubspaceBasis whole(std::size_t n) { return SubspaceBasis(Matrix::identity(n)); }

    std::size_t ambient_dim() const noexcept { return ambient_; }
    std::size_t dim() const noexcept { return basis_.cols(); }
    const Matrix& basis() const noexcept { return basis_; }

    /// Orthogonal projector B B^T onto the subspace.
    Matrix projector() const { return basis_ * basis_.transpose(); }

private:
    std::size_t ambient_ = 0;
    Matrix basis_;
};

/// R(A), from the leading left singular vectors.
inline SubspaceBasis range_basis(const Matrix& a, std::optional<double> tol = std::nullopt) {
    if (a.empty()) return SubspaceBasis::trivial(a.rows());
    const SvdFactors f = svd(a);
    return SubspaceBasis(f.u.col_range(0, f.rank(tol.value_or(f.rank_tol))));
}

/// N(A), from the trailing right singular vectors.
inline SubspaceBasis nullspace_basis(const Matrix& a, std::optional<double> tol = std::nullopt) {
    if (a.empty()) return SubspaceBasis::whole(a.cols());
    const SvdFactors f = svd(a);
    const std::size_t r = f.rank(tol.value_or(f.rank_tol));
    return SubspaceBasis(f.v.col_range(r, a.cols() - r));
}

/// R(A) when rank A = r is known from structure rather than measured.
inline SubspaceBasis range_basis_of_rank(const Matrix& a, std::size_t r) {
    if (r > std::min(a.rows(), a.cols())) throw PreconditionError("range_basis_of_rank: rank exceeds dimensions");
    if (r == 0) return SubspaceBasis::trivial(a.rows());
    return SubspaceBasis(svd(a).u.col_range(0, r));
}

/// N(A) when rank A = r is known from structure rather than measured.
inline SubspaceBasis nullspace_basis_of_rank(const Matrix& a, std::size_t r) {
    if (r > std::min(a.rows(), a.cols())) throw PreconditionError("nullspace_basis_of_rank: rank exceeds dimensions");
    if (r == 0) return SubspaceBasis::whole(a.cols());
    return SubspaceBasis(svd(a).v.col_range(r, a.cols() - r));
}

namespace detail {
inline void require_same_ambient(const SubspaceBasis& s1, const SubspaceBasis& s2, const char* op) {
    if (s1.ambient_dim() != s2.ambient_dim()) {
        throw ShapeError(std::string(op) + ": ambient dimensions " + std::to_string(s1.ambient_dim()) +
                         " and " + std::to_string(s2.ambient_dim()) + " differ");
    }
}
} // namespace detail

/// ||B1 B1^T - B2 B2^T||_2, the sine of the largest principal angle (1 if dimensions differ).
inline double subspace_distance(const SubspaceBasis& s1, const SubspaceBasis& s2) {
    detail::require_same_ambient(s1, s2, "subspace_distance");
    return spectral_norm(s1.projector() - s2.projector());
}

inline bool subspaces_equal(const SubspaceBasis& s1, const SubspaceBasis& s2, double tol_sub = kSubspaceTol) {
    return subspace_distance(s1, s2) <= tol_sub;
}

/// True iff inner is contained in outer: ||(I - B_out B_out^T) B_in||_2 <= tol_sub.
inline bool subspace_contains(const SubspaceBasis& outer, const SubspaceBasis& inner,
                              double tol_sub = kSubspaceTol) {
    detail::require_same_ambient(outer, inner, "subspace_contains");
    if (inner.dim() == 0) return true;
    const Matrix& bi = inner.basis();
    const Matrix residual = bi - outer.basis() * (outer.basis().transpose() * bi);
    return spectral_norm(residual) <= tol_sub;
}

/// Intersection via the nullspace of [I - P1; I - P2].
inline SubspaceBasis intersect(const SubspaceBasis& s1, const SubspaceBasis& s2, double tol_sub = kSubspaceTol) {
    detail::require_same_ambient(s1, s2, "intersect");
    const Matrix id = Matrix::identity(s1.ambient_dim());
    return nullspace_basis(vstack(id - s1.projector(), id - s2.projector()), tol_sub);
}

/// Sum s1 + s2.
inline SubspaceBasis subspace_sum(const SubspaceBasis& s1, const SubspaceBasis& s2, double tol_sub = kSubspaceTol) {
    detail::require_same_ambient(s1, s2, "subspace_sum");
    return range_basis(hstack(s1.basis(), s2.basis()), tol_sub);
}

/// Orthogonal complement.
inline SubspaceBasis orthogonal_complement(const SubspaceBasis& s) {
    if (s.dim() == 0) return SubspaceBasis::whole(s.ambient_dim());
    return nullspace_basis(s.basis().transpose(), 0.5);
}

/// Residuals of the four Penrose conditions for a candidate pseudoinverse.
struct PenroseResiduals {
    double aga = 0.0;   ///< ||A G A - A||_F
    double gag = 0.0;   ///< ||G A G - G||_F
    double ag_sym = 0.0;  ///< ||(A G)^T - A G||_F
    double ga_sym = 0.0;  ///< ||(G A)^T - G A||_F

    double max() const { return std::max({aga, gag, ag_sym, ga_sym}); }
};

inline PenroseResiduals penrose_check(const Matrix& a, const Matrix& g) {
    if (g.rows() != a.cols() || g.cols() != a.rows()) throw ShapeError("penrose_check: candidate has wrong shape");
    const Matrix ag = a * g;
    const Matrix ga = g * a;
    return {distance(ag * a, a), distance(ga * g, g), distance(ag.transpose(), ag), distance(ga.transpose(), ga)};
}

/// Residual budget 100 eps max(1, sigma_1) sqrt(mn) used for pseudoinverse and SVD checks.
inline double penrose_tolerance(const Matrix& a) {
    const double s1 = a.empty() ? 0.0 : spectral_norm(a);
    return 100.0 * kEps * std::max(1.0, s1) * std::sqrt(static_cast<double>(a.rows() * a.cols()));
}

} // namespace wedd
