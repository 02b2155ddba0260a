#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "wedd/core.hpp"
#include "wedd/error.hpp"
#include "wedd/matrix.hpp"
#include "wedd/projector.hpp"

namespace wedd {

/// Relative budget for identities checked on reductions and decompositions.
inline constexpr double kIdentityTol = 1e-9;

/// The rank-reduced matrix B = A - (AX)(Y^T A X)^+(Y^T A) and its diagnostics.
struct ReductionReport {
    Matrix b;
    Projector p;             ///< (AX)(Y^T A X)^+ Y^T, so B = (I - P) A
    Projector q;             ///< X (Y^T A X)^+ Y^T A, so B = A (I - Q)
    std::size_t rank_a = 0;
    std::size_t k = 0;       ///< rank(Y^T A X)
    std::size_t rank_b = 0;
    double rank_tol_b = 0.0;
    /// N(B) = N(A) (+) R(X (Y^T A X)^+), verified with subspace predicates.
    bool nullspace_split = false;
    std::map<std::string, double> residuals{};

    bool rank_identity_holds() const { return rank_a >= k && rank_b == rank_a - k; }
};

namespace detail {

inline void require_reduction_shapes(const Matrix& a, const Matrix& x, const Matrix& y, const char* op) {
    if (x.rows() != a.cols() || y.rows() != a.rows()) {
        throw ShapeError(std::string(op) + ": A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " but X has " + std::to_string(x.rows()) + " rows and Y has " + std::to_string(y.rows()));
    }
}

// Rank threshold for M = Y^T A X at the rounding scale of the product.
inline double core_rank_tol(const Matrix& a, const Matrix& x, const Matrix& y) {
    const Matrix yt = y.transpose();
    return product_rank_tol({yt, a, x});
}

// Pieces of a reduction shared by every operation.
struct ReductionParts {
    Matrix ax;      // A X
    Matrix ya;      // Y^T A
    Matrix m;       // Y^T A X
    Matrix m_pinv;  // (Y^T A X)^+
    std::size_t k = 0;
    double m_pinv_norm = 0.0;  // ||(Y^T A X)^+||_2
    Matrix b;
};

inline ReductionParts reduction_parts(const Matrix& a, const Matrix& x, const Matrix& y) {
    ReductionParts r;
    r.ax = a * x;
    r.ya = y.transpose() * a;
    r.m = r.ya * x;
    if (r.m.empty()) {
        r.m_pinv = Matrix(r.m.cols(), r.m.rows());
    } else {
        const SvdFactors f = svd(r.m);
        const double tol = core_rank_tol(a, x, y);
        r.k = f.rank(tol);
        r.m_pinv = pinv(f, tol);
        if (r.k > 0) r.m_pinv_norm = 1.0 / f.sigma[r.k - 1];
    }
    r.b = a - r.ax * r.m_pinv * r.ya;
    return r;
}

} // namespace detail

/// B = A - (AX)(Y^T A X)^+(Y^T A) without diagnostics.
inline Matrix reduce(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "reduce");
    return detail::reduction_parts(a, x, y).b;
}

/// Rank threshold for a computed reduction.
///
/// First-order rounding in B = A - (AX) M^+ (Y^T A), M = Y^T A X, comes from
/// A itself, from the products AX, Y^T A and M (each off by about
/// eps times the product of its factor norms), and from M^+, whose error is
/// ||M^+||^2 times that of M. The threshold is anchored to that bound rather
/// than to sigma_1(B), which can itself be rounding noise when the reduction
/// removes all of A.
inline double reduction_rank_tol(const Matrix& a, const Matrix& x, const Matrix& y, const Matrix& ax,
                                 const Matrix& ya, double m_pinv_norm) {
    const double na = spectral_norm(a);
    const double nx = spectral_norm(x);
    const double ny = spectral_norm(y);
    const double nax = spectral_norm(ax);
    const double nya = spectral_norm(ya);
    const double scale = na + nax * m_pinv_norm * nya + m_pinv_norm * (na * nx * nya + nax * ny * na) +
                         nax * m_pinv_norm * m_pinv_norm * nya * (ny * na * nx);
    const std::size_t d = std::max({a.rows(), a.cols(), x.cols(), y.cols()});
    return static_cast<double>(d) * kEps * scale;
}

/// P = (AX)(Y^T A X)^+ Y^T and Q = X (Y^T A X)^+ Y^T A, both of rank k.
///
/// Both share the core (Y^T A X)^+ and its rank, so the two projectors are
/// always built with the same k.
inline std::pair<Projector, Projector> reduction_projectors(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "reduction_projectors");
    const detail::ReductionParts parts = detail::reduction_parts(a, x, y);
    return {detail::oblique_projector_from_core(parts.ax, y, parts.m_pinv, parts.k),
            detail::oblique_projector_from_core(x, parts.ya.transpose(), parts.m_pinv, parts.k)};
}

/// Generalized Wedderburn rank reduction with full diagnostics.
///
/// A is m x n, X is n x p, Y is m x q; Y^T A X may be non-square and
/// rank deficient. rank B = rank A - rank(Y^T A X).
inline ReductionReport generalized_reduce(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "generalized_reduce");
    detail::ReductionParts parts = detail::reduction_parts(a, x, y);
    auto [p, q] = reduction_projectors(a, x, y);

    ReductionReport r{std::move(parts.b), std::move(p), std::move(q)};
    r.k = parts.k;
    r.rank_a = numerical_rank(a);
    r.rank_tol_b = reduction_rank_tol(a, x, y, parts.ax, parts.ya, parts.m_pinv_norm);
    r.rank_b = numerical_rank(r.b, r.rank_tol_b);

    const Matrix id_m = Matrix::identity(a.rows());
    const Matrix id_n = Matrix::identity(a.cols());
    r.residuals["b_vs_left_projection"] = distance(r.b, (id_m - r.p.matrix()) * a);
    r.residuals["b_vs_right_projection"] = distance(r.b, a * (id_n - r.q.matrix()));
    r.residuals["b_annihilates_x_core"] = frobenius_norm(r.b * (x * parts.m_pinv));

    const SubspaceBasis null_a = nullspace_basis(a);
    // rank(X (Y^T A X)^+) = k exactly: R((Y^T A X)^+) lies in R(X^T), where X is injective.
    const SubspaceBasis added = range_basis_of_rank(x * parts.m_pinv, parts.k);
    const SubspaceBasis split = subspace_sum(null_a, added);
    const SubspaceBasis null_b = nullspace_basis(r.b, r.rank_tol_b);
    const double split_distance = subspace_distance(split, null_b);
    r.residuals["nullspace_split_distance"] = split_distance;
    r.nullspace_split = split.dim() == null_a.dim() + added.dim() && split_distance <= kSubspaceTol;
    return r;
}

/// Classical rank-one reduction A - omega^{-1} A x y^T A with omega = y^T A x.
///
/// Throws PreconditionError when |omega| <= omega_tol ||A||_F ||x|| ||y||;
/// generalized_reduce handles that case.
inline Matrix classic_reduce_vector(const Matrix& a, std::span<const double> x, std::span<const double> y,
                                    double omega_tol = 1e-12) {
    if (x.size() != a.cols() || y.size() != a.rows()) throw ShapeError("classic_reduce_vector: vector lengths do not match A");
    const Matrix xc = Matrix::column(x);
    const Matrix yc = Matrix::column(y);
    const Matrix ax = a * xc;
    const Matrix ya = yc.transpose() * a;
    const double omega = (yc.transpose() * ax)(0, 0);
    const double scale = frobenius_norm(a) * frobenius_norm(xc) * frobenius_norm(yc);
    if (!(std::abs(omega) > omega_tol * scale)) {
        throw PreconditionError("classic_reduce_vector: omega = y^T A x is numerically zero; use generalized_reduce");
    }
    return a - (1.0 / omega) * (ax * ya);
}

/// True iff the reduction of an idempotent A is idempotent, and, when A is
/// symmetric and X = Y, also symmetric.
inline bool reduction_preserves_projection(const Matrix& a, const Matrix& x, const Matrix& y) {
    if (!a.square()) throw ShapeError("reduction_preserves_projection: A is not square");
    if (distance(a * a, a) > idempotency_budget(a)) {
        throw PreconditionError("reduction_preserves_projection: A is not idempotent");
    }
    const Matrix b = reduce(a, x, y);
    const double budget = idempotency_budget(b);
    bool ok = distance(b * b, b) <= budget;
    const bool same_xy = same_shape(x, y) && distance(x, y) == 0.0;
    if (same_xy && distance(a, a.transpose()) <= idempotency_budget(a)) ok = ok && distance(b, b.transpose()) <= budget;
    return ok;
}

inline bool reduction_preserves_projection(const Projector& a, const Matrix& x, const Matrix& y) {
    return reduction_preserves_projection(a.matrix(), x, y);
}

enum class InheritedClass { psd, skew };

struct InheritanceReport {
    InheritedClass kind = InheritedClass::psd;
    Matrix b;
    /// Sum of |negative eigenvalues| of B, (sum sigma_i - trace B) / 2; PSD case only.
    double negative_eigen_mass = 0.0;
    /// ||B - A^{1/2}(I - C C^+)A^{1/2}||_F with C = A^{1/2} X; PSD case only.
    double square_root_route_residual = 0.0;
    double symmetry_residual = 0.0;  ///< ||B^T - B||_F (PSD) or ||B^T + B||_F (skew)
    bool preserved = false;
};

namespace detail {
// For symmetric S, sum(sigma) - trace(S) equals twice the mass of negative eigenvalues.
inline double negative_eigen_mass(const SvdFactors& f, const Matrix& s) {
    double sum = 0.0;
    for (double v : f.sigma) sum += v;
    return std::max(0.0, 0.5 * (sum - trace(s)));
}
} // namespace detail

/// Reduction with X = Y of a symmetric PSD or a skew-symmetric matrix.
inline InheritanceReport psd_skew_preservation(const Matrix& a, const Matrix& x, double tol = kIdentityTol) {
    if (!a.square()) throw ShapeError("psd_skew_preservation: A is not square");
    if (x.rows() != a.cols()) throw ShapeError("psd_skew_preservation: X has wrong row count");
    const double scale = std::max(1.0, frobenius_norm(a));
    InheritanceReport r;
    if (distance(a, a.transpose()) <= tol * scale) {
        const SvdFactors fa = svd(a);
        if (detail::negative_eigen_mass(fa, a) > tol * scale) {
            throw PreconditionError("psd_skew_preservation: symmetric A is not positive semidefinite");
        }
        r.kind = InheritedClass::psd;
        r.b = reduce(a, x, x);
        const std::size_t n = a.rows();
        Matrix root(n, n);
        for (std::size_t k = 0; k < fa.sigma.size(); ++k) {
            const double s = std::sqrt(fa.sigma[k]);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) root(i, j) += s * fa.v(i, k) * fa.v(j, k);
        }
        const Matrix c = root * x;
        const Matrix via_root = root * (Matrix::identity(n) - c * pinv(c)) * root;
        r.square_root_route_residual = distance(r.b, via_root);
        r.symmetry_residual = distance(r.b.transpose(), r.b);
        r.negative_eigen_mass = detail::negative_eigen_mass(svd(r.b), r.b);
        r.preserved = r.symmetry_residual <= tol * scale && r.negative_eigen_mass <= tol * scale;
    } else if (frobenius_norm(a + a.transpose()) <= tol * scale) {
        r.kind = InheritedClass::skew;
        r.b = reduce(a, x, x);
        r.symmetry_residual = frobenius_norm(r.b + r.b.transpose());
        r.preserved = r.symmetry_residual <= tol * scale;
    } else {
        throw PreconditionError("psd_skew_preservation: A is neither symmetric PSD nor skew-symmetric");
    }
    return r;
}

struct AmeliShaddenReport {
    double two_inverse_residual = 0.0;     ///< ||B A^+ B - B||_F
    double two_inverse_scale = 1.0;
    double pinv_reduction_residual = 0.0;  ///< ||A^+ B A^+ - reduce(A^+, AX, A^T Y)||_F
    double pinv_reduction_scale = 1.0;
    /// ||B A^+ B - A^+||_F as literally stated; measured for square A only, never asserted.
    std::optional<double> statement_residual;

    bool holds(double tol = kIdentityTol) const {
        return two_inverse_residual <= tol * two_inverse_scale && pinv_reduction_residual <= tol * pinv_reduction_scale;
    }
};

/// B A^+ B = B ({2}-inverse identity) and A^+ B A^+ is the reduction of A^+ by (AX, A^T Y).
///
/// Scales: max(1, ||A||_F) kappa and max(1, ||A^+||_F) kappa with
/// kappa = max(1, ||A||_F ||A^+||_F).
inline AmeliShaddenReport ameli_shadden_identities(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "ameli_shadden_identities");
    const Matrix b = reduce(a, x, y);
    const Matrix ap = pinv(a);
    const double na = frobenius_norm(a);
    const double nap = frobenius_norm(ap);
    const double kappa = std::max(1.0, na * nap);

    AmeliShaddenReport r;
    const Matrix bab = b * ap * b;
    r.two_inverse_residual = distance(bab, b);
    r.two_inverse_scale = std::max(1.0, na) * kappa;
    r.pinv_reduction_residual = distance(ap * b * ap, reduce(ap, a * x, a.transpose() * y));
    r.pinv_reduction_scale = std::max(1.0, nap) * kappa;
    if (a.square()) r.statement_residual = distance(bab, ap);
    return r;
}

/// True iff reductions by (X, Y) and (X', Y') agree to tol * max(1, ||A||_F).
inline bool reduction_invariance(const Matrix& a, const Matrix& x, const Matrix& xp, const Matrix& y, const Matrix& yp,
                                 double tol = kIdentityTol) {
    if (!same_shape(x, xp) || !same_shape(y, yp)) throw ShapeError("reduction_invariance: X/X' or Y/Y' shapes differ");
    return distance(reduce(a, x, y), reduce(a, xp, yp)) <= tol * std::max(1.0, frobenius_norm(a));
}

/// A = (AX)(Y^T A X)^+(Y^T A) and pinv(A) = pinv(Y^T A)(Y^T A X) pinv(AX).
struct DecompositionReport {
    Matrix ax;
    Matrix m;   ///< Y^T A X
    Matrix ya;
    double reconstruction_residual = 0.0;  ///< ||A - (AX) M^+ (Y^T A)||_F
    double pinv_residual = 0.0;            ///< ||A^+ - (Y^T A)^+ M (AX)^+||_F
    std::size_t rank_a = 0;
    std::size_t rank_m = 0;
    double rank_tol_m = 0.0;  ///< threshold used for rank and pseudoinverse of M

    Matrix approximation() const { return ax * pinv(m, rank_tol_m) * ya; }
};

/// Decomposition residuals without the rank precondition (used by sketches).
inline DecompositionReport decomposition_report(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "decomposition_report");
    DecompositionReport r;
    r.ax = a * x;
    r.ya = y.transpose() * a;
    r.m = r.ya * x;
    r.rank_a = numerical_rank(a);
    r.rank_tol_m = detail::core_rank_tol(a, x, y);
    r.rank_m = numerical_rank(r.m, r.rank_tol_m);
    r.reconstruction_residual = distance(a, r.approximation());
    const Matrix yt = y.transpose();
    r.pinv_residual = distance(pinv(a), pinv(r.ya, product_rank_tol({yt, a})) * r.m * pinv(r.ax, product_rank_tol({a, x})));
    return r;
}

/// Wedderburn decomposition of A (m x n) by X (n x p), Y (m x q).
///
/// Requires rank(Y^T A X) = rank(A); otherwise throws RankDeficiencyError
/// carrying both ranks. With X = A^T, Y = A this is A = AA^T (A^T A A^T)^+ A^T A.
inline DecompositionReport wedderburn_decompose(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "wedderburn_decompose");
    const std::size_t rank_a = numerical_rank(a);
    const std::size_t rank_m = numerical_rank(y.transpose() * a * x, detail::core_rank_tol(a, x, y));
    if (rank_m != rank_a) throw RankDeficiencyError(rank_m, rank_a);
    return decomposition_report(a, x, y);
}

/// A = P A Q with P = (AX)(Y^T A X)^+ Y^T and Q = X (Y^T A X)^+ (Y^T A).
struct MetaFactorization {
    Projector p;
    Projector q;
    std::map<std::string, double> residuals{};
    bool range_p_is_range_a = false;
    bool null_q_is_null_a = false;
    /// N(P) = N(Y^T); evaluated only when rank Y = rank A, where it holds.
    std::optional<bool> null_p_is_null_yt{};
    /// R(Q) = R(X); evaluated only when rank X = rank A, where it holds.
    std::optional<bool> range_q_is_range_x{};
};

inline MetaFactorization meta_factorize(const Matrix& a, const Matrix& x, const Matrix& y,
                                        double tol = kIdentityTol, double tol_sub = kSubspaceTol) {
    detail::require_reduction_shapes(a, x, y, "meta_factorize");
    const std::size_t rank_a = numerical_rank(a);
    const std::size_t rank_m = numerical_rank(y.transpose() * a * x, detail::core_rank_tol(a, x, y));
    if (rank_m != rank_a) throw RankDeficiencyError(rank_m, rank_a);

    auto [p, q] = reduction_projectors(a, x, y);
    MetaFactorization f{std::move(p), std::move(q)};
    const Matrix& pm = f.p.matrix();
    const Matrix& qm = f.q.matrix();
    f.residuals["paq"] = distance(pm * a * qm, a);
    f.residuals["pa"] = distance(pm * a, a);
    f.residuals["aq"] = distance(a * qm, a);
    const double budget = tol * std::max(1.0, frobenius_norm(a));
    for (const auto& [name, value] : f.residuals) {
        if (value > budget) throw ConsistencyError("meta_factorize: residual " + name + " = " + std::to_string(value));
    }
    f.range_p_is_range_a = subspaces_equal(f.p.range(), range_basis(a), tol_sub);
    f.null_q_is_null_a = subspaces_equal(f.q.nullspace(), nullspace_basis(a), tol_sub);
    if (numerical_rank(y) == rank_a) {
        f.null_p_is_null_yt = subspaces_equal(f.p.nullspace(), nullspace_basis(y.transpose()), tol_sub);
    }
    if (numerical_rank(x) == rank_a) {
        f.range_q_is_range_x = subspaces_equal(f.q.range(), range_basis(x), tol_sub);
    }
    return f;
}

/// Given projections with A = P A Q, returns X = Q, Y = P^T, which reproduce
/// P and Q through the Wedderburn formulas.
inline std::pair<Matrix, Matrix> meta_factor_recover(const Matrix& a, const Projector& p, const Projector& q,
                                                     double tol = kIdentityTol) {
    if (p.dim() != a.rows() || q.dim() != a.cols()) throw ShapeError("meta_factor_recover: projector dimensions do not match A");
    const Matrix& pm = p.matrix();
    const Matrix& qm = q.matrix();
    const double scale = std::max(1.0, frobenius_norm(a)) * (1.0 + frobenius_norm(pm)) * (1.0 + frobenius_norm(qm));
    if (distance(pm * a * qm, a) > tol * scale) throw PreconditionError("meta_factor_recover: A != P A Q");

    Matrix x = qm;
    Matrix y = pm.transpose();
    const Matrix ax = a * x;
    const Matrix m = y.transpose() * ax;
    const Matrix mp = pinv(m);
    if (distance(ax * mp * y.transpose(), pm) > tol * scale || distance(x * mp * y.transpose() * a, qm) > tol * scale) {
        throw ConsistencyError("meta_factor_recover: recovered X, Y do not reproduce P and Q");
    }
    if (numerical_rank(m) != numerical_rank(a)) throw ConsistencyError("meta_factor_recover: rank(Y^T A X) != rank(A)");
    return {std::move(x), std::move(y)};
}

} // namespace wedd
