#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "wedd/core.hpp"
#include "wedd/error.hpp"
#include "wedd/matrix.hpp"

namespace wedd {

/// Relative factor for idempotency checks; the absolute budget is
/// kIdempotencyTol * (1 + ||P||_F^2) since oblique projectors can have large norm.
inline constexpr double kIdempotencyTol = 1e-9;

inline double idempotency_budget(const Matrix& p, double factor = kIdempotencyTol) {
    const double n = frobenius_norm(p);
    return factor * (1.0 + n * n);
}

/// An idempotent matrix together with bases of its range and nullspace.
///
/// Construction validates P^2 = P, that the bases are invariant
/// (P R = R, P N = 0), that dim R + dim N = m with R + N spanning R^m,
/// and that trace(P) rounds to dim R.
class Projector {
public:
    Projector(Matrix p, SubspaceBasis range, SubspaceBasis nullsp, double tol_factor = kIdempotencyTol)
        : p_(std::move(p)), range_(std::move(range)), nullsp_(std::move(nullsp)) {
        if (!p_.square()) throw ShapeError("projector: matrix is not square");
        const std::size_t m = p_.rows();
        if (range_.ambient_dim() != m || nullsp_.ambient_dim() != m) {
            throw ShapeError("projector: basis ambient dimension does not match matrix");
        }
        const double budget = idempotency_budget(p_, tol_factor);
        const double idem = distance(p_ * p_, p_);
        if (idem > budget) {
            throw PreconditionError("projector: ||P^2 - P||_F = " + std::to_string(idem) + " exceeds " +
                                    std::to_string(budget));
        }
        if (range_.dim() + nullsp_.dim() != m) {
            throw ConsistencyError("projector: dim R(P) + dim N(P) = " +
                                   std::to_string(range_.dim() + nullsp_.dim()) + " but m = " + std::to_string(m));
        }
        const Matrix& r = range_.basis();
        const Matrix& n = nullsp_.basis();
        if (distance(p_ * r, r) > budget || frobenius_norm(p_ * n) > budget) {
            throw ConsistencyError("projector: supplied bases are not the range and nullspace of P");
        }
        if (m > 0) {
            const SvdFactors f = svd(hstack(r, n));
            if (f.sigma.back() <= 1e-10) throw ConsistencyError("projector: range and nullspace are not complementary");
        }
        if (std::abs(trace(p_) - static_cast<double>(range_.dim())) >= 0.5) {
            throw ConsistencyError("projector: trace does not match rank");
        }
        orthogonal_ = distance(p_.transpose(), p_) <= budget;
    }

    /// Validates an idempotent matrix and derives its range and nullspace.
    static Projector from_matrix(Matrix p, double tol_factor = kIdempotencyTol) {
        if (!p.square()) throw ShapeError("projector: matrix is not square");
        SubspaceBasis r = range_basis(p);
        SubspaceBasis n = nullspace_basis(p);
        return Projector(std::move(p), std::move(r), std::move(n), tol_factor);
    }

    const Matrix& matrix() const noexcept { return p_; }
    const SubspaceBasis& range() const noexcept { return range_; }
    const SubspaceBasis& nullspace() const noexcept { return nullsp_; }
    bool orthogonal() const noexcept { return orthogonal_; }
    std::size_t rank() const noexcept { return range_.dim(); }
    std::size_t dim() const noexcept { return p_.rows(); }

private:
    Matrix p_;
    SubspaceBasis range_;
    SubspaceBasis nullsp_;
    bool orthogonal_ = false;
};

namespace detail {

// A core_pinv B^T with core_pinv = (B^T A)^+ of rank k already computed.
// R(P) = R(A A^T B) and N(P) = N(A^T B B^T), but those products square the
// conditioning of A and B, so the bases are read off P at its known rank.
inline Projector oblique_projector_from_core(const Matrix& a, const Matrix& b, const Matrix& core_pinv,
                                             std::size_t k) {
    Matrix p = a * core_pinv * b.transpose();
    SubspaceBasis range = range_basis_of_rank(p, k);
    SubspaceBasis nullsp = nullspace_basis_of_rank(p, k);
    return Projector(std::move(p), std::move(range), std::move(nullsp));
}

} // namespace detail

/// P = A (B^T A)^+ B^T, the projection onto R(A A^T B) along N(A^T B B^T).
///
/// A is m x p and B is m x q with arbitrary p, q. rank P = rank(B^T A),
/// measured against the rounding scale of the product B^T A.
inline Projector oblique_projector(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("oblique_projector: row counts " + std::to_string(a.rows()) + " and " +
                         std::to_string(b.rows()) + " differ");
    }
    const Matrix bt = b.transpose();
    const Matrix core = bt * a;
    if (core.empty()) return detail::oblique_projector_from_core(a, b, Matrix(core.cols(), core.rows()), 0);
    const SvdFactors f = svd(core);
    const double tol = product_rank_tol({bt, a});
    return detail::oblique_projector_from_core(a, b, pinv(f, tol), f.rank(tol));
}

/// Projection onto v along w, as pinv(P_{W-perp} P_V).
inline Projector projector_from_subspaces(const SubspaceBasis& v, const SubspaceBasis& w,
                                          double tol_sub = kSubspaceTol) {
    detail::require_same_ambient(v, w, "projector_from_subspaces");
    const std::size_t m = v.ambient_dim();
    if (v.dim() + w.dim() != m) {
        throw PreconditionError("projector_from_subspaces: dimensions " + std::to_string(v.dim()) + " + " +
                                std::to_string(w.dim()) + " do not add up to " + std::to_string(m));
    }
    if (m > 0) {
        const SvdFactors f = svd(hstack(v.basis(), w.basis()));
        if (f.sigma.back() <= tol_sub) {
            throw PreconditionError("projector_from_subspaces: subspaces intersect nontrivially");
        }
    }
    const Matrix w_perp = Matrix::identity(m) - w.projector();
    return Projector(pinv(w_perp * v.projector()), v, w);
}

/// Factors (C, D) with C (D^T C)^+ D^T = I - A (B^T A)^+ B^T:
/// C = I - (B B^T A)(B B^T A)^+, D = I - (A A^T B)(A A^T B)^+.
inline std::pair<Matrix, Matrix> complement_factors(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("complement_factors: row counts differ");
    const Matrix id = Matrix::identity(a.rows());
    const Matrix bba = b * (b.transpose() * a);
    const Matrix aab = a * (a.transpose() * b);
    return {id - bba * pinv(bba), id - aab * pinv(aab)};
}

/// True iff pinv(P) is itself a projection. Cross-checked against P being orthogonal.
inline bool pinv_is_projection(const Projector& p) {
    const Matrix g = pinv(p.matrix());
    const bool idempotent = distance(g * g, g) <= idempotency_budget(g);
    if (idempotent != p.orthogonal()) {
        throw ConsistencyError("pinv_is_projection: idempotency of pinv(P) disagrees with orthogonality of P");
    }
    return idempotent;
}

/// (PQ)^+ for orthogonal projectors P, Q; verifies (PQ)^+ = Q (PQ)^+ P and idempotency.
inline Matrix pinv_of_orth_product(const Projector& p, const Projector& q) {
    if (!p.orthogonal() || !q.orthogonal()) throw PreconditionError("pinv_of_orth_product: projectors must be orthogonal");
    if (p.dim() != q.dim()) throw ShapeError("pinv_of_orth_product: dimension mismatch");
    Matrix r = pinv(p.matrix() * q.matrix());
    const double budget = idempotency_budget(r);
    if (distance(r, q.matrix() * r * p.matrix()) > budget) {
        throw ConsistencyError("pinv_of_orth_product: (PQ)^+ != Q (PQ)^+ P");
    }
    if (distance(r * r, r) > budget) throw ConsistencyError("pinv_of_orth_product: (PQ)^+ is not idempotent");
    return r;
}

struct RolOptions {
    double tol_rel = 1e-8;           ///< relative budget for pinv(AB) vs pinv(B) pinv(A)
    double tol_sub = kSubspaceTol;   ///< subspace containment tolerance
};

namespace detail {

inline bool rol_direct(const Matrix& a, const Matrix& b, double tol_rel) {
    const Matrix lhs = pinv(a * b);
    const Matrix rhs = pinv(b) * pinv(a);
    const double scale = std::max(1.0, frobenius_norm(lhs) + frobenius_norm(rhs));
    return distance(lhs, rhs) <= tol_rel * scale;
}

// R(B B^T A^T) in R(A^T) and R(A^T A B) in R(B).
inline bool greville(const Matrix& a, const Matrix& b, double tol_sub) {
    const Matrix at = a.transpose();
    const bool first = subspace_contains(range_basis(at), range_basis(b * (b.transpose() * at)), tol_sub);
    const bool second = subspace_contains(range_basis(b), range_basis(at * (a * b)), tol_sub);
    return first && second;
}

inline void require_conformable(const Matrix& a, const Matrix& b, const char* op) {
    if (a.cols() != b.rows()) {
        throw ShapeError(std::string(op) + ": A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         ", B is " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

} // namespace detail

/// Whether pinv(AB) = pinv(B) pinv(A).
///
/// Evaluated both directly and through Greville's range conditions; a
/// disagreement raises ConsistencyError.
inline bool reverse_order_law_holds(const Matrix& a, const Matrix& b, const RolOptions& opts = {}) {
    detail::require_conformable(a, b, "reverse_order_law_holds");
    const bool direct = detail::rol_direct(a, b, opts.tol_rel);
    const bool grev = detail::greville(a, b, opts.tol_sub);
    if (direct != grev) {
        throw ConsistencyError(std::string("reverse_order_law_holds: direct comparison says ") +
                               (direct ? "true" : "false") + " but Greville's condition says " +
                               (grev ? "true" : "false"));
    }
    return direct;
}

struct RolClassification {
    bool rol = false;                    ///< pinv(AB) = pinv(B) pinv(A), direct comparison
    bool orthogonal_projection = false;  ///< B (AB)^+ A is symmetric
    bool ranges_equal = false;           ///< R(B B^T A^T) = R(A^T A B)
    bool greville = false;               ///< Greville's range conditions
    /// ||B (AB)^+ A - B B^+ A^+ A||_F, evaluated only when the law holds.
    std::optional<double> product_form_residual;
    std::size_t rank_ab = 0;
    std::size_t intersection_dim = 0;    ///< dim R(B) intersect R(A^T)

    bool consistent() const { return rol == orthogonal_projection && rol == ranges_equal && rol == greville; }
};

/// Evaluates the equivalent characterizations of the reverse order law for (A, B).
///
/// B (AB)^+ A is the projection A'(B'^T A')^+ B'^T with A' = B, B' = A^T;
/// when the law holds it equals B B^+ A^+ A, orthogonal onto R(B) cap R(A^T).
inline RolClassification rol_projector_classification(const Matrix& a, const Matrix& b, const RolOptions& opts = {}) {
    detail::require_conformable(a, b, "rol_projector_classification");
    RolClassification r;
    const Matrix ab = a * b;
    const Matrix e = b * pinv(ab) * a;
    r.rol = detail::rol_direct(a, b, opts.tol_rel);
    r.greville = detail::greville(a, b, opts.tol_sub);
    r.orthogonal_projection = distance(e.transpose(), e) <= opts.tol_rel * (1.0 + frobenius_norm(e));
    const Matrix at = a.transpose();
    r.ranges_equal = subspaces_equal(range_basis(b * (b.transpose() * at)), range_basis(at * ab), opts.tol_sub);
    r.rank_ab = numerical_rank(ab);
    r.intersection_dim = intersect(range_basis(b), range_basis(at), opts.tol_sub).dim();
    if (r.rol) r.product_form_residual = distance(e, b * pinv(b) * pinv(a) * a);
    return r;
}

/// Fixed space {v : PQv = v} of two orthogonal projectors, equal to R(P) cap R(Q).
///
/// Computed as N(PQ - I) and as the basis intersection; both must agree.
inline SubspaceBasis orth_product_fixed_space(const Projector& p, const Projector& q, double tol_sub = kSubspaceTol) {
    if (!p.orthogonal() || !q.orthogonal()) throw PreconditionError("orth_product_fixed_space: projectors must be orthogonal");
    if (p.dim() != q.dim()) throw ShapeError("orth_product_fixed_space: dimension mismatch");
    const SubspaceBasis eig1 = nullspace_basis(p.matrix() * q.matrix() - Matrix::identity(p.dim()), tol_sub);
    SubspaceBasis inter = intersect(p.range(), q.range(), tol_sub);
    if (!subspaces_equal(eig1, inter, std::sqrt(tol_sub))) {
        throw ConsistencyError("orth_product_fixed_space: eigenspace of PQ for 1 differs from R(P) cap R(Q)");
    }
    return inter;
}

/// Whether A (B^T A)^+ B^T = C (D^T C)^+ D^T.
///
/// Compares the matrices directly and via S S^+ = T T^+, S^+ S = T^+ T with
/// S = A A^T B B^T, T = C C^T D D^T; disagreement raises ConsistencyError.
inline bool projectors_equal_by_factors(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                                        double tol = kIdempotencyTol, double tol_sub = kSubspaceTol) {
    if (a.rows() != b.rows() || a.rows() != c.rows() || a.rows() != d.rows()) {
        throw ShapeError("projectors_equal_by_factors: row counts differ");
    }
    const Matrix p1 = a * pinv(b.transpose() * a) * b.transpose();
    const Matrix p2 = c * pinv(d.transpose() * c) * d.transpose();
    const bool direct = distance(p1, p2) <= tol * (1.0 + frobenius_norm(p1) + frobenius_norm(p2));

    const Matrix s = a * a.transpose() * b * b.transpose();
    const Matrix t = c * c.transpose() * d * d.transpose();
    const Matrix sp = pinv(s);
    const Matrix tp = pinv(t);
    const bool criterion = spectral_norm(s * sp - t * tp) <= tol_sub && spectral_norm(sp * s - tp * t) <= tol_sub;
    if (direct != criterion) {
        throw ConsistencyError("projectors_equal_by_factors: direct comparison and S/T criterion disagree");
    }
    return direct;
}

namespace detail {

inline double lattice_scale(const Projector& p, const Projector& q) {
    const double np = frobenius_norm(p.matrix());
    const double nq = frobenius_norm(q.matrix());
    return 1.0 + np + nq + np * nq;
}

inline void require_commuting(const Projector& p, const Projector& q, double tol, const char* op) {
    if (p.dim() != q.dim()) throw ShapeError(std::string(op) + ": dimension mismatch");
    const Matrix& pm = p.matrix();
    const Matrix& qm = q.matrix();
    const double comm = distance(pm * qm, qm * pm);
    if (comm > tol * (1.0 + frobenius_norm(pm) * frobenius_norm(qm))) {
        throw PreconditionError(std::string(op) + ": projectors do not commute (||PQ - QP||_F = " +
                                std::to_string(comm) + ")");
    }
}

// S (T S)^+ T with S = M M^+ and T = M^+ M; rank of M measured at tol.
inline Matrix range_corange_projector(const Matrix& m, double tol) {
    const Matrix mp = pinv(m, tol);
    const Matrix s = m * mp;
    const Matrix t = mp * m;
    return s * pinv(t * s) * t;
}

} // namespace detail

/// S (T S)^+ T with S = (P+Q)(P+Q)^+, T = (P+Q)^+(P+Q).
inline Matrix join_by_theorem(const Projector& p, const Projector& q) {
    const Matrix& pm = p.matrix();
    const Matrix& qm = q.matrix();
    const double tol = static_cast<double>(pm.rows()) * kEps * (spectral_norm(pm) + spectral_norm(qm));
    return detail::range_corange_projector(pm + qm, tol);
}

/// S (T S)^+ T with S = (PQ)(PQ)^+, T = (PQ)^+(PQ).
inline Matrix meet_by_theorem(const Projector& p, const Projector& q) {
    return detail::range_corange_projector(p.matrix() * q.matrix(), product_rank_tol({p.matrix(), q.matrix()}));
}

/// P v Q = P + Q - PQ for commuting projectors, onto R(P) + R(Q) along N(P) cap N(Q).
inline Projector join(const Projector& p, const Projector& q, double tol = kIdempotencyTol,
                      double tol_sub = kSubspaceTol) {
    detail::require_commuting(p, q, tol, "join");
    const Matrix& pm = p.matrix();
    const Matrix& qm = q.matrix();
    Matrix j = pm + qm - pm * qm;
    const double scale = tol * detail::lattice_scale(p, q);
    if (distance(j, join_by_theorem(p, q)) > scale) throw ConsistencyError("join: P + Q - PQ differs from S(TS)^+T");
    if (p.orthogonal() && q.orthogonal()) {
        const Matrix s = pm + qm;
        const double rank_tol = static_cast<double>(pm.rows()) * kEps * (spectral_norm(pm) + spectral_norm(qm));
        if (distance(j, s * pinv(s, rank_tol)) > scale) throw ConsistencyError("join: orthogonal case differs from (P+Q)(P+Q)^+");
    }
    return Projector(std::move(j), subspace_sum(p.range(), q.range(), tol_sub),
                     intersect(p.nullspace(), q.nullspace(), tol_sub));
}

/// P ^ Q = PQ for commuting projectors, onto R(P) cap R(Q) along N(P) + N(Q).
inline Projector meet(const Projector& p, const Projector& q, double tol = kIdempotencyTol,
                      double tol_sub = kSubspaceTol) {
    detail::require_commuting(p, q, tol, "meet");
    Matrix mt = p.matrix() * q.matrix();
    const double scale = tol * detail::lattice_scale(p, q);
    if (distance(mt, meet_by_theorem(p, q)) > scale) throw ConsistencyError("meet: PQ differs from S(TS)^+T");
    if (p.orthogonal() && q.orthogonal()) {
        if (distance(mt, mt * pinv(mt, product_rank_tol({p.matrix(), q.matrix()}))) > scale) throw ConsistencyError("meet: orthogonal case differs from (PQ)(PQ)^+");
    }
    return Projector(std::move(mt), intersect(p.range(), q.range(), tol_sub),
                     subspace_sum(p.nullspace(), q.nullspace(), tol_sub));
}

struct AnnihilationResidual {
    double residual = 0.0;  ///< max(||S1 S2||_F, ||S2 S1||_F)
    double scale = 0.0;     ///< ||S1||_F ||S2||_F

    bool within(double tol = kIdempotencyTol) const { return residual <= tol * std::max(1.0, scale); }
};

/// For complementary projections A(B^T A)^+B^T + C(D^T C)^+D^T = I, measures
/// A A^T B B^T C C^T D D^T and C C^T D D^T A A^T B B^T (both vanish exactly).
inline AnnihilationResidual complementary_factor_annihilation(const Matrix& a, const Matrix& b, const Matrix& c,
                                                              const Matrix& d, double tol = kIdempotencyTol) {
    if (a.rows() != b.rows() || a.rows() != c.rows() || a.rows() != d.rows()) {
        throw ShapeError("complementary_factor_annihilation: row counts differ");
    }
    const Matrix p1 = a * pinv(b.transpose() * a) * b.transpose();
    const Matrix p2 = c * pinv(d.transpose() * c) * d.transpose();
    const double off = distance(p1 + p2, Matrix::identity(a.rows()));
    if (off > tol * (1.0 + frobenius_norm(p1) + frobenius_norm(p2))) {
        throw PreconditionError("complementary_factor_annihilation: projections do not sum to I (residual " +
                                std::to_string(off) + ")");
    }
    const Matrix s1 = a * a.transpose() * b * b.transpose();
    const Matrix s2 = c * c.transpose() * d * d.transpose();
    return {std::max(frobenius_norm(s1 * s2), frobenius_norm(s2 * s1)), frobenius_norm(s1) * frobenius_norm(s2)};
}

} // namespace wedd
