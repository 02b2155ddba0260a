#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wedd/core.hpp"
#include "wedd/error.hpp"
#include "wedd/matrix.hpp"
#include "wedd/random.hpp"
#include "wedd/wedderburn.hpp"

namespace wedd {

/// Strictly increasing list of 1-based indices.
class IndexSet {
public:
    IndexSet() = default;

    explicit IndexSet(std::vector<std::size_t> indices) : idx_(std::move(indices)) {
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            if (idx_[i] == 0) throw PreconditionError("index set: indices are 1-based");
            if (i > 0 && idx_[i] <= idx_[i - 1]) throw PreconditionError("index set: indices must be strictly increasing");
        }
    }

    /// {first, ..., last}; empty when last < first.
    static IndexSet range(std::size_t first, std::size_t last) {
        std::vector<std::size_t> v;
        for (std::size_t i = first; i <= last; ++i) v.push_back(i);
        return IndexSet(std::move(v));
    }

    std::size_t size() const noexcept { return idx_.size(); }
    bool empty() const noexcept { return idx_.empty(); }
    std::size_t max() const noexcept { return idx_.empty() ? 0 : idx_.back(); }
    const std::vector<std::size_t>& values() const noexcept { return idx_; }

    std::vector<std::size_t> zero_based() const {
        std::vector<std::size_t> z(idx_.size());
        for (std::size_t i = 0; i < idx_.size(); ++i) z[i] = idx_[i] - 1;
        return z;
    }

    bool contains(std::size_t i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

    /// {1, ..., n} minus this set.
    IndexSet complement(std::size_t n) const {
        std::vector<std::size_t> v;
        for (std::size_t i = 1; i <= n; ++i)
            if (!contains(i)) v.push_back(i);
        return IndexSet(std::move(v));
    }

private:
    std::vector<std::size_t> idx_;
};

/// Columns e_i (i in idx) of the n x n identity.
inline Matrix selector(std::size_t n, const IndexSet& idx) {
    if (idx.max() > n) throw PreconditionError("selector: index " + std::to_string(idx.max()) + " exceeds " + std::to_string(n));
    Matrix s(n, idx.size());
    const auto z = idx.zero_based();
    for (std::size_t j = 0; j < z.size(); ++j) s(z[j], j) = 1.0;
    return s;
}

/// Singular values below this fraction of sigma_1, or this close to a
/// singular value on the other side of an index split, are not indexable.
inline constexpr double kSingularGapTol = 1e-8;

namespace detail {

inline std::size_t require_indexable(const SvdFactors& f, const IndexSet& i, const char* op) {
    const std::size_t r = f.rank();
    if (i.max() > r) {
        throw PreconditionError(std::string(op) + ": index " + std::to_string(i.max()) + " exceeds rank " + std::to_string(r));
    }
    const double s1 = f.sigma_max();
    for (std::size_t a : i.values()) {
        if (f.sigma[a - 1] <= kSingularGapTol * s1) {
            throw PreconditionError(std::string(op) + ": sigma_" + std::to_string(a) + " is too close to the rank tolerance");
        }
        for (std::size_t b = 1; b <= r; ++b) {
            if (i.contains(b)) continue;
            if (std::abs(f.sigma[a - 1] - f.sigma[b - 1]) <= kSingularGapTol * s1) {
                throw PreconditionError(std::string(op) + ": sigma_" + std::to_string(a) + " and sigma_" + std::to_string(b) +
                                        " are numerically repeated across the index split; U_I is not unique");
            }
        }
    }
    return r;
}

} // namespace detail

/// Reduction of A by X = V_I, Y = U_I, which removes sum_{i in I} sigma_i u_i v_i^T.
inline Matrix svd_indexed_reduce(const Matrix& a, const IndexSet& i) {
    if (i.empty()) throw PreconditionError("svd_indexed_reduce: index set is empty");
    const SvdFactors f = svd(a);
    detail::require_indexable(f, i, "svd_indexed_reduce");
    const auto z = i.zero_based();
    return reduce(a, f.v.select_cols(z), f.u.select_cols(z));
}

/// Reduction by any X, Y with R(X) = R(V_I) and R(Y) = R(U_I); equal to svd_indexed_reduce(a, i).
inline Matrix range_matched_reduce(const Matrix& a, const Matrix& x, const Matrix& y, const IndexSet& i,
                                   double tol_sub = kSubspaceTol) {
    if (i.empty()) throw PreconditionError("range_matched_reduce: index set is empty");
    detail::require_reduction_shapes(a, x, y, "range_matched_reduce");
    const SvdFactors f = svd(a);
    detail::require_indexable(f, i, "range_matched_reduce");
    const auto z = i.zero_based();
    if (!subspaces_equal(range_basis(x), SubspaceBasis(f.v.select_cols(z)), tol_sub)) {
        throw PreconditionError("range_matched_reduce: R(X) != R(V_I)");
    }
    if (!subspaces_equal(range_basis(y), SubspaceBasis(f.u.select_cols(z)), tol_sub)) {
        throw PreconditionError("range_matched_reduce: R(Y) != R(U_I)");
    }
    return reduce(a, x, y);
}

struct ApproxReport {
    Matrix approx;
    double frob_error = 0.0;
    double spectral_error = 0.0;
    double optimal_frob_error = 0.0;  ///< sqrt(sum_{i > k} sigma_i^2)
    std::size_t k_kept = 0;
};

/// Best rank-k approximation obtained as the reduction of A by
/// X = V_I, Y = U_I with I = {k+1, ..., rank A}.
inline ApproxReport best_rank_k(const Matrix& a, std::size_t k) {
    const SvdFactors f = svd(a);
    const std::size_t r = f.rank();
    if (k > r) throw PreconditionError("best_rank_k: k = " + std::to_string(k) + " exceeds rank " + std::to_string(r));
    const auto z = IndexSet::range(k + 1, r).zero_based();

    ApproxReport rep;
    rep.approx = reduce(a, f.v.select_cols(z), f.u.select_cols(z));
    rep.k_kept = k;
    const Matrix err = a - rep.approx;
    rep.frob_error = frobenius_norm(err);
    rep.spectral_error = spectral_norm(err);
    double tail = 0.0;
    for (std::size_t i = k; i < f.sigma.size(); ++i) tail += f.sigma[i] * f.sigma[i];
    rep.optimal_frob_error = std::sqrt(tail);
    return rep;
}

struct CurResult {
    Matrix c;       ///< A(:, cols)
    Matrix u;       ///< A(rows, cols)
    Matrix r;       ///< A(rows, :)
    Matrix approx;  ///< C U^+ R
    double residual = 0.0;  ///< ||A - C U^+ R||_F
    std::size_t rank_u = 0;
    std::size_t rank_approx = 0;
};

/// CUR factorization as the Wedderburn decomposition with unit-vector X, Y.
inline CurResult cur_decompose(const Matrix& a, const IndexSet& rows, const IndexSet& cols) {
    if (rows.empty() || cols.empty()) throw PreconditionError("cur_decompose: empty index set");
    const Matrix x = selector(a.cols(), cols);
    const Matrix y = selector(a.rows(), rows);
    CurResult out;
    out.c = a * x;
    out.r = y.transpose() * a;
    out.u = out.r * x;
    out.approx = out.c * pinv(out.u) * out.r;
    out.residual = distance(a, out.approx);
    out.rank_u = numerical_rank(out.u);
    out.rank_approx = numerical_rank(out.approx);
    return out;
}

/// Generalized Nystrom sketch: X (n x s) and Y (m x (s + oversample)) with
/// i.i.d. uniform(-1, 1) entries from the seeded generator, X drawn first.
inline DecompositionReport nystrom_sketch(const Matrix& a, std::size_t sketch_cols, std::size_t oversample,
                                          std::uint64_t seed) {
    if (sketch_cols == 0) throw PreconditionError("nystrom_sketch: sketch size must be positive");
    Rng rng(seed);
    const Matrix x = random_matrix(a.cols(), sketch_cols, rng);
    const Matrix y = random_matrix(a.rows(), sketch_cols + oversample, rng);
    return decomposition_report(a, x, y);
}

struct CancellationReport {
    double left_residual = 0.0;   ///< ||AX (Y^T A X)^+ - A (Y^T A)^+||_F
    double left_scale = 0.0;      ///< max of the two norms
    double right_residual = 0.0;  ///< ||(Y^T A X)^+ Y^T A - (AX)^+ A||_F
    double right_scale = 0.0;
    bool left_hypothesis = false;   ///< rank AX = rank A and Y^T has full column rank
    bool right_hypothesis = false;  ///< rank Y^T A = rank A and X has full row rank

    double left_relative() const { return left_scale > 0.0 ? left_residual / left_scale : left_residual; }
    double right_relative() const { return right_scale > 0.0 ? right_residual / right_scale : right_residual; }
};

/// Measures the two cancellation identities and whether their hypotheses hold.
inline CancellationReport cancellation_check(const Matrix& a, const Matrix& x, const Matrix& y) {
    detail::require_reduction_shapes(a, x, y, "cancellation_check");
    const Matrix ax = a * x;
    const Matrix ya = y.transpose() * a;
    const Matrix mp = pinv(ya * x, detail::core_rank_tol(a, x, y));
    const std::size_t rank_a = numerical_rank(a);

    CancellationReport r;
    const Matrix l1 = ax * mp;
    const Matrix r1 = a * pinv(ya);
    r.left_residual = distance(l1, r1);
    r.left_scale = std::max(frobenius_norm(l1), frobenius_norm(r1));
    r.left_hypothesis = numerical_rank(ax) == rank_a && numerical_rank(y) == y.rows();

    const Matrix l2 = mp * ya;
    const Matrix r2 = pinv(ax) * a;
    r.right_residual = distance(l2, r2);
    r.right_scale = std::max(frobenius_norm(l2), frobenius_norm(r2));
    r.right_hypothesis = numerical_rank(ya) == rank_a && numerical_rank(x) == x.rows();
    return r;
}

} // namespace wedd
