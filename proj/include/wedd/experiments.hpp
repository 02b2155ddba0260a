#pragma once

// Seeded randomized experiments: the rank identity over random shapes and
// ranks, and ports of the MATLAB validation blocks (sparse sketch reduction,
// SVD-indexed reduction, Y augmentation, G insertion).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "wedd/core.hpp"
#include "wedd/lowrank.hpp"
#include "wedd/matrix.hpp"
#include "wedd/projector.hpp"
#include "wedd/random.hpp"
#include "wedd/wedderburn.hpp"

namespace wedd::experiments {

struct ReductionInstance {
    Matrix a;
    Matrix x;
    Matrix y;
};

/// Random A (m x n), X (n x p), Y (m x q) with m, n, p, q in [1, max_dim] and
/// independently drawn ranks in [0, min(dims)], entries uniform(-1, 1).
inline ReductionInstance random_reduction_instance(Rng& rng, std::size_t max_dim = 12) {
    const std::size_t m = rng.integer(1, max_dim);
    const std::size_t n = rng.integer(1, max_dim);
    const std::size_t p = rng.integer(1, max_dim);
    const std::size_t q = rng.integer(1, max_dim);
    const std::size_t ra = rng.integer(0, std::min(m, n));
    const std::size_t rx = rng.integer(0, std::min(n, p));
    const std::size_t ry = rng.integer(0, std::min(m, q));
    ReductionInstance inst;
    inst.a = random_low_rank(m, n, ra, rng);
    inst.x = random_low_rank(n, p, rx, rng);
    inst.y = random_low_rank(m, q, ry, rng);
    return inst;
}

struct RankTrial {
    std::size_t m = 0, n = 0, p = 0, q = 0;
    std::size_t rank_a = 0, k = 0, rank_b = 0;
    bool nullspace_split = false;
    bool transpose_duality = false;
    double two_inverse_rel = 0.0;      // ||B A^+ B - B|| / scale
    double pinv_reduction_rel = 0.0;   // ||A^+ B A^+ - reduce(A^+, AX, A^T Y)|| / scale

    /// |rank B - (rank A - k)|
    std::size_t deviation() const {
        const long d = static_cast<long>(rank_b) - (static_cast<long>(rank_a) - static_cast<long>(k));
        return static_cast<std::size_t>(d < 0 ? -d : d);
    }
};

/// One rank-identity trial; the instance is drawn from Rng(seed).
inline RankTrial rank_identity_trial(std::uint64_t seed, std::size_t max_dim = 12) {
    Rng rng(seed);
    const ReductionInstance inst = random_reduction_instance(rng, max_dim);
    const ReductionReport rep = generalized_reduce(inst.a, inst.x, inst.y);
    const AmeliShaddenReport as = ameli_shadden_identities(inst.a, inst.x, inst.y);

    RankTrial t;
    t.m = inst.a.rows();
    t.n = inst.a.cols();
    t.p = inst.x.cols();
    t.q = inst.y.cols();
    t.rank_a = rep.rank_a;
    t.k = rep.k;
    t.rank_b = rep.rank_b;
    t.nullspace_split = rep.nullspace_split;
    const Matrix bt = reduce(inst.a.transpose(), inst.y, inst.x);
    t.transpose_duality = distance(bt, rep.b.transpose()) <= kIdentityTol * std::max(1.0, frobenius_norm(inst.a));
    t.two_inverse_rel = as.two_inverse_residual / as.two_inverse_scale;
    t.pinv_reduction_rel = as.pinv_reduction_residual / as.pinv_reduction_scale;
    return t;
}

struct SparseBlockTrial {
    std::size_t rank_a = 0;
    std::size_t rank_m = 0;
    std::size_t rank_b = 0;
    long rank_check = 0;          // rank(B) - (rank(A) - rank(M)), B the reduction
    std::size_t regenerations = 0;  // sparse redraws needed to get rank(M) >= 1
};

/// The first MATLAB block: A = rand(200,20) rand(20,30), X = sprand(30,10,0.01),
/// Y = sprand(200,7,0.01). All-zero sketches make M = 0; those are redrawn.
inline SparseBlockTrial sparse_block_trial(std::uint64_t seed) {
    constexpr std::size_t m = 200, n = 30, p = 10, q = 7, r = 20;
    Rng rng(seed);
    const Matrix a = random_low_rank(m, n, r, rng, 0.0, 1.0);
    SparseBlockTrial t;
    Matrix x, y;
    while (true) {
        x = random_sparse(n, p, 0.01, rng);
        y = random_sparse(m, q, 0.01, rng);
        if (numerical_rank(y.transpose() * a * x) >= 1) break;
        ++t.regenerations;
    }
    const ReductionReport rep = generalized_reduce(a, x, y);
    t.rank_a = rep.rank_a;
    t.rank_m = rep.k;
    t.rank_b = rep.rank_b;
    t.rank_check = static_cast<long>(rep.rank_b) - (static_cast<long>(rep.rank_a) - static_cast<long>(rep.k));
    return t;
}

struct SvdIndexedTrial {
    std::size_t k = 0;
    std::vector<std::size_t> indices;  // 1-based
    double sigma_1 = 0.0;
    double term_residual = 0.0;     // ||AX (Y^T A X)^+ Y^T A - U_I S_II V_I^T||_F
    double sigma_deviation = 0.0;   // max |sigma_j(B) - expected_j|
    double range_matched_residual = 0.0;  // ||range_matched_reduce - svd_indexed_reduce||_F
};

/// The second MATLAB block: A = rand(15,7) rand(7,13), random I of size
/// k in [1, 6], X = V_I M, Y = U_I N with M, N uniform(0,1) of full row rank.
inline SvdIndexedTrial svd_indexed_trial(std::uint64_t seed) {
    constexpr std::size_t m = 15, n = 13, r = 7;
    Rng rng(seed);
    const Matrix a = random_low_rank(m, n, r, rng, 0.0, 1.0);
    const SvdFactors f = svd(a);

    SvdIndexedTrial t;
    t.k = rng.integer(1, r - 1);
    const auto perm = random_permutation(r, rng);
    std::vector<std::size_t> idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(t.k));
    std::sort(idx.begin(), idx.end());
    for (std::size_t& i : idx) ++i;
    t.indices = idx;
    const IndexSet set(idx);
    const auto z = set.zero_based();
    const Matrix ui = f.u.select_cols(z);
    const Matrix vi = f.v.select_cols(z);

    const std::size_t p = rng.integer(1, t.k);
    const std::size_t q = rng.integer(1, t.k);
    const Matrix mm = random_matrix(t.k, t.k + p, rng, 0.0, 1.0);
    const Matrix nn = random_matrix(t.k, t.k + q, rng, 0.0, 1.0);
    const Matrix x = vi * mm;
    const Matrix y = ui * nn;

    std::vector<double> s_i;
    for (std::size_t i : z) s_i.push_back(f.sigma[i]);
    const Matrix expected_term = ui * Matrix::diagonal(s_i) * vi.transpose();
    const Matrix ax = a * x;
    const Matrix ya = y.transpose() * a;
    const Matrix term = ax * pinv(ya * x) * ya;
    t.sigma_1 = f.sigma_max();
    t.term_residual = distance(term, expected_term);

    const Matrix b = a - term;
    std::vector<double> expected;
    for (std::size_t i = 0; i < f.sigma.size(); ++i)
        if (i >= r || !set.contains(i + 1)) expected.push_back(i < r ? f.sigma[i] : 0.0);
    while (expected.size() < f.sigma.size()) expected.push_back(0.0);
    std::sort(expected.rbegin(), expected.rend());
    const SvdFactors fb = svd(b);
    for (std::size_t i = 0; i < expected.size(); ++i)
        t.sigma_deviation = std::max(t.sigma_deviation, std::abs(fb.sigma[i] - expected[i]));

    t.range_matched_residual = distance(range_matched_reduce(a, x, y, set), svd_indexed_reduce(a, set));
    return t;
}

struct YAugmentTrial {
    double relative_difference = 0.0;  // ||B - BB||_F / ||B||_F
    bool hypothesis = false;           // rank(Y^T A X) = rank(Y^T A)
};

/// Y -> Y R with R uniform(0,1) of size q x 2q leaves (AX)(Y^T A X)^+(Y^T A)
/// unchanged whenever rank(Y^T A X) = rank(Y^T A). Dense X (30 x 10) and
/// Y (200 x 7) make that hold almost surely.
inline YAugmentTrial y_augment_trial(std::uint64_t seed) {
    constexpr std::size_t m = 200, n = 30, p = 10, q = 7, r = 20;
    Rng rng(seed);
    const Matrix a = random_low_rank(m, n, r, rng, 0.0, 1.0);
    const Matrix x = random_matrix(n, p, rng, 0.0, 1.0);
    const Matrix y = random_matrix(m, q, rng, 0.0, 1.0);
    const Matrix y2 = y * random_matrix(q, 2 * q, rng, 0.0, 1.0);

    const auto term = [&](const Matrix& yy) {
        const Matrix ya = yy.transpose() * a;
        return (a * x) * pinv(ya * x) * ya;
    };
    const Matrix b = term(y);
    const Matrix bb = term(y2);
    YAugmentTrial t;
    t.relative_difference = distance(b, bb) / std::max(frobenius_norm(b), 1e-300);
    const Matrix ya = y.transpose() * a;
    t.hypothesis = numerical_rank(ya * x) == numerical_rank(ya);
    return t;
}

struct MatrixPair {
    Matrix first;
    Matrix second;
};

/// A (m x p) and B (m x q) with m, p, q in [1, max_dim] and independently
/// drawn ranks, entries uniform(-1, 1). Input for oblique_projector(A, B).
inline MatrixPair random_projector_factors(Rng& rng, std::size_t max_dim = 12) {
    const std::size_t m = rng.integer(1, max_dim);
    const std::size_t p = rng.integer(1, max_dim);
    const std::size_t q = rng.integer(1, max_dim);
    const std::size_t ra = rng.integer(0, std::min(m, p));
    const std::size_t rb = rng.integer(0, std::min(m, q));
    return {random_low_rank(m, p, ra, rng), random_low_rank(m, q, rb, rng)};
}

/// Commuting projections P = S D1 S^-1, Q = S D2 S^-1 with random 0/1
/// diagonals D1, D2 and a random well-conditioned similarity S (n in [1, max_dim]).
inline std::pair<Projector, Projector> commuting_projector_pair(Rng& rng, std::size_t max_dim = 8) {
    const std::size_t n = rng.integer(1, max_dim);
    // I + uniform(-1,1)/(2n) is diagonally dominant, hence invertible.
    Matrix s = Matrix::identity(n) + (1.0 / (2.0 * static_cast<double>(n))) * random_matrix(n, n, rng);
    const Matrix s_inv = pinv(s);
    std::vector<double> d1(n), d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d1[i] = static_cast<double>(rng.integer(0, 1));
        d2[i] = static_cast<double>(rng.integer(0, 1));
    }
    return {Projector::from_matrix(s * Matrix::diagonal(d1) * s_inv),
            Projector::from_matrix(s * Matrix::diagonal(d2) * s_inv)};
}

/// Conformable A (m x n) and B (n x p) for reverse-order-law tests. The draw
/// cycles through regimes where the law holds (B = A^T, A with orthonormal
/// columns, B with orthonormal rows) and a generic one where it usually fails.
inline MatrixPair rol_pair(Rng& rng, std::size_t index, std::size_t max_dim = 8) {
    const std::size_t m = rng.integer(1, max_dim);
    const std::size_t n = rng.integer(1, max_dim);
    const std::size_t p = rng.integer(1, max_dim);
    const std::size_t ra = rng.integer(0, std::min(m, n));
    const std::size_t rb = rng.integer(0, std::min(n, p));
    switch (index % 4) {
    case 0: {
        const Matrix a = random_low_rank(m, n, ra, rng);
        return {a, a.transpose()};
    }
    case 1: {
        const std::size_t rows = std::max(m, n);
        const Matrix a = range_basis_of_rank(random_matrix(rows, n, rng), n).basis();
        return {a, random_low_rank(n, p, rb, rng)};
    }
    case 2: {
        const std::size_t cols = std::max(n, p);
        const Matrix b = range_basis_of_rank(random_matrix(cols, n, rng), n).basis().transpose();
        return {random_low_rank(m, n, ra, rng), b};
    }
    default:
        return {random_low_rank(m, n, ra, rng), random_low_rank(n, p, rb, rng)};
    }
}

/// Relative deviations ||T' - T||_F / ||T||_F of the four G-insertion
/// variants, T = AX (Y^T A X)^+ Y^T A, with uniform(0,1) 3x3 A, X, G and
/// the fixed rank-2 matrix [1 2 3; 4 5 6; 1 1 1]:
///   0: X -> XG   1: X -> GX   2: Y^T A -> Y^T G A   3: (fixed X) Y -> YG
inline std::array<double, 4> g_insertion_trial(std::uint64_t seed) {
    Rng rng(seed);
    const Matrix fixed{{1, 2, 3}, {4, 5, 6}, {1, 1, 1}};
    const auto term = [](const Matrix& a, const Matrix& x, const Matrix& yt, const Matrix& yta) {
        return a * x * pinv(yt * a * x) * yta;
    };
    std::array<double, 4> d{};
    {
        const Matrix a = random_matrix(3, 3, rng, 0.0, 1.0);
        const Matrix x = random_matrix(3, 3, rng, 0.0, 1.0);
        const Matrix g = random_matrix(3, 3, rng, 0.0, 1.0);
        const Matrix yt = fixed.transpose();
        const Matrix base = term(a, x, yt, yt * a);
        const double nb = frobenius_norm(base);
        d[0] = distance(a * x * g * pinv(yt * a * x * g) * yt * a, base) / nb;
        d[1] = distance(a * g * x * pinv(yt * a * g * x) * yt * a, base) / nb;
        d[2] = distance(a * x * pinv(yt * g * a * x) * yt * g * a, base) / nb;
    }
    {
        const Matrix a = random_matrix(3, 3, rng, 0.0, 1.0);
        const Matrix y = random_matrix(3, 3, rng, 0.0, 1.0);
        const Matrix g = random_matrix(3, 3, rng, 0.0, 1.0);
        const Matrix yt = y.transpose();
        const Matrix base = term(a, fixed, yt, yt * a);
        const Matrix gyt = g.transpose() * yt;
        d[3] = distance(term(a, fixed, gyt, gyt * a), base) / frobenius_norm(base);
    }
    return d;
}

} // namespace wedd::experiments
