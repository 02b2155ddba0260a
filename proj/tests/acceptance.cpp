// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "wedd/wedd.hpp"

using wedd::Matrix;
using wedd::Projector;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Matrix upper_shift(std::size_t n) {
    Matrix s(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) s(i, i + 1) = 1.0;
    return s;
}

// 1. rank B = rank A - rank(Y^T A X) over 200 random instances.
Outcome rank_identity() {
    std::size_t violations = 0, deficient_core = 0, nonsquare = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto t = wedd::experiments::rank_identity_trial(seed);
        violations += t.deviation() != 0 ? 1 : 0;
        deficient_core += t.k < std::min(t.p, t.q) ? 1 : 0;
        nonsquare += t.p != t.q ? 1 : 0;
    }
    return {violations == 0, fmt("violations %zu/200 (rank-deficient cores %zu, non-square cores %zu)", violations,
                                 deficient_core, nonsquare)};
}

// 2. The nilpotent and normal counterexamples.
Outcome golden_counterexamples() {
    const Matrix xn{{1}, {1}, {1}, {0}};
    const auto nil = wedd::generalized_reduce(upper_shift(4), xn, xn);
    const Matrix nil_expected = 0.5 * Matrix{{0, 1, -1, -1}, {0, -1, 1, -1}, {0, 0, 0, 2}, {0, 0, 0, 0}};
    const double nil_err = wedd::max_abs(nil.b - nil_expected);
    const std::size_t rank_b2 = wedd::numerical_rank(nil.b * nil.b);

    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
    const Matrix a = (1.0 / s6) * Matrix{{s3, 0, s3}, {-s2, s2, s2}, {1, 2, -1}};
    const Matrix x{{1}, {0}, {1}};
    const auto nor = wedd::generalized_reduce(a, x, x);
    const Matrix nor_expected = (1.0 / s6) * Matrix{{-1, -2, 1}, {-s2, s2, s2}, {1, 2, -1}};
    const double nor_err = wedd::max_abs(nor.b - nor_expected);
    const double commutator = wedd::distance(nor.b * nor.b.transpose(), nor.b.transpose() * nor.b);

    const bool ok = nil_err <= 1e-12 && rank_b2 > 0 && nor_err <= 1e-12 && commutator > 0.1;
    return {ok, fmt("nilpotent err %.2e rank(B^2) %zu; normal err %.2e ||BB^T-B^TB||_F %.3f", nil_err, rank_b2,
                    nor_err, commutator)};
}

// 3. Decomposition of rand(200,20) rand(20,30) with sparse-pattern sketches.
Outcome wedderburn_decomposition() {
    wedd::Rng rng(2024);
    const Matrix a = wedd::random_low_rank(200, 30, 20, rng, 0.0, 1.0);
    Matrix x, y;
    std::size_t draws = 0;
    do {
        x = wedd::random_sparse(30, 25, 0.1, rng);
        y = wedd::random_sparse(200, 24, 0.1, rng);
        ++draws;
    } while (wedd::numerical_rank(y.transpose() * a * x, wedd::detail::core_rank_tol(a, x, y)) != 20);
    const auto d = wedd::wedderburn_decompose(a, x, y);
    const double bound = 1e-8 * wedd::frobenius_norm(a);
    const auto rep = wedd::generalized_reduce(a, x, y);
    const long check = static_cast<long>(rep.rank_b) - (static_cast<long>(rep.rank_a) - static_cast<long>(rep.k));

    long worst_block = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        worst_block = std::max(worst_block, std::labs(wedd::experiments::sparse_block_trial(seed).rank_check));
    }
    const bool ok = d.reconstruction_residual <= bound && d.pinv_residual <= bound && check == 0 && worst_block == 0;
    return {ok, fmt("reconstruction %.2e pinv %.2e bound %.2e; rank(B)-(rank(A)-rank(M)) = %ld (%zu draws); "
                    "density-0.01 block worst %ld over 20 seeds",
                    d.reconstruction_residual, d.pinv_residual, bound, check, draws, worst_block)};
}

// 4. P = A (B^T A)^+ B^T over 200 random factor pairs.
Outcome projection_formula() {
    wedd::Rng rng(4);
    std::size_t idem = 0, trace_rank = 0, range = 0, nullsp = 0;
    for (int t = 0; t < 200; ++t) {
        const auto [a, b] = wedd::experiments::random_projector_factors(rng);
        const Projector p = wedd::oblique_projector(a, b);
        const Matrix& pm = p.matrix();
        idem += wedd::distance(pm * pm, pm) > wedd::idempotency_budget(pm, 1e-9) ? 1 : 0;
        const Matrix bt = b.transpose();
        const Matrix at = a.transpose();
        const std::size_t rank_core = wedd::numerical_rank(bt * a);
        trace_rank += std::lround(wedd::trace(pm)) != static_cast<long>(rank_core) ? 1 : 0;
        const auto r_gram = wedd::range_basis(a * at * b, wedd::product_rank_tol({a, at, b}));
        const auto n_gram = wedd::nullspace_basis(at * b * bt, wedd::product_rank_tol({at, b, bt}));
        range += wedd::subspaces_equal(p.range(), r_gram, 1e-8) ? 0 : 1;
        nullsp += wedd::subspaces_equal(p.nullspace(), n_gram, 1e-8) ? 0 : 1;
    }
    const bool ok = idem + trace_rank + range + nullsp == 0;
    return {ok, fmt("failures: idempotency %zu, trace/rank %zu, range %zu, nullspace %zu (of 200)", idem, trace_rank,
                    range, nullsp)};
}

// 5. SVD-indexed reduction with mixed sketches X = V_I M, Y = U_I N.
Outcome svd_indexed() {
    double term = 0.0, sigma = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto t = wedd::experiments::svd_indexed_trial(seed);
        term = std::max(term, t.term_residual / t.sigma_1);
        sigma = std::max(sigma, t.sigma_deviation);
    }
    return {term <= 1e-9 && sigma <= 1e-9,
            fmt("max term residual / sigma_1 %.2e, max singular value deviation %.2e (200 trials)", term, sigma)};
}

// 6. Frobenius error of best_rank_k equals the singular value tail.
Outcome eckart_young() {
    wedd::Rng rng(6);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = rng.integer(1, 12), n = rng.integer(1, 12);
        const Matrix a = wedd::random_low_rank(m, n, rng.integer(1, std::min(m, n)), rng);
        const auto f = wedd::svd(a);
        const std::size_t k = rng.integer(0, f.rank());
        const auto r = wedd::best_rank_k(a, k);
        double tail = 0.0;
        for (std::size_t i = k; i < f.sigma.size(); ++i) tail += f.sigma[i] * f.sigma[i];
        worst = std::max(worst, std::abs(r.frob_error - std::sqrt(tail)) / f.sigma_max());
    }
    return {worst <= 1e-9, fmt("max |error - tail| / sigma_1 %.2e over 50 instances", worst)};
}

// 7a. The cancellation identity fails for a rank-2 Y.
Outcome cancellation_counterexample() {
    const Matrix a{{1, 2, 1}, {2, 3, 2}, {1, 1, 2}};
    const Matrix y{{1, 4, 1}, {2, 5, 1}, {3, 6, 1}};
    const auto r = wedd::cancellation_check(a, a, y);
    return {r.left_relative() > 0.01, fmt("relative deviation %.4f (rank Y = %zu)", r.left_relative(),
                                          wedd::numerical_rank(y))};
}

// 7b. Every G-insertion variant changes the reduction by more than 1% across 20 seeds.
Outcome g_insertion() {
    std::size_t above = 0;
    double smallest = INFINITY;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (double d : wedd::experiments::g_insertion_trial(seed)) {
            above += d > 0.01 ? 1 : 0;
            smallest = std::min(smallest, d);
        }
    }
    return {above == 80, fmt("%zu/80 relative deviations > 0.01, smallest %.2e", above, smallest)};
}

// 8. Meet and join of commuting projections, plus the orthogonal specialization.
Outcome meet_join() {
    wedd::Rng rng(8);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const auto [p, q] = wedd::experiments::commuting_projector_pair(rng);
        const double scale = wedd::detail::lattice_scale(p, q);
        const Matrix& pm = p.matrix();
        const Matrix& qm = q.matrix();
        worst = std::max(worst, wedd::distance(wedd::join_by_theorem(p, q), pm + qm - pm * qm) / scale);
        worst = std::max(worst, wedd::distance(wedd::meet_by_theorem(p, q), pm * qm) / scale);
        wedd::join(p, q);
        wedd::meet(p, q);
    }
    double worst_orth = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = rng.integer(2, 8);
        const Matrix u = wedd::range_basis_of_rank(wedd::random_matrix(n, n, rng), n).basis();
        std::vector<double> d1(n), d2(n);
        for (std::size_t i = 0; i < n; ++i) {
            d1[i] = static_cast<double>(rng.integer(0, 1));
            d2[i] = static_cast<double>(rng.integer(0, 1));
        }
        const Projector p = Projector::from_matrix(u * Matrix::diagonal(d1) * u.transpose());
        const Projector q = Projector::from_matrix(u * Matrix::diagonal(d2) * u.transpose());
        const double scale = wedd::detail::lattice_scale(p, q);
        const Matrix s = p.matrix() + q.matrix();
        const Matrix pq = p.matrix() * q.matrix();
        worst_orth = std::max(worst_orth, wedd::distance(wedd::join(p, q).matrix(), s * wedd::pinv(s)) / scale);
        worst_orth = std::max(worst_orth, wedd::distance(wedd::meet(p, q).matrix(), pq * wedd::pinv(pq, wedd::product_rank_tol({p.matrix(), q.matrix()}))) / scale);
    }
    return {worst <= 1e-9 && worst_orth <= 1e-9,
            fmt("max relative mismatch %.2e (50 oblique pairs), %.2e (20 orthogonal pairs)", worst, worst_orth)};
}

// 9. B A^+ B = B and A^+ B A^+ = reduce(A^+, AX, A^T Y) on the criterion-1 instances.
Outcome ameli_shadden() {
    double two = 0.0, red = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto t = wedd::experiments::rank_identity_trial(seed);
        two = std::max(two, t.two_inverse_rel);
        red = std::max(red, t.pinv_reduction_rel);
    }
    return {two <= 1e-9 && red <= 1e-9, fmt("max relative residuals %.2e (B A^+ B), %.2e (A^+ B A^+)", two, red)};
}

// 10. The reverse-order-law characterizations never disagree.
Outcome rol_consistency() {
    wedd::Rng rng(10);
    std::size_t disagreements = 0, holds = 0;
    for (std::size_t t = 0; t < 200; ++t) {
        const auto [a, b] = wedd::experiments::rol_pair(rng, t);
        const auto c = wedd::rol_projector_classification(a, b);
        disagreements += c.consistent() ? 0 : 1;
        holds += c.rol ? 1 : 0;
        try {
            wedd::reverse_order_law_holds(a, b);
        } catch (const wedd::ConsistencyError&) {
            ++disagreements;
        }
    }
    return {disagreements == 0, fmt("disagreements %zu/200 (law holds in %zu)", disagreements, holds)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1  rank identity", rank_identity},
        {"2  golden counterexamples", golden_counterexamples},
        {"3  wedderburn decomposition", wedderburn_decomposition},
        {"4  projection formula", projection_formula},
        {"5  svd-indexed reduction", svd_indexed},
        {"6  eckart-young", eckart_young},
        {"7a cancellation counterexample", cancellation_counterexample},
        {"7b g-insertion non-invariance", g_insertion},
        {"8  meet/join", meet_join},
        {"9  ameli-shadden", ameli_shadden},
        {"10 reverse order law consistency", rol_consistency},
    };
    const auto start = std::chrono::steady_clock::now();
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.passed ? 0 : 1;
        std::printf("%s  %-34s %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of %zu criteria failed (%.1f s)\n", failed, criteria.size(), secs);
    return failed == 0 ? 0 : 1;
}
