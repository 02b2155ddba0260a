#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wedd/experiments.hpp"
#include "wedd/lowrank.hpp"

using wedd::IndexSet;
using wedd::Matrix;

namespace {

const Matrix kD{{3, 0, 0}, {0, 2, 0}, {0, 0, 1}};

Matrix rank_k_tail(const wedd::SvdFactors& f, const std::vector<std::size_t>& keep) {
    Matrix s(f.rows(), f.cols());
    for (std::size_t i : keep) s(i, i) = f.sigma[i];
    return f.u * s * f.v.transpose();
}

} // namespace

TEST(IndexSet, Validation) {
    EXPECT_THROW(IndexSet({0, 1}), wedd::PreconditionError);
    EXPECT_THROW(IndexSet({2, 2}), wedd::PreconditionError);
    EXPECT_THROW(IndexSet({3, 1}), wedd::PreconditionError);
    const IndexSet s({2, 4});
    EXPECT_EQ(s.zero_based(), (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(s.complement(5).values(), (std::vector<std::size_t>{1, 3, 5}));
    EXPECT_TRUE(IndexSet::range(3, 2).empty());
}

TEST(Selector, UnitColumnsAndBounds) {
    const Matrix s = wedd::selector(3, IndexSet({1, 3}));
    EXPECT_EQ(s, (Matrix{{1, 0}, {0, 0}, {0, 1}}));
    EXPECT_THROW(wedd::selector(2, IndexSet({3})), wedd::PreconditionError);
}

TEST(SvdIndexed, FullIndexSetGivesZero) {
    wedd::Rng rng(1);
    const Matrix a = wedd::random_low_rank(6, 5, 3, rng);
    EXPECT_LE(wedd::frobenius_norm(wedd::svd_indexed_reduce(a, IndexSet::range(1, 3))), 1e-12);
}

TEST(SvdIndexed, DiagonalFirstIndex) {
    EXPECT_LE(wedd::distance(wedd::svd_indexed_reduce(kD, IndexSet({1})), Matrix{{0, 0, 0}, {0, 2, 0}, {0, 0, 1}}), 1e-14);
}

TEST(SvdIndexed, RemovesIndexedTerms) {
    wedd::Rng rng(2);
    const Matrix a = wedd::random_low_rank(15, 13, 7, rng, 0.0, 1.0);
    const auto f = wedd::svd(a);
    const Matrix b = wedd::svd_indexed_reduce(a, IndexSet({2, 5, 6}));
    EXPECT_LE(wedd::distance(b, rank_k_tail(f, {0, 2, 3, 6})), 1e-9 * f.sigma_max());
}

TEST(SvdIndexed, Errors) {
    EXPECT_THROW(wedd::svd_indexed_reduce(kD, IndexSet{}), wedd::PreconditionError);
    EXPECT_THROW(wedd::svd_indexed_reduce(kD, IndexSet({4})), wedd::PreconditionError);
    EXPECT_THROW(wedd::svd_indexed_reduce(Matrix::identity(3), IndexSet({1})), wedd::PreconditionError);
}

TEST(RangeMatched, RandomMixingMatchesIndexedReduction) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto t = wedd::experiments::svd_indexed_trial(seed);
        EXPECT_LE(t.term_residual, 1e-9 * t.sigma_1);
        EXPECT_LE(t.sigma_deviation, 1e-9);
        EXPECT_LE(t.range_matched_residual, 1e-9 * t.sigma_1);
    }
}

TEST(RangeMatched, IdentityMixing) {
    wedd::Rng rng(3);
    const Matrix a = wedd::random_low_rank(8, 6, 4, rng);
    const auto f = wedd::svd(a);
    const IndexSet i({1, 3});
    const auto z = i.zero_based();
    EXPECT_LE(wedd::distance(wedd::range_matched_reduce(a, f.v.select_cols(z), f.u.select_cols(z), i),
                             wedd::svd_indexed_reduce(a, i)),
              1e-12);
}

TEST(RangeMatched, RankDeficientMixingRejected) {
    wedd::Rng rng(4);
    const Matrix a = wedd::random_low_rank(8, 6, 4, rng);
    const auto f = wedd::svd(a);
    const IndexSet i({1, 2});
    const auto z = i.zero_based();
    const Matrix row = wedd::random_matrix(1, 3, rng);
    const Matrix m = wedd::vstack(row, row);
    const Matrix n = wedd::random_matrix(2, 3, rng);
    EXPECT_THROW(wedd::range_matched_reduce(a, f.v.select_cols(z) * m, f.u.select_cols(z) * n, i),
                 wedd::PreconditionError);
}

TEST(BestRankK, FullRankKeepsA) {
    wedd::Rng rng(5);
    const Matrix a = wedd::random_low_rank(6, 5, 3, rng);
    const auto r = wedd::best_rank_k(a, 3);
    EXPECT_LE(r.frob_error, 1e-12);
    EXPECT_LE(wedd::distance(r.approx, a), 1e-12);
}

TEST(BestRankK, ZeroGivesZero) {
    wedd::Rng rng(6);
    const Matrix a = wedd::random_matrix(4, 4, rng);
    const auto r = wedd::best_rank_k(a, 0);
    EXPECT_LE(wedd::frobenius_norm(r.approx), 1e-12);
    EXPECT_NEAR(r.frob_error, wedd::frobenius_norm(a), 1e-12);
}

TEST(BestRankK, DiagonalTail) {
    const auto r = wedd::best_rank_k(kD, 2);
    EXPECT_NEAR(r.frob_error, 1.0, 1e-14);
    EXPECT_NEAR(r.spectral_error, 1.0, 1e-14);
    EXPECT_NEAR(r.optimal_frob_error, 1.0, 1e-14);
}

TEST(BestRankK, KAboveRankRejected) {
    EXPECT_THROW(wedd::best_rank_k(Matrix{{1, 0}, {0, 0}}, 2), wedd::PreconditionError);
}

TEST(Cur, RankOneSinglePivot) {
    wedd::Rng rng(7);
    const Matrix a = wedd::random_matrix(5, 1, rng, 0.5, 1.0) * wedd::random_matrix(1, 4, rng, 0.5, 1.0);
    const auto c = wedd::cur_decompose(a, IndexSet({3}), IndexSet({2}));
    EXPECT_LE(c.residual, 1e-12);
    EXPECT_EQ(c.rank_u, 1u);
}

TEST(Cur, IndependentRowsAndColumnsExact) {
    wedd::Rng rng(8);
    const Matrix a = wedd::random_low_rank(8, 7, 3, rng);
    const IndexSet rows({1, 4, 6}), cols({2, 3, 7});
    const Matrix u = a.select_rows(rows.zero_based()).select_cols(cols.zero_based());
    ASSERT_GT(std::abs(oracle::cofactor_det(u)), 1e-6);
    const auto c = wedd::cur_decompose(a, rows, cols);
    EXPECT_LE(c.residual, 1e-10 * wedd::frobenius_norm(a));
    EXPECT_EQ(c.c, a.select_cols(cols.zero_based()));
    EXPECT_EQ(c.r, a.select_rows(rows.zero_based()));
}

TEST(Cur, TooFewColumnsLeavesResidual) {
    wedd::Rng rng(9);
    const Matrix a = wedd::random_low_rank(8, 7, 3, rng);
    const auto c = wedd::cur_decompose(a, IndexSet({1, 2, 3}), IndexSet({1, 2}));
    EXPECT_GT(c.residual, 1e-6);
    EXPECT_EQ(c.rank_approx, c.rank_u);
    EXPECT_EQ(c.rank_u, 2u);
}

TEST(Cur, EmptyOrOutOfRangeRejected) {
    EXPECT_THROW(wedd::cur_decompose(kD, IndexSet{}, IndexSet({1})), wedd::PreconditionError);
    EXPECT_THROW(wedd::cur_decompose(kD, IndexSet({1}), IndexSet({4})), wedd::PreconditionError);
}

TEST(Nystrom, ExactWhenSketchCoversRank) {
    wedd::Rng rng(10);
    const Matrix a = wedd::random_low_rank(20, 15, 5, rng);
    const auto d = wedd::nystrom_sketch(a, 5, 2, 99);
    EXPECT_EQ(d.rank_m, 5u);
    EXPECT_LE(d.reconstruction_residual, 1e-8 * wedd::frobenius_norm(a));
}

TEST(Nystrom, SmallSketchBoundedBelowByNextSingularValue) {
    wedd::Rng rng(11);
    const Matrix a = wedd::random_low_rank(20, 15, 6, rng);
    const auto f = wedd::svd(a);
    for (std::size_t s = 1; s < 6; ++s) {
        const auto d = wedd::nystrom_sketch(a, s, 1, s);
        EXPECT_GE(d.reconstruction_residual, f.sigma[s] - 1e-9) << "s = " << s;
    }
}

TEST(Nystrom, DeterministicPerSeed) {
    wedd::Rng rng(12);
    const Matrix a = wedd::random_matrix(9, 7, rng);
    const auto d1 = wedd::nystrom_sketch(a, 3, 2, 5);
    const auto d2 = wedd::nystrom_sketch(a, 3, 2, 5);
    EXPECT_EQ(d1.ax, d2.ax);
    EXPECT_EQ(d1.ya, d2.ya);
    EXPECT_EQ(d1.reconstruction_residual, d2.reconstruction_residual);
    EXPECT_THROW(wedd::nystrom_sketch(a, 0, 2, 5), wedd::PreconditionError);
}

TEST(Cancellation, RankDeficientSketchBreaksIdentity) {
    const Matrix a{{1, 2, 1}, {2, 3, 2}, {1, 1, 2}};
    const Matrix y{{1, 4, 1}, {2, 5, 1}, {3, 6, 1}};
    const auto r = wedd::cancellation_check(a, a, y);
    EXPECT_FALSE(r.left_hypothesis);
    EXPECT_GT(r.left_relative(), 0.01);
}

TEST(Cancellation, InvertibleSketchesHold) {
    wedd::Rng rng(13);
    const Matrix a = wedd::random_low_rank(4, 4, 2, rng);
    const Matrix x = wedd::random_matrix(4, 4, rng);
    const Matrix y = wedd::random_matrix(4, 4, rng);
    const auto r = wedd::cancellation_check(a, x, y);
    EXPECT_TRUE(r.left_hypothesis);
    EXPECT_TRUE(r.right_hypothesis);
    EXPECT_LE(r.left_relative(), 1e-9);
    EXPECT_LE(r.right_relative(), 1e-9);
}

TEST(Cancellation, IdentitySketchTrivial) {
    wedd::Rng rng(14);
    const Matrix a = wedd::random_matrix(4, 3, rng);
    const auto r = wedd::cancellation_check(a, Matrix::identity(3), wedd::random_matrix(4, 4, rng));
    EXPECT_LE(r.left_relative(), 1e-9);
}
