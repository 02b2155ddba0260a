#include <gtest/gtest.h>

#include <filesystem>

#include "cli_app.hpp"

using wedd::Matrix;
using wedd::cli::Command;
using wedd::cli::RunConfig;

namespace {

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "wedd_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path write(const std::string& name, const Matrix& a) {
    const auto path = scratch_dir() / name;
    wedd::write_matrix(a, path, wedd::format_from_path(path));
    return path;
}

Matrix upper_shift(std::size_t n) {
    Matrix s(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) s(i, i + 1) = 1.0;
    return s;
}

RunConfig config(Command c) {
    RunConfig cfg;
    cfg.command = c;
    return cfg;
}

nlohmann::json without_time(nlohmann::json j) {
    j.erase("wall_time_s");
    return j;
}

} // namespace

TEST(Cli, CheckWedderburnSeedSeven) {
    RunConfig cfg = config(Command::check);
    cfg.suite = "wedderburn";
    cfg.seed = 7;
    const auto r = wedd::cli::run(cfg);
    EXPECT_EQ(r.exit_code, 0) << r.report.dump(2);
    const auto& s = r.report["suites"]["wedderburn"];
    EXPECT_EQ(s["trials"], 200);
    EXPECT_EQ(s["max_rank_deviation"], 0);
    EXPECT_EQ(s["sparse_block"]["rank_check"], 0);
    EXPECT_EQ(r.report["rng"], "splitmix64");
}

TEST(Cli, CheckYAugmentSeedThree) {
    RunConfig cfg = config(Command::check);
    cfg.suite = "y-augment";
    cfg.seed = 3;
    const auto r = wedd::cli::run(cfg);
    EXPECT_EQ(r.exit_code, 0) << r.report.dump(2);
    EXPECT_LE(r.report["suites"]["y-augment"]["max_relative_difference"].get<double>(), 1e-9);
}

TEST(Cli, CheckIsDeterministicApartFromWallTime) {
    RunConfig cfg = config(Command::check);
    cfg.seed = 11;
    cfg.trials = 10;
    const auto r1 = wedd::cli::run(cfg);
    const auto r2 = wedd::cli::run(cfg);
    EXPECT_EQ(without_time(r1.report).dump(), without_time(r2.report).dump());
    EXPECT_TRUE(r1.report.contains("wall_time_s"));
}

TEST(Cli, UnknownSuiteIsUsageError) {
    RunConfig cfg = config(Command::check);
    cfg.suite = "bogus";
    EXPECT_EQ(wedd::cli::run(cfg).exit_code, 1);
}

TEST(Cli, NonPositiveToleranceIsUsageError) {
    RunConfig cfg = config(Command::check);
    cfg.tol = 0.0;
    EXPECT_EQ(wedd::cli::run(cfg).exit_code, 1);
}

TEST(Cli, ReduceEmitsNilpotentGolden) {
    RunConfig cfg = config(Command::reduce);
    cfg.inputs = {write("shift.mtx", upper_shift(4))};
    const Matrix x{{1}, {1}, {1}, {0}};
    cfg.x_path = write("x.mtx", x);
    cfg.y_path = write("y.csv", x);
    cfg.out = scratch_dir() / "b.mtx";
    const auto r = wedd::cli::run(cfg);
    ASSERT_EQ(r.exit_code, 0) << r.report.dump(2);
    const Matrix b = wedd::read_matrix(*cfg.out);
    const Matrix expected = 0.5 * Matrix{{0, 1, -1, -1}, {0, -1, 1, -1}, {0, 0, 0, 2}, {0, 0, 0, 0}};
    EXPECT_LE(wedd::max_abs(b - expected), 1e-12);
    EXPECT_EQ(r.report["ranks"]["A"], 3);
    EXPECT_EQ(r.report["ranks"]["B"], 2);
    EXPECT_TRUE(r.report["checks"]["roundtrip"]["passed"].get<bool>());
}

TEST(Cli, MissingInputIsUsageError) {
    RunConfig cfg = config(Command::pinv);
    cfg.inputs = {scratch_dir() / "does_not_exist.mtx"};
    const auto r = wedd::cli::run(cfg);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_TRUE(r.report.contains("error"));
    EXPECT_FALSE(r.report["passed"].get<bool>());
}

TEST(Cli, ShapeMismatchIsUsageError) {
    RunConfig cfg = config(Command::reduce);
    cfg.inputs = {write("a33.mtx", Matrix::identity(3))};
    cfg.x_path = write("x2.mtx", Matrix(2, 1, 1.0));
    cfg.y_path = write("y3.mtx", Matrix(3, 1, 1.0));
    EXPECT_EQ(wedd::cli::run(cfg).exit_code, 1);
}

TEST(Cli, DecomposeRankDeficientIsAssertionFailure) {
    RunConfig cfg = config(Command::decompose);
    cfg.inputs = {write("a_dec.mtx", Matrix::identity(3))};
    cfg.x_path = write("x_dec.mtx", Matrix(3, 1, 1.0));
    cfg.y_path = write("y_dec.mtx", Matrix(3, 1, 1.0));
    const auto r = wedd::cli::run(cfg);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_TRUE(r.report.contains("error"));
}

TEST(Cli, DecomposeEmitsFactorsThatReproduceA) {
    wedd::Rng rng(3);
    const Matrix a = wedd::random_low_rank(8, 6, 3, rng);
    RunConfig cfg = config(Command::decompose);
    cfg.inputs = {write("a_lr.mtx", a)};
    cfg.x_path = write("x_lr.mtx", wedd::random_matrix(6, 4, rng));
    cfg.y_path = write("y_lr.mtx", wedd::random_matrix(8, 3, rng));
    cfg.out = scratch_dir() / "dec.mtx";
    const auto r = wedd::cli::run(cfg);
    ASSERT_EQ(r.exit_code, 0) << r.report.dump(2);
    const Matrix ax = wedd::read_matrix(scratch_dir() / "dec_ax.mtx");
    const Matrix core = wedd::read_matrix(scratch_dir() / "dec_core_pinv.mtx");
    const Matrix ya = wedd::read_matrix(scratch_dir() / "dec_ya.mtx");
    EXPECT_LE(wedd::distance(ax * core * ya, a), 1e-9 * wedd::frobenius_norm(a));
}

TEST(Cli, PinvAndBestkPass) {
    wedd::Rng rng(4);
    const auto path = write("a_rand.csv", wedd::random_matrix(6, 4, rng));
    RunConfig p = config(Command::pinv);
    p.inputs = {path};
    p.format = wedd::MatrixFormat::csv;
    p.out = scratch_dir() / "g.csv";
    EXPECT_EQ(wedd::cli::run(p).exit_code, 0);
    EXPECT_EQ(wedd::read_matrix(*p.out).rows(), 4u);
    RunConfig b = config(Command::bestk);
    b.inputs = {path};
    b.k = 2;
    EXPECT_EQ(wedd::cli::run(b).exit_code, 0);
    b.k = 5;
    EXPECT_EQ(wedd::cli::run(b).exit_code, 2);
}

TEST(Cli, CurAndNystromPass) {
    wedd::Rng rng(5);
    const auto path = write("a_cur.mtx", wedd::random_low_rank(8, 7, 3, rng));
    RunConfig c = config(Command::cur);
    c.inputs = {path};
    c.rows = {1, 4, 6};
    c.cols = {2, 3, 7};
    const auto rc = wedd::cli::run(c);
    EXPECT_EQ(rc.exit_code, 0) << rc.report.dump(2);
    RunConfig n = config(Command::nystrom);
    n.inputs = {path};
    n.sketch = 3;
    n.oversample = 2;
    n.seed = 9;
    const auto rn = wedd::cli::run(n);
    EXPECT_EQ(rn.exit_code, 0) << rn.report.dump(2);
}

TEST(Cli, ProjectAndMeetJoinPass) {
    wedd::Rng rng(6);
    RunConfig p = config(Command::project);
    p.inputs = {write("pa.mtx", wedd::random_matrix(5, 2, rng)), write("pb.mtx", wedd::random_matrix(5, 3, rng))};
    const auto rp = wedd::cli::run(p);
    EXPECT_EQ(rp.exit_code, 0) << rp.report.dump(2);
    RunConfig mj = config(Command::meetjoin);
    mj.inputs = {write("p.mtx", Matrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}), write("q.mtx", Matrix{{0, 0, 0}, {0, 1, 0}, {0, 0, 0}})};
    mj.out = scratch_dir() / "mj.mtx";
    const auto rm = wedd::cli::run(mj);
    ASSERT_EQ(rm.exit_code, 0) << rm.report.dump(2);
    EXPECT_EQ(wedd::read_matrix(scratch_dir() / "mj_join.mtx"), (Matrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}));
}

TEST(Cli, MeetJoinNonCommutingIsAssertionFailure) {
    RunConfig mj = config(Command::meetjoin);
    mj.inputs = {write("p2.mtx", Matrix{{1, 0}, {0, 0}}), write("q2.mtx", Matrix{{0.5, 0.5}, {0.5, 0.5}})};
    EXPECT_EQ(wedd::cli::run(mj).exit_code, 2);
}
