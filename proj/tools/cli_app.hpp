#pragma once

// Command implementations behind the wedd executable. Kept separate from
// argument parsing so tests can drive run() directly.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wedd/wedd.hpp"

namespace wedd::cli {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAssertion = 2;

enum class Command { pinv, reduce, decompose, cur, nystrom, bestk, project, meetjoin, check };

inline const char* command_name(Command c) {
    switch (c) {
    case Command::pinv: return "pinv";
    case Command::reduce: return "reduce";
    case Command::decompose: return "decompose";
    case Command::cur: return "cur";
    case Command::nystrom: return "nystrom";
    case Command::bestk: return "bestk";
    case Command::project: return "project";
    case Command::meetjoin: return "meetjoin";
    case Command::check: return "check";
    }
    return "?";
}

struct RunConfig {
    Command command = Command::check;
    std::vector<std::filesystem::path> inputs;  ///< positional matrices
    std::optional<std::filesystem::path> x_path;
    std::optional<std::filesystem::path> y_path;
    std::vector<std::size_t> rows;  ///< 1-based, cur
    std::vector<std::size_t> cols;  ///< 1-based, cur
    std::size_t k = 0;              ///< bestk
    std::size_t sketch = 0;         ///< nystrom
    std::size_t oversample = 0;     ///< nystrom
    std::string suite = "all";      ///< check
    std::optional<std::size_t> trials;  ///< check; per-suite default when unset
    double tol = 1e-9;      ///< relative tolerance for asserted residuals
    double tol_sub = kSubspaceTol;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
    MatrixFormat format = MatrixFormat::matrix_market;
};

struct RunResult {
    int exit_code = kExitOk;
    nlohmann::json report;
};

namespace detail {

inline nlohmann::json shape(const Matrix& a) { return nlohmann::json::array({a.rows(), a.cols()}); }

/// out = "dir/name.ext", suffix "ax" -> "dir/name_ax.ext".
inline std::filesystem::path suffixed(const std::filesystem::path& out, const std::string& suffix) {
    if (suffix.empty()) return out;
    std::filesystem::path p = out;
    p.replace_filename(out.stem().string() + "_" + suffix + out.extension().string());
    return p;
}

class Session {
public:
    explicit Session(const RunConfig& cfg) : cfg_(cfg) {}

    nlohmann::json& report() { return report_; }
    bool passed() const { return passed_; }

    /// Records value <= bound as a named check.
    void check_le(const std::string& name, double value, double bound) {
        record(name, value <= bound, value, bound);
    }

    /// Records value > bound as a named check.
    void check_gt(const std::string& name, double value, double bound) {
        record(name, value > bound, value, bound);
    }

    void check_true(const std::string& name, bool ok) {
        report_["checks"][name] = {{"passed", ok}};
        passed_ = passed_ && ok;
    }

    void residual(const std::string& name, double value) { report_["residuals"][name] = value; }
    void rank(const std::string& name, std::size_t value) { report_["ranks"][name] = value; }

    Matrix load(const std::filesystem::path& path, const std::string& name) {
        Matrix a = read_matrix(path);
        report_["shapes"][name] = shape(a);
        return a;
    }

    /// Writes a to --out (with suffix) if given, then re-reads it and checks
    /// that the file reproduces the in-memory matrix exactly.
    void emit(const Matrix& a, const std::string& suffix) {
        if (!cfg_.out) return;
        const std::filesystem::path path = suffixed(*cfg_.out, suffix);
        write_matrix(a, path, cfg_.format);
        const Matrix back = read_matrix(path, cfg_.format);
        report_["outputs"].push_back(path.string());
        check_le("roundtrip" + (suffix.empty() ? std::string() : "_" + suffix),
                 same_shape(a, back) ? distance(a, back) : INFINITY, 0.0);
    }

private:
    void record(const std::string& name, bool ok, double value, double bound) {
        report_["checks"][name] = {{"passed", ok}, {"value", value}, {"bound", bound}};
        passed_ = passed_ && ok;
    }

    const RunConfig& cfg_;
    nlohmann::json report_ = nlohmann::json::object();
    bool passed_ = true;
};

inline void require_input(const RunConfig& cfg, std::size_t count) {
    if (cfg.inputs.size() != count) {
        throw ShapeError(std::string(command_name(cfg.command)) + ": expected " + std::to_string(count) +
                         " input matrix path(s), got " + std::to_string(cfg.inputs.size()));
    }
}

inline std::vector<double> singular_values(const Matrix& a) { return a.empty() ? std::vector<double>{} : svd(a).sigma; }

inline double kappa(double norm, double pinv_norm) { return std::max(1.0, norm * pinv_norm); }

inline void run_pinv(const RunConfig& cfg, Session& s) {
    require_input(cfg, 1);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const SvdFactors f = a.empty() ? SvdFactors{} : svd(a);
    const Matrix g = pinv(a);
    const PenroseResiduals r = penrose_check(a, g);
    const double na = frobenius_norm(a);
    const double ng = frobenius_norm(g);
    const double k = kappa(na, ng);
    s.rank("A", a.empty() ? 0 : f.rank());
    s.report()["singular_values"] = f.sigma;
    s.residual("aga_minus_a", r.aga);
    s.residual("gag_minus_g", r.gag);
    s.residual("ag_asymmetry", r.ag_sym);
    s.residual("ga_asymmetry", r.ga_sym);
    s.check_le("aga_minus_a", r.aga, cfg.tol * std::max(1.0, na) * k);
    s.check_le("gag_minus_g", r.gag, cfg.tol * std::max(1.0, ng) * k);
    s.check_le("ag_asymmetry", r.ag_sym, cfg.tol * k);
    s.check_le("ga_asymmetry", r.ga_sym, cfg.tol * k);
    s.emit(g, "");
}

inline std::pair<Matrix, Matrix> load_xy(const RunConfig& cfg, Session& s) {
    if (!cfg.x_path || !cfg.y_path) {
        throw ShapeError(std::string(command_name(cfg.command)) + ": --x and --y are required");
    }
    return {s.load(*cfg.x_path, "X"), s.load(*cfg.y_path, "Y")};
}

inline void run_reduce(const RunConfig& cfg, Session& s) {
    require_input(cfg, 1);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const auto [x, y] = load_xy(cfg, s);
    const ReductionReport rep = generalized_reduce(a, x, y);
    const wedd::detail::ReductionParts parts = wedd::detail::reduction_parts(a, x, y);
    const AmeliShaddenReport as = ameli_shadden_identities(a, x, y);

    s.rank("A", rep.rank_a);
    s.rank("M", rep.k);
    s.rank("B", rep.rank_b);
    s.report()["k"] = rep.k;
    s.report()["rank_tol_b"] = rep.rank_tol_b;
    s.report()["singular_values"] = singular_values(rep.b);
    for (const auto& [name, value] : rep.residuals) s.residual(name, value);
    s.residual("two_inverse", as.two_inverse_residual);
    s.residual("pinv_reduction", as.pinv_reduction_residual);

    const double scale = std::max(
        1.0, frobenius_norm(a) + frobenius_norm(parts.ax) * parts.m_pinv_norm * frobenius_norm(parts.ya));
    const long deviation = static_cast<long>(rep.rank_b) - (static_cast<long>(rep.rank_a) - static_cast<long>(rep.k));
    s.check_le("rank_identity_deviation", static_cast<double>(std::labs(deviation)), 0.0);
    s.check_true("nullspace_split", rep.nullspace_split);
    s.check_le("b_vs_left_projection", rep.residuals.at("b_vs_left_projection"), cfg.tol * scale);
    s.check_le("b_vs_right_projection", rep.residuals.at("b_vs_right_projection"), cfg.tol * scale);
    s.check_le("two_inverse", as.two_inverse_residual, cfg.tol * as.two_inverse_scale);
    s.check_le("pinv_reduction", as.pinv_reduction_residual, cfg.tol * as.pinv_reduction_scale);
    s.emit(rep.b, "");
}

// Bound for ||A^+ - (Y^T A)^+ M (AX)^+||: pseudoinverse forward error grows
// like kappa(A)^2 ||A^+||.
inline double pinv_bound_scale(const Matrix& a) {
    if (a.empty()) return 1.0;
    const SvdFactors f = svd(a);
    const std::size_t r = f.rank();
    if (r == 0) return 1.0;
    const double k = f.sigma_max() / f.sigma[r - 1];
    return std::max(1.0, 1.0 / f.sigma[r - 1]) * k * k;
}

inline void report_decomposition(const RunConfig& cfg, Session& s, const Matrix& a, const DecompositionReport& d,
                                 bool assert_exact) {
    const Matrix m_pinv = pinv(d.m, d.rank_tol_m);
    s.rank("A", d.rank_a);
    s.rank("M", d.rank_m);
    s.report()["k"] = d.rank_m;
    s.residual("reconstruction", d.reconstruction_residual);
    s.residual("pinv_factorization", d.pinv_residual);
    s.report()["exact_regime"] = d.rank_m == d.rank_a;
    if (assert_exact) {
        const double scale =
            std::max(1.0, frobenius_norm(d.ax) * spectral_norm(m_pinv) * frobenius_norm(d.ya)) + frobenius_norm(a);
        s.check_le("reconstruction", d.reconstruction_residual, cfg.tol * scale);
        s.check_le("pinv_factorization", d.pinv_residual, cfg.tol * pinv_bound_scale(a));
    }
}

inline void run_decompose(const RunConfig& cfg, Session& s) {
    require_input(cfg, 1);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const auto [x, y] = load_xy(cfg, s);
    const DecompositionReport d = wedderburn_decompose(a, x, y);
    report_decomposition(cfg, s, a, d, true);
    s.emit(d.ax, "ax");
    s.emit(pinv(d.m, d.rank_tol_m), "core_pinv");
    s.emit(d.ya, "ya");
}

inline void run_cur(const RunConfig& cfg, Session& s) {
    require_input(cfg, 1);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const CurResult c = cur_decompose(a, IndexSet(cfg.rows), IndexSet(cfg.cols));
    const std::size_t rank_a = numerical_rank(a);
    s.rank("A", rank_a);
    s.rank("U", c.rank_u);
    s.rank("CUR", c.rank_approx);
    s.report()["k"] = c.rank_u;
    s.residual("cur", c.residual);
    s.report()["exact_regime"] = c.rank_u == rank_a;
    if (c.rank_u == rank_a) {
        const Matrix up = pinv(c.u);
        s.check_le("cur", c.residual,
                   cfg.tol * std::max(1.0, frobenius_norm(a)) * kappa(frobenius_norm(c.u), frobenius_norm(up)));
    }
    s.emit(c.c, "c");
    s.emit(c.u, "u");
    s.emit(c.r, "r");
}

inline void run_nystrom(const RunConfig& cfg, Session& s) {
    require_input(cfg, 1);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const DecompositionReport d = nystrom_sketch(a, cfg.sketch, cfg.oversample, cfg.seed);
    s.report()["sketch"] = cfg.sketch;
    s.report()["oversample"] = cfg.oversample;
    report_decomposition(cfg, s, a, d, d.rank_m == d.rank_a);
    s.emit(d.approximation(), "");
}

inline void run_bestk(const RunConfig& cfg, Session& s) {
    require_input(cfg, 1);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const ApproxReport r = best_rank_k(a, cfg.k);
    const std::vector<double> sigma = singular_values(a);
    const double s1 = sigma.empty() ? 0.0 : sigma.front();
    const double next = cfg.k < sigma.size() ? sigma[cfg.k] : 0.0;
    s.rank("A", a.empty() ? 0 : numerical_rank(a));
    s.rank("approx", a.empty() ? 0 : numerical_rank(r.approx));
    s.report()["k"] = cfg.k;
    s.report()["singular_values"] = sigma;
    s.residual("frobenius_error", r.frob_error);
    s.residual("spectral_error", r.spectral_error);
    s.residual("optimal_frobenius_error", r.optimal_frob_error);
    s.check_le("frobenius_optimality_gap", std::abs(r.frob_error - r.optimal_frob_error), cfg.tol * std::max(1.0, s1));
    s.check_le("spectral_optimality_gap", std::abs(r.spectral_error - next), cfg.tol * std::max(1.0, s1));
    s.emit(r.approx, "");
}

inline void run_project(const RunConfig& cfg, Session& s) {
    require_input(cfg, 2);
    const Matrix a = s.load(cfg.inputs[0], "A");
    const Matrix b = s.load(cfg.inputs[1], "B");
    const Projector p = oblique_projector(a, b);
    const Matrix& pm = p.matrix();
    const Matrix at = a.transpose();
    const Matrix bt = b.transpose();
    const SubspaceBasis range_expected = range_basis(a * (at * b), product_rank_tol({a, at, b}));
    const SubspaceBasis null_expected = nullspace_basis(at * (b * bt), product_rank_tol({at, b, bt}));
    const double range_dist = subspace_distance(p.range(), range_expected);
    const double null_dist = subspace_distance(p.nullspace(), null_expected);

    s.rank("P", p.rank());
    s.report()["k"] = p.rank();
    s.report()["orthogonal"] = p.orthogonal();
    s.residual("idempotency", distance(pm * pm, pm));
    s.residual("trace_minus_rank", std::abs(trace(pm) - static_cast<double>(p.rank())));
    s.residual("range_distance", range_dist);
    s.residual("nullspace_distance", null_dist);
    s.check_le("idempotency", distance(pm * pm, pm), idempotency_budget(pm, cfg.tol));
    s.check_le("trace_minus_rank", std::abs(trace(pm) - static_cast<double>(p.rank())), 0.5);
    s.check_le("range_distance", range_dist, cfg.tol_sub);
    s.check_le("nullspace_distance", null_dist, cfg.tol_sub);
    s.emit(pm, "");
}

inline void run_meetjoin(const RunConfig& cfg, Session& s) {
    require_input(cfg, 2);
    const Projector p = Projector::from_matrix(s.load(cfg.inputs[0], "P"));
    const Projector q = Projector::from_matrix(s.load(cfg.inputs[1], "Q"));
    const Projector j = join(p, q, cfg.tol, cfg.tol_sub);
    const Projector m = meet(p, q, cfg.tol, cfg.tol_sub);
    s.rank("P", p.rank());
    s.rank("Q", q.rank());
    s.rank("join", j.rank());
    s.rank("meet", m.rank());
    s.residual("join_vs_theorem", distance(j.matrix(), join_by_theorem(p, q)));
    s.residual("meet_vs_theorem", distance(m.matrix(), meet_by_theorem(p, q)));
    s.residual("commutator", distance(p.matrix() * q.matrix(), q.matrix() * p.matrix()));
    s.check_le("lattice_dimension", std::abs(static_cast<double>(j.rank() + m.rank()) -
                                             static_cast<double>(p.rank() + q.rank())), 0.0);
    s.emit(m.matrix(), "meet");
    s.emit(j.matrix(), "join");
}

inline nlohmann::json check_wedderburn(const RunConfig& cfg, std::size_t trials, Session& s) {
    std::size_t max_dev = 0, split_failures = 0, duality_failures = 0;
    double two_inverse = 0.0, pinv_reduction = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        const experiments::RankTrial t = experiments::rank_identity_trial(cfg.seed + i);
        max_dev = std::max(max_dev, t.deviation());
        split_failures += t.nullspace_split ? 0 : 1;
        duality_failures += t.transpose_duality ? 0 : 1;
        two_inverse = std::max(two_inverse, t.two_inverse_rel);
        pinv_reduction = std::max(pinv_reduction, t.pinv_reduction_rel);
    }
    const experiments::SparseBlockTrial sb = experiments::sparse_block_trial(cfg.seed);
    s.check_le("wedderburn.max_rank_deviation", static_cast<double>(max_dev), 0.0);
    s.check_le("wedderburn.nullspace_split_failures", static_cast<double>(split_failures), 0.0);
    s.check_le("wedderburn.transpose_duality_failures", static_cast<double>(duality_failures), 0.0);
    s.check_le("wedderburn.max_two_inverse_rel", two_inverse, cfg.tol);
    s.check_le("wedderburn.max_pinv_reduction_rel", pinv_reduction, cfg.tol);
    s.check_le("wedderburn.sparse_block_rank_check", static_cast<double>(std::labs(sb.rank_check)), 0.0);
    return {{"trials", trials},
            {"max_rank_deviation", max_dev},
            {"nullspace_split_failures", split_failures},
            {"transpose_duality_failures", duality_failures},
            {"max_two_inverse_rel", two_inverse},
            {"max_pinv_reduction_rel", pinv_reduction},
            {"sparse_block",
             {{"rank_a", sb.rank_a},
              {"rank_m", sb.rank_m},
              {"rank_b", sb.rank_b},
              {"rank_check", sb.rank_check},
              {"regenerations", sb.regenerations}}}};
}

inline nlohmann::json check_y_augment(const RunConfig& cfg, std::size_t trials, Session& s) {
    double worst = 0.0;
    std::size_t hypothesis_failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const experiments::YAugmentTrial t = experiments::y_augment_trial(cfg.seed + i);
        worst = std::max(worst, t.relative_difference);
        hypothesis_failures += t.hypothesis ? 0 : 1;
    }
    s.check_le("y-augment.max_relative_difference", worst, cfg.tol);
    s.check_le("y-augment.hypothesis_failures", static_cast<double>(hypothesis_failures), 0.0);
    return {{"trials", trials}, {"max_relative_difference", worst}, {"hypothesis_failures", hypothesis_failures}};
}

inline nlohmann::json check_svd_indexed(const RunConfig& cfg, std::size_t trials, Session& s) {
    double term = 0.0, sigma = 0.0, matched = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        const experiments::SvdIndexedTrial t = experiments::svd_indexed_trial(cfg.seed + i);
        term = std::max(term, t.term_residual / t.sigma_1);
        sigma = std::max(sigma, t.sigma_deviation / t.sigma_1);
        matched = std::max(matched, t.range_matched_residual / t.sigma_1);
    }
    s.check_le("svd-indexed.max_term_residual_rel", term, cfg.tol);
    s.check_le("svd-indexed.max_sigma_deviation_rel", sigma, cfg.tol);
    s.check_le("svd-indexed.max_range_matched_rel", matched, cfg.tol);
    return {{"trials", trials},
            {"max_term_residual_rel", term},
            {"max_sigma_deviation_rel", sigma},
            {"max_range_matched_rel", matched}};
}

inline nlohmann::json check_g_insertion(const RunConfig& cfg, std::size_t trials, Session& s) {
    // The cancellation identity AX (Y^T A X)^+ = A (Y^T A)^+ with rank-2 Y.
    const Matrix a{{1, 2, 1}, {2, 3, 2}, {1, 1, 2}};
    const Matrix y{{1, 4, 1}, {2, 5, 1}, {3, 6, 1}};
    const CancellationReport c = cancellation_check(a, a, y);
    s.check_gt("g-insertion.cancellation_counterexample_rel", c.left_relative(), 0.01);

    double smallest = INFINITY;
    std::size_t above = 0;
    nlohmann::json per_variant = nlohmann::json::array();
    std::array<double, 4> min_by_variant{INFINITY, INFINITY, INFINITY, INFINITY};
    for (std::size_t i = 0; i < trials; ++i) {
        const auto d = experiments::g_insertion_trial(cfg.seed + i);
        for (std::size_t v = 0; v < d.size(); ++v) {
            smallest = std::min(smallest, d[v]);
            min_by_variant[v] = std::min(min_by_variant[v], d[v]);
            above += d[v] > 0.01 ? 1 : 0;
        }
    }
    for (double v : min_by_variant) per_variant.push_back(v);
    // Non-invariance: every insertion changes the term by far more than rounding.
    s.check_gt("g-insertion.min_relative_deviation", smallest, 1e-6);
    return {{"trials", trials},
            {"cancellation_counterexample_rel", c.left_relative()},
            {"min_relative_deviation", smallest},
            {"min_relative_deviation_by_variant", per_variant},
            {"deviations_above_0.01", above},
            {"deviations_total", 4 * trials}};
}

inline void run_check(const RunConfig& cfg, Session& s) {
    const auto trials_for = [&](std::size_t fallback) { return cfg.trials.value_or(fallback); };
    const std::string& suite = cfg.suite;
    const bool all = suite == "all";
    if (!all && suite != "wedderburn" && suite != "y-augment" && suite != "svd-indexed" && suite != "g-insertion") {
        throw ShapeError("check: unknown suite '" + suite + "'");
    }
    s.report()["suite"] = suite;
    if (all || suite == "wedderburn") s.report()["suites"]["wedderburn"] = check_wedderburn(cfg, trials_for(200), s);
    if (all || suite == "y-augment") s.report()["suites"]["y-augment"] = check_y_augment(cfg, trials_for(200), s);
    if (all || suite == "svd-indexed") s.report()["suites"]["svd-indexed"] = check_svd_indexed(cfg, trials_for(200), s);
    if (all || suite == "g-insertion") s.report()["suites"]["g-insertion"] = check_g_insertion(cfg, trials_for(20), s);
}

} // namespace detail

/// Runs one command. Exit 0 when every asserted check passes, 2 when a check
/// fails or a mathematical precondition is violated (the report is still
/// complete up to the failure), 1 for I/O, parse, shape and usage errors.
inline RunResult run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    detail::Session s(cfg);
    nlohmann::json& rep = s.report();
    rep["command"] = command_name(cfg.command);
    rep["version"] = kVersion;
    rep["seed"] = cfg.seed;
    rep["rng"] = Rng::kAlgorithm;
    rep["tol"] = cfg.tol;
    rep["tol_sub"] = cfg.tol_sub;

    RunResult result;
    try {
        if (!(cfg.tol > 0.0) || !(cfg.tol_sub > 0.0)) throw ShapeError("tolerances must be positive");
        switch (cfg.command) {
        case Command::pinv: detail::run_pinv(cfg, s); break;
        case Command::reduce: detail::run_reduce(cfg, s); break;
        case Command::decompose: detail::run_decompose(cfg, s); break;
        case Command::cur: detail::run_cur(cfg, s); break;
        case Command::nystrom: detail::run_nystrom(cfg, s); break;
        case Command::bestk: detail::run_bestk(cfg, s); break;
        case Command::project: detail::run_project(cfg, s); break;
        case Command::meetjoin: detail::run_meetjoin(cfg, s); break;
        case Command::check: detail::run_check(cfg, s); break;
        }
        result.exit_code = s.passed() ? kExitOk : kExitAssertion;
    } catch (const PreconditionError& e) {
        rep["error"] = e.what();
        result.exit_code = kExitAssertion;
    } catch (const ConsistencyError& e) {
        rep["error"] = e.what();
        result.exit_code = kExitAssertion;
    } catch (const ConvergenceError& e) {
        rep["error"] = e.what();
        result.exit_code = kExitAssertion;
    } catch (const Error& e) {
        rep["error"] = e.what();
        result.exit_code = kExitUsage;
    }
    rep["passed"] = result.exit_code == kExitOk;
    rep["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report = std::move(rep);
    return result;
}

} // namespace wedd::cli
