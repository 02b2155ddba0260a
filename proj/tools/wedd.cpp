#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "cli_app.hpp"

namespace {

using wedd::cli::Command;
using wedd::cli::RunConfig;

void add_common(CLI::App& sub, RunConfig& cfg, std::string& json_path) {
    sub.add_option("--tol", cfg.tol, "Relative tolerance for asserted residuals")->check(CLI::PositiveNumber);
    sub.add_option("--tol-sub", cfg.tol_sub, "Tolerance for subspace comparisons")->check(CLI::PositiveNumber);
    sub.add_option("--seed", cfg.seed, "Seed for randomized commands");
    sub.add_option("--format", cfg.format, "Output matrix format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, wedd::MatrixFormat>{{"mm", wedd::MatrixFormat::matrix_market},
                                                      {"csv", wedd::MatrixFormat::csv}},
            CLI::ignore_case));
    sub.add_option("--out", cfg.out, "Output matrix path; multi-output commands add a suffix to the stem");
    sub.add_option("--json", json_path, "Write the JSON report here instead of stdout");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Wedderburn rank reduction toolkit"};
    app.set_version_flag("--version", wedd::cli::kVersion);
    app.require_subcommand(1);

    RunConfig cfg;
    std::string json_path;
    std::vector<std::string> inputs;

    const auto positional = [&](CLI::App& sub, const char* what, int count) {
        sub.add_option("inputs", inputs, what)->required()->expected(count)->check(CLI::ExistingFile);
    };
    const auto xy = [&](CLI::App& sub) {
        sub.add_option("--x", cfg.x_path, "Right sketch X (n x p)")->required()->check(CLI::ExistingFile);
        sub.add_option("--y", cfg.y_path, "Left sketch Y (m x q)")->required()->check(CLI::ExistingFile);
    };

    std::map<CLI::App*, Command> commands;
    const auto sub = [&](const char* name, const char* desc, Command c) {
        CLI::App* s = app.add_subcommand(name, desc);
        add_common(*s, cfg, json_path);
        commands[s] = c;
        return s;
    };

    positional(*sub("pinv", "Moore-Penrose pseudoinverse with Penrose residuals", Command::pinv), "A", 1);

    CLI::App* reduce = sub("reduce", "B = A - (AX)(Y^T A X)^+(Y^T A) with rank diagnostics", Command::reduce);
    positional(*reduce, "A", 1);
    xy(*reduce);

    CLI::App* decompose = sub("decompose", "Wedderburn decomposition A = (AX)(Y^T A X)^+(Y^T A)", Command::decompose);
    positional(*decompose, "A", 1);
    xy(*decompose);

    CLI::App* cur = sub("cur", "CUR factorization from 1-based row and column indices", Command::cur);
    positional(*cur, "A", 1);
    cur->add_option("--rows", cfg.rows, "Row indices, e.g. 1,3,5")->required()->delimiter(',');
    cur->add_option("--cols", cfg.cols, "Column indices, e.g. 2,4")->required()->delimiter(',');

    CLI::App* nystrom = sub("nystrom", "Generalized Nystrom sketch with seeded uniform(-1,1) X and Y", Command::nystrom);
    positional(*nystrom, "A", 1);
    nystrom->add_option("--sketch", cfg.sketch, "Columns of X")->required()->check(CLI::PositiveNumber);
    nystrom->add_option("--oversample", cfg.oversample, "Extra columns of Y");

    CLI::App* bestk = sub("bestk", "Best rank-k approximation through an SVD-indexed reduction", Command::bestk);
    positional(*bestk, "A", 1);
    bestk->add_option("--k", cfg.k, "Target rank")->required();

    positional(*sub("project", "Oblique projector A (B^T A)^+ B^T", Command::project), "A B", 2);
    positional(*sub("meetjoin", "Meet PQ and join P + Q - PQ of commuting projectors", Command::meetjoin), "P Q", 2);

    CLI::App* check = sub("check", "Seeded randomized validation suites", Command::check);
    check->add_option("suite", cfg.suite, "Suite to run")
        ->check(CLI::IsMember({"wedderburn", "y-augment", "svd-indexed", "g-insertion", "all"}));
    check->add_option("--trials", cfg.trials, "Trials per suite (default 200; 20 for g-insertion)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : wedd::cli::kExitUsage;
    }

    for (const auto& [s, c] : commands)
        if (s->parsed()) cfg.command = c;
    for (const auto& in : inputs) cfg.inputs.emplace_back(in);

    const wedd::cli::RunResult result = wedd::cli::run(cfg);
    const std::string text = result.report.dump(2) + "\n";
    if (json_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(json_path);
        if (!out || !(out << text)) {
            std::cerr << "wedd: cannot write report to '" << json_path << "'\n";
            return wedd::cli::kExitUsage;
        }
    }
    if (result.report.contains("error")) std::cerr << "wedd: " << result.report["error"].get<std::string>() << "\n";
    return result.exit_code;
}
