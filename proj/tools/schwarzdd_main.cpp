// Experiment harness: rank sweeps, overlap sweeps, and variant
// comparisons for overlapping Schwarz preconditioners on Poisson and
// Helmholtz model problems.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "schwarzdd/config.hpp"
#include "schwarzdd/experiment.hpp"

namespace fs = std::filesystem;
using namespace schwarzdd;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int seed = -1;
    int threads = 1;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "partitioner seed override");
    cmd->add_option("--threads", args.threads, "threads for local factorizations");
    cmd->add_flag("--no-timing", args.no_timing,
                  "report zero wall times (byte-stable output)");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = ExperimentConfig::from_file(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed >= 0) cfg.seed = static_cast<unsigned>(args.seed);
    cfg.threads = args.threads;
    cfg.report_walltime = !args.no_timing;
    return cfg;
}

int finish(const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows,
           const std::string& csv_name) {
    fs::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir + "/" + csv_name,
                    rows_to_csv(rows, cfg.report_walltime));
    std::cout << rows_to_table(rows, cfg.report_walltime);
    for (const auto& r : rows)
        if (!r.converged) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"overlapping Schwarz domain decomposition experiments"};
    app.require_subcommand(1);

    CommonArgs solve_args, scaling_args, overlap_args, compare_args;
    auto* cmd_solve = app.add_subcommand("solve", "single solve with full dumps");
    add_common(cmd_solve, solve_args);
    auto* cmd_scaling =
        app.add_subcommand("scaling-study", "weak scaling over subdomain counts");
    add_common(cmd_scaling, scaling_args);
    auto* cmd_overlap =
        app.add_subcommand("overlap-study", "overlap sweep at fixed subdomain count");
    add_common(cmd_overlap, overlap_args);
    auto* cmd_compare =
        app.add_subcommand("compare", "variant/level comparison on one problem");
    add_common(cmd_compare, compare_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_solve->parsed()) {
            const ExperimentConfig cfg = load(solve_args);
            ExperimentArtifacts artifacts;
            const ExperimentRow row = run_solve(cfg, &artifacts);
            fs::create_directories(cfg.out_dir);
            write_text_file(cfg.out_dir + "/solution.txt", artifacts.solution_txt);
            write_text_file(cfg.out_dir + "/decomposition.csv",
                            artifacts.decomposition_csv);
            write_text_file(cfg.out_dir + "/setup_report.csv",
                            artifacts.setup_report_csv);
            write_text_file(cfg.out_dir + "/residuals.csv", artifacts.residual_csv);
            return finish(cfg, {row}, "solve.csv");
        }
        if (cmd_scaling->parsed()) {
            const ExperimentConfig cfg = load(scaling_args);
            return finish(cfg, run_scaling_study(cfg), "scaling.csv");
        }
        if (cmd_overlap->parsed()) {
            const ExperimentConfig cfg = load(overlap_args);
            return finish(cfg, run_overlap_study(cfg), "overlap.csv");
        }
        const ExperimentConfig cfg = load(compare_args);
        return finish(cfg, run_compare(cfg), "compare.csv");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
