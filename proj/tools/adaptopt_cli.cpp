// adaptopt: train and compare first-order optimizers on desk-scale objectives.
//
//   adaptopt run --config cfg.json [--seed N] [--out-dir DIR] [--format csv|table]
//   adaptopt compare --config cfg.json [...same overrides]
//   adaptopt list-optimizers
//   adaptopt gradcheck --objective quadratic|rosenbrock|mlp [--seed N] [--points N]
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include "adaptopt/errors.hpp"
#include "adaptopt/harness.hpp"
#include "adaptopt/kernels.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <memory>
#include <optional>

using namespace adaptopt;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_io = 4;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    int threads = 0;
};

void add_overrides(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config, "JSON experiment config")->required();
    cmd->add_option("--seed", o.seed, "Run a single seed instead of the config's seed list");
    cmd->add_option("--out-dir", o.out_dir, "Directory for the emitted reports");
    cmd->add_option("--format", o.format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
    cmd->add_option("--threads", o.threads, "OpenMP threads (results do not depend on it)");
}

ConfigDocument load_with_overrides(const Overrides &o) {
    ConfigDocument doc = load_config(o.config);
    if (o.seed) doc.base.seeds = {*o.seed};
    if (o.out_dir) doc.base.out_dir = *o.out_dir;
    if (o.format) doc.base.format = parse_report_format(*o.format);
    if (o.threads > 0) kernels::set_thread_count(o.threads);
    return doc;
}

void print_written(const std::vector<std::filesystem::path> &paths) {
    for (const auto &p : paths) {
        fmt::print("wrote {}\n", p.string());
    }
}

int cmd_run(const Overrides &o) {
    const ConfigDocument doc = load_with_overrides(o);
    const ExperimentConfig &cfg = doc.base;
    std::vector<RunRecord> records;
    for (std::uint64_t seed : cfg.seeds) {
        records.push_back(run_experiment(cfg, seed));
        const RunRecord &r = records.back();
        fmt::print("{} seed={} steps={} final_loss={:.6g}", to_string(r.optimizer), r.seed, r.steps, r.final_loss);
        if (r.accuracy) fmt::print(" acc={:.4f} f1={:.4f}", *r.accuracy, *r.f1);
        fmt::print(" clip_events={} ({:.2f}s)\n", r.clip_events, r.wall_seconds);
    }
    const ComparisonTable table = build_table(records, cfg.objective.is_classification());
    print_written(emit_report(table, records, cfg.out_dir, cfg.format));
    return 0;
}

int cmd_compare(const Overrides &o) {
    const ConfigDocument doc = load_with_overrides(o);
    const ComparisonResult result = run_comparison(comparison_configs(doc));
    fmt::print("{}", format_table(result.table));
    print_written(emit_report(result.table, result.records, doc.base.out_dir, doc.base.format));
    return 0;
}

int cmd_list() {
    for (OptimizerKind kind : all_optimizer_kinds) {
        fmt::print("{:<10} {:<9} {}\n", to_string(kind), display_name(kind), describe(kind));
    }
    return 0;
}

int cmd_gradcheck(const std::string &name, std::uint64_t seed, std::size_t points) {
    const ObjectiveKind kind = parse_objective_kind(name);
    const Rng root(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        Rng point_rng = root.derive(i);
        std::unique_ptr<Objective> objective;
        ParamVector theta;
        switch (kind) {
        case ObjectiveKind::Quadratic:
            objective = std::make_unique<QuadraticObjective>(QuadraticObjective::with_condition(10, 1e3));
            theta = rng_uniform(point_rng, -2.0, 2.0, 10);
            break;
        case ObjectiveKind::Rosenbrock:
            objective = std::make_unique<RosenbrockObjective>();
            theta = rng_uniform(point_rng, -2.0, 2.0, 2);
            break;
        case ObjectiveKind::Mlp: {
            const SyntheticDataset ds = make_dataset(42, DatasetSpec{});
            const MlpModel model{20, 8, 0.1, MlpMode::Train};
            std::vector<std::size_t> rows(ds.train_rows.begin(), ds.train_rows.begin() + 32);
            theta = init_mlp_params(model, point_rng);
            objective = std::make_unique<MlpBatchObjective>(model, gather(ds, rows), point_rng.derive("dropout"));
            break;
        }
        }
        const GradCheckReport report = check_gradient(*objective, theta);
        fmt::print("point {:>2}: max relative error {:.3e} (coordinate {})\n", i, report.max_relative_error,
                   report.worst_coordinate);
        worst = std::max(worst, report.max_relative_error);
    }
    constexpr double tolerance = 1e-5;
    const bool ok = worst < tolerance;
    fmt::print("{}: worst {:.3e} over {} points (tolerance {:.0e})\n", ok ? "PASS" : "FAIL", worst, points, tolerance);
    return ok ? 0 : exit_numerical;
}

}    // namespace

int main(int argc, char **argv) {
    CLI::App app{"Train and compare first-order optimizers"};
    app.require_subcommand(1);

    Overrides run_opts;
    Overrides compare_opts;
    add_overrides(app.add_subcommand("run", "Train one optimizer over the config's seeds"), run_opts);
    add_overrides(app.add_subcommand("compare", "Train every configured optimizer and emit the comparison table"),
                  compare_opts);
    auto *list = app.add_subcommand("list-optimizers", "List available optimizers");

    std::string objective;
    std::uint64_t gc_seed = 42;
    std::size_t gc_points = 20;
    auto *gradcheck = app.add_subcommand("gradcheck", "Audit analytic gradients against central differences");
    gradcheck->add_option("--objective", objective, "quadratic, rosenbrock or mlp")->required();
    gradcheck->add_option("--seed", gc_seed, "Seed for the sampled points");
    gradcheck->add_option("--points", gc_points, "Number of random points")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (app.got_subcommand("run")) return cmd_run(run_opts);
        if (app.got_subcommand("compare")) return cmd_compare(compare_opts);
        if (app.got_subcommand(list)) return cmd_list();
        if (app.got_subcommand(gradcheck)) return cmd_gradcheck(objective, gc_seed, gc_points);
    } catch (const ConfigError &e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    } catch (const NumericalError &e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return exit_numerical;
    } catch (const IoError &e) {
        fmt::print(stderr, "I/O error: {}\n", e.what());
        return exit_io;
    } catch (const std::invalid_argument &e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    }
    return 0;
}
