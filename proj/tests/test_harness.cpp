#include "adaptopt/errors.hpp"
#include "adaptopt/harness.hpp"
#include "adaptopt/kernels.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adaptopt;
using nlohmann::json;

namespace {

ExperimentConfig small_mlp(OptimizerKind kind) {
    ExperimentConfig cfg;
    cfg.objective.kind = ObjectiveKind::Mlp;
    cfg.objective.dataset.n = 200;
    cfg.optimizer = kind;
    cfg.hyperparams.eta0 = 1e-2;
    cfg.epochs = 2;
    cfg.eval_every = 3;
    return cfg;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const char *name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}    // namespace

TEST_CASE("parse_config reads every field and rejects unknown keys") {
    json doc = json::parse(R"({
        "objective": {"name": "quadratic", "dim": 4, "condition": 100, "steps_per_epoch": 10},
        "optimizer": "adam",
        "hyperparams": {"eta0": 0.01, "gamma": 0.9, "clip_value": null},
        "epochs": 2, "seeds": [1, 2], "eval_every": 5,
        "decay_unit": "per_step", "format": "table", "out_dir": "x"
    })");
    ConfigDocument d = parse_config(doc);
    CHECK(d.base.objective.kind == ObjectiveKind::Quadratic);
    CHECK(d.base.objective.dim == 4);
    CHECK(d.base.optimizer == OptimizerKind::Adam);
    CHECK(d.base.hyperparams.eta0 == 0.01);
    CHECK_FALSE(d.base.hyperparams.clip_value.has_value());
    CHECK(d.base.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(d.base.decay_unit == DecayUnit::PerStep);
    CHECK(d.base.format == ReportFormat::Table);
    CHECK(d.base.total_steps() == 20);

    CHECK_THROWS_AS(parse_config(json::parse(R"({"epochs": 2, "typo": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"epochs": "two"})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"hyperparams": {"beta1": 1.5}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"optimizer": "lbfgs"})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"seeds": []})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"objective": {"name": "rosenbrock", "dim": 3}})")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("benchmark config parses into six comparison cells") {
    ConfigDocument d = load_config(std::filesystem::path(ADAPTOPT_SOURCE_DIR) / "configs/benchmark.json");
    auto cfgs = comparison_configs(d);
    REQUIRE(cfgs.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(cfgs[i].optimizer == all_optimizer_kinds[i]);
    CHECK(cfgs[0].seeds.size() == 5);
}

TEST_CASE("fingerprint ignores output settings only") {
    ExperimentConfig a = small_mlp(OptimizerKind::Adam);
    ExperimentConfig b = a;
    b.out_dir = "elsewhere";
    b.format = ReportFormat::Table;
    CHECK(fingerprint(a, 1) == fingerprint(b, 1));
    CHECK(fingerprint(a, 1) != fingerprint(a, 2));
    b.hyperparams.beta2 = 0.99;
    CHECK(fingerprint(a, 1) != fingerprint(b, 1));
    CHECK(fingerprint(a, 1).size() == 16);
}

TEST_CASE("runs replay bitwise and do not depend on thread count") {
    ExperimentConfig cfg = small_mlp(OptimizerKind::Composite);
    kernels::set_thread_count(1);
    RunRecord a = run_experiment(cfg, 7);
    kernels::set_thread_count(4);
    RunRecord b = run_experiment(cfg, 7);
    kernels::set_thread_count(0);
    CHECK(a.same_result(b));
    CHECK(a.final_theta == b.final_theta);
    RunRecord c = run_experiment(cfg, 8);
    CHECK_FALSE(a.same_result(c));

    CHECK(a.steps == cfg.total_steps());
    CHECK(a.steps == 2 * 5);    // 160 training rows, batch 32
    CHECK(a.evals.front().step == 0);
    CHECK(a.evals.back().step == static_cast<std::int64_t>(a.steps));
    CHECK(a.accuracy.has_value());
    CHECK(a.f1.has_value());
}

TEST_CASE("per-epoch decay lowers the composite step size once per epoch") {
    ExperimentConfig cfg = small_mlp(OptimizerKind::Composite);
    cfg.hyperparams.gamma = 0.5;
    cfg.eval_every = 1;
    RunRecord r = run_experiment(cfg, 1);
    for (const EvalPoint &p : r.evals) {
        if (p.step == 0) continue;
        const std::int64_t epoch = (p.step - 1) / 5;
        CHECK(p.effective_lr == decayed_lr(1e-2, 0.5, epoch));
    }
}

TEST_CASE("adam drives a quadratic towards its minimum") {
    ExperimentConfig cfg;
    cfg.objective.kind = ObjectiveKind::Quadratic;
    cfg.objective.steps_per_epoch = 100;
    cfg.optimizer = OptimizerKind::Adam;
    cfg.hyperparams.eta0 = 1e-2;
    cfg.epochs = 20;
    cfg.eval_every = 100;
    RunRecord r = run_experiment(cfg, 0);
    CHECK(r.evals.front().train_loss > 100.0);
    CHECK(r.final_loss < 1e-6);
    CHECK_FALSE(r.accuracy.has_value());
}

TEST_CASE("divergence raises a numerical error") {
    ExperimentConfig cfg;
    cfg.objective.kind = ObjectiveKind::Quadratic;
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.hyperparams.eta0 = 10.0;    // far beyond 2 / lambda_max
    cfg.epochs = 10;
    CHECK_THROWS_AS(run_experiment(cfg, 0), NumericalError);
}

TEST_CASE("comparison table and reports") {
    std::vector<ExperimentConfig> cfgs;
    for (OptimizerKind k : {OptimizerKind::Composite, OptimizerKind::Sgd}) {
        ExperimentConfig cfg = small_mlp(k);
        cfg.seeds = {1, 2};
        cfgs.push_back(cfg);
    }
    ComparisonResult res = run_comparison(cfgs);
    REQUIRE(res.table.rows.size() == 2);
    CHECK(res.table.rows[0].optimizer == OptimizerKind::Sgd);
    CHECK(res.table.rows[1].optimizer == OptimizerKind::Composite);
    CHECK(res.records.size() == 4);
    int best = 0;
    for (const auto &row : res.table.rows) best += row.best ? 1 : 0;
    CHECK(best == 1);

    const std::string text = format_table(res.table);
    CHECK(text.find("Model") != std::string::npos);
    CHECK(text.find("Ours") != std::string::npos);
    CHECK(text.find("SGD") < text.find("Ours"));

    const auto dir = scratch("adaptopt_test_harness");
    auto written = emit_report(res.table, res.records, dir, ReportFormat::Csv);
    CHECK(written.size() == 2);
    std::vector<ResultRow> rows = read_results_csv(dir / "results.csv");
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(rows[i] == to_result_row(res.records[i]));
    CHECK(slurp(dir / "trajectories.csv").rfind(std::string(trajectories_header), 0) == 0);

    emit_report(res.table, res.records, dir, ReportFormat::Table);
    CHECK(slurp(dir / "comparison.txt") == text);

    CHECK_THROWS_AS(emit_report(ComparisonTable{}, {}, dir, ReportFormat::Csv), std::invalid_argument);
    std::filesystem::remove_all(dir);

    // mismatched shared settings
    cfgs[1].batch_size = 16;
    CHECK_THROWS_AS(run_comparison(cfgs), ConfigError);
    cfgs[1] = cfgs[0];
    CHECK_THROWS_AS(run_comparison(cfgs), ConfigError);
}

TEST_CASE("unwritable output directory is an I/O error") {
    ExperimentConfig cfg = small_mlp(OptimizerKind::Sgd);
    cfg.epochs = 1;
    ComparisonResult res = run_comparison({cfg});
    const auto file = scratch("adaptopt_test_harness_file");
    std::ofstream(file) << "not a directory";
    CHECK_THROWS_AS(emit_report(res.table, res.records, file / "sub", ReportFormat::Csv), IoError);
    std::filesystem::remove(file);
}
