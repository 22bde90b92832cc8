#pragma once

#include "adaptopt/metrics.hpp"
#include "adaptopt/objectives.hpp"
#include "adaptopt/optimizers.hpp"
#include "adaptopt/schedules.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adaptopt {

enum class ObjectiveKind { Quadratic, Rosenbrock, Mlp };

std::string_view to_string(ObjectiveKind kind) noexcept;
ObjectiveKind parse_objective_kind(std::string_view name);

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Mlp;

    // quadratic: explicit diagonal, or log-spaced over [1, condition]
    std::size_t dim = 10;
    double condition = 1e3;
    std::optional<std::vector<double>> diag;
    // quadratic / rosenbrock starting point; defaults to ones / (-1.2, 1)
    std::optional<std::vector<double>> start;
    // analytic objectives have no dataset, so an epoch is a fixed step count
    std::size_t steps_per_epoch = 100;

    // mlp
    DatasetSpec dataset;
    std::uint64_t data_seed = 42;
    std::size_t hidden = 8;
    double dropout = 0.1;

    bool is_classification() const noexcept { return kind == ObjectiveKind::Mlp; }

    friend bool operator==(const ObjectiveSpec &, const ObjectiveSpec &) = default;
};

enum class ReportFormat { Csv, Table };

std::string_view to_string(ReportFormat format) noexcept;
ReportFormat parse_report_format(std::string_view name);

struct ExperimentConfig {
    ObjectiveSpec objective;
    OptimizerKind optimizer = OptimizerKind::Composite;
    HyperParams hyperparams;
    std::size_t batch_size = 32;
    std::size_t epochs = 3;
    std::vector<std::uint64_t> seeds{42};
    std::size_t eval_every = 50;
    DecayUnit decay_unit = DecayUnit::PerEpoch;
    std::filesystem::path out_dir = "results";
    ReportFormat format = ReportFormat::Csv;

    /// Throws ConfigError.
    void validate() const;

    /// Optimizer steps in one epoch.
    std::size_t steps_per_epoch() const;
    std::size_t total_steps() const { return epochs * steps_per_epoch(); }
};

/// A parsed config document: the single-run config plus what `compare`
/// needs (the optimizer set and per-optimizer hyperparameter overrides).
struct ConfigDocument {
    ExperimentConfig base;
    std::vector<OptimizerKind> optimizers{all_optimizer_kinds.begin(), all_optimizer_kinds.end()};
    std::map<OptimizerKind, HyperParams> hyperparams_by_optimizer;
};

/// Unknown keys, wrong types, and out-of-range values throw ConfigError.
ConfigDocument parse_config(const nlohmann::json &doc);
ConfigDocument load_config(const std::filesystem::path &path);

/// One ExperimentConfig per requested optimizer, sharing everything else.
std::vector<ExperimentConfig> comparison_configs(const ConfigDocument &doc);

/// Canonical JSON of everything that influences the numbers of one cell.
nlohmann::json canonical_json(const ExperimentConfig &cfg, std::uint64_t seed);
/// 16 hex digits; identical iff the canonical JSON is identical.
std::string fingerprint(const ExperimentConfig &cfg, std::uint64_t seed);

struct EvalPoint {
    std::int64_t step = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    std::optional<double> val_accuracy;
    std::optional<double> val_f1;
    double effective_lr = 0.0;
    std::size_t clip_event_count = 0;

    friend bool operator==(const EvalPoint &, const EvalPoint &) = default;
};

struct RunRecord {
    std::string fingerprint;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    std::uint64_t seed = 0;
    std::vector<EvalPoint> evals;
    double final_loss = 0.0;
    std::optional<double> accuracy;
    std::optional<double> f1;
    std::size_t steps = 0;
    std::size_t clip_events = 0;
    ParamVector final_theta;
    double wall_seconds = 0.0;    // excluded from comparisons

    bool same_result(const RunRecord &other) const;
};

/// Trains one (optimizer, seed) cell. Throws ConfigError for an invalid
/// config and NumericalError as soon as a loss, gradient, or parameter goes
/// non-finite.
RunRecord run_experiment(const ExperimentConfig &cfg, std::uint64_t seed);
RunRecord run_experiment(const ExperimentConfig &cfg);

struct ComparisonRow {
    OptimizerKind optimizer = OptimizerKind::Sgd;
    std::optional<MeanStd> accuracy;
    std::optional<MeanStd> f1;
    MeanStd final_loss;
    bool best = false;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    bool classification = true;
};

struct ComparisonResult {
    ComparisonTable table;
    std::vector<RunRecord> records;    // optimizer report order, then seed order
};

/// Runs every (optimizer, seed) cell, in parallel across cells. Configs must
/// agree on everything except the optimizer and its hyperparameters.
ComparisonResult run_comparison(const std::vector<ExperimentConfig> &cfgs);

ComparisonTable build_table(const std::vector<RunRecord> &records, bool classification);

/// Text rendering of the table: one row per optimizer in report order.
std::string format_table(const ComparisonTable &table);

/// Writes results.csv and trajectories.csv (Csv) or comparison.txt (Table)
/// into out_dir; returns the written paths. Throws IoError when a file cannot
/// be written and std::invalid_argument for an empty table or record set.
std::vector<std::filesystem::path> emit_report(const ComparisonTable &table, const std::vector<RunRecord> &records,
                                               const std::filesystem::path &out_dir, ReportFormat format);

struct ResultRow {
    std::string optimizer;
    std::uint64_t seed = 0;
    std::optional<double> acc;
    std::optional<double> f1;
    double final_loss = 0.0;
    std::size_t steps = 0;
    std::size_t clip_events = 0;

    friend bool operator==(const ResultRow &, const ResultRow &) = default;
};

ResultRow to_result_row(const RunRecord &record);
std::vector<ResultRow> read_results_csv(const std::filesystem::path &path);

inline constexpr std::string_view results_header = "optimizer,seed,acc,f1,final_loss,steps,clip_events";
inline constexpr std::string_view trajectories_header = "optimizer,seed,step,train_loss,val_loss,effective_lr";

}    // namespace adaptopt
