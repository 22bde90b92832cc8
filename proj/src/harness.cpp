#include "adaptopt/harness.hpp"

#include "adaptopt/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <set>

namespace adaptopt {

namespace {

std::string state_diagnostics(const OptimizerState &state, const ParamVector &theta, const ParamVector *grad) {
    auto norm = [](const ParamVector &v) { return v.empty() ? 0.0 : l2_norm(v); };
    std::string out = fmt::format("|theta|={:.6g}", norm(theta));
    if (grad != nullptr) out += fmt::format(" |grad|={:.6g}", norm(*grad));
    if (state.m) out += fmt::format(" |m|={:.6g}", norm(*state.m));
    if (state.v) out += fmt::format(" |v|={:.6g}", norm(*state.v));
    return out;
}

void guard_evaluation(const Evaluation &ev, std::int64_t step, const OptimizerState &state, const ParamVector &theta) {
    if (!std::isfinite(ev.loss) || !ev.grad.all_finite()) {
        throw NumericalError(fmt::format("non-finite {} at step {} ({})",
                                         std::isfinite(ev.loss) ? "gradient" : "loss", step,
                                         state_diagnostics(state, theta, &ev.grad)));
    }
}

void guard_parameters(std::int64_t step, const OptimizerState &state, const ParamVector &theta) {
    if (!theta.all_finite()) {
        throw NumericalError(
            fmt::format("non-finite parameters after step {} ({})", step, state_diagnostics(state, theta, nullptr)));
    }
}

std::unique_ptr<Objective> make_analytic(const ObjectiveSpec &spec) {
    if (spec.kind == ObjectiveKind::Rosenbrock) {
        return std::make_unique<RosenbrockObjective>();
    }
    if (spec.diag) {
        return std::make_unique<QuadraticObjective>(ParamVector::from(*spec.diag));
    }
    return std::make_unique<QuadraticObjective>(QuadraticObjective::with_condition(spec.dim, spec.condition));
}

ParamVector analytic_start(const ObjectiveSpec &spec, std::size_t n) {
    if (spec.start) {
        return ParamVector::from(*spec.start);
    }
    if (spec.kind == ObjectiveKind::Rosenbrock) {
        return ParamVector::from({-1.2, 1.0});
    }
    return ParamVector::filled(Shape{n}, 1.0);
}

// Shared step bookkeeping for both training loops.
struct Progress {
    OptimizerState state;
    ParamVector theta;
    std::int64_t step = 0;
    std::size_t clip_events = 0;
    double last_lr = 0.0;
};

void advance(Progress &p, const ExperimentConfig &cfg, const Evaluation &ev, std::int64_t epoch) {
    guard_evaluation(ev, p.step, p.state, p.theta);
    const std::int64_t schedule_t = static_cast<std::int64_t>(
        cfg.decay_unit == DecayUnit::PerStep ? p.step : epoch);
    StepResult r = optimizer_step(std::move(p.state), std::move(p.theta), ev.grad, cfg.hyperparams, schedule_t);
    p.state = std::move(r.state);
    p.theta = std::move(r.theta);
    ++p.step;
    if (r.report.clipped) {
        ++p.clip_events;
    }
    p.last_lr = r.report.effective_lr;
    guard_parameters(p.step, p.state, p.theta);
}

void train_analytic(const ExperimentConfig &cfg, RunRecord &rec) {
    const auto objective = make_analytic(cfg.objective);
    Progress p;
    p.theta = analytic_start(cfg.objective, objective->param_count());
    p.state = init_state(cfg.optimizer, p.theta.shape());
    p.last_lr = cfg.hyperparams.eta0;

    auto record_eval = [&](double loss) {
        rec.evals.push_back(EvalPoint{p.step, loss, loss, std::nullopt, std::nullopt, p.last_lr, p.clip_events});
    };
    record_eval(objective->evaluate(p.theta).loss);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t s = 0; s < cfg.objective.steps_per_epoch; ++s) {
            advance(p, cfg, objective->evaluate(p.theta), static_cast<std::int64_t>(epoch));
            if (p.step % static_cast<std::int64_t>(cfg.eval_every) == 0) {
                record_eval(objective->evaluate(p.theta).loss);
            }
        }
    }
    const Evaluation final_eval = objective->evaluate(p.theta);
    guard_evaluation(final_eval, p.step, p.state, p.theta);
    if (rec.evals.back().step != p.step) {
        record_eval(final_eval.loss);
    }
    rec.final_loss = final_eval.loss;
    rec.steps = static_cast<std::size_t>(p.step);
    rec.clip_events = p.clip_events;
    rec.final_theta = std::move(p.theta);
}

void train_mlp(const ExperimentConfig &cfg, std::uint64_t seed, RunRecord &rec) {
    const ObjectiveSpec &spec = cfg.objective;
    const SyntheticDataset ds = make_dataset(spec.data_seed, spec.dataset);
    const MlpModel model{spec.dataset.d, spec.hidden, spec.dropout, MlpMode::Train};

    // Independent labeled streams: changing batch order never perturbs init.
    const Rng root(seed);
    Rng init_rng = root.derive("init");
    Rng shuffle_rng = root.derive("shuffle");
    const Rng dropout_root = root.derive("dropout");

    Progress p;
    p.theta = init_mlp_params(model, init_rng);
    p.state = init_state(cfg.optimizer, p.theta.shape());
    p.last_lr = cfg.hyperparams.eta0;

    auto record_eval = [&] {
        const SplitEvaluation train = mlp_evaluate_rows(model, p.theta, ds, ds.train_rows);
        const SplitEvaluation val = mlp_evaluate_rows(model, p.theta, ds, ds.validation_rows);
        std::vector<int> actual;
        actual.reserve(ds.validation_rows.size());
        for (std::size_t r : ds.validation_rows) {
            actual.push_back(ds.labels[r]);
        }
        const ConfusionCounts counts = confusion(val.predictions, actual);
        if (!std::isfinite(train.loss) || !std::isfinite(val.loss)) {
            throw NumericalError(fmt::format("non-finite evaluation loss at step {} ({})", p.step,
                                             state_diagnostics(p.state, p.theta, nullptr)));
        }
        rec.evals.push_back(EvalPoint{p.step, train.loss, val.loss, accuracy(counts), f1_score(counts), p.last_lr,
                                      p.clip_events});
    };

    record_eval();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto &rows : minibatch_iter(ds, cfg.batch_size, shuffle_rng)) {
            const Batch batch = gather(ds, rows);
            const Evaluation ev =
                mlp_eval(model, p.theta, batch, dropout_root.derive(static_cast<std::uint64_t>(p.step)));
            advance(p, cfg, ev, static_cast<std::int64_t>(epoch));
            if (p.step % static_cast<std::int64_t>(cfg.eval_every) == 0) {
                record_eval();
            }
        }
    }
    if (rec.evals.back().step != p.step) {
        record_eval();
    }
    const EvalPoint &last = rec.evals.back();
    rec.final_loss = last.train_loss;
    rec.accuracy = last.val_accuracy;
    rec.f1 = last.val_f1;
    rec.steps = static_cast<std::size_t>(p.step);
    rec.clip_events = p.clip_events;
    rec.final_theta = std::move(p.theta);
}

}    // namespace

bool RunRecord::same_result(const RunRecord &o) const {
    return fingerprint == o.fingerprint && optimizer == o.optimizer && seed == o.seed && evals == o.evals &&
           final_loss == o.final_loss && accuracy == o.accuracy && f1 == o.f1 && steps == o.steps &&
           clip_events == o.clip_events && final_theta == o.final_theta;
}

RunRecord run_experiment(const ExperimentConfig &cfg, std::uint64_t seed) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.fingerprint = fingerprint(cfg, seed);
    rec.optimizer = cfg.optimizer;
    rec.seed = seed;
    if (cfg.objective.is_classification()) {
        train_mlp(cfg, seed, rec);
    } else {
        train_analytic(cfg, rec);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rec;
}

RunRecord run_experiment(const ExperimentConfig &cfg) {
    cfg.validate();
    return run_experiment(cfg, cfg.seeds.front());
}

ComparisonTable build_table(const std::vector<RunRecord> &records, bool classification) {
    ComparisonTable table;
    table.classification = classification;
    for (OptimizerKind kind : all_optimizer_kinds) {
        std::vector<double> acc;
        std::vector<double> f1;
        std::vector<double> loss;
        for (const RunRecord &r : records) {
            if (r.optimizer != kind) continue;
            loss.push_back(r.final_loss);
            if (r.accuracy) acc.push_back(*r.accuracy);
            if (r.f1) f1.push_back(*r.f1);
        }
        if (loss.empty()) continue;
        ComparisonRow row;
        row.optimizer = kind;
        row.final_loss = mean_std(loss);
        if (classification && !acc.empty()) {
            row.accuracy = mean_std(acc);
            row.f1 = mean_std(f1);
        }
        table.rows.push_back(row);
    }
    if (!table.rows.empty()) {
        auto better = [&](const ComparisonRow &a, const ComparisonRow &b) {
            if (classification && a.accuracy && b.accuracy) {
                return a.accuracy->mean > b.accuracy->mean;
            }
            return a.final_loss.mean < b.final_loss.mean;
        };
        std::size_t best = 0;
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            if (better(table.rows[i], table.rows[best])) best = i;
        }
        table.rows[best].best = true;
    }
    return table;
}

ComparisonResult run_comparison(const std::vector<ExperimentConfig> &cfgs) {
    if (cfgs.empty()) {
        throw ConfigError("compare: no optimizer configs");
    }
    std::set<OptimizerKind> seen;
    const ExperimentConfig &ref = cfgs.front();
    for (const ExperimentConfig &cfg : cfgs) {
        cfg.validate();
        if (!seen.insert(cfg.optimizer).second) {
            throw ConfigError(fmt::format("compare: optimizer '{}' listed twice", to_string(cfg.optimizer)));
        }
        auto mismatch = [&](const char *field) {
            return ConfigError(fmt::format("compare: '{}' differs between {} and {}", field, to_string(ref.optimizer),
                                           to_string(cfg.optimizer)));
        };
        if (!(cfg.objective == ref.objective)) throw mismatch("objective");
        if (cfg.epochs != ref.epochs) throw mismatch("epochs");
        if (cfg.batch_size != ref.batch_size) throw mismatch("batch_size");
        if (cfg.seeds != ref.seeds) throw mismatch("seeds");
        if (cfg.eval_every != ref.eval_every) throw mismatch("eval_every");
        if (cfg.decay_unit != ref.decay_unit) throw mismatch("decay_unit");
    }

    std::vector<const ExperimentConfig *> ordered;
    for (const auto &cfg : cfgs) ordered.push_back(&cfg);
    std::sort(ordered.begin(), ordered.end(), [](const auto *a, const auto *b) {
        return report_rank(a->optimizer) < report_rank(b->optimizer);
    });

    struct Cell {
        const ExperimentConfig *cfg;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto *cfg : ordered) {
        for (std::uint64_t seed : cfg->seeds) cells.push_back({cfg, seed});
    }

    // Cells are independent; each runs sequentially inside one thread and
    // writes only its own slot.
    ComparisonResult result;
    result.records.resize(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            result.records[idx] = run_experiment(*cells[idx].cfg, cells[idx].seed);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
    result.table = build_table(result.records, ref.objective.is_classification());
    return result;
}

}    // namespace adaptopt
