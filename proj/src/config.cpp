#include "adaptopt/errors.hpp"
#include "adaptopt/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace adaptopt {

using nlohmann::json;

namespace {

void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto &[key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
        }
    }
}

const json &require_object(const json &j, std::string_view where) {
    if (!j.is_object()) {
        throw ConfigError(fmt::format("{}: expected a JSON object", where));
    }
    return j;
}

double read_number(const json &j, std::string_view key) {
    if (!j.is_number()) {
        throw ConfigError(fmt::format("'{}' must be a number", key));
    }
    return j.get<double>();
}

std::uint64_t read_unsigned(const json &j, std::string_view key) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
        throw ConfigError(fmt::format("'{}' must be a non-negative integer", key));
    }
    return j.get<std::uint64_t>();
}

std::string read_string(const json &j, std::string_view key) {
    if (!j.is_string()) {
        throw ConfigError(fmt::format("'{}' must be a string", key));
    }
    return j.get<std::string>();
}

std::vector<double> read_number_array(const json &j, std::string_view key) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(fmt::format("'{}' must be a non-empty array of numbers", key));
    }
    std::vector<double> out;
    for (const auto &e : j) {
        out.push_back(read_number(e, key));
    }
    return out;
}

template <typename Fn>
auto translate(Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
}

ObjectiveSpec parse_objective(const json &j) {
    require_object(j, "objective");
    if (!j.contains("name")) {
        throw ConfigError("objective: missing 'name'");
    }
    ObjectiveSpec spec;
    spec.kind = translate([&] { return parse_objective_kind(read_string(j.at("name"), "objective.name")); });
    switch (spec.kind) {
    case ObjectiveKind::Quadratic:
        reject_unknown(j, {"name", "dim", "condition", "diag", "start", "steps_per_epoch"}, "objective (quadratic)");
        break;
    case ObjectiveKind::Rosenbrock:
        reject_unknown(j, {"name", "start", "steps_per_epoch"}, "objective (rosenbrock)");
        break;
    case ObjectiveKind::Mlp:
        reject_unknown(j, {"name", "n", "d", "noise", "scale_spread", "data_seed", "hidden", "dropout"},
                       "objective (mlp)");
        break;
    }
    for (const auto &[key, value] : j.items()) {
        if (key == "dim") spec.dim = read_unsigned(value, key);
        else if (key == "condition") spec.condition = read_number(value, key);
        else if (key == "diag") spec.diag = read_number_array(value, key);
        else if (key == "start") spec.start = read_number_array(value, key);
        else if (key == "steps_per_epoch") spec.steps_per_epoch = read_unsigned(value, key);
        else if (key == "n") spec.dataset.n = read_unsigned(value, key);
        else if (key == "d") spec.dataset.d = read_unsigned(value, key);
        else if (key == "noise") spec.dataset.noise = read_number(value, key);
        else if (key == "scale_spread") spec.dataset.scale_spread = read_number(value, key);
        else if (key == "data_seed") spec.data_seed = read_unsigned(value, key);
        else if (key == "hidden") spec.hidden = read_unsigned(value, key);
        else if (key == "dropout") spec.dropout = read_number(value, key);
    }
    if (spec.kind == ObjectiveKind::Quadratic && spec.diag) {
        spec.dim = spec.diag->size();
    }
    return spec;
}

void apply_hyperparams(const json &j, HyperParams &hp, std::string_view where) {
    require_object(j, where);
    reject_unknown(j, {"eta0", "beta1", "beta2", "epsilon", "mu", "rho", "gamma", "clip_value"}, where);
    for (const auto &[key, value] : j.items()) {
        if (key == "eta0") hp.eta0 = read_number(value, key);
        else if (key == "beta1") hp.beta1 = read_number(value, key);
        else if (key == "beta2") hp.beta2 = read_number(value, key);
        else if (key == "epsilon") hp.epsilon = read_number(value, key);
        else if (key == "mu") hp.mu = read_number(value, key);
        else if (key == "rho") hp.rho = read_number(value, key);
        else if (key == "gamma") hp.gamma = read_number(value, key);
        else if (key == "clip_value") {
            if (value.is_null() || (value.is_string() && value.get<std::string>() == "disabled")) {
                hp.clip_value.reset();
            } else {
                hp.clip_value = read_number(value, key);
            }
        }
    }
}

json hyperparams_json(const HyperParams &hp) {
    return json{
        {"eta0", hp.eta0},   {"beta1", hp.beta1}, {"beta2", hp.beta2}, {"epsilon", hp.epsilon},
        {"mu", hp.mu},       {"rho", hp.rho},     {"gamma", hp.gamma},
        {"clip_value", hp.clip_value ? json(*hp.clip_value) : json("disabled")},
    };
}

json objective_json(const ObjectiveSpec &spec) {
    json j{{"name", to_string(spec.kind)}};
    switch (spec.kind) {
    case ObjectiveKind::Quadratic:
        if (spec.diag) {
            j["diag"] = *spec.diag;
        } else {
            j["dim"] = spec.dim;
            j["condition"] = spec.condition;
        }
        if (spec.start) j["start"] = *spec.start;
        j["steps_per_epoch"] = spec.steps_per_epoch;
        break;
    case ObjectiveKind::Rosenbrock:
        if (spec.start) j["start"] = *spec.start;
        j["steps_per_epoch"] = spec.steps_per_epoch;
        break;
    case ObjectiveKind::Mlp:
        j["n"] = spec.dataset.n;
        j["d"] = spec.dataset.d;
        j["noise"] = spec.dataset.noise;
        j["scale_spread"] = spec.dataset.scale_spread;
        j["data_seed"] = spec.data_seed;
        j["hidden"] = spec.hidden;
        j["dropout"] = spec.dropout;
        break;
    }
    return j;
}

}    // namespace

std::string_view to_string(ObjectiveKind kind) noexcept {
    switch (kind) {
    case ObjectiveKind::Quadratic: return "quadratic";
    case ObjectiveKind::Rosenbrock: return "rosenbrock";
    case ObjectiveKind::Mlp: return "mlp";
    }
    return "unknown";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
    for (auto kind : {ObjectiveKind::Quadratic, ObjectiveKind::Rosenbrock, ObjectiveKind::Mlp}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw std::invalid_argument(fmt::format("unknown objective '{}' (expected quadratic, rosenbrock or mlp)", name));
}

std::string_view to_string(ReportFormat format) noexcept {
    return format == ReportFormat::Csv ? "csv" : "table";
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "table") return ReportFormat::Table;
    throw std::invalid_argument(fmt::format("unknown format '{}' (expected csv or table)", name));
}

void ExperimentConfig::validate() const {
    translate([&] { hyperparams.validate(); });
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");

    const ObjectiveSpec &o = objective;
    switch (o.kind) {
    case ObjectiveKind::Quadratic: {
        if (o.diag) {
            for (double d : *o.diag) {
                if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("objective.diag entries must be > 0");
            }
        } else if (o.dim < 1 || !(o.condition >= 1.0) || !std::isfinite(o.condition)) {
            throw ConfigError("objective: quadratic needs dim >= 1 and condition >= 1");
        }
        const std::size_t n = o.diag ? o.diag->size() : o.dim;
        if (o.start && o.start->size() != n) throw ConfigError("objective.start length must match the dimension");
        if (o.steps_per_epoch < 1) throw ConfigError("objective.steps_per_epoch must be >= 1");
        break;
    }
    case ObjectiveKind::Rosenbrock:
        if (o.start && o.start->size() != 2) throw ConfigError("objective.start must have 2 entries for rosenbrock");
        if (o.steps_per_epoch < 1) throw ConfigError("objective.steps_per_epoch must be >= 1");
        break;
    case ObjectiveKind::Mlp:
        if (o.dataset.n < 100) throw ConfigError("objective.n must be >= 100");
        if (o.dataset.d < 2) throw ConfigError("objective.d must be >= 2");
        if (!(o.dataset.noise >= 0.0)) throw ConfigError("objective.noise must be >= 0");
        if (!(o.dataset.scale_spread >= 1.0)) throw ConfigError("objective.scale_spread must be >= 1");
        if (o.hidden < 1) throw ConfigError("objective.hidden must be >= 1");
        if (!(o.dropout >= 0.0 && o.dropout < 1.0)) throw ConfigError("objective.dropout must lie in [0, 1)");
        break;
    }
}

std::size_t ExperimentConfig::steps_per_epoch() const {
    if (!objective.is_classification()) {
        return objective.steps_per_epoch;
    }
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(objective.dataset.n)));
    return (n_train + batch_size - 1) / batch_size;
}

ConfigDocument parse_config(const json &doc) {
    require_object(doc, "config");
    reject_unknown(doc,
                   {"objective", "optimizer", "optimizers", "hyperparams", "hyperparams_by_optimizer", "batch_size",
                    "epochs", "seeds", "eval_every", "decay_unit", "out_dir", "format"},
                   "config");
    ConfigDocument out;
    ExperimentConfig &cfg = out.base;
    if (doc.contains("objective")) {
        cfg.objective = parse_objective(doc.at("objective"));
    }
    if (doc.contains("optimizer")) {
        cfg.optimizer = translate([&] { return parse_optimizer_kind(read_string(doc.at("optimizer"), "optimizer")); });
    }
    if (doc.contains("hyperparams")) {
        apply_hyperparams(doc.at("hyperparams"), cfg.hyperparams, "hyperparams");
    }
    if (doc.contains("batch_size")) cfg.batch_size = read_unsigned(doc.at("batch_size"), "batch_size");
    if (doc.contains("epochs")) cfg.epochs = read_unsigned(doc.at("epochs"), "epochs");
    if (doc.contains("eval_every")) cfg.eval_every = read_unsigned(doc.at("eval_every"), "eval_every");
    if (doc.contains("seeds")) {
        const json &s = doc.at("seeds");
        if (!s.is_array()) throw ConfigError("'seeds' must be an array of non-negative integers");
        cfg.seeds.clear();
        for (const auto &e : s) cfg.seeds.push_back(read_unsigned(e, "seeds"));
    }
    if (doc.contains("decay_unit")) {
        cfg.decay_unit = translate([&] { return parse_decay_unit(read_string(doc.at("decay_unit"), "decay_unit")); });
    }
    if (doc.contains("out_dir")) cfg.out_dir = read_string(doc.at("out_dir"), "out_dir");
    if (doc.contains("format")) {
        cfg.format = translate([&] { return parse_report_format(read_string(doc.at("format"), "format")); });
    }

    if (doc.contains("optimizers")) {
        const json &list = doc.at("optimizers");
        if (!list.is_array() || list.empty()) throw ConfigError("'optimizers' must be a non-empty array of names");
        out.optimizers.clear();
        for (const auto &e : list) {
            out.optimizers.push_back(translate([&] { return parse_optimizer_kind(read_string(e, "optimizers")); }));
        }
    }
    if (doc.contains("hyperparams_by_optimizer")) {
        const json &per = require_object(doc.at("hyperparams_by_optimizer"), "hyperparams_by_optimizer");
        for (const auto &[name, patch] : per.items()) {
            const OptimizerKind kind = translate([&] { return parse_optimizer_kind(name); });
            HyperParams hp = cfg.hyperparams;
            apply_hyperparams(patch, hp, "hyperparams_by_optimizer." + name);
            out.hyperparams_by_optimizer[kind] = hp;
        }
    }
    cfg.validate();
    for (const auto &[kind, hp] : out.hyperparams_by_optimizer) {
        translate([&] { hp.validate(); });
    }
    return out;
}

ConfigDocument load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_config(doc);
}

std::vector<ExperimentConfig> comparison_configs(const ConfigDocument &doc) {
    std::vector<ExperimentConfig> out;
    for (OptimizerKind kind : doc.optimizers) {
        ExperimentConfig cfg = doc.base;
        cfg.optimizer = kind;
        if (auto it = doc.hyperparams_by_optimizer.find(kind); it != doc.hyperparams_by_optimizer.end()) {
            cfg.hyperparams = it->second;
        }
        out.push_back(std::move(cfg));
    }
    return out;
}

json canonical_json(const ExperimentConfig &cfg, std::uint64_t seed) {
    return json{
        {"objective", objective_json(cfg.objective)},
        {"optimizer", to_string(cfg.optimizer)},
        {"hyperparams", hyperparams_json(cfg.hyperparams)},
        {"batch_size", cfg.batch_size},
        {"epochs", cfg.epochs},
        {"seed", seed},
        {"eval_every", cfg.eval_every},
        {"decay_unit", to_string(cfg.decay_unit)},
    };
}

std::string fingerprint(const ExperimentConfig &cfg, std::uint64_t seed) {
    return fmt::format("{:016x}", fnv1a64(canonical_json(cfg, seed).dump()));
}

}    // namespace adaptopt
