#include "adaptopt/objectives.hpp"

#include "adaptopt/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace adaptopt {

// ---------------------------------------------------------------------------
// Analytic objectives

QuadraticObjective::QuadraticObjective(ParamVector diag) : diag_(std::move(diag)) {
    if (diag_.empty()) {
        throw std::invalid_argument("quadratic: empty diagonal");
    }
    for (double d : diag_.values()) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw std::invalid_argument("quadratic: diagonal entries must be finite and > 0");
        }
    }
}

QuadraticObjective QuadraticObjective::with_condition(std::size_t dim, double condition) {
    if (dim == 0 || !(condition >= 1.0)) {
        throw std::invalid_argument("quadratic: need dim >= 1 and condition >= 1");
    }
    std::vector<double> diag(dim);
    const double log_c = std::log10(condition);
    for (std::size_t i = 0; i < dim; ++i) {
        double frac = dim == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dim - 1);
        diag[i] = std::pow(10.0, log_c * frac);
    }
    // Pin the endpoints so the condition number is exact.
    diag.front() = 1.0;
    diag.back() = condition;
    return QuadraticObjective(ParamVector::from(std::move(diag)));
}

Evaluation QuadraticObjective::evaluate(const ParamVector &theta) const {
    require_same_shape(theta, diag_, "quadratic");
    Evaluation out{0.0, ParamVector(theta.shape())};
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out.loss += 0.5 * diag_[i] * theta[i] * theta[i];
        out.grad[i] = diag_[i] * theta[i];
    }
    return out;
}

Evaluation RosenbrockObjective::evaluate(const ParamVector &theta) const {
    if (theta.size() != 2) {
        throw std::invalid_argument("rosenbrock: expected 2 parameters, got " + std::to_string(theta.size()));
    }
    const double x = theta[0];
    const double y = theta[1];
    const double r = y - x * x;
    Evaluation out{(1.0 - x) * (1.0 - x) + 100.0 * r * r, ParamVector(theta.shape())};
    out.grad[0] = -2.0 * (1.0 - x) - 400.0 * x * r;
    out.grad[1] = 200.0 * r;
    return out;
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

std::vector<std::size_t> split_rows(std::size_t begin, std::size_t end) {
    std::vector<std::size_t> rows(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    return rows;
}

void assign_split(SyntheticDataset &ds) {
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.rows)));
    ds.train_rows = split_rows(0, n_train);
    ds.validation_rows = split_rows(n_train, ds.rows);
}

}    // namespace

SyntheticDataset make_dataset(std::uint64_t seed, const DatasetSpec &spec) {
    if (spec.n < 100) {
        throw std::invalid_argument("make_dataset: n must be >= 100");
    }
    if (spec.d < 2) {
        throw std::invalid_argument("make_dataset: d must be >= 2");
    }
    if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
        throw std::invalid_argument("make_dataset: noise must be finite and >= 0");
    }
    if (!(spec.scale_spread >= 1.0) || !std::isfinite(spec.scale_spread)) {
        throw std::invalid_argument("make_dataset: scale_spread must be >= 1");
    }

    const Rng root(seed);
    Rng profile_rng = root.derive("profiles");
    Rng label_rng = root.derive("labels");
    Rng row_rng = root.derive("rows");

    const std::size_t d = spec.d;
    // Pooled expected count per feature and the class-specific tilt.
    std::vector<double> base(d);
    std::vector<double> tilt(d);
    std::vector<double> scale(d);
    const double log_spread = std::log(spec.scale_spread);
    for (std::size_t j = 0; j < d; ++j) {
        base[j] = profile_rng.uniform(2.0, 6.0);
        tilt[j] = profile_rng.uniform(-0.5, 0.5);
        scale[j] = std::exp(log_spread * (profile_rng.uniform() - 0.5));
    }

    SyntheticDataset ds;
    ds.rows = spec.n;
    ds.dim = d;
    ds.seed = seed;
    ds.labels.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        ds.labels[i] = i < spec.n / 2 ? 1 : 0;
    }
    shuffle(std::span<int>(ds.labels), label_rng);

    ds.features.resize(spec.n * d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double length = row_rng.uniform(0.75, 1.25);
        const double sign = ds.labels[i] == 1 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double rate = length * base[j] * (1.0 + sign * tilt[j]);
            const double z = spec.noise > 0.0 ? row_rng.normal() : 0.0;
            const double count = rate + spec.noise * std::sqrt(rate) * z;
            ds.features[i * d + j] = scale[j] * (count - base[j]);
        }
    }
    assign_split(ds);
    return ds;
}

SyntheticDataset make_dataset(std::uint64_t seed, std::size_t n, std::size_t d, double noise) {
    return make_dataset(seed, DatasetSpec{.n = n, .d = d, .noise = noise});
}

void write_dataset_csv(const SyntheticDataset &ds, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    for (std::size_t j = 0; j < ds.dim; ++j) {
        out << 'f' << j << ',';
    }
    out << "label\n";
    for (std::size_t i = 0; i < ds.rows; ++i) {
        for (double x : ds.row(i)) {
            out << fmt::format("{:.17g},", x);
        }
        out << ds.labels[i] << '\n';
    }
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

SyntheticDataset read_dataset_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument(path.string() + ": missing header");
    }
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 3 || !line.ends_with("label")) {
        throw std::invalid_argument(path.string() + ": header must end with a label column");
    }
    SyntheticDataset ds;
    ds.dim = columns - 1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::string_view rest = line;
        for (std::size_t c = 0; c < columns; ++c) {
            auto comma = rest.find(',');
            std::string_view field = rest.substr(0, comma);
            if ((comma == std::string_view::npos) != (c + 1 == columns)) {
                throw std::invalid_argument(fmt::format("{}:{}: expected {} columns", path.string(), line_no, columns));
            }
            if (c + 1 < columns) {
                double value = 0.0;
                auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
                if (ec != std::errc() || ptr != field.data() + field.size()) {
                    throw std::invalid_argument(fmt::format("{}:{}: bad number '{}'", path.string(), line_no, field));
                }
                ds.features.push_back(value);
                rest.remove_prefix(comma + 1);
            } else if (field == "0" || field == "1") {
                ds.labels.push_back(field == "1" ? 1 : 0);
            } else {
                throw std::invalid_argument(fmt::format("{}:{}: label must be 0 or 1", path.string(), line_no));
            }
        }
    }
    ds.rows = ds.labels.size();
    assign_split(ds);
    return ds;
}

Batch gather(const SyntheticDataset &ds, std::span<const std::size_t> rows) {
    Batch batch;
    batch.dim = ds.dim;
    batch.features.reserve(rows.size() * ds.dim);
    batch.labels.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= ds.rows) {
            throw std::out_of_range("gather: row index out of range");
        }
        auto row = ds.row(r);
        batch.features.insert(batch.features.end(), row.begin(), row.end());
        batch.labels.push_back(ds.labels[r]);
    }
    return batch;
}

std::vector<std::vector<std::size_t>> minibatch_iter(const SyntheticDataset &ds, std::size_t batch_size, Rng &rng) {
    if (batch_size == 0) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    std::vector<std::size_t> order = ds.train_rows;
    shuffle(std::span<std::size_t>(order), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
        std::size_t hi = std::min(order.size(), lo + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(lo),
                             order.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return batches;
}

// ---------------------------------------------------------------------------
// MLP

namespace {

struct MlpLayout {
    std::size_t d;
    std::size_t h;
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return d * h; }
    std::size_t w2() const { return d * h + h; }
    std::size_t b2() const { return d * h + 3 * h; }
};

void check_mlp_inputs(const MlpModel &model, const ParamVector &theta, const Batch &batch) {
    model.validate();
    if (theta.size() != model.param_count()) {
        throw std::invalid_argument(fmt::format("mlp: theta has {} entries, model packs {}", theta.size(),
                                                model.param_count()));
    }
    if (batch.size() == 0) {
        throw std::invalid_argument("mlp: empty batch");
    }
    if (batch.dim != model.input_dim) {
        throw std::invalid_argument(fmt::format("mlp: batch dim {} != model input dim {}", batch.dim,
                                                model.input_dim));
    }
}

// Hidden pre-activation -> tanh for one row.
void hidden_layer(const MlpLayout &L, std::span<const double> w, std::span<const double> x, std::span<double> a) {
    for (std::size_t k = 0; k < L.h; ++k) {
        double z = w[L.b1() + k];
        const double *row = w.data() + L.w1() + k * L.d;
        for (std::size_t j = 0; j < L.d; ++j) {
            z += row[j] * x[j];
        }
        a[k] = std::tanh(z);
    }
}

// Output logits -> (probabilities, -log p_label).
double output_layer(const MlpLayout &L, std::span<const double> w, std::span<const double> a, int label,
                    double *probs) {
    double logits[2];
    for (std::size_t c = 0; c < 2; ++c) {
        double z = w[L.b2() + c];
        const double *row = w.data() + L.w2() + c * L.h;
        for (std::size_t k = 0; k < L.h; ++k) {
            z += row[k] * a[k];
        }
        logits[c] = z;
    }
    const double mx = std::max(logits[0], logits[1]);
    const double lse = mx + std::log(std::exp(logits[0] - mx) + std::exp(logits[1] - mx));
    probs[0] = std::exp(logits[0] - lse);
    probs[1] = std::exp(logits[1] - lse);
    return lse - logits[label];
}

bool dropout_active(const MlpModel &model) {
    return model.mode == MlpMode::Train && model.dropout_rate > 0.0;
}

}    // namespace

void MlpModel::validate() const {
    if (input_dim == 0 || hidden_dim == 0) {
        throw std::invalid_argument("mlp: layer sizes must be >= 1");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw std::invalid_argument("mlp: dropout_rate must lie in [0, 1)");
    }
}

ParamVector init_mlp_params(const MlpModel &model, Rng &rng) {
    model.validate();
    const MlpLayout L{model.input_dim, model.hidden_dim};
    ParamVector theta(Shape{model.param_count()});
    const double limit1 = std::sqrt(6.0 / static_cast<double>(L.d + L.h));
    const double limit2 = std::sqrt(6.0 / static_cast<double>(L.h + 2));
    for (std::size_t i = 0; i < L.d * L.h; ++i) {
        theta[L.w1() + i] = rng.uniform(-limit1, limit1);
    }
    for (std::size_t i = 0; i < 2 * L.h; ++i) {
        theta[L.w2() + i] = rng.uniform(-limit2, limit2);
    }
    return theta;
}

MlpForward mlp_forward(const MlpModel &model, const ParamVector &theta, const Batch &batch, Rng rng) {
    check_mlp_inputs(model, theta, batch);
    const MlpLayout L{model.input_dim, model.hidden_dim};
    const std::size_t n = batch.size();
    const bool drop = dropout_active(model);
    const double keep_scale = 1.0 / (1.0 - model.dropout_rate);

    MlpForward out;
    out.hidden.resize(n * L.h);
    out.probabilities.resize(n * 2);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::span<double> a(out.hidden.data() + i * L.h, L.h);
        hidden_layer(L, theta.values(), batch.row(i), a);
        if (drop) {
            for (double &ak : a) {
                ak = rng.uniform() < model.dropout_rate ? 0.0 : ak * keep_scale;
            }
        }
        loss_sum += output_layer(L, theta.values(), a, batch.labels[i], out.probabilities.data() + i * 2);
    }
    out.loss = loss_sum / static_cast<double>(n);
    return out;
}

Evaluation mlp_eval(const MlpModel &model, const ParamVector &theta, const Batch &batch, Rng rng) {
    check_mlp_inputs(model, theta, batch);
    const MlpLayout L{model.input_dim, model.hidden_dim};
    const std::size_t n = batch.size();
    const bool drop = dropout_active(model);
    const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::span<const double> w = theta.values();

    Evaluation out{0.0, ParamVector(theta.shape())};
    std::span<double> grad = out.grad.values();
    std::vector<double> a(L.h);        // tanh output
    std::vector<double> mask(L.h, 1.0);
    std::vector<double> dropped(L.h);  // a * mask
    double loss_sum = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        auto x = batch.row(i);
        hidden_layer(L, w, x, a);
        for (std::size_t k = 0; k < L.h; ++k) {
            if (drop) {
                mask[k] = rng.uniform() < model.dropout_rate ? 0.0 : keep_scale;
                dropped[k] = mask[k] == 0.0 ? 0.0 : a[k] * keep_scale;
            } else {
                dropped[k] = a[k];
            }
        }
        double probs[2];
        const int y = batch.labels[i];
        loss_sum += output_layer(L, w, dropped, y, probs);

        // Backward through softmax cross-entropy, scaled for the batch mean.
        double dlogit[2] = {probs[0] * inv_n, probs[1] * inv_n};
        dlogit[y] -= inv_n;
        for (std::size_t c = 0; c < 2; ++c) {
            grad[L.b2() + c] += dlogit[c];
            for (std::size_t k = 0; k < L.h; ++k) {
                grad[L.w2() + c * L.h + k] += dlogit[c] * dropped[k];
            }
        }
        for (std::size_t k = 0; k < L.h; ++k) {
            double dk = w[L.w2() + k] * dlogit[0] + w[L.w2() + L.h + k] * dlogit[1];
            if (drop) {
                dk *= mask[k];
            }
            const double dz = dk * (1.0 - a[k] * a[k]);
            grad[L.b1() + k] += dz;
            double *grow = grad.data() + L.w1() + k * L.d;
            for (std::size_t j = 0; j < L.d; ++j) {
                grow[j] += dz * x[j];
            }
        }
    }
    out.loss = loss_sum * inv_n;
    return out;
}

SplitEvaluation mlp_evaluate_rows(const MlpModel &model, const ParamVector &theta, const SyntheticDataset &ds,
                                  std::span<const std::size_t> rows) {
    const MlpModel eval_model = model.with_mode(MlpMode::Eval);
    eval_model.validate();
    if (rows.empty()) {
        throw std::invalid_argument("mlp: empty evaluation split");
    }
    if (theta.size() != eval_model.param_count() || ds.dim != eval_model.input_dim) {
        throw std::invalid_argument("mlp: model does not match parameters or dataset");
    }
    const MlpLayout L{eval_model.input_dim, eval_model.hidden_dim};
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
    std::vector<double> row_loss(rows.size());
    SplitEvaluation out;
    out.predictions.resize(rows.size());
#pragma omp parallel for schedule(static) if (rows.size() >= 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto r = rows[static_cast<std::size_t>(i)];
        std::vector<double> a(L.h);
        double probs[2];
        hidden_layer(L, theta.values(), ds.row(r), a);
        row_loss[static_cast<std::size_t>(i)] = output_layer(L, theta.values(), a, ds.labels[r], probs);
        out.predictions[static_cast<std::size_t>(i)] = probs[1] > probs[0] ? 1 : 0;
    }
    double total = 0.0;
    for (double l : row_loss) {
        total += l;
    }
    out.loss = total / static_cast<double>(rows.size());
    return out;
}

// ---------------------------------------------------------------------------
// Finite differences

GradCheckReport check_gradient(const Objective &objective, const ParamVector &theta) {
    if (theta.size() != objective.param_count()) {
        throw std::invalid_argument("check_gradient: theta size does not match objective");
    }
    GradCheckReport report;
    const Evaluation base = objective.evaluate(theta);
    report.analytic = base.grad.vector();
    report.numeric.resize(theta.size());
    ParamVector probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(theta[i]));
        probe[i] = theta[i] + h;
        const double up = objective.evaluate(probe).loss;
        probe[i] = theta[i] - h;
        const double down = objective.evaluate(probe).loss;
        probe[i] = theta[i];
        const double fd = (up - down) / (2.0 * h);
        report.numeric[i] = fd;
        const double a = report.analytic[i];
        const double denom = std::max({std::abs(a), std::abs(fd), gradcheck_denominator_floor});
        const double err = std::abs(a - fd) / denom;
        if (err > report.max_relative_error || i == 0) {
            report.max_relative_error = err;
            report.worst_coordinate = i;
        }
    }
    return report;
}

}    // namespace adaptopt
