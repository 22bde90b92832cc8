#pragma once

#include "adaptopt/param_store.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adaptopt {

struct Evaluation {
    double loss = 0.0;
    ParamVector grad;
};

/// A differentiable problem with a fixed parameter count.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::string_view name() const noexcept = 0;
    virtual std::size_t param_count() const noexcept = 0;
    virtual Evaluation evaluate(const ParamVector &theta) const = 0;
};

/// 0.5 * sum_i d_i theta_i^2
class QuadraticObjective final : public Objective {
public:
    explicit QuadraticObjective(ParamVector diag);

    /// Diagonal log-spaced from 1 to `condition` over `dim` coordinates.
    static QuadraticObjective with_condition(std::size_t dim, double condition);

    std::string_view name() const noexcept override { return "quadratic"; }
    std::size_t param_count() const noexcept override { return diag_.size(); }
    Evaluation evaluate(const ParamVector &theta) const override;

    const ParamVector &diag() const noexcept { return diag_; }

private:
    ParamVector diag_;
};

/// (1 - x)^2 + 100 (y - x^2)^2, minimum 0 at (1, 1).
class RosenbrockObjective final : public Objective {
public:
    std::string_view name() const noexcept override { return "rosenbrock"; }
    std::size_t param_count() const noexcept override { return 2; }
    Evaluation evaluate(const ParamVector &theta) const override;
};

// ---------------------------------------------------------------------------
// Synthetic two-class bag-of-words data.

struct SyntheticDataset {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> features;    // rows x dim, row-major
    std::vector<int> labels;         // 0 or 1
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> validation_rows;
    std::uint64_t seed = 0;

    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

    friend bool operator==(const SyntheticDataset &, const SyntheticDataset &) = default;
};

struct DatasetSpec {
    std::size_t n = 1000;
    std::size_t d = 20;
    double noise = 1.0;
    /// Ratio between the largest and smallest per-feature scale.
    double scale_spread = 1e3;

    friend bool operator==(const DatasetSpec &, const DatasetSpec &) = default;
};

inline constexpr double train_fraction = 0.8;

/// Class-conditional count profiles with per-row document length, Gaussian
/// count noise of relative size `noise`, centering at the pooled expected
/// count, and log-uniform per-feature scales spanning `scale_spread`. Rows
/// are shuffled; the first 80% are the training split.
SyntheticDataset make_dataset(std::uint64_t seed, const DatasetSpec &spec);
SyntheticDataset make_dataset(std::uint64_t seed, std::size_t n, std::size_t d, double noise);

/// Header `f0,...,f{d-1},label`; rows in dataset order.
void write_dataset_csv(const SyntheticDataset &ds, const std::filesystem::path &path);
/// Inverse of write_dataset_csv. The split is recomputed from row order.
SyntheticDataset read_dataset_csv(const std::filesystem::path &path);

struct Batch {
    std::size_t dim = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
};

Batch gather(const SyntheticDataset &ds, std::span<const std::size_t> rows);

/// One epoch of training-row index batches in a seeded shuffled order. Every
/// training row appears exactly once; the last batch may be short.
std::vector<std::vector<std::size_t>> minibatch_iter(const SyntheticDataset &ds, std::size_t batch_size, Rng &rng);

// ---------------------------------------------------------------------------
// d -> h -> 2 perceptron: affine, tanh, inverted dropout, affine, softmax.

enum class MlpMode { Train, Eval };

struct MlpModel {
    std::size_t input_dim = 20;
    std::size_t hidden_dim = 8;
    double dropout_rate = 0.1;
    MlpMode mode = MlpMode::Train;

    /// d*h + h + 2*h + 2. Layout: W1 (h x d), b1, W2 (2 x h), b2.
    std::size_t param_count() const noexcept { return input_dim * hidden_dim + hidden_dim + 2 * hidden_dim + 2; }
    void validate() const;

    MlpModel with_mode(MlpMode m) const {
        MlpModel copy = *this;
        copy.mode = m;
        return copy;
    }
};

/// Glorot-uniform weights, zero biases.
ParamVector init_mlp_params(const MlpModel &model, Rng &rng);

struct MlpForward {
    std::vector<double> hidden;          // batch x h, after dropout
    std::vector<double> probabilities;   // batch x 2
    double loss = 0.0;                   // mean cross-entropy
};

/// Forward pass. In Train mode with dropout_rate > 0 the mask is drawn from
/// `rng`, row by row, hidden unit by hidden unit.
MlpForward mlp_forward(const MlpModel &model, const ParamVector &theta, const Batch &batch, Rng rng);

/// Mean cross-entropy and its gradient, backpropagated through the same
/// dropout mask mlp_forward draws for this rng value.
Evaluation mlp_eval(const MlpModel &model, const ParamVector &theta, const Batch &batch, Rng rng);

struct SplitEvaluation {
    double loss = 0.0;
    std::vector<int> predictions;
};

/// Eval-mode loss and argmax predictions over a set of dataset rows.
/// Row-parallel; the result does not depend on the thread count.
SplitEvaluation mlp_evaluate_rows(const MlpModel &model, const ParamVector &theta, const SyntheticDataset &ds,
                                  std::span<const std::size_t> rows);

/// Binds an MLP, a batch, and a dropout stream into an Objective (the mask is
/// fixed, so the bound function is deterministic).
class MlpBatchObjective final : public Objective {
public:
    MlpBatchObjective(MlpModel model, Batch batch, Rng rng)
        : model_(model), batch_(std::move(batch)), rng_(rng) {}

    std::string_view name() const noexcept override { return "mlp"; }
    std::size_t param_count() const noexcept override { return model_.param_count(); }
    Evaluation evaluate(const ParamVector &theta) const override {
        return mlp_eval(model_, theta, batch_, rng_);
    }

private:
    MlpModel model_;
    Batch batch_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Finite-difference audit.

inline constexpr double gradcheck_denominator_floor = 1e-3;

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_coordinate = 0;
    std::vector<double> analytic;
    std::vector<double> numeric;
};

/// Central differences with h_i = 1e-6 * max(1, |theta_i|). The relative error
/// per coordinate is |a - f| / max(|a|, |f|, gradcheck_denominator_floor).
GradCheckReport check_gradient(const Objective &objective, const ParamVector &theta);

}    // namespace adaptopt
