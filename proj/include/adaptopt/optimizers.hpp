#pragma once

#include "adaptopt/param_store.hpp"
#include "adaptopt/schedules.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace adaptopt {

enum class OptimizerKind { Sgd, Momentum, AdaGrad, RmsProp, Adam, Composite };

/// Fixed reporting order for comparison tables.
inline constexpr std::array<OptimizerKind, 6> all_optimizer_kinds = {
    OptimizerKind::Sgd,     OptimizerKind::Momentum, OptimizerKind::AdaGrad,
    OptimizerKind::RmsProp, OptimizerKind::Adam,     OptimizerKind::Composite,
};

/// Config/CSV name: sgd, momentum, adagrad, rmsprop, adam, composite.
std::string_view to_string(OptimizerKind kind) noexcept;
/// Table label: SGD, Momentum, AdaGrad, RMSProp, Adam, Ours.
std::string_view display_name(OptimizerKind kind) noexcept;
std::string_view describe(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer_kind(std::string_view name);
std::size_t report_rank(OptimizerKind kind) noexcept;

struct HyperParams {
    double eta0 = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double mu = 0.9;       // heavy-ball momentum coefficient
    double rho = 0.9;      // RMSProp averaging coefficient
    double gamma = 0.97;   // exponential decay rate
    ClipValue clip_value = 1.0;

    /// Throws std::invalid_argument naming the first out-of-range field.
    void validate() const;

    friend bool operator==(const HyperParams &, const HyperParams &) = default;
};

/// Mutable per-run state. `v` holds the velocity (Momentum), the squared
/// gradient accumulator (AdaGrad), or the second moment (RMSProp, Adam,
/// Composite). `m` is the Adam first moment. Moments are stored without bias
/// correction.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    std::int64_t t = 0;
    std::optional<ParamVector> m;
    std::optional<ParamVector> v;
    // beta^t as running products; flushed to 0 below 1e-300.
    double beta1_power = 1.0;
    double beta2_power = 1.0;

    friend bool operator==(const OptimizerState &, const OptimizerState &) = default;
};

struct StepReport {
    double effective_lr = 0.0;
    double pre_clip_grad_norm = 0.0;
    bool clipped = false;
    double update_norm = 0.0;
};

struct StepResult {
    OptimizerState state;
    ParamVector theta;
    StepReport report;
};

OptimizerState init_state(OptimizerKind kind, const Shape &shape);

// Each step takes state and parameters by value and returns the successors;
// pass them with std::move to update in place without copies.

/// theta' = theta - eta0 * g
StepResult sgd_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp);
/// v' = mu * v + g; theta' = theta - eta0 * v'
StepResult momentum_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp);
/// v' = v + g^2; theta' = theta - eta0 * g / (sqrt(v') + eps)
StepResult adagrad_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp);
/// v' = rho * v + (1 - rho) * g^2; theta' = theta - eta0 * g / (sqrt(v') + eps)
StepResult rmsprop_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp);

/// Bias-corrected Adam with epsilon outside the square root:
///   m' = b1 m + (1 - b1) g,  v' = b2 v + (1 - b2) g^2
///   m_hat = m' / (1 - b1^t'), v_hat = v' / (1 - b2^t')
///   theta' = theta - eta0 * m_hat / (sqrt(v_hat) + eps)
StepResult adam_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp);

/// Adam on the norm-clipped gradient with learning rate
/// decayed_lr(eta0, gamma, schedule_t). Clipping happens before the moments
/// see the gradient.
StepResult composite_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp,
                          std::int64_t schedule_t);

/// Dispatches on state.kind. schedule_t is ignored by every kind but Composite.
StepResult optimizer_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp,
                          std::int64_t schedule_t = 0);

struct CorrectedMoments {
    ParamVector m_hat;
    ParamVector v_hat;
};

/// Bias-corrected moments of an Adam or Composite state after at least one step.
CorrectedMoments corrected_moments(const OptimizerState &state);

}    // namespace adaptopt
