#include "adaptopt/optimizers.hpp"

#include "adaptopt/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptopt {

namespace {

constexpr double power_floor = 1e-300;

bool needs_first_moment(OptimizerKind kind) {
    return kind == OptimizerKind::Adam || kind == OptimizerKind::Composite;
}

bool needs_second_buffer(OptimizerKind kind) {
    return kind != OptimizerKind::Sgd;
}

void check_inputs(const OptimizerState &state, OptimizerKind expected, const ParamVector &theta,
                  const ParamVector &g, const HyperParams &hp) {
    if (state.kind != expected) {
        throw std::invalid_argument(std::string(to_string(expected)) + " step applied to a " +
                                    std::string(to_string(state.kind)) + " state");
    }
    if (theta.empty()) {
        throw std::invalid_argument("empty parameter vector");
    }
    require_same_shape(theta, g, std::string(to_string(expected)) + " step (theta, gradient)");
    if (state.m) {
        require_same_shape(theta, *state.m, "optimizer state (theta, m)");
    }
    if (state.v) {
        require_same_shape(theta, *state.v, "optimizer state (theta, v)");
    }
    hp.validate();
}

// Advances the running beta powers and applies the Adam update with an
// explicit learning rate. Shared by adam_step and composite_step.
void apply_adam(OptimizerState &state, ParamVector &theta, const ParamVector &g, const HyperParams &hp,
                double lr) {
    state.beta1_power *= hp.beta1;
    state.beta2_power *= hp.beta2;
    if (state.beta1_power < power_floor) {
        state.beta1_power = 0.0;
    }
    if (state.beta2_power < power_floor) {
        state.beta2_power = 0.0;
    }
    const kernels::AdamCoefficients coeffs{
        .beta1 = hp.beta1,
        .beta2 = hp.beta2,
        .lr = lr,
        .epsilon = hp.epsilon,
        .bias1 = 1.0 - state.beta1_power,
        .bias2 = 1.0 - state.beta2_power,
    };
    kernels::adam_update(theta.values(), state.m->values(), state.v->values(), g.values(), coeffs);
    ++state.t;
}

template <typename Update>
StepResult run_step(OptimizerState state, ParamVector theta, const ParamVector &g, double lr, Update update) {
    StepResult result;
    result.report.effective_lr = lr;
    result.report.pre_clip_grad_norm = l2_norm(g);
    const ParamVector before = theta;
    update(state, theta);
    result.report.update_norm = std::sqrt(kernels::diff_sum_squares(theta.values(), before.values()));
    result.state = std::move(state);
    result.theta = std::move(theta);
    return result;
}

}    // namespace

std::string_view to_string(OptimizerKind kind) noexcept {
    switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    case OptimizerKind::AdaGrad: return "adagrad";
    case OptimizerKind::RmsProp: return "rmsprop";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::Composite: return "composite";
    }
    return "unknown";
}

std::string_view display_name(OptimizerKind kind) noexcept {
    switch (kind) {
    case OptimizerKind::Sgd: return "SGD";
    case OptimizerKind::Momentum: return "Momentum";
    case OptimizerKind::AdaGrad: return "AdaGrad";
    case OptimizerKind::RmsProp: return "RMSProp";
    case OptimizerKind::Adam: return "Adam";
    case OptimizerKind::Composite: return "Ours";
    }
    return "unknown";
}

std::string_view describe(OptimizerKind kind) noexcept {
    switch (kind) {
    case OptimizerKind::Sgd: return "fixed learning rate gradient descent";
    case OptimizerKind::Momentum: return "heavy-ball momentum, v = mu*v + g";
    case OptimizerKind::AdaGrad: return "per-coordinate accumulated squared gradients";
    case OptimizerKind::RmsProp: return "EMA of squared gradients with coefficient rho";
    case OptimizerKind::Adam: return "bias-corrected first/second moment estimates";
    case OptimizerKind::Composite: return "Adam + exponential learning-rate decay + L2 gradient clipping";
    }
    return "";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
    for (OptimizerKind kind : all_optimizer_kinds) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    if (name == "ours") {
        return OptimizerKind::Composite;
    }
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::size_t report_rank(OptimizerKind kind) noexcept {
    return static_cast<std::size_t>(kind);
}

void HyperParams::validate() const {
    auto fail = [](const char *what) { throw std::invalid_argument(std::string("hyperparams: ") + what); };
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) fail("eta0 must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must lie in [0, 1)");
    if (!(epsilon > 0.0)) fail("epsilon must be > 0");
    if (!(mu >= 0.0 && mu < 1.0)) fail("mu must lie in [0, 1)");
    if (!(rho > 0.0 && rho < 1.0)) fail("rho must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
    if (clip_value && !(*clip_value > 0.0)) fail("clip_value must be > 0 when enabled");
}

OptimizerState init_state(OptimizerKind kind, const Shape &shape) {
    OptimizerState state;
    state.kind = kind;
    if (needs_first_moment(kind)) {
        state.m = ParamVector(shape);
    }
    if (needs_second_buffer(kind)) {
        state.v = ParamVector(shape);
    }
    return state;
}

StepResult sgd_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp) {
    check_inputs(state, OptimizerKind::Sgd, theta, g, hp);
    return run_step(std::move(state), std::move(theta), g, hp.eta0, [&](OptimizerState &s, ParamVector &th) {
        kernels::sgd_update(th.values(), g.values(), hp.eta0);
        ++s.t;
    });
}

StepResult momentum_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp) {
    check_inputs(state, OptimizerKind::Momentum, theta, g, hp);
    return run_step(std::move(state), std::move(theta), g, hp.eta0, [&](OptimizerState &s, ParamVector &th) {
        kernels::momentum_update(th.values(), s.v->values(), g.values(), hp.mu, hp.eta0);
        ++s.t;
    });
}

StepResult adagrad_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp) {
    check_inputs(state, OptimizerKind::AdaGrad, theta, g, hp);
    return run_step(std::move(state), std::move(theta), g, hp.eta0, [&](OptimizerState &s, ParamVector &th) {
        kernels::adagrad_update(th.values(), s.v->values(), g.values(), hp.eta0, hp.epsilon);
        ++s.t;
    });
}

StepResult rmsprop_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp) {
    check_inputs(state, OptimizerKind::RmsProp, theta, g, hp);
    return run_step(std::move(state), std::move(theta), g, hp.eta0, [&](OptimizerState &s, ParamVector &th) {
        kernels::rmsprop_update(th.values(), s.v->values(), g.values(), hp.rho, hp.eta0, hp.epsilon);
        ++s.t;
    });
}

StepResult adam_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp) {
    check_inputs(state, OptimizerKind::Adam, theta, g, hp);
    return run_step(std::move(state), std::move(theta), g, hp.eta0,
                    [&](OptimizerState &s, ParamVector &th) { apply_adam(s, th, g, hp, hp.eta0); });
}

StepResult composite_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp,
                          std::int64_t schedule_t) {
    check_inputs(state, OptimizerKind::Composite, theta, g, hp);
    const double lr = decayed_lr(hp.eta0, hp.gamma, schedule_t);
    ClipResult clip = clip_gradient(g, hp.clip_value);
    StepResult result = run_step(std::move(state), std::move(theta), clip.gradient, lr,
                                 [&](OptimizerState &s, ParamVector &th) { apply_adam(s, th, clip.gradient, hp, lr); });
    result.report.pre_clip_grad_norm = clip.pre_clip_norm;
    result.report.clipped = clip.clipped;
    return result;
}

StepResult optimizer_step(OptimizerState state, ParamVector theta, const ParamVector &g, const HyperParams &hp,
                          std::int64_t schedule_t) {
    switch (state.kind) {
    case OptimizerKind::Sgd: return sgd_step(std::move(state), std::move(theta), g, hp);
    case OptimizerKind::Momentum: return momentum_step(std::move(state), std::move(theta), g, hp);
    case OptimizerKind::AdaGrad: return adagrad_step(std::move(state), std::move(theta), g, hp);
    case OptimizerKind::RmsProp: return rmsprop_step(std::move(state), std::move(theta), g, hp);
    case OptimizerKind::Adam: return adam_step(std::move(state), std::move(theta), g, hp);
    case OptimizerKind::Composite: return composite_step(std::move(state), std::move(theta), g, hp, schedule_t);
    }
    throw std::invalid_argument("unknown optimizer kind");
}

CorrectedMoments corrected_moments(const OptimizerState &state) {
    if (!state.m || !state.v) {
        throw std::invalid_argument("corrected_moments requires an Adam or Composite state");
    }
    if (state.t == 0) {
        throw std::invalid_argument("corrected_moments requires at least one completed step");
    }
    CorrectedMoments out{*state.m, *state.v};
    const double bias1 = 1.0 - state.beta1_power;
    const double bias2 = 1.0 - state.beta2_power;
    for (double &x : out.m_hat.values()) {
        x /= bias1;
    }
    for (double &x : out.v_hat.values()) {
        x /= bias2;
    }
    return out;
}

}    // namespace adaptopt
