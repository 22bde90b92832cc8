#pragma once

#include "adaptopt/param_store.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace adaptopt {

/// Clipping threshold; std::nullopt disables clipping.
using ClipValue = std::optional<double>;

enum class ScheduleKind { Constant, ExponentialDecay };
enum class DecayUnit { PerStep, PerEpoch };

std::string_view to_string(DecayUnit unit) noexcept;
DecayUnit parse_decay_unit(std::string_view name);

/// eta0 * gamma^t. Throws for t < 0.
double decayed_lr(double eta0, double gamma, std::int64_t t);

struct Schedule {
    ScheduleKind kind = ScheduleKind::ExponentialDecay;
    double eta0 = 2e-5;
    double gamma = 0.97;
    DecayUnit unit = DecayUnit::PerEpoch;

    void validate() const;

    /// The exponent fed to decayed_lr for a given global step / epoch index.
    std::int64_t schedule_t(std::int64_t step, std::int64_t epoch) const noexcept {
        return unit == DecayUnit::PerStep ? step : epoch;
    }

    double lr_at(std::int64_t step, std::int64_t epoch) const;
};

struct ClipResult {
    ParamVector gradient;
    bool clipped = false;
    double pre_clip_norm = 0.0;
};

/// Rescales g to norm clip_value when ||g||_2 > clip_value; returns g
/// unchanged otherwise. The rescaled norm never exceeds clip_value, which
/// makes clipping idempotent bitwise.
ClipResult clip_gradient(ParamVector g, ClipValue clip_value);

}    // namespace adaptopt
