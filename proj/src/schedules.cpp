#include "adaptopt/schedules.hpp"

#include "adaptopt/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptopt {

std::string_view to_string(DecayUnit unit) noexcept {
    return unit == DecayUnit::PerStep ? "per_step" : "per_epoch";
}

DecayUnit parse_decay_unit(std::string_view name) {
    if (name == "per_step") {
        return DecayUnit::PerStep;
    }
    if (name == "per_epoch") {
        return DecayUnit::PerEpoch;
    }
    throw std::invalid_argument("unknown decay unit '" + std::string(name) + "' (expected per_step or per_epoch)");
}

double decayed_lr(double eta0, double gamma, std::int64_t t) {
    if (t < 0) {
        throw std::invalid_argument("decayed_lr: step index must be >= 0, got " + std::to_string(t));
    }
    return eta0 * std::pow(gamma, static_cast<double>(t));
}

void Schedule::validate() const {
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) {
        throw std::invalid_argument("schedule: eta0 must be > 0");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("schedule: gamma must lie in (0, 1]");
    }
}

double Schedule::lr_at(std::int64_t step, std::int64_t epoch) const {
    if (kind == ScheduleKind::Constant) {
        return eta0;
    }
    return decayed_lr(eta0, gamma, schedule_t(step, epoch));
}

ClipResult clip_gradient(ParamVector g, ClipValue clip_value) {
    if (g.empty()) {
        throw std::invalid_argument("empty parameter vector");
    }
    ClipResult result;
    result.pre_clip_norm = l2_norm(g);
    if (clip_value) {
        if (!(*clip_value > 0.0)) {
            throw std::invalid_argument("clip_value must be > 0");
        }
        if (result.pre_clip_norm > *clip_value) {
            const ParamVector original = g;
            double factor = *clip_value / result.pre_clip_norm;
            kernels::scale(g.values(), factor);
            // Rounding can leave the norm an ulp above the threshold; shave the
            // factor until it is not, so a second clip is a no-op.
            while (l2_norm(g) > *clip_value) {
                factor = std::nextafter(factor, 0.0);
                g = original;
                kernels::scale(g.values(), factor);
            }
            result.clipped = true;
        }
    }
    result.gradient = std::move(g);
    return result;
}

}    // namespace adaptopt
