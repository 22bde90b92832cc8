#include "adaptopt/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptopt {

namespace {

void require_nonempty(const ConfusionCounts &counts) {
    if (counts.total() == 0) {
        throw std::invalid_argument("metrics: zero evaluated examples");
    }
}

}    // namespace

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) {
        throw std::invalid_argument("confusion: prediction and label counts differ");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if ((predicted[i] != 0 && predicted[i] != 1) || (actual[i] != 0 && actual[i] != 1)) {
            throw std::invalid_argument("confusion: labels must be 0 or 1");
        }
        const bool p = predicted[i] == 1;
        const bool a = actual[i] == 1;
        if (p && a) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (a) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

double accuracy(const ConfusionCounts &counts) {
    require_nonempty(counts);
    return static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
}

double precision(const ConfusionCounts &counts) {
    require_nonempty(counts);
    const std::size_t denom = counts.tp + counts.fp;
    return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double recall(const ConfusionCounts &counts) {
    require_nonempty(counts);
    const std::size_t denom = counts.tp + counts.fn;
    return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double f1_score(const ConfusionCounts &counts) {
    require_nonempty(counts);
    if (counts.tp == 0) {
        return 0.0;
    }
    // 2PR/(P+R) == 2tp / (2tp + fp + fn)
    const double tp = static_cast<double>(counts.tp);
    return 2.0 * tp / (2.0 * tp + static_cast<double>(counts.fp) + static_cast<double>(counts.fn));
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("mean_std: no values");
    }
    MeanStd out;
    for (double v : values) {
        out.mean += v;
    }
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

LossSummary summarize_losses(std::span<const double> losses) {
    if (losses.empty()) {
        throw std::invalid_argument("summarize_losses: empty trajectory");
    }
    LossSummary s{losses.front(), losses.back(), losses.front(), 0};
    for (std::size_t i = 1; i < losses.size(); ++i) {
        if (losses[i] < s.minimum) {
            s.minimum = losses[i];
            s.argmin = i;
        }
    }
    return s;
}

}    // namespace adaptopt
