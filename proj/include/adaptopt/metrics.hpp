#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adaptopt {

/// Binary confusion counts; the positive class is label 1.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }

    friend bool operator==(const ConfusionCounts &, const ConfusionCounts &) = default;
};

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual);

double accuracy(const ConfusionCounts &counts);
double precision(const ConfusionCounts &counts);
double recall(const ConfusionCounts &counts);
/// Harmonic mean of precision and recall; 0 when tp == 0.
double f1_score(const ConfusionCounts &counts);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;    // sample standard deviation; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct LossSummary {
    double initial = 0.0;
    double final = 0.0;
    double minimum = 0.0;
    std::size_t argmin = 0;
};

LossSummary summarize_losses(std::span<const double> losses);

}    // namespace adaptopt
