#pragma once

#include "calib/data.hpp"
#include "calib/scheme.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace calib {

// Predictions are ScoredSample values whose score is the (calibrated)
// probability being evaluated.

struct ReliabilityBin {
    std::size_t index = 0;
    double observed = 0.0;   // o_i: fraction of positives in the bin
    double expected = 0.0;   // e_i: mean prediction in the bin
    double weight = 0.0;     // P(i): fraction of all predictions in the bin
    std::size_t count = 0;   // empty bins keep observed = expected = weight = 0
};

struct ReliabilityReport {
    std::vector<ReliabilityBin> bins;
    double ece = 0.0;
    double mce = 0.0;
    double rmse = 0.0;
    double accuracy = 0.0;
    std::optional<double> auc;  // absent when only one class is present
};

inline constexpr std::size_t kDefaultMetricBins = 10;

// Equal-frequency: predictions are stably sorted and cut by position into
// min(num_bins, N) groups whose sizes differ by at most one; tied values may
// straddle groups. Equal-width: bin floor(p * num_bins), last bin closed at 1.
std::vector<ReliabilityBin> reliability(std::span<const ScoredSample> predictions,
                                        std::size_t num_bins = kDefaultMetricBins,
                                        BinScheme scheme = BinScheme::EqualFrequency);

// Sum of P(i)|o_i - e_i| over nonempty bins; 0 for an empty list.
double ece(std::span<const ReliabilityBin> bins);
// Max of |o_i - e_i| over nonempty bins; 0 for an empty list.
double mce(std::span<const ReliabilityBin> bins);

// Empirical AUC with ties counted one half, computed from midranks.
// Throws InputError unless both classes are present.
double auc(std::span<const ScoredSample> predictions);

double rmse(std::span<const ScoredSample> predictions);
// Fraction of predictions with (p >= threshold) == label.
double accuracy(std::span<const ScoredSample> predictions, double threshold = 0.5);

ReliabilityReport evaluate(std::span<const ScoredSample> predictions,
                           std::size_t num_bins = kDefaultMetricBins,
                           BinScheme scheme = BinScheme::EqualFrequency);

// Columns: bin_index, e_i, o_i, weight, count.
void write_reliability_csv(const std::filesystem::path& path,
                           std::span<const ReliabilityBin> bins);

}  // namespace calib
