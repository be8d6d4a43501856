#include "calib/metrics.hpp"

#include "calib/csv.hpp"
#include "calib/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace calib {

std::string_view to_string(BinScheme scheme) noexcept {
    return scheme == BinScheme::EqualFrequency ? "equal-frequency" : "equal-width";
}

BinScheme parse_bin_scheme(std::string_view text) {
    if (text == "equal-frequency") return BinScheme::EqualFrequency;
    if (text == "equal-width") return BinScheme::EqualWidth;
    throw InputError(fmt::format("unknown bin scheme '{}'", text));
}

namespace {

void require_nonempty(std::span<const ScoredSample> predictions, const char* what) {
    if (predictions.empty()) throw InputError(fmt::format("{}: empty prediction list", what));
}

struct Accumulator {
    double sum_pred = 0.0;
    std::size_t positives = 0;
    std::size_t count = 0;
};

}  // namespace

std::vector<ReliabilityBin> reliability(std::span<const ScoredSample> predictions,
                                        std::size_t num_bins, BinScheme scheme) {
    require_nonempty(predictions, "reliability");
    if (num_bins < 1) throw InputError("reliability: num_bins must be >= 1");

    const std::size_t n = predictions.size();
    std::vector<Accumulator> acc;
    if (scheme == BinScheme::EqualFrequency) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return predictions[a].score < predictions[b].score;
        });
        const std::size_t groups = std::min(num_bins, n);
        acc.resize(groups);
        for (std::size_t g = 0; g < groups; ++g) {
            for (std::size_t k = g * n / groups; k < (g + 1) * n / groups; ++k) {
                const auto& p = predictions[order[k]];
                acc[g].sum_pred += p.score;
                acc[g].positives += static_cast<std::size_t>(p.label);
                ++acc[g].count;
            }
        }
    } else {
        acc.resize(num_bins);
        for (const auto& p : predictions) {
            auto b = static_cast<std::size_t>(p.score * static_cast<double>(num_bins));
            b = std::min(b, num_bins - 1);
            acc[b].sum_pred += p.score;
            acc[b].positives += static_cast<std::size_t>(p.label);
            ++acc[b].count;
        }
    }

    std::vector<ReliabilityBin> bins(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        bins[i].index = i;
        bins[i].count = acc[i].count;
        if (acc[i].count == 0) continue;
        const auto c = static_cast<double>(acc[i].count);
        bins[i].observed = static_cast<double>(acc[i].positives) / c;
        bins[i].expected = acc[i].sum_pred / c;
        bins[i].weight = c / static_cast<double>(n);
    }
    return bins;
}

double ece(std::span<const ReliabilityBin> bins) {
    double total = 0.0;
    for (const auto& b : bins)
        if (b.count > 0) total += b.weight * std::abs(b.observed - b.expected);
    return total;
}

double mce(std::span<const ReliabilityBin> bins) {
    double worst = 0.0;
    for (const auto& b : bins)
        if (b.count > 0) worst = std::max(worst, std::abs(b.observed - b.expected));
    return worst;
}

double auc(std::span<const ScoredSample> predictions) {
    const std::size_t n = predictions.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].score < predictions[b].score;
    });

    // Twice the rank sum of the positives, using midranks for tied runs:
    // a run occupying 1-based ranks [i+1, j] has midrank (i+1+j)/2.
    std::uint64_t positives = 0;
    std::uint64_t twice_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && predictions[order[j]].score == predictions[order[i]].score) ++j;
        std::uint64_t run_pos = 0;
        for (std::size_t k = i; k < j; ++k) run_pos += static_cast<std::uint64_t>(predictions[order[k]].label);
        positives += run_pos;
        twice_rank_sum += run_pos * static_cast<std::uint64_t>(i + 1 + j);
        i = j;
    }
    const std::uint64_t negatives = n - positives;
    if (positives == 0 || negatives == 0)
        throw InputError("auc: undefined without both positive and negative instances");
    const std::uint64_t twice_u = twice_rank_sum - positives * (positives + 1);
    return static_cast<double>(twice_u) /
           (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double rmse(std::span<const ScoredSample> predictions) {
    require_nonempty(predictions, "rmse");
    double sum = 0.0;
    for (const auto& p : predictions) {
        const double d = p.score - static_cast<double>(p.label);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

double accuracy(std::span<const ScoredSample> predictions, double threshold) {
    require_nonempty(predictions, "accuracy");
    std::size_t correct = 0;
    for (const auto& p : predictions)
        if (static_cast<int>(p.score >= threshold) == p.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

ReliabilityReport evaluate(std::span<const ScoredSample> predictions, std::size_t num_bins,
                           BinScheme scheme) {
    ReliabilityReport report;
    report.bins = reliability(predictions, num_bins, scheme);
    report.ece = ece(report.bins);
    report.mce = mce(report.bins);
    report.rmse = rmse(predictions);
    report.accuracy = accuracy(predictions);
    const bool has_pos = std::any_of(predictions.begin(), predictions.end(),
                                     [](const ScoredSample& p) { return p.label == 1; });
    const bool has_neg = std::any_of(predictions.begin(), predictions.end(),
                                     [](const ScoredSample& p) { return p.label == 0; });
    if (has_pos && has_neg) report.auc = auc(predictions);
    return report;
}

void write_reliability_csv(const std::filesystem::path& path,
                           std::span<const ReliabilityBin> bins) {
    csv::Table table;
    table.header = {"bin_index", "e_i", "o_i", "weight", "count"};
    for (const auto& b : bins)
        table.rows.push_back({std::to_string(b.index), csv::format_double(b.expected),
                              csv::format_double(b.observed), csv::format_double(b.weight),
                              std::to_string(b.count)});
    csv::write(path, table);
}

}  // namespace calib
