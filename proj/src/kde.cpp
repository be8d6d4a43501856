#include "calib/density.hpp"

#include "calib/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace calib {

namespace {

double kernel_sum(const std::vector<double>& sorted, double x, double h) {
    // Candidates lie within [x - h, x + h]; widen the search so rounding in the
    // window bounds cannot drop a point the kernel itself would count.
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - 2.0 * h);
    const auto last = std::upper_bound(first, sorted.end(), x + 2.0 * h);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) sum += boxcar(std::abs(x - *it) / h);
    return sum;
}

}  // namespace

double silverman_bandwidth(std::span<const double> scores) {
    if (scores.size() < 2)
        throw FitError(fmt::format("Silverman bandwidth needs at least 2 scores, got {}", scores.size()));
    const auto n = static_cast<double>(scores.size());
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= n;
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) return kBandwidthFloor;
    return 1.06 * sd * std::pow(n, -0.2);
}

double KdeModel::positive_sum(double x) const { return kernel_sum(positive_scores, x, h1); }
double KdeModel::negative_sum(double x) const { return kernel_sum(negative_scores, x, h0); }

KdeModel fit_kde(const Dataset& data, bool shared_bandwidth) {
    KdeModel model;
    model.positive_scores = data.scores_with_label(1);
    model.negative_scores = data.scores_with_label(0);
    if (model.positive_scores.size() < 2 || model.negative_scores.size() < 2)
        throw FitError(fmt::format("KDE calibration needs >= 2 samples per class (have {} positive, {} negative)",
                                   model.positive_scores.size(), model.negative_scores.size()));
    std::sort(model.positive_scores.begin(), model.positive_scores.end());
    std::sort(model.negative_scores.begin(), model.negative_scores.end());
    if (shared_bandwidth) {
        const auto all = data.scores();
        model.h0 = model.h1 = silverman_bandwidth(all);
    } else {
        model.h1 = silverman_bandwidth(model.positive_scores);
        model.h0 = silverman_bandwidth(model.negative_scores);
    }
    model.prior_positive = static_cast<double>(data.positives()) / static_cast<double>(data.size());
    return model;
}

double apply_kde(const KdeModel& model, double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InputError(fmt::format("score {} outside [0,1]", score));
    const double s_pos = model.positive_sum(score);
    const double s_neg = model.negative_sum(score);
    if (s_pos == 0.0 && s_neg == 0.0) return model.prior_positive;

    double num = model.h0 * s_pos;
    double other = model.h1 * s_neg;
    if (model.form == KdeForm::Printed) {
        num *= static_cast<double>(model.negative_scores.size());
        other *= static_cast<double>(model.positive_scores.size());
    }
    return num / (num + other);
}

}  // namespace calib
