#include "calib/monotone.hpp"

#include "calib/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace calib {

std::vector<double> pool_adjacent_violators(std::span<const double> y, std::span<const double> w) {
    if (y.size() != w.size()) throw InputError("PAV: value and weight lengths differ");

    struct Block {
        double weight;
        double mean;
        std::size_t length;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(w[i] > 0.0)) throw InputError("PAV: weights must be positive");
        blocks.push_back({w[i], y[i], 1});
        while (blocks.size() >= 2) {
            auto& prev = blocks[blocks.size() - 2];
            const auto& last = blocks.back();
            if (prev.mean <= last.mean) break;
            const double total = prev.weight + last.weight;
            prev.mean = (prev.weight * prev.mean + last.weight * last.mean) / total;
            prev.weight = total;
            prev.length += last.length;
            blocks.pop_back();
        }
    }

    std::vector<double> fitted;
    fitted.reserve(y.size());
    for (const auto& b : blocks) fitted.insert(fitted.end(), b.length, b.mean);
    return fitted;
}

IsotonicModel fit_isotonic(const Dataset& data) {
    if (data.empty()) throw FitError("isotonic regression needs at least one sample");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data[a].score < data[b].score; });

    IsotonicModel model;
    std::vector<double> means, weights;
    for (std::size_t i = 0; i < order.size();) {
        const double x = data[order[i]].score;
        std::size_t j = i;
        std::size_t pos = 0;
        while (j < order.size() && data[order[j]].score == x) pos += static_cast<std::size_t>(data[order[j++]].label);
        const auto count = static_cast<double>(j - i);
        model.breakpoints.push_back(x);
        means.push_back(static_cast<double>(pos) / count);
        weights.push_back(count);
        i = j;
    }
    model.values = pool_adjacent_violators(means, weights);
    return model;
}

double apply_isotonic(const IsotonicModel& model, double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InputError(fmt::format("score {} outside [0,1]", score));
    if (model.breakpoints.empty()) throw InputError("isotonic model is empty");
    const auto it = std::upper_bound(model.breakpoints.begin(), model.breakpoints.end(), score);
    if (it == model.breakpoints.begin()) return model.values.front();
    return model.values[static_cast<std::size_t>(it - model.breakpoints.begin()) - 1];
}

}  // namespace calib
