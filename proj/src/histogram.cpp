#include "calib/histogram.hpp"

#include "calib/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace calib {

namespace {

void check_score(double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InputError(fmt::format("score {} outside [0,1]", score));
}

void count_members(BinLayout& layout, const Dataset& data) {
    const std::size_t b = layout.edges.size() - 1;
    layout.counts.assign(b, 0);
    layout.positive_counts.assign(b, 0);
    for (const auto& s : data) {
        const auto i = layout.bin_of(s.score);
        ++layout.counts[i];
        layout.positive_counts[i] += static_cast<std::size_t>(s.label);
    }
}

std::vector<double> equal_frequency_edges(const Dataset& data, std::size_t bins) {
    auto sorted = data.scores();
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<double> edges{0.0};
    for (std::size_t g = 1; g < bins; ++g) {
        const std::size_t first = g * n / bins;
        const double lo = sorted[first - 1];
        const double hi = sorted[first];
        const double edge = lo + (hi - lo) / 2.0;
        if (edge > edges.back() && edge < 1.0) edges.push_back(edge);
    }
    edges.push_back(1.0);
    return edges;
}

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_rational exact(double x) {
    int exp = 0;
    const double mant = std::frexp(x, &exp);
    // mant * 2^53 is an integer for every finite double.
    cpp_int m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    if (exp >= 0) return cpp_rational(m << exp);
    return cpp_rational(m, cpp_int(1) << -exp);
}

double to_double(const cpp_rational& r) {
    const cpp_int num = boost::multiprecision::numerator(r);
    const cpp_int den = boost::multiprecision::denominator(r);
    const cpp_int limit = cpp_int(1) << 53;
    if (abs(num) <= limit && den <= limit)
        return num.convert_to<double>() / den.convert_to<double>();
    return r.convert_to<double>();
}

std::size_t nearest_nonempty(const std::vector<std::size_t>& counts, std::size_t bin) {
    if (counts[bin] > 0) return bin;
    for (std::size_t d = 1; d < counts.size(); ++d) {
        if (bin >= d && counts[bin - d] > 0) return bin - d;
        if (bin + d < counts.size() && counts[bin + d] > 0) return bin + d;
    }
    throw InputError("histogram layout has no nonempty bin");
}

}  // namespace

std::size_t BinLayout::total() const noexcept {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::optional<double> BinLayout::theta(std::size_t i) const {
    if (counts[i] == 0) return std::nullopt;
    return static_cast<double>(positive_counts[i]) / static_cast<double>(counts[i]);
}

double BinLayout::eta(std::size_t i) const {
    return static_cast<double>(counts[i]) / static_cast<double>(total());
}

std::size_t BinLayout::bin_of(double score) const {
    check_score(score);
    // First edge strictly greater than the score closes the containing bin.
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, score);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

void BinLayout::validate() const {
    if (edges.size() < 2) throw InputError("histogram layout needs at least two edges");
    if (edges.front() != 0.0 || edges.back() != 1.0)
        throw InputError("histogram edges must start at 0 and end at 1");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw InputError("histogram edges must be strictly increasing");
    if (counts.size() != edges.size() - 1 || positive_counts.size() != counts.size())
        throw InputError("histogram counts do not match the number of bins");
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (positive_counts[i] > counts[i]) throw InputError("histogram bin has more positives than samples");
    if (total() == 0) throw InputError("histogram layout is empty");
}

std::size_t default_bin_count(std::size_t n) {
    if (n == 0) return 1;
    const auto b = static_cast<std::size_t>(std::llround(std::cbrt(static_cast<double>(n))));
    return std::clamp<std::size_t>(b, 1, n);
}

BinLayout fit_histogram(const Dataset& data, std::optional<std::size_t> bins, BinScheme scheme) {
    const std::size_t n = data.size();
    if (n == 0) throw FitError("histogram binning needs at least one sample");
    const std::size_t b = bins.value_or(default_bin_count(n));
    if (b < 1) throw InputError("histogram binning needs B >= 1");
    if (b > n) throw InputError(fmt::format("histogram binning with B = {} exceeds N = {}", b, n));

    BinLayout layout;
    layout.scheme = scheme;
    if (scheme == BinScheme::EqualWidth) {
        layout.edges.resize(b + 1);
        for (std::size_t i = 0; i <= b; ++i)
            layout.edges[i] = static_cast<double>(i) / static_cast<double>(b);
        count_members(layout, data);
        return layout;
    }

    layout.edges = equal_frequency_edges(data, b);
    count_members(layout, data);
    // Ties can leave a bin with no members; fold it into a neighbour.
    for (;;) {
        const auto empty = std::find(layout.counts.begin(), layout.counts.end(), std::size_t{0});
        if (empty == layout.counts.end()) break;
        const auto i = static_cast<std::size_t>(empty - layout.counts.begin());
        const std::size_t drop = i > 0 ? i : i + 1;
        layout.edges.erase(layout.edges.begin() + static_cast<std::ptrdiff_t>(drop));
        count_members(layout, data);
    }
    return layout;
}

double apply_histogram(const BinLayout& layout, double score) {
    const auto bin = nearest_nonempty(layout.counts, layout.bin_of(score));
    return *layout.theta(bin);
}

double plug_in_estimate(const Dataset& data, const BinLayout& layout, double score) {
    check_score(score);
    const std::size_t m = data.positives();
    const std::size_t n = data.negatives();
    if (m == 0 || n == 0) throw FitError("plug-in estimate needs both classes (a class prior is 0)");

    const std::size_t bins = layout.edges.size() - 1;
    auto contains = [&](std::size_t j, double y) {
        const bool last = j + 1 == bins;
        return y >= layout.edges[j] && (last ? y <= layout.edges[j + 1] : y < layout.edges[j + 1]);
    };

    std::vector<std::size_t> pos(bins, 0), neg(bins, 0), all(bins, 0);
    for (const auto& s : data) {
        for (std::size_t j = 0; j < bins; ++j) {
            if (!contains(j, s.score)) continue;
            (s.label == 1 ? pos : neg)[j] += 1;
            all[j] += 1;
            break;
        }
    }

    std::size_t j = 0;
    while (j < bins && !contains(j, score)) ++j;
    j = nearest_nonempty(all, j);

    const cpp_rational total(static_cast<long long>(m + n));
    const cpp_rational prior1 = cpp_rational(static_cast<long long>(m)) / total;
    const cpp_rational prior0 = cpp_rational(static_cast<long long>(n)) / total;
    const cpp_rational width = exact(layout.edges[j + 1]) - exact(layout.edges[j]);
    // Histogram class densities: theta_j^t / h_j on the containing bin.
    const cpp_rational like1 = cpp_rational(static_cast<long long>(pos[j]), static_cast<long long>(m)) / width;
    const cpp_rational like0 = cpp_rational(static_cast<long long>(neg[j]), static_cast<long long>(n)) / width;
    const cpp_rational joint1 = prior1 * like1;
    const cpp_rational joint0 = prior0 * like0;
    return to_double(joint1 / (joint1 + joint0));
}

}  // namespace calib
