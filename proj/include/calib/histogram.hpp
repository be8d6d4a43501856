#pragma once

#include "calib/data.hpp"
#include "calib/scheme.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace calib {

// Histogram-binning calibration map over the raw score space.
//
// Bins are right-open [edges[i], edges[i+1]) except the last, which is closed
// at 1. Per-bin statistics are kept so the layout doubles as the histogram
// density estimate of each class.
struct BinLayout {
    BinScheme scheme = BinScheme::EqualFrequency;
    std::vector<double> edges;              // B + 1 strictly increasing values, 0 ... 1
    std::vector<std::size_t> counts;        // N_i
    std::vector<std::size_t> positive_counts;  // m_i

    std::size_t bin_count() const noexcept { return counts.size(); }
    std::size_t total() const noexcept;
    std::size_t negatives_in(std::size_t i) const { return counts[i] - positive_counts[i]; }
    // theta_hat_i = m_i / N_i; empty when N_i == 0.
    std::optional<double> theta(std::size_t i) const;
    // eta_hat_i = N_i / N.
    double eta(std::size_t i) const;
    // Index of the bin containing a score in [0,1].
    std::size_t bin_of(double score) const;
    // Throws InputError if the layout's invariants do not hold.
    void validate() const;
};

// round(N^(1/3)) clamped to [1, N].
std::size_t default_bin_count(std::size_t n);

// Equal-frequency: sorted scores cut into B groups of nearly equal size with
// interior edges at midpoints between neighbouring groups. Tied scores on a
// group boundary cannot be separated by an edge; such edges collapse and the
// layout ends up with fewer than B bins. Equal-width: edges at i/B.
BinLayout fit_histogram(const Dataset& data, std::optional<std::size_t> bins = std::nullopt,
                        BinScheme scheme = BinScheme::EqualFrequency);

// theta_hat of the containing bin; an empty bin defers to the nearest
// nonempty bin (ties go to the lower one).
double apply_histogram(const BinLayout& layout, double score);

// Bayes rule with histogram class likelihoods and empirical priors, evaluated
// in exact rational arithmetic from the raw data and the layout's edges.
// Agrees bit-for-bit with apply_histogram. Throws FitError for one-class data.
double plug_in_estimate(const Dataset& data, const BinLayout& layout, double score);

}  // namespace calib
