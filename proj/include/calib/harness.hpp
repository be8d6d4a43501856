#pragma once

#include "calib/data.hpp"
#include "calib/scheme.hpp"
#include "calib/synth.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace calib::harness {

// Monte-Carlo checks of the histogram-binning guarantees against synthetic
// oracles with known calibration curves. Every trial draws from its own
// stream derived from (master seed, sweep point, trial index), so results do
// not depend on the number of worker threads.

struct Summary {
    std::size_t count = 0;  // finite values only
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
};

// Ignores non-finite entries.
Summary summarize(std::span<const double> values);

struct TrialReport {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t n_cal = 0;
    std::size_t bins = 0;
    double mce = 0.0;
    double ece = 0.0;
    double auc_raw = 0.0;         // NaN when the test set is one-class
    double auc_calibrated = 0.0;  // NaN when the test set is one-class
    double auc_loss = 0.0;        // auc_raw - auc_calibrated
    double mce_bound = 0.0;
    double max_theta_deviation = 0.0;
    std::vector<double> theta_deviation;  // theta_hat_i - theta_i per fitted bin (oracle runs only)
};

struct SweepPoint {
    double axis = 0.0;
    std::vector<TrialReport> trials;
    std::map<std::string, Summary> metrics;
    std::map<std::string, double> values;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SweepReport {
    std::string name;
    std::string axis;
    std::vector<SweepPoint> points;  // sorted along the axis
    std::map<std::string, double> values;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool passed() const;
};

struct Options {
    std::size_t threads = 0;  // 0: hardware concurrency
    std::size_t metric_bins = 10;
    BinScheme metric_scheme = BinScheme::EqualFrequency;
    BinScheme fit_scheme = BinScheme::EqualFrequency;
    // Held-out size; default max(10 * N_cal, 1e5).
    std::optional<std::size_t> test_size;
};

std::size_t default_test_size(std::size_t n_cal);

// sqrt(2 B log(2B / delta) / N)
double mce_bound(std::size_t bins, std::size_t n, double delta);
// 2 exp(-2 N eps^2 / B)
double hoeffding_bound(std::size_t n, std::size_t bins, double epsilon);
// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

// Fit histogram binning on a fresh calibration set of size n_cal and measure
// it on a fresh test set of size n_test.
TrialReport run_oracle_trial(const OracleSpec& spec, std::size_t n_cal, std::size_t bins,
                             std::size_t n_test, std::uint64_t seed, const Options& options);

inline constexpr double kRateSlopeLow = -0.65;
inline constexpr double kRateSlopeHigh = -0.35;

SweepReport verify_mce_bound(const OracleSpec& spec, std::size_t n, std::size_t bins, double delta,
                             std::size_t trials, std::uint64_t seed, const Options& options = {});

SweepReport verify_ece_rate(const OracleSpec& spec, std::size_t bins, std::vector<std::size_t> n_grid,
                            std::size_t trials, std::uint64_t seed, const Options& options = {});

SweepReport verify_auc_loss(const OracleSpec& spec, std::size_t n, std::vector<std::size_t> bin_grid,
                            std::size_t trials, std::uint64_t seed, const Options& options = {});

SweepReport verify_theta_concentration(const OracleSpec& spec, std::size_t n, std::size_t bins,
                                       std::vector<double> epsilon_grid, std::size_t trials,
                                       std::uint64_t seed, const Options& options = {});

// Draws a scored dataset of the requested size from a seed.
using DataGenerator = std::function<Dataset(std::size_t n, std::uint64_t seed)>;

inline constexpr std::size_t kSizeSweepTestSize = 10000;

// Histogram binning with the default bin count on calibration sets of each
// size, evaluated on one fixed test set of `test_size` draws.
SweepReport calibration_size_sweep(const DataGenerator& generator, std::vector<std::size_t> sizes,
                                   std::size_t trials, std::uint64_t seed,
                                   std::size_t test_size = kSizeSweepTestSize, const Options& options = {});

// Non-increasing along the points, allowing at most one upward step that is
// no larger than the later point's standard error.
bool non_increasing_within_se(std::span<const Summary> series);

// One row per sweep point.
void write_csv(const std::filesystem::path& path, const SweepReport& report);
nlohmann::json summary_json(const SweepReport& report);
void write_json(const std::filesystem::path& path, const SweepReport& report);

}  // namespace calib::harness
