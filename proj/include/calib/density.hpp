#pragma once

#include "calib/data.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace calib {

// ---------------------------------------------------------------------------
// Kernel density plug-in calibrator
// ---------------------------------------------------------------------------

// Bandwidth used when all scores are identical.
inline constexpr double kBandwidthFloor = 1e-3;

// h = 1.06 * sd * count^(-1/5), sd the unbiased sample standard deviation.
double silverman_bandwidth(std::span<const double> scores);

// Boxcar kernel K(u) = 1/2 on |u| <= 1.
inline double boxcar(double u) noexcept { return (u >= -1.0 && u <= 1.0) ? 0.5 : 0.0; }

enum class KdeForm {
    // h0 S+ / (h0 S+ + h1 S-): Bayes rule with per-class kernel densities.
    Bayes,
    // n h0 S+ / (n h0 S+ + m h1 S-): the alternative prefactor arrangement,
    // kept for side-by-side comparison.
    Printed,
};

struct KdeModel {
    std::vector<double> positive_scores;  // sorted
    std::vector<double> negative_scores;  // sorted
    double h1 = 0.0;
    double h0 = 0.0;
    double prior_positive = 0.5;
    KdeForm form = KdeForm::Bayes;

    // Kernel sums S+ (bandwidth h1) and S- (bandwidth h0) at a query point.
    double positive_sum(double x) const;
    double negative_sum(double x) const;
};

// Per-class Silverman bandwidths, or one bandwidth over all scores when
// shared. Throws FitError unless both classes have at least two samples.
KdeModel fit_kde(const Dataset& data, bool shared_bandwidth = false);

// Falls back to prior_positive when neither class has mass in the window.
double apply_kde(const KdeModel& model, double score);

// ---------------------------------------------------------------------------
// Dirichlet process mixture plug-in calibrator
// ---------------------------------------------------------------------------

struct NormalGamma {
    double mean = 0.0;
    double precision_scale = 1.0;  // beta
    double shape = 1.0;            // a
    double rate = 1.0;             // b
};

struct DpmOptions {
    std::size_t truncation = 20;
    double alpha = 1.0;
    std::size_t max_iter = 500;
    // Stop once an iteration improves the bound by less than elbo_tol * max(1, |bound|).
    double elbo_tol = 1e-6;
    std::uint64_t seed = 0;
    double prior_precision_scale = 0.1;
    double prior_shape = 1.0;
};

// Truncated stick-breaking variational posterior of a 1-D Gaussian mixture
// with a Normal-Gamma base measure.
struct DpmDensity {
    double alpha = 1.0;
    NormalGamma prior;
    // Beta(gamma1, gamma2) factors for sticks 1..T-1; the last stick is fixed at 1.
    std::vector<std::pair<double, double>> sticks;
    std::vector<NormalGamma> components;  // T entries
    std::vector<double> elbo_trace;       // bound after each sweep, starting at initialization
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t truncation() const noexcept { return components.size(); }
    double elbo() const { return elbo_trace.empty() ? 0.0 : elbo_trace.back(); }
    // E[pi_t] under the variational posterior; sums to 1.
    std::vector<double> expected_weights() const;
    // Posterior predictive: mixture of Student-t densities.
    double log_predictive(double x) const;
    double predictive(double x) const;
    double predictive_mean() const;
};

// CAVI for one sample. Responsibilities start from a seeded random hard
// assignment. Throws FitError on fewer than two samples or a non-finite bound.
DpmDensity fit_dpm_density(std::span<const double> x, const DpmOptions& options = {});

struct DpmModel {
    DpmDensity positive;
    DpmDensity negative;
    double prior_positive = 0.5;
};

// Fits each class independently (streams derived from options.seed).
DpmModel fit_dpm(const Dataset& data, const DpmOptions& options = {});

double apply_dpm(const DpmModel& model, double score);

// prior q1 / (prior q1 + (1 - prior) q0) from log densities; returns the prior
// when both densities are zero.
double bayes_posterior(double prior_positive, double log_q1, double log_q0);

}  // namespace calib
