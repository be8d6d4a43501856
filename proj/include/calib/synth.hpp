#pragma once

#include "calib/data.hpp"
#include "calib/histogram.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace calib {

// Ground-truth calibration curve c(y) = P(z = 1 | y) for synthetic scores.
struct TruthCurve {
    enum class Kind {
        Identity,      // c(y) = y
        Square,        // c(y) = y^2
        LogisticWarp,  // c(y) = 1 / (1 + exp(-8 (y - 0.5)))
        FlippedWarp,   // logistic warp with labels flipped on y < 0.3 (non-monotone)
        Constant,      // c(y) = p
    };
    Kind kind = Kind::Identity;
    double constant = 0.5;

    double operator()(double y) const;
    std::string name() const;
};

// Accepts identity, square, logistic-warp, flipped-warp, constant:<p>.
TruthCurve parse_truth_curve(std::string_view text);

// Scores are uniform on [0,1].
struct OracleSpec {
    TruthCurve curve;
};

// y ~ U[0,1], z ~ Bernoulli(c(y)).
Dataset generate_oracle(const OracleSpec& spec, std::size_t n, std::uint64_t seed);

// theta_i = E[c(y) | y in bin i] by adaptive quadrature over each bin.
std::vector<double> true_theta(const OracleSpec& spec, const BinLayout& layout);

// Four Gaussian blobs at (+-1, +-1) with standard deviation noise_sd; the
// same-sign corners are class 1. Classes alternate, so their counts differ by
// at most one. Class-0 rows split evenly between their corners; class-1 rows
// put kPositiveLead of every kPositiveCycle at (1, 1) and the rest at (-1, -1).
// The slight lean gives a linear learner a reproducible direction (the
// diagonal) while its AUC stays near one half.
inline constexpr std::size_t kPositiveCycle = 40;
inline constexpr std::size_t kPositiveLead = 21;
FeatureDataset generate_xor(std::size_t n, double noise_sd, std::uint64_t seed);

enum class FeatureMap { Linear, Quadratic };
std::string_view to_string(FeatureMap map) noexcept;
FeatureMap parse_feature_map(std::string_view text);

// Expanded design row (without the intercept): linear keeps x; quadratic
// appends every product x_i x_j with i <= j.
std::vector<double> expand_features(std::span<const double> x, FeatureMap map);

struct LogisticOptions {
    FeatureMap feature_map = FeatureMap::Linear;
    double l2 = 1e-2;  // ridge on the non-intercept weights
    std::size_t max_iter = 100;
    double tol = 1e-8;
};

// Smallest distance kept between a logistic score and {0, 1}.
inline constexpr double kScoreMargin = 1e-12;

struct LogisticModel {
    FeatureMap feature_map = FeatureMap::Linear;
    std::vector<double> weights;  // intercept first
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;

    // Sigmoid of the linear form, kept inside [kScoreMargin, 1 - kScoreMargin].
    double score(std::span<const double> x) const;
    ScoreFunction as_function() const;
};

// Newton / IRLS on the ridge-penalized log-likelihood. Throws FitError when a
// class is missing; non-convergence is reported through the result.
LogisticModel fit_logistic(const FeatureDataset& data, const LogisticOptions& options = {});

// Scores every row with the model.
Dataset score_dataset(const LogisticModel& model, const FeatureDataset& data);

}  // namespace calib
