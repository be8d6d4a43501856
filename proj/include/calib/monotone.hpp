#pragma once

#include "calib/data.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace calib {

// p(f) = 1 / (1 + exp(A f + B)). Increasing in f when A < 0.
struct PlattModel {
    double a = 0.0;
    double b = 0.0;
};

struct PlattFit {
    PlattModel model;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

struct PlattOptions {
    std::size_t max_iter = 100;
    double tol = 1e-9;
};

// Maximum-likelihood sigmoid fit with smoothed targets
// t+ = (m+1)/(m+2), t- = 1/(n+2); Newton steps with backtracking from
// A = 0, B = log((n+1)/(m+1)). Throws FitError for one-class data. A fit that
// stops at max_iter is returned with converged == false.
PlattFit fit_platt(const Dataset& data, const PlattOptions& options = {});
double apply_platt(const PlattModel& model, double score);

// Step function: the value at the greatest breakpoint <= score, clamped to the
// end values outside the breakpoint range.
struct IsotonicModel {
    std::vector<double> breakpoints;  // strictly increasing distinct scores
    std::vector<double> values;       // non-decreasing, in [0,1]
};

// Weighted pool-adjacent-violators: least-squares non-decreasing fit of `y`
// with positive weights `w`, one fitted value per input point.
std::vector<double> pool_adjacent_violators(std::span<const double> y, std::span<const double> w);

// Tied scores are pooled into one weighted point before PAV, so the model has
// one breakpoint per distinct training score.
IsotonicModel fit_isotonic(const Dataset& data);
double apply_isotonic(const IsotonicModel& model, double score);

}  // namespace calib
