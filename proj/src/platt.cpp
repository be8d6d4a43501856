#include "calib/monotone.hpp"

#include "calib/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace calib {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct Objective {
    std::span<const ScoredSample> samples;
    double target_pos;
    double target_neg;

    double target(const ScoredSample& s) const { return s.label == 1 ? target_pos : target_neg; }

    // Negative log-likelihood of the smoothed targets.
    double value(double a, double b) const {
        double f = 0.0;
        for (const auto& s : samples) {
            const double z = a * s.score + b;
            // -[t log p + (1-t) log(1-p)] with p = 1/(1+e^z)
            f += target(s) * z + softplus(-z);
        }
        return f;
    }
};

}  // namespace

PlattFit fit_platt(const Dataset& data, const PlattOptions& options) {
    const auto m = static_cast<double>(data.positives());
    const auto n = static_cast<double>(data.negatives());
    if (m < 1 || n < 1) throw FitError("Platt scaling needs at least one sample of each class");

    const Objective obj{data.samples(), (m + 1.0) / (m + 2.0), 1.0 / (n + 2.0)};
    constexpr double kRidge = 1e-12;
    constexpr double kMinStep = 1e-10;

    PlattFit fit;
    double a = 0.0;
    double b = std::log((n + 1.0) / (m + 1.0));
    double f = obj.value(a, b);

    for (std::size_t it = 0; it <= options.max_iter; ++it) {
        double g1 = 0.0, g2 = 0.0, h11 = kRidge, h22 = kRidge, h21 = 0.0;
        for (const auto& s : data) {
            const double z = a * s.score + b;
            const double p = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
            const double q = 1.0 - p;
            const double d1 = obj.target(s) - p;
            const double d2 = p * q;
            g1 += s.score * d1;
            g2 += d1;
            h11 += s.score * s.score * d2;
            h22 += d2;
            h21 += s.score * d2;
        }
        fit.gradient_norm = std::hypot(g1, g2);
        fit.iterations = it;
        if (fit.gradient_norm < options.tol) {
            fit.converged = true;
            break;
        }
        if (it == options.max_iter) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double slope = g1 * da + g2 * db;

        double step = 1.0;
        bool moved = false;
        while (step >= kMinStep) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = obj.value(na, nb);
            // Near the optimum the decrease drops below rounding noise in f;
            // allow for it so Newton can finish on the gradient.
            const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
            if (nf <= f + 1e-4 * step * slope + noise) {
                a = na;
                b = nb;
                f = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if (!moved) break;  // line search failed; reported through converged == false
    }
    if (!std::isfinite(a) || !std::isfinite(b)) throw FitError("Platt scaling diverged");
    fit.model = {a, b};
    return fit;
}

double apply_platt(const PlattModel& model, double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InputError(fmt::format("score {} outside [0,1]", score));
    const double z = model.a * score + model.b;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

}  // namespace calib
