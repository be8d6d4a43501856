#include "calib/density.hpp"

#include "calib/error.hpp"
#include "calib/rng.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace calib {

namespace {

using boost::math::digamma;

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_sum_exp(std::span<const double> v) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) hi = std::max(hi, x);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double x : v) s += std::exp(x - hi);
    return hi + std::log(s);
}

double log_student_t(double x, double dof, double loc, double scale) {
    const double z = (x - loc) / scale;
    return std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
           0.5 * std::log(dof * std::numbers::pi) - std::log(scale) -
           (dof + 1.0) / 2.0 * std::log1p(z * z / dof);
}

// Expectations under q(mu, lambda) = NormalGamma(m, beta, a, b).
struct NgMoments {
    double e_lambda;      // a / b
    double e_log_lambda;  // psi(a) - log b

    explicit NgMoments(const NormalGamma& q)
        : e_lambda(q.shape / q.rate), e_log_lambda(digamma(q.shape) - std::log(q.rate)) {}
};

// E_q[log NormalGamma(mu, lambda | p)] for q = NormalGamma(q).
double expected_log_ng(const NormalGamma& p, const NormalGamma& q) {
    const NgMoments mq(q);
    const double d = q.mean - p.mean;
    return p.shape * std::log(p.rate) - std::lgamma(p.shape) + (p.shape - 1.0) * mq.e_log_lambda -
           p.rate * mq.e_lambda + 0.5 * std::log(p.precision_scale) + 0.5 * mq.e_log_lambda -
           0.5 * kLog2Pi - 0.5 * p.precision_scale * (1.0 / q.precision_scale + mq.e_lambda * d * d);
}

struct Cavi {
    std::span<const double> x;
    std::size_t n;
    std::size_t t_count;
    double alpha;
    NormalGamma prior;

    std::vector<double> resp;  // n x T, row-major
    std::vector<std::pair<double, double>> sticks;
    std::vector<NormalGamma> comps;

    double& r(std::size_t i, std::size_t t) { return resp[i * t_count + t]; }

    std::vector<double> expected_log_weights() const {
        std::vector<double> out(t_count);
        double carry = 0.0;  // sum of E[log(1 - v_j)] for j < t
        for (std::size_t t = 0; t < t_count; ++t) {
            if (t + 1 == t_count) {
                out[t] = carry;
                break;
            }
            const auto [g1, g2] = sticks[t];
            const double dsum = digamma(g1 + g2);
            out[t] = carry + digamma(g1) - dsum;
            carry += digamma(g2) - dsum;
        }
        return out;
    }

    std::vector<NgMoments> moments() const {
        std::vector<NgMoments> out;
        out.reserve(t_count);
        for (const auto& q : comps) out.emplace_back(q);
        return out;
    }

    static double expected_log_lik(double xi, const NormalGamma& q, const NgMoments& mq) {
        const double d = xi - q.mean;
        return 0.5 * mq.e_log_lambda - 0.5 * kLog2Pi -
               0.5 * (1.0 / q.precision_scale + mq.e_lambda * d * d);
    }

    void update_globals() {
        std::vector<double> nk(t_count, 0.0), sx(t_count, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < t_count; ++t) {
                nk[t] += r(i, t);
                sx[t] += r(i, t) * x[i];
            }
        std::vector<double> ss(t_count, 0.0), mean(t_count, 0.0);
        for (std::size_t t = 0; t < t_count; ++t) mean[t] = nk[t] > 0.0 ? sx[t] / nk[t] : 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < t_count; ++t) {
                const double d = x[i] - mean[t];
                ss[t] += r(i, t) * d * d;
            }

        double tail = 0.0;  // sum of N_j for j > t
        for (std::size_t t = t_count; t-- > 0;) {
            if (t + 1 < t_count) sticks[t] = {1.0 + nk[t], alpha + tail};
            tail += nk[t];
        }
        for (std::size_t t = 0; t < t_count; ++t) {
            NormalGamma& q = comps[t];
            q.precision_scale = prior.precision_scale + nk[t];
            q.mean = (prior.precision_scale * prior.mean + nk[t] * mean[t]) / q.precision_scale;
            q.shape = prior.shape + nk[t] / 2.0;
            const double d = mean[t] - prior.mean;
            q.rate = prior.rate + 0.5 * ss[t] +
                     prior.precision_scale * nk[t] * d * d / (2.0 * q.precision_scale);
        }
    }

    void update_locals() {
        const auto elw = expected_log_weights();
        const auto mom = moments();
        std::vector<double> row(t_count);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t t = 0; t < t_count; ++t)
                row[t] = elw[t] + expected_log_lik(x[i], comps[t], mom[t]);
            const double norm = log_sum_exp(row);
            for (std::size_t t = 0; t < t_count; ++t) r(i, t) = std::exp(row[t] - norm);
        }
    }

    double elbo() {
        const auto elw = expected_log_weights();
        const auto mom = moments();
        double bound = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < t_count; ++t) {
                const double p = r(i, t);
                if (p <= 0.0) continue;
                bound += p * (elw[t] + expected_log_lik(x[i], comps[t], mom[t]) - std::log(p));
            }
        for (std::size_t t = 0; t + 1 < t_count; ++t) {
            const auto [g1, g2] = sticks[t];
            const double dsum = digamma(g1 + g2);
            const double e_log_v = digamma(g1) - dsum;
            const double e_log_1mv = digamma(g2) - dsum;
            bound += std::log(alpha) + (alpha - 1.0) * e_log_1mv;
            bound -= std::lgamma(g1 + g2) - std::lgamma(g1) - std::lgamma(g2) + (g1 - 1.0) * e_log_v +
                     (g2 - 1.0) * e_log_1mv;
        }
        for (const auto& q : comps) bound += expected_log_ng(prior, q) - expected_log_ng(q, q);
        return bound;
    }
};

}  // namespace

std::vector<double> DpmDensity::expected_weights() const {
    std::vector<double> w(components.size());
    double remaining = 1.0;
    for (std::size_t t = 0; t < components.size(); ++t) {
        if (t + 1 == components.size()) {
            w[t] = remaining;
            break;
        }
        const double ev = sticks[t].first / (sticks[t].first + sticks[t].second);
        w[t] = remaining * ev;
        remaining *= 1.0 - ev;
    }
    return w;
}

double DpmDensity::log_predictive(double x) const {
    const auto w = expected_weights();
    std::vector<double> terms;
    terms.reserve(components.size());
    for (std::size_t t = 0; t < components.size(); ++t) {
        if (w[t] <= 0.0) continue;
        const auto& q = components[t];
        const double dof = 2.0 * q.shape;
        const double scale = std::sqrt(q.rate * (q.precision_scale + 1.0) / (q.shape * q.precision_scale));
        terms.push_back(std::log(w[t]) + log_student_t(x, dof, q.mean, scale));
    }
    return log_sum_exp(terms);
}

double DpmDensity::predictive(double x) const { return std::exp(log_predictive(x)); }

double DpmDensity::predictive_mean() const {
    const auto w = expected_weights();
    double mean = 0.0;
    for (std::size_t t = 0; t < components.size(); ++t) mean += w[t] * components[t].mean;
    return mean;
}

DpmDensity fit_dpm_density(std::span<const double> x, const DpmOptions& options) {
    if (x.size() < 2) throw FitError(fmt::format("DPM density needs at least 2 samples, got {}", x.size()));
    if (options.truncation < 1) throw InputError("DPM truncation level must be >= 1");
    if (!(options.alpha > 0.0)) throw InputError("DPM concentration alpha must be > 0");

    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double variance = std::max(ss / (n - 1.0), 1e-6);

    Cavi cavi{x, x.size(), options.truncation, options.alpha,
              NormalGamma{mean, options.prior_precision_scale, options.prior_shape, variance},
              {}, {}, {}};
    cavi.resp.assign(cavi.n * cavi.t_count, 0.0);
    cavi.sticks.assign(cavi.t_count > 0 ? cavi.t_count - 1 : 0, {1.0, options.alpha});
    cavi.comps.assign(cavi.t_count, cavi.prior);

    Rng rng = make_rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, cavi.t_count - 1);
    for (std::size_t i = 0; i < cavi.n; ++i) cavi.r(i, pick(rng)) = 1.0;
    cavi.update_globals();

    DpmDensity out;
    out.alpha = options.alpha;
    out.prior = cavi.prior;
    out.elbo_trace.push_back(cavi.elbo());
    if (!std::isfinite(out.elbo_trace.back())) throw FitError("DPM: non-finite evidence bound at iteration 0");

    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        cavi.update_locals();
        cavi.update_globals();
        const double bound = cavi.elbo();
        if (!std::isfinite(bound)) throw FitError(fmt::format("DPM: non-finite evidence bound at iteration {}", it));
        const double gain = bound - out.elbo_trace.back();
        out.elbo_trace.push_back(bound);
        out.iterations = it;
        if (gain < options.elbo_tol * std::max(1.0, std::abs(bound))) {
            out.converged = true;
            break;
        }
    }
    out.sticks = std::move(cavi.sticks);
    out.components = std::move(cavi.comps);
    return out;
}

DpmModel fit_dpm(const Dataset& data, const DpmOptions& options) {
    const auto pos = data.scores_with_label(1);
    const auto neg = data.scores_with_label(0);
    if (pos.size() < 2 || neg.size() < 2)
        throw FitError(fmt::format("DPM calibration needs >= 2 samples per class (have {} positive, {} negative)",
                                   pos.size(), neg.size()));
    DpmModel model;
    DpmOptions per_class = options;
    per_class.seed = derive_seed(options.seed, {1});
    model.positive = fit_dpm_density(pos, per_class);
    per_class.seed = derive_seed(options.seed, {0});
    model.negative = fit_dpm_density(neg, per_class);
    model.prior_positive = static_cast<double>(pos.size()) / static_cast<double>(data.size());
    return model;
}

double bayes_posterior(double prior_positive, double log_q1, double log_q0) {
    const double a = std::log(prior_positive) + log_q1;
    const double b = std::log1p(-prior_positive) + log_q0;
    if (a == -std::numeric_limits<double>::infinity() && b == -std::numeric_limits<double>::infinity())
        return prior_positive;
    // a - b as a logistic argument; stable for either sign.
    const double d = a - b;
    if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
    const double e = std::exp(d);
    return e / (1.0 + e);
}

double apply_dpm(const DpmModel& model, double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InputError(fmt::format("score {} outside [0,1]", score));
    return bayes_posterior(model.prior_positive, model.positive.log_predictive(score),
                           model.negative.log_predictive(score));
}

}  // namespace calib
