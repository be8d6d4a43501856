#include "calib/density.hpp"
#include "calib/error.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

using namespace calib;
using calib::testing::make_dataset;

namespace {

double sample_sd(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Kernel-weighted label average with one bandwidth for every point.
double nadaraya_watson(const std::vector<ScoredSample>& s, double h, double x) {
    double num = 0.0, den = 0.0;
    for (const auto& p : s) {
        const double k = std::abs(x - p.score) / h <= 1.0 ? 0.5 : 0.0;
        num += k * p.label;
        den += k;
    }
    return num / den;
}

double integrate_density(const DpmDensity& d) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) { return d.predictive(x); };
    const double inf = std::numeric_limits<double>::infinity();
    double total = gauss_kronrod<double, 61>::integrate(f, -inf, -5.0, 15, 1e-12);
    total += gauss_kronrod<double, 61>::integrate(f, 6.0, inf, 15, 1e-12);
    for (int i = 0; i < 1100; ++i) {
        const double a = -5.0 + i * 0.01;
        total += gauss_kronrod<double, 61>::integrate(f, a, a + 0.01, 10, 1e-12);
    }
    return total;
}

std::vector<double> cluster(double centre, double sd, std::size_t n, std::uint64_t seed) {
    calib::Rng rng(seed);
    std::normal_distribution<double> g(centre, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = std::clamp(g(rng), 0.0, 1.0);
    return x;
}

}  // namespace

TEST_CASE("Silverman bandwidth") {
    const std::vector<double> pos{0.5, 0.6};
    CHECK(silverman_bandwidth(pos) == doctest::Approx(1.06 * sample_sd(pos) * std::pow(2.0, -0.2)));
    CHECK(silverman_bandwidth(pos) == doctest::Approx(0.0652).epsilon(1e-3));

    // sd exactly 0.25 over 1000 points: alternate 0.5 +- 0.25 * sqrt(999/1000).
    std::vector<double> x(1000);
    const double d = 0.25 * std::sqrt(999.0 / 1000.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 0.5 + d : 0.5 - d;
    CHECK(silverman_bandwidth(x) == doctest::Approx(0.06657).epsilon(1e-4));

    CHECK(silverman_bandwidth(std::vector<double>{0.3, 0.3, 0.3}) == kBandwidthFloor);
    std::vector<double> scaled(x);
    for (auto& v : scaled) v *= 0.5;
    CHECK(silverman_bandwidth(scaled) == doctest::Approx(0.5 * silverman_bandwidth(x)));
}

TEST_CASE("KDE bandwidths and prior") {
    const Dataset d = make_dataset({{0.5, 1}, {0.6, 1}, {0.1, 0}, {0.2, 0}});
    const KdeModel m = fit_kde(d);
    CHECK(m.h1 == doctest::Approx(0.0652).epsilon(1e-3));
    CHECK(m.h0 == doctest::Approx(m.h1));
    CHECK(m.prior_positive == 0.5);
    const KdeModel shared = fit_kde(make_dataset({{0.5, 1}, {0.9, 1}, {0.1, 0}, {0.2, 0}, {0.3, 0}}), true);
    CHECK(shared.h0 == shared.h1);
    CHECK(shared.prior_positive == 0.4);
    CHECK_THROWS_AS(fit_kde(make_dataset({{0.5, 1}, {0.1, 0}, {0.2, 0}})), FitError);
}

TEST_CASE("KDE window counting") {
    KdeModel m;
    m.positive_scores = {0.5, 0.6};
    m.negative_scores = {0.1};
    m.h0 = m.h1 = 0.2;
    m.prior_positive = 2.0 / 3.0;
    CHECK(m.positive_sum(0.55) == 1.0);
    CHECK(m.negative_sum(0.55) == 0.0);
    CHECK(apply_kde(m, 0.55) == 1.0);
    CHECK(m.positive_sum(0.3) == 0.5);
    CHECK(m.negative_sum(0.3) == 0.5);
    CHECK(apply_kde(m, 0.3) == 0.5);
    CHECK(apply_kde(m, 0.95) == 2.0 / 3.0);
    CHECK_THROWS_AS(apply_kde(m, 1.2), InputError);
}

TEST_CASE("printed KDE form keeps the class-count factors") {
    KdeModel m;
    m.positive_scores = {0.5, 0.6};
    m.negative_scores = {0.4, 0.45, 0.5, 0.55};
    m.h1 = 0.1;
    m.h0 = 0.2;
    m.prior_positive = 1.0 / 3.0;
    const double sp = m.positive_sum(0.5), sn = m.negative_sum(0.5);
    CHECK(apply_kde(m, 0.5) == doctest::Approx(0.2 * sp / (0.2 * sp + 0.1 * sn)));
    m.form = KdeForm::Printed;
    CHECK(apply_kde(m, 0.5) == doctest::Approx(4 * 0.2 * sp / (4 * 0.2 * sp + 2 * 0.1 * sn)));
}

TEST_CASE("shared-bandwidth KDE is the Nadaraya-Watson estimator") {
    calib::Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        const Dataset d = calib::testing::random_small_dataset(rng, 60, 1000);
        if (d.positives() < 2 || d.negatives() < 2) continue;
        const KdeModel m = fit_kde(d, true);
        for (int q = 0; q <= 50; ++q) {
            const double x = q / 50.0;
            if (m.positive_sum(x) + m.negative_sum(x) == 0.0) continue;
            CHECK(std::abs(apply_kde(m, x) - nadaraya_watson(d.samples(), m.h0, x)) <= 1e-12);
        }
    }
}

TEST_CASE("KDE output is unchanged by duplicating the data") {
    calib::Rng rng(5);
    const Dataset d = calib::testing::random_small_dataset(rng, 40, 100);
    KdeModel m;
    m.positive_scores = d.scores_with_label(1);
    m.negative_scores = d.scores_with_label(0);
    std::sort(m.positive_scores.begin(), m.positive_scores.end());
    std::sort(m.negative_scores.begin(), m.negative_scores.end());
    m.h0 = 0.07;
    m.h1 = 0.05;
    m.prior_positive = static_cast<double>(d.positives()) / static_cast<double>(d.size());
    KdeModel twice = m;
    for (auto* v : {&twice.positive_scores, &twice.negative_scores}) {
        v->insert(v->end(), v->begin(), v->end());
        std::sort(v->begin(), v->end());
    }
    for (int q = 0; q <= 100; ++q) {
        const double x = q / 100.0;
        const double a = apply_kde(m, x);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(apply_kde(twice, x) == doctest::Approx(a).epsilon(1e-14));
    }
}

TEST_CASE("DPM posterior predictive integrates to one") {
    for (std::uint64_t seed : {1u, 2u}) {
        std::vector<double> x = cluster(0.3, 0.05, 150, seed);
        const auto more = cluster(0.75, 0.1, 100, seed + 10);
        x.insert(x.end(), more.begin(), more.end());
        DpmOptions o;
        o.seed = seed;
        const DpmDensity d = fit_dpm_density(x, o);
        CHECK(std::abs(integrate_density(d) - 1.0) <= 1e-3);
        const auto w = d.expected_weights();
        CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
        CHECK(d.sticks.size() == d.truncation() - 1);
    }
}

TEST_CASE("DPM recovers a tight cluster") {
    const auto x = cluster(0.8, 0.01, 200, 3);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const DpmDensity d = fit_dpm_density(x, {});
    CHECK(std::abs(d.predictive_mean() - mean) <= 0.02);
    CHECK(d.predictive(0.8) > d.predictive(0.5));
}

TEST_CASE("DPM evidence bound never decreases") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto x = cluster(0.2, 0.1, 120, seed);
        const auto y = cluster(0.7, 0.05, 80, seed + 100);
        x.insert(x.end(), y.begin(), y.end());
        DpmOptions o;
        o.seed = seed;
        o.max_iter = 200;
        const DpmDensity d = fit_dpm_density(x, o);
        REQUIRE(d.elbo_trace.size() == d.iterations + 1);
        for (std::size_t i = 1; i < d.elbo_trace.size(); ++i) CHECK(d.elbo_trace[i] >= d.elbo_trace[i - 1] - 1e-8);
    }
}

TEST_CASE("DPM fit is reproducible and reports the stopping state") {
    const auto x = cluster(0.5, 0.2, 100, 8);
    DpmOptions o;
    o.seed = 42;
    const DpmDensity a = fit_dpm_density(x, o);
    const DpmDensity b = fit_dpm_density(x, o);
    CHECK(a.elbo_trace == b.elbo_trace);
    CHECK(a.predictive(0.37) == b.predictive(0.37));
    o.max_iter = 1;
    o.elbo_tol = 0.0;
    const DpmDensity c = fit_dpm_density(x, o);
    CHECK(c.iterations == 1);
    CHECK_FALSE(c.converged);
}

TEST_CASE("DPM argument checks") {
    CHECK_THROWS_AS(fit_dpm_density(std::vector<double>{0.5}, {}), FitError);
    DpmOptions o;
    o.truncation = 0;
    CHECK_THROWS_AS(fit_dpm_density(std::vector<double>{0.5, 0.6}, o), InputError);
    CHECK_THROWS_AS(fit_dpm(make_dataset({{0.1, 1}, {0.2, 0}, {0.3, 0}})), FitError);
}

TEST_CASE("DPM calibration on separated classes") {
    auto pos = cluster(0.9, 0.03, 100, 1);
    auto neg = cluster(0.1, 0.03, 100, 2);
    std::vector<ScoredSample> s;
    for (double v : pos) s.push_back({v, 1});
    for (double v : neg) s.push_back({v, 0});
    const DpmModel m = fit_dpm(Dataset(s));
    CHECK(apply_dpm(m, 0.9) >= 0.95);
    CHECK(apply_dpm(m, 0.1) <= 0.05);
    for (int q = 0; q <= 100; ++q) {
        const double p = apply_dpm(m, q / 100.0);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }

    DpmModel same = m;
    same.negative = same.positive;
    same.prior_positive = 0.5;
    for (int q = 0; q <= 10; ++q) CHECK(apply_dpm(same, q / 10.0) == 0.5);
}

TEST_CASE("Bayes posterior falls back to the prior") {
    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(bayes_posterior(0.3, ninf, ninf) == 0.3);
    CHECK(bayes_posterior(0.5, -1000.0, -1000.0) == 0.5);
    CHECK(bayes_posterior(0.5, std::log(3.0), std::log(1.0)) == doctest::Approx(0.75));
    CHECK(bayes_posterior(0.25, -2000.0, -2001.0) == doctest::Approx(1.0 / (1.0 + 3.0 * std::exp(-1.0))));
}
