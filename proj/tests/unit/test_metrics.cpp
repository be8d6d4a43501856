#include "calib/error.hpp"
#include "calib/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace calib;

namespace {

// Pairwise definition: share of positive-negative pairs ranked correctly, ties half.
double brute_force_auc(std::span<const ScoredSample> s) {
    double good = 0.0;
    double pairs = 0.0;
    for (const auto& p : s) {
        if (p.label != 1) continue;
        for (const auto& q : s) {
            if (q.label != 0) continue;
            pairs += 1.0;
            if (p.score > q.score) good += 1.0;
            else if (p.score == q.score) good += 0.5;
        }
    }
    return good / pairs;
}

std::vector<ScoredSample> two_bin_example() {
    std::vector<ScoredSample> s;
    for (int i = 0; i < 5; ++i) s.push_back({0.2, 0});
    for (int i = 0; i < 5; ++i) s.push_back({0.8, 1});
    return s;
}

}  // namespace

TEST_CASE("two-bin reliability example") {
    const auto s = two_bin_example();
    const auto bins = reliability(s, 2);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].expected == doctest::Approx(0.2));
    CHECK(bins[0].observed == 0.0);
    CHECK(bins[0].weight == 0.5);
    CHECK(bins[1].expected == doctest::Approx(0.8));
    CHECK(bins[1].observed == 1.0);
    CHECK(bins[1].weight == 0.5);
    CHECK(ece(bins) == doctest::Approx(0.2));
    CHECK(mce(bins) == doctest::Approx(0.2));

    const auto wide = reliability(s, 2, BinScheme::EqualWidth);
    CHECK(ece(wide) == doctest::Approx(0.2));
}

TEST_CASE("perfect predictions have zero calibration error") {
    std::vector<ScoredSample> s;
    for (int i = 0; i < 37; ++i) s.push_back({static_cast<double>(i % 2), i % 2});
    for (auto scheme : {BinScheme::EqualFrequency, BinScheme::EqualWidth}) {
        const auto bins = reliability(s, 10, scheme);
        for (const auto& b : bins)
            if (b.count > 0) CHECK(b.observed == b.expected);
        CHECK(ece(bins) == 0.0);
        CHECK(mce(bins) == 0.0);
    }
    CHECK(rmse(s) == 0.0);
    CHECK(accuracy(s) == 1.0);
}

TEST_CASE("degenerate reliability inputs") {
    const std::vector<ScoredSample> one{{0.3, 1}};
    const auto bins = reliability(one, 10);
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].weight == 1.0);

    const std::vector<ScoredSample> worst{{0.0, 1}};
    CHECK(ece(reliability(worst, 1)) == 1.0);
    CHECK(mce(reliability(worst, 1)) == 1.0);
    CHECK(ece(std::span<const ReliabilityBin>{}) == 0.0);
    CHECK(mce(std::span<const ReliabilityBin>{}) == 0.0);

    std::vector<ReliabilityBin> manual(2);
    manual[0] = {0, 0.55, 0.5, 0.5, 5};
    manual[1] = {1, 0.3, 0.6, 0.5, 5};
    CHECK(mce(manual) == doctest::Approx(0.3));
}

TEST_CASE("equal-frequency groups differ in size by at most one") {
    calib::Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredSample> s;
    for (int i = 0; i < 103; ++i) s.push_back({u(rng), i % 2});
    const auto bins = reliability(s, 10);
    REQUIRE(bins.size() == 10);
    std::size_t lo = 1000, hi = 0;
    for (const auto& b : bins) {
        lo = std::min(lo, b.count);
        hi = std::max(hi, b.count);
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("AUC examples") {
    const std::vector<ScoredSample> perfect{{0.1, 0}, {0.9, 1}};
    CHECK(auc(perfect) == 1.0);
    const std::vector<ScoredSample> tied{{0.4, 0}, {0.4, 1}, {0.4, 1}, {0.4, 0}};
    CHECK(auc(tied) == 0.5);
    const std::vector<ScoredSample> mixed{{0.2, 0}, {0.4, 1}, {0.4, 0}, {0.8, 1}};
    CHECK(auc(mixed) == 0.875);
    const std::vector<ScoredSample> one_class{{0.2, 1}, {0.4, 1}};
    CHECK_THROWS_AS(auc(one_class), InputError);
}

TEST_CASE("AUC matches pair enumeration on random tied data") {
    calib::Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        const Dataset d = calib::testing::random_small_dataset(rng, 120, 15);
        CHECK(std::abs(auc(d.samples()) - brute_force_auc(d.samples())) <= 1e-12);
    }
}

TEST_CASE("RMSE and accuracy closed forms") {
    const std::vector<ScoredSample> flipped{{1.0, 0}, {0.0, 1}, {1.0, 0}};
    CHECK(rmse(flipped) == 1.0);
    CHECK(accuracy(flipped) == 0.0);
    const std::vector<ScoredSample> half{{0.5, 0}, {0.5, 1}, {0.5, 0}, {0.5, 1}};
    CHECK(rmse(half) == 0.5);
    CHECK(accuracy(half) == 0.5);
}

TEST_CASE("ECE never exceeds MCE") {
    calib::Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const Dataset d = calib::testing::random_small_dataset(rng, 60);
        for (auto scheme : {BinScheme::EqualFrequency, BinScheme::EqualWidth}) {
            const auto bins = reliability(d.samples(), 7, scheme);
            CHECK(ece(bins) <= mce(bins) + 1e-15);
            double w = 0.0;
            for (const auto& b : bins) w += b.weight;
            CHECK(w == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("evaluate bundles the measures and writes a reliability csv") {
    const auto s = two_bin_example();
    const auto r = evaluate(s, 2);
    CHECK(r.ece == doctest::Approx(0.2));
    CHECK(r.auc.value() == 1.0);
    CHECK(r.accuracy == 1.0);
    calib::testing::TempDir dir("metrics");
    write_reliability_csv(dir / "r.csv", r.bins);
    CHECK(calib::testing::read_text(dir / "r.csv").rfind("bin_index,e_i,o_i,weight,count\n", 0) == 0);
    const std::vector<ScoredSample> one_class{{0.2, 1}};
    CHECK_FALSE(evaluate(one_class).auc.has_value());
}
