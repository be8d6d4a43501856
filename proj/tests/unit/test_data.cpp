#include "calib/csv.hpp"
#include "calib/data.hpp"
#include "calib/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace calib;
using calib::testing::TempDir;
using calib::testing::write_text;

TEST_CASE("scored csv read-back") {
    TempDir dir("data");
    write_text(dir / "a.csv", "score,label\n0.2,0\n0.8,1\n");
    const Dataset d = load_scored_csv(dir / "a.csv");
    CHECK(d.size() == 2);
    CHECK(d.positives() == 1);
    CHECK(d.negatives() == 1);
    CHECK(d[0] == ScoredSample{0.2, 0});
    CHECK(d[1] == ScoredSample{0.8, 1});
}

TEST_CASE("header-only file gives an empty dataset") {
    TempDir dir("data");
    write_text(dir / "a.csv", "score,label\n");
    CHECK(load_scored_csv(dir / "a.csv").empty());
}

TEST_CASE("out-of-range score names the row") {
    TempDir dir("data");
    write_text(dir / "a.csv", "score,label\n0.5,1\n1.3,0\n");
    try {
        load_scored_csv(dir / "a.csv");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("malformed inputs are rejected") {
    TempDir dir("data");
    write_text(dir / "label.csv", "score,label\n0.5,2\n");
    CHECK_THROWS_AS(load_scored_csv(dir / "label.csv"), InputError);
    write_text(dir / "text.csv", "score,label\nabc,1\n");
    CHECK_THROWS_AS(load_scored_csv(dir / "text.csv"), InputError);
    write_text(dir / "ragged.csv", "score,label\n0.5\n");
    CHECK_THROWS_AS(load_scored_csv(dir / "ragged.csv"), InputError);
    write_text(dir / "cols.csv", "p,y\n0.5,1\n");
    CHECK_THROWS_AS(load_scored_csv(dir / "cols.csv"), InputError);
    CHECK_THROWS_AS(load_scored_csv(dir / "missing.csv"), InputError);
    CHECK_THROWS_AS(Dataset({{-0.1, 0}}), InputError);
}

TEST_CASE("csv tolerates BOM, quotes, whitespace and extra columns") {
    TempDir dir("data");
    write_text(dir / "a.csv", "\xEF\xBB\xBFid, score ,label\n\"a,b\", 0.25 ,1\nc,0.75,0\n");
    const Dataset d = load_scored_csv(dir / "a.csv");
    REQUIRE(d.size() == 2);
    CHECK(d[0] == ScoredSample{0.25, 1});
    const auto table = csv::read(dir / "a.csv");
    CHECK(table.rows[0][0] == "a,b");
}

TEST_CASE("scored csv round trip is exact") {
    TempDir dir("data");
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredSample> s;
    for (int i = 0; i < 200; ++i) s.push_back({u(rng), i % 3 == 0});
    const Dataset d(s);
    write_scored_csv(dir / "a.csv", d);
    CHECK(load_scored_csv(dir / "a.csv") == d);
}

TEST_CASE("feature csv round trip") {
    TempDir dir("data");
    const FeatureDataset f(2, {{{0.5, -1.25}, 1}, {{1e-300, 3.0}, 0}});
    write_feature_csv(dir / "f.csv", f);
    CHECK(load_feature_csv(dir / "f.csv") == f);
    CHECK_THROWS_AS(FeatureDataset(2, {{{0.5}, 1}}), InputError);
}

TEST_CASE("split sizes and determinism") {
    std::vector<ScoredSample> s;
    for (int i = 0; i < 100; ++i) s.push_back({i / 100.0, i % 2});
    const Dataset d(s);
    const Dataset ten(std::vector<ScoredSample>(s.begin(), s.begin() + 10));

    auto [a, b] = split(ten, 0.5, 1);
    CHECK(a.size() == 5);
    CHECK(b.size() == 5);
    auto [c, e] = split(d, 0.9, 1);
    CHECK(c.size() == 90);
    CHECK(e.size() == 10);

    auto [c2, e2] = split(d, 0.9, 1);
    CHECK(c == c2);
    CHECK(e == e2);
    auto [c3, e3] = split(d, 0.9, 2);
    CHECK_FALSE(c == c3);

    std::multiset<double> all;
    for (const auto& x : c) all.insert(x.score);
    for (const auto& x : e) all.insert(x.score);
    CHECK(all.size() == 100);
    CHECK(std::set<double>(all.begin(), all.end()).size() == 100);
}

namespace {

FeatureDataset indexed_features(std::size_t n) {
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({{static_cast<double>(i)}, static_cast<int>(i % 2)});
    return FeatureDataset(1, std::move(rows));
}

}  // namespace

TEST_CASE("leave-one-out scores come from models that never saw the row") {
    const std::size_t n = 12;
    const FeatureDataset data = indexed_features(n);
    // The score encodes the sum of training indices, so the held-out row is recoverable.
    const double total = static_cast<double>(n * (n - 1) / 2);
    const Trainer trainer = [](const FeatureDataset& train) -> ScoreFunction {
        double sum = 0.0;
        for (const auto& r : train) sum += r.features[0];
        return [sum](std::span<const double>) { return sum / 1000.0; };
    };
    const Dataset out = kfold_calibration_set(data, n, trainer, 3);
    REQUIRE(out.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(out[i].score * 1000.0 == doctest::Approx(total - static_cast<double>(i)));
        CHECK(out[i].label == data[i].label);
    }
}

TEST_CASE("constant trainer keeps labels in input order") {
    const FeatureDataset data = indexed_features(30);
    const Trainer trainer = [](const FeatureDataset&) -> ScoreFunction {
        return [](std::span<const double>) { return 0.3; };
    };
    const Dataset out = kfold_calibration_set(data, 4, trainer, 9);
    REQUIRE(out.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(out[i].score == 0.3);
        CHECK(out[i].label == data[i].label);
    }
}

TEST_CASE("five folds over 100 rows score every row exactly once") {
    const FeatureDataset data = indexed_features(100);
    std::vector<std::size_t> fold_sizes;
    const Trainer trainer = [&](const FeatureDataset& train) -> ScoreFunction {
        fold_sizes.push_back(100 - train.size());
        return [](std::span<const double> x) { return x[0] / 100.0; };
    };
    const Dataset out = kfold_calibration_set(data, 5, trainer, 1);
    REQUIRE(out.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(out[i].score == static_cast<double>(i) / 100.0);
    CHECK(out.positives() == data.positives());
    REQUIRE(fold_sizes.size() == 5);
    for (auto s : fold_sizes) CHECK(s == 20);
}

TEST_CASE("k-fold argument checks") {
    const FeatureDataset data = indexed_features(5);
    const Trainer trainer = [](const FeatureDataset&) -> ScoreFunction {
        return [](std::span<const double>) { return 0.5; };
    };
    CHECK_THROWS_AS(kfold_calibration_set(data, 1, trainer, 0), InputError);
    CHECK_THROWS_AS(kfold_calibration_set(data, 6, trainer, 0), InputError);
    const Trainer failing = [](const FeatureDataset&) -> ScoreFunction { throw FitError("boom"); };
    CHECK_THROWS_AS(kfold_calibration_set(data, 5, failing, 0), FitError);
}
