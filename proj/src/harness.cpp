#include "calib/harness.hpp"

#include "calib/csv.hpp"
#include "calib/error.hpp"
#include "calib/histogram.hpp"
#include "calib/metrics.hpp"
#include "calib/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace calib::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

std::uint64_t axis_key(double axis) { return std::bit_cast<std::uint64_t>(axis); }

std::vector<TrialReport> run_trials(std::size_t trials, std::uint64_t master, double axis,
                                    const Options& options,
                                    const std::function<TrialReport(std::uint64_t)>& body) {
    std::vector<TrialReport> out(trials);
    parallel_for(trials, options.threads, [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(master, {axis_key(axis), t});
        out[t] = body(seed);
        out[t].trial = t;
        out[t].seed = seed;
    });
    return out;
}

template <typename Get>
Summary summarize_field(const std::vector<TrialReport>& trials, Get get) {
    std::vector<double> v;
    v.reserve(trials.size());
    for (const auto& t : trials) v.push_back(get(t));
    return summarize(v);
}

void summarize_standard(SweepPoint& point) {
    const auto& tr = point.trials;
    point.metrics["mce"] = summarize_field(tr, [](const TrialReport& t) { return t.mce; });
    point.metrics["ece"] = summarize_field(tr, [](const TrialReport& t) { return t.ece; });
    point.metrics["auc_raw"] = summarize_field(tr, [](const TrialReport& t) { return t.auc_raw; });
    point.metrics["auc_calibrated"] = summarize_field(tr, [](const TrialReport& t) { return t.auc_calibrated; });
    point.metrics["auc_loss"] = summarize_field(tr, [](const TrialReport& t) { return t.auc_loss; });
}

struct Measured {
    double mce, ece, auc_raw, auc_calibrated;
};

Measured measure(const BinLayout& layout, const Dataset& test, const Options& options) {
    std::vector<ScoredSample> calibrated;
    calibrated.reserve(test.size());
    for (const auto& s : test) calibrated.push_back({apply_histogram(layout, s.score), s.label});
    const auto bins = reliability(calibrated, options.metric_bins, options.metric_scheme);
    Measured m{mce(bins), ece(bins), kNaN, kNaN};
    if (test.positives() > 0 && test.negatives() > 0) {
        m.auc_raw = auc(test.samples());
        m.auc_calibrated = auc(calibrated);
    }
    return m;
}

bool curve_is_monotone(const TruthCurve& curve) { return curve.kind != TruthCurve::Kind::FlippedWarp; }

bool curve_is_degenerate(const TruthCurve& curve) {
    return curve.kind == TruthCurve::Kind::Constant && (curve.constant == 0.0 || curve.constant == 1.0);
}

void note_degenerate(SweepReport& report, const OracleSpec& spec) {
    if (curve_is_degenerate(spec.curve))
        report.notes.push_back(fmt::format("curve {} makes every bin one-class; AUC values are undefined",
                                           spec.curve.name()));
}

}  // namespace

bool SweepReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Summary summarize(std::span<const double> values) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values)
        if (std::isfinite(x)) v.push_back(x);
    Summary s;
    s.count = v.size();
    if (v.empty()) {
        s.mean = s.sd = s.se = s.q05 = s.q50 = s.q95 = kNaN;
        return s;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(v.size()));
    }
    std::sort(v.begin(), v.end());
    auto quantile = [&v](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.q05 = quantile(0.05);
    s.q50 = quantile(0.50);
    s.q95 = quantile(0.95);
    return s;
}

std::size_t default_test_size(std::size_t n_cal) { return std::max<std::size_t>(10 * n_cal, 100000); }

double mce_bound(std::size_t bins, std::size_t n, double delta) {
    const auto b = static_cast<double>(bins);
    return std::sqrt(2.0 * b * std::log(2.0 * b / delta) / static_cast<double>(n));
}

double hoeffding_bound(std::size_t n, std::size_t bins, double epsilon) {
    return 2.0 * std::exp(-2.0 * static_cast<double>(n) * epsilon * epsilon / static_cast<double>(bins));
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs at least two paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

TrialReport run_oracle_trial(const OracleSpec& spec, std::size_t n_cal, std::size_t bins, std::size_t n_test,
                             std::uint64_t seed, const Options& options) {
    const Dataset cal = generate_oracle(spec, n_cal, derive_seed(seed, {0}));
    const BinLayout layout = fit_histogram(cal, bins, options.fit_scheme);

    TrialReport r;
    r.n_cal = n_cal;
    r.bins = layout.bin_count();
    const auto theta = true_theta(spec, layout);
    for (std::size_t i = 0; i < layout.bin_count(); ++i) {
        const auto th = layout.theta(i);
        const double dev = th ? *th - theta[i] : kNaN;
        r.theta_deviation.push_back(dev);
        if (th) r.max_theta_deviation = std::max(r.max_theta_deviation, std::abs(dev));
    }
    if (n_test == 0) {
        r.mce = r.ece = r.auc_raw = r.auc_calibrated = r.auc_loss = kNaN;
        return r;
    }
    const Dataset test = generate_oracle(spec, n_test, derive_seed(seed, {1}));
    const auto m = measure(layout, test, options);
    r.mce = m.mce;
    r.ece = m.ece;
    r.auc_raw = m.auc_raw;
    r.auc_calibrated = m.auc_calibrated;
    r.auc_loss = m.auc_raw - m.auc_calibrated;
    return r;
}

SweepReport verify_mce_bound(const OracleSpec& spec, std::size_t n, std::size_t bins, double delta,
                             std::size_t trials, std::uint64_t seed, const Options& options) {
    if (trials < 50) throw InputError(fmt::format("mce-bound needs at least 50 trials, got {}", trials));
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0,1)");
    if (bins < 1 || bins > n) throw InputError(fmt::format("need 1 <= B <= N (B = {}, N = {})", bins, n));
    const std::size_t n_test = options.test_size.value_or(default_test_size(n));
    const double bound = mce_bound(bins, n, delta);

    SweepReport report;
    report.name = "mce-bound";
    report.axis = "n_cal";
    note_degenerate(report, spec);
    SweepPoint point;
    point.axis = static_cast<double>(n);
    point.trials = run_trials(trials, seed, point.axis, options, [&](std::uint64_t s) {
        auto r = run_oracle_trial(spec, n, bins, n_test, s, options);
        r.mce_bound = bound;
        return r;
    });
    summarize_standard(point);
    const auto within = static_cast<double>(std::count_if(point.trials.begin(), point.trials.end(),
                                                          [&](const TrialReport& t) { return t.mce <= bound; }));
    const double fraction = within / static_cast<double>(trials);
    point.values["mce_bound"] = bound;
    point.values["fraction_within_bound"] = fraction;
    point.values["bins"] = static_cast<double>(bins);
    point.values["delta"] = delta;
    point.values["n_test"] = static_cast<double>(n_test);
    report.values = point.values;
    report.points.push_back(std::move(point));
    report.checks.push_back({"fraction of trials with MCE <= bound is at least 1 - delta", fraction >= 1.0 - delta,
                             fmt::format("fraction {:.4f}, bound {:.6f}, 1 - delta {:.4f}", fraction, bound, 1.0 - delta)});
    return report;
}

SweepReport verify_ece_rate(const OracleSpec& spec, std::size_t bins, std::vector<std::size_t> n_grid,
                            std::size_t trials, std::uint64_t seed, const Options& options) {
    if (n_grid.size() < 2) throw InputError("ece-rate needs at least two sample sizes");
    std::sort(n_grid.begin(), n_grid.end());
    if (static_cast<double>(n_grid.back()) < 100.0 * static_cast<double>(n_grid.front()))
        throw InputError("ece-rate sample sizes must span at least two decades");
    if (trials < 1) throw InputError("ece-rate needs at least one trial");
    if (bins < 1 || bins > n_grid.front()) throw InputError("ece-rate needs 1 <= B <= min N");

    SweepReport report;
    report.name = "ece-rate";
    report.axis = "n_cal";
    note_degenerate(report, spec);
    std::vector<double> xs, ys;
    for (std::size_t n : n_grid) {
        const std::size_t n_test = options.test_size.value_or(default_test_size(n));
        SweepPoint point;
        point.axis = static_cast<double>(n);
        point.trials = run_trials(trials, seed, point.axis, options,
                                  [&](std::uint64_t s) { return run_oracle_trial(spec, n, bins, n_test, s, options); });
        summarize_standard(point);
        point.values["n_test"] = static_cast<double>(n_test);
        xs.push_back(point.axis);
        ys.push_back(point.metrics["ece"].mean);
        report.points.push_back(std::move(point));
    }
    const double slope = log_log_slope(xs, ys);
    report.values["slope"] = slope;
    report.values["bins"] = static_cast<double>(bins);
    report.checks.push_back({"log-log slope of mean ECE vs N within [-0.65, -0.35]",
                             slope >= kRateSlopeLow && slope <= kRateSlopeHigh, fmt::format("slope {:.4f}", slope)});
    return report;
}

SweepReport verify_auc_loss(const OracleSpec& spec, std::size_t n, std::vector<std::size_t> bin_grid,
                            std::size_t trials, std::uint64_t seed, const Options& options) {
    if (n < 100000) throw InputError(fmt::format("auc-loss needs N >= 1e5, got {}", n));
    if (bin_grid.empty()) throw InputError("auc-loss needs at least one bin count");
    if (trials < 2) throw InputError("auc-loss needs at least two trials for a standard error");
    std::sort(bin_grid.begin(), bin_grid.end());
    const auto max_bins = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    for (auto b : bin_grid)
        if (b < 1 || b > max_bins)
            throw InputError(fmt::format("auc-loss needs 1 <= B <= sqrt(N) = {}, got {}", max_bins, b));
    const std::size_t n_test = options.test_size.value_or(default_test_size(n));
    const bool assert_bound = curve_is_monotone(spec.curve) && !curve_is_degenerate(spec.curve);

    SweepReport report;
    report.name = "auc-loss";
    report.axis = "bins";
    note_degenerate(report, spec);
    if (!curve_is_monotone(spec.curve))
        report.notes.push_back("non-monotone curve: AUC loss may be negative; bound reported, not asserted");
    for (std::size_t b : bin_grid) {
        SweepPoint point;
        point.axis = static_cast<double>(b);
        point.trials = run_trials(trials, seed, point.axis, options,
                                  [&](std::uint64_t s) { return run_oracle_trial(spec, n, b, n_test, s, options); });
        summarize_standard(point);
        const auto& loss = point.metrics["auc_loss"];
        const double bound = 1.0 / (2.0 * static_cast<double>(b));
        const double limit = bound + 3.0 * loss.se;
        point.values["loss_bound"] = bound;
        point.values["loss_limit"] = limit;
        if (assert_bound)
            report.checks.push_back({fmt::format("B={}: mean AUC loss <= 1/(2B) + 3 SE", b), loss.mean <= limit,
                                     fmt::format("mean {:.6f}, se {:.6f}, limit {:.6f}", loss.mean, loss.se, limit)});
        report.points.push_back(std::move(point));
    }
    report.values["n_cal"] = static_cast<double>(n);
    report.values["n_test"] = static_cast<double>(n_test);
    return report;
}

SweepReport verify_theta_concentration(const OracleSpec& spec, std::size_t n, std::size_t bins,
                                       std::vector<double> epsilon_grid, std::size_t trials,
                                       std::uint64_t seed, const Options& options) {
    if (epsilon_grid.empty()) throw InputError("theta-conc needs at least one epsilon");
    if (trials < 1) throw InputError("theta-conc needs at least one trial");
    if (bins < 1 || bins > n) throw InputError(fmt::format("need 1 <= B <= N (B = {}, N = {})", bins, n));
    std::sort(epsilon_grid.begin(), epsilon_grid.end());

    // All epsilons share the same trials; only the threshold changes.
    const auto runs = run_trials(trials, seed, 0.0, options,
                                 [&](std::uint64_t s) { return run_oracle_trial(spec, n, bins, 0, s, options); });

    SweepReport report;
    report.name = "theta-conc";
    report.axis = "epsilon";
    note_degenerate(report, spec);
    for (double eps : epsilon_grid) {
        std::size_t exceed = 0, total = 0;
        for (const auto& r : runs)
            for (double d : r.theta_deviation) {
                if (!std::isfinite(d)) continue;
                ++total;
                if (std::abs(d) >= eps) ++exceed;
            }
        const double freq = total ? static_cast<double>(exceed) / static_cast<double>(total) : 0.0;
        const double bound = hoeffding_bound(n, bins, eps);
        SweepPoint point;
        point.axis = eps;
        point.values["exceedance"] = freq;
        point.values["hoeffding_bound"] = bound;
        point.values["exceed_count"] = static_cast<double>(exceed);
        point.values["bin_samples"] = static_cast<double>(total);
        report.checks.push_back({fmt::format("eps={}: empirical exceedance <= 2 exp(-2 N eps^2 / B)", eps),
                                 freq <= bound, fmt::format("empirical {:.6f}, bound {:.6f}", freq, bound)});
        report.points.push_back(std::move(point));
    }
    if (!report.points.empty()) report.points.front().trials = runs;

    // Mean signed deviation per bin index, over trials that produced that bin.
    std::size_t max_bins = 0;
    for (const auto& r : runs) max_bins = std::max(max_bins, r.theta_deviation.size());
    for (std::size_t i = 0; i < max_bins; ++i) {
        std::vector<double> dev;
        for (const auto& r : runs)
            if (i < r.theta_deviation.size()) dev.push_back(r.theta_deviation[i]);
        const auto s = summarize(dev);
        report.values[fmt::format("bin{:02}_mean_deviation", i)] = s.mean;
        report.values[fmt::format("bin{:02}_deviation_se", i)] = s.se;
    }
    report.values["n_cal"] = static_cast<double>(n);
    report.values["bins"] = static_cast<double>(bins);
    return report;
}

SweepReport calibration_size_sweep(const DataGenerator& generator, std::vector<std::size_t> sizes,
                                   std::size_t trials, std::uint64_t seed, std::size_t test_size,
                                   const Options& options) {
    if (sizes.empty()) throw InputError("size-sweep needs at least one size");
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw InputError("size-sweep sizes must be sorted ascending");
    if (trials < 1) throw InputError("size-sweep needs at least one trial");

    const Dataset test = generator(test_size, derive_seed(seed, {~std::uint64_t{0}}));

    SweepReport report;
    report.name = "size-sweep";
    report.axis = "n_cal";
    std::vector<Summary> mce_series, ece_series;
    for (std::size_t size : sizes) {
        SweepPoint point;
        point.axis = static_cast<double>(size);
        point.trials = run_trials(trials, seed, point.axis, options, [&](std::uint64_t s) {
            const Dataset cal = generator(size, s);
            const BinLayout layout = fit_histogram(cal, std::nullopt, options.fit_scheme);
            const auto m = measure(layout, test, options);
            TrialReport r;
            r.n_cal = size;
            r.bins = layout.bin_count();
            r.mce = m.mce;
            r.ece = m.ece;
            r.auc_raw = m.auc_raw;
            r.auc_calibrated = m.auc_calibrated;
            r.auc_loss = m.auc_raw - m.auc_calibrated;
            return r;
        });
        summarize_standard(point);
        point.values["bins"] = static_cast<double>(point.trials.front().bins);
        mce_series.push_back(point.metrics["mce"]);
        ece_series.push_back(point.metrics["ece"]);
        report.points.push_back(std::move(point));
    }
    report.values["test_size"] = static_cast<double>(test_size);
    report.checks.push_back({"mean MCE non-increasing in calibration-set size (one inversion within 1 SE allowed)",
                             non_increasing_within_se(mce_series), ""});
    report.checks.push_back({"mean ECE non-increasing in calibration-set size (one inversion within 1 SE allowed)",
                             non_increasing_within_se(ece_series), ""});
    if (mce_series.size() >= 2) {
        const double ratio = mce_series.back().mean / mce_series.front().mean;
        report.values["mce_ratio_last_first"] = ratio;
        report.checks.push_back({"mean MCE at the largest size at most half that at the smallest", ratio <= 0.5,
                                 fmt::format("ratio {:.4f}", ratio)});
    }
    return report;
}

bool non_increasing_within_se(std::span<const Summary> series) {
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double rise = series[i].mean - series[i - 1].mean;
        if (rise <= 0.0) continue;
        if (rise > series[i].se) return false;
        ++inversions;
    }
    return inversions <= 1;
}

void write_csv(const std::filesystem::path& path, const SweepReport& report) {
    std::set<std::string> metric_names, value_names;
    for (const auto& p : report.points) {
        for (const auto& [k, v] : p.metrics) metric_names.insert(k);
        for (const auto& [k, v] : p.values) value_names.insert(k);
    }
    csv::Table table;
    table.header.push_back(report.axis);
    for (const auto& m : metric_names)
        for (const char* stat : {"mean", "sd", "se", "q05", "q50", "q95"}) table.header.push_back(m + "_" + stat);
    for (const auto& v : value_names) table.header.push_back(v);
    for (const auto& p : report.points) {
        std::vector<std::string> row{csv::format_double(p.axis)};
        for (const auto& m : metric_names) {
            const auto it = p.metrics.find(m);
            const Summary s = it == p.metrics.end() ? summarize(std::span<const double>{}) : it->second;
            for (double x : {s.mean, s.sd, s.se, s.q05, s.q50, s.q95}) row.push_back(csv::format_double(x));
        }
        for (const auto& v : value_names) {
            const auto it = p.values.find(v);
            row.push_back(it == p.values.end() ? "" : csv::format_double(it->second));
        }
        table.rows.push_back(std::move(row));
    }
    csv::write(path, table);
}

namespace {

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json summary_json(const SweepReport& report) {
    using nlohmann::json;
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    json values = json::object();
    for (const auto& [k, v] : report.values) values[k] = number(v);
    json points = json::array();
    for (const auto& p : report.points) {
        json metrics = json::object();
        for (const auto& [k, s] : p.metrics)
            metrics[k] = {{"count", s.count}, {"mean", number(s.mean)}, {"sd", number(s.sd)}, {"se", number(s.se)},
                          {"q05", number(s.q05)}, {"q50", number(s.q50)}, {"q95", number(s.q95)}};
        json pv = json::object();
        for (const auto& [k, v] : p.values) pv[k] = number(v);
        points.push_back({{"axis", p.axis}, {"metrics", metrics}, {"values", pv}});
    }
    return {{"name", report.name},     {"axis", report.axis},   {"assertion", report.passed() ? "pass" : "fail"},
            {"checks", checks},        {"values", values},      {"points", points},
            {"notes", report.notes}};
}

void write_json(const std::filesystem::path& path, const SweepReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    out << summary_json(report).dump(2) << '\n';
}

}  // namespace calib::harness
