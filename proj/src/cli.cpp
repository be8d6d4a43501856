#include "calib/cli.hpp"

#include "calib/calibrator.hpp"
#include "calib/csv.hpp"
#include "calib/data.hpp"
#include "calib/error.hpp"
#include "calib/harness.hpp"
#include "calib/metrics.hpp"
#include "calib/rng.hpp"
#include "calib/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

namespace calib::cli {

namespace {

struct FitConfig {
    std::string method;
    std::string in;
    std::string out;
    std::string score_column = "score";
    std::string label_column = "label";
    std::size_t bins = 0;  // 0: default N^(1/3)
    std::string kde_form = "bayes";
    std::size_t truncation = 20;
    double alpha = 1.0;
    std::size_t max_iter = 500;
    double elbo_tol = 1e-6;
    std::size_t platt_max_iter = 100;
    double platt_tol = 1e-9;
    std::uint64_t seed = 0;
};

struct ApplyConfig {
    std::string model;
    std::string in;
    std::string out;
    std::string score_column = "score";
    std::string output_column = "calibrated";
};

struct EvalConfig {
    std::string in;
    std::string model;
    std::string score_column = "score";
    std::string label_column = "label";
    std::string prob_column = "calibrated";
    std::size_t bins = kDefaultMetricBins;
    std::string scheme = "equal-frequency";
    double threshold = 0.5;
    std::string reliability_out;
    std::string report_out;
};

struct SimulateConfig {
    std::string curve = "identity";
    std::size_t n = 1000;
    double noise_sd = 0.3;
    std::string learner = "linear";
    std::size_t n_train = 1000;
    std::size_t n_test = 1000;
    double l2 = 1e-2;
    std::uint64_t seed = 0;
    std::string out;
    std::string out_train;
    std::string out_test;
    std::string out_features_train;
    std::string out_features_test;
};

struct VerifyConfig {
    std::string curve = "identity";
    std::size_t n = 0;
    std::size_t bins = 10;
    double delta = 0.05;
    std::size_t trials = 0;
    std::size_t test_size = 0;  // 0: default
    std::vector<std::size_t> n_grid{1000, 10000, 100000};
    std::vector<std::size_t> bin_grid{5, 10, 20, 50};
    std::vector<double> eps_grid{0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
    std::vector<std::size_t> sizes{100, 1000, 10000};
    std::string source = "xor-linear";
    std::size_t train_size = 1000;
    double noise_sd = 0.3;
    std::size_t threads = 0;
    std::uint64_t seed = 0;
    std::string out_csv;
    std::string out_json;
};

void print_fit_summary(std::ostream& out, const Dataset& data, Method method, const CalibrationModel& model) {
    fmt::print(out, "method: {}\nN: {}\nm: {}\nn: {}\nmodel: {}\n", to_string(method), data.size(),
               data.positives(), data.negatives(), describe(model));
}

int cmd_fit(const FitConfig& cfg, std::ostream& out, std::ostream& err) {
    const Method method = parse_method(cfg.method);
    const Dataset data = load_scored_csv(cfg.in, cfg.score_column, cfg.label_column);
    FitOptions options;
    if (cfg.bins > 0) options.bins = cfg.bins;
    if (cfg.kde_form == "printed") options.kde_form = KdeForm::Printed;
    else if (cfg.kde_form != "bayes") throw InputError(fmt::format("unknown KDE form '{}'", cfg.kde_form));
    options.platt = {cfg.platt_max_iter, cfg.platt_tol};
    options.dpm.truncation = cfg.truncation;
    options.dpm.alpha = cfg.alpha;
    options.dpm.max_iter = cfg.max_iter;
    options.dpm.elbo_tol = cfg.elbo_tol;
    options.dpm.seed = cfg.seed;
    const auto result = fit_calibrator(method, data, options);
    for (const auto& w : result.warnings) fmt::print(err, "warning: {}\n", w);
    save_model(cfg.out, result.model);
    print_fit_summary(out, data, method, result.model);
    return kOk;
}

int cmd_apply(const ApplyConfig& cfg, std::ostream& out) {
    const CalibrationModel model = load_model(cfg.model);
    csv::Table table = csv::read(cfg.in);
    const auto sc = table.column(cfg.score_column);
    if (table.has_column(cfg.output_column))
        throw InputError(fmt::format("column '{}' already present in '{}'", cfg.output_column, cfg.in));
    table.header.push_back(cfg.output_column);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double score = csv::parse_double(table.rows[r][sc], r + 1, cfg.score_column);
        if (!(score >= 0.0 && score <= 1.0))
            throw InputError(fmt::format("row {}: score {} outside [0,1]", r + 1, score));
        table.rows[r].push_back(csv::format_double(apply(model, score)));
    }
    csv::write(cfg.out, table);
    fmt::print(out, "calibrated {} rows with {}\n", table.rows.size(), describe(model));
    return kOk;
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : "n/a"; }

int cmd_eval(const EvalConfig& cfg, std::ostream& out) {
    const BinScheme scheme = parse_bin_scheme(cfg.scheme);
    const Dataset raw = load_scored_csv(cfg.in, cfg.score_column, cfg.label_column);
    std::optional<Dataset> calibrated;
    if (!cfg.model.empty()) {
        calibrated = calibrate(load_model(cfg.model), raw);
    } else if (csv::read(cfg.in).has_column(cfg.prob_column)) {
        calibrated = load_scored_csv(cfg.in, cfg.prob_column, cfg.label_column);
    }
    if (raw.empty()) throw InputError(fmt::format("'{}' has no rows to evaluate", cfg.in));

    const auto raw_report = evaluate(raw.samples(), cfg.bins, scheme);
    std::optional<ReliabilityReport> cal_report;
    if (calibrated) cal_report = evaluate(calibrated->samples(), cfg.bins, scheme);
    auto acc = [&](const Dataset& d) { return accuracy(d.samples(), cfg.threshold); };

    csv::Table report;
    report.header = {"measure", "raw"};
    if (cal_report) report.header.emplace_back("calibrated");
    auto add = [&](const char* name, double r, std::optional<double> c) {
        std::vector<std::string> row{name, csv::format_double(r)};
        if (cal_report) row.push_back(c ? csv::format_double(*c) : "");
        report.rows.push_back(std::move(row));
    };
    const double nan = std::nan("");
    add("RMSE", raw_report.rmse, cal_report ? std::optional(cal_report->rmse) : std::nullopt);
    add("AUC", raw_report.auc.value_or(nan), cal_report ? cal_report->auc : std::nullopt);
    add("ACC", acc(raw), calibrated ? std::optional(acc(*calibrated)) : std::nullopt);
    add("MCE", raw_report.mce, cal_report ? std::optional(cal_report->mce) : std::nullopt);
    add("ECE", raw_report.ece, cal_report ? std::optional(cal_report->ece) : std::nullopt);

    fmt::print(out, "{:<8}{:>12}{}\n", "measure", "raw", cal_report ? fmt::format("{:>12}", "calibrated") : "");
    fmt::print(out, "{:<8}{:>12.4f}{}\n", "RMSE", raw_report.rmse,
               cal_report ? fmt::format("{:>12.4f}", cal_report->rmse) : "");
    fmt::print(out, "{:<8}{:>12}{}\n", "AUC", fmt_optional(raw_report.auc),
               cal_report ? fmt::format("{:>12}", fmt_optional(cal_report->auc)) : "");
    fmt::print(out, "{:<8}{:>12.4f}{}\n", "ACC", acc(raw),
               calibrated ? fmt::format("{:>12.4f}", acc(*calibrated)) : "");
    fmt::print(out, "{:<8}{:>12.4f}{}\n", "MCE", raw_report.mce,
               cal_report ? fmt::format("{:>12.4f}", cal_report->mce) : "");
    fmt::print(out, "{:<8}{:>12.4f}{}\n", "ECE", raw_report.ece,
               cal_report ? fmt::format("{:>12.4f}", cal_report->ece) : "");
    if (cal_report && raw_report.auc && cal_report->auc) {
        const double loss = *raw_report.auc - *cal_report->auc;
        fmt::print(out, "AUC_Loss {:.6f}\n", loss);
        report.rows.push_back({"AUC_Loss", "", csv::format_double(loss)});
    }

    if (!cfg.reliability_out.empty())
        write_reliability_csv(cfg.reliability_out, cal_report ? cal_report->bins : raw_report.bins);
    if (!cfg.report_out.empty()) csv::write(cfg.report_out, report);
    return kOk;
}

void require_out(const std::string& path, const char* flag) {
    if (path.empty()) throw InputError(fmt::format("missing required flag {}", flag));
}

int cmd_simulate_oracle(const SimulateConfig& cfg, std::ostream& out) {
    require_out(cfg.out, "--out");
    const OracleSpec spec{parse_truth_curve(cfg.curve)};
    const Dataset data = generate_oracle(spec, cfg.n, cfg.seed);
    write_scored_csv(cfg.out, data);
    fmt::print(out, "wrote {} oracle samples (curve {}, m = {}) to {}\n", data.size(), spec.curve.name(),
               data.positives(), cfg.out);
    return kOk;
}

int cmd_simulate_xor(const SimulateConfig& cfg, std::ostream& out) {
    require_out(cfg.out, "--out");
    const auto data = generate_xor(cfg.n, cfg.noise_sd, cfg.seed);
    write_feature_csv(cfg.out, data);
    fmt::print(out, "wrote {} XOR rows (m = {}) to {}\n", data.size(), data.positives(), cfg.out);
    return kOk;
}

int cmd_simulate_scored(const SimulateConfig& cfg, std::ostream& out) {
    require_out(cfg.out_train, "--out-train");
    require_out(cfg.out_test, "--out-test");
    const auto train = generate_xor(cfg.n_train, cfg.noise_sd, derive_seed(cfg.seed, {0}));
    const auto test = generate_xor(cfg.n_test, cfg.noise_sd, derive_seed(cfg.seed, {1}));
    LogisticOptions lo;
    lo.feature_map = parse_feature_map(cfg.learner);
    lo.l2 = cfg.l2;
    const auto model = fit_logistic(train, lo);
    if (!cfg.out_features_train.empty()) write_feature_csv(cfg.out_features_train, train);
    if (!cfg.out_features_test.empty()) write_feature_csv(cfg.out_features_test, test);
    const Dataset train_scored = score_dataset(model, train);
    const Dataset test_scored = score_dataset(model, test);
    write_scored_csv(cfg.out_train, train_scored);
    write_scored_csv(cfg.out_test, test_scored);
    fmt::print(out, "{} logistic base learner ({} iterations, converged: {})\n", cfg.learner, model.iterations,
               model.converged);
    fmt::print(out, "train AUC {:.4f}, test AUC {:.4f}\n", auc(train_scored.samples()), auc(test_scored.samples()));
    return kOk;
}

harness::Options harness_options(const VerifyConfig& cfg) {
    harness::Options o;
    o.threads = cfg.threads;
    if (cfg.test_size > 0) o.test_size = cfg.test_size;
    return o;
}

int finish_verify(const harness::SweepReport& report, const VerifyConfig& cfg, std::ostream& out) {
    if (!cfg.out_csv.empty()) harness::write_csv(cfg.out_csv, report);
    if (!cfg.out_json.empty()) harness::write_json(cfg.out_json, report);
    fmt::print(out, "{} ({} points)\n", report.name, report.points.size());
    for (const auto& p : report.points) {
        fmt::print(out, "  {} = {}", report.axis, p.axis);
        for (const char* key : {"mce", "ece", "auc_loss"}) {
            const auto it = p.metrics.find(key);
            if (it != p.metrics.end() && it->second.count > 0)
                fmt::print(out, "  {} mean {:.6f} (se {:.6f})", key, it->second.mean, it->second.se);
        }
        for (const auto& [k, v] : p.values) fmt::print(out, "  {} {:.6g}", k, v);
        fmt::print(out, "\n");
    }
    for (const auto& [k, v] : report.values)
        if (k.rfind("bin", 0) != 0 || k == "bins") fmt::print(out, "{} {:.6g}\n", k, v);
    for (const auto& n : report.notes) fmt::print(out, "note: {}\n", n);
    for (const auto& c : report.checks)
        fmt::print(out, "[{}] {}{}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail.empty() ? "" : " -- " + c.detail);
    return report.passed() ? kOk : kAssertionFailed;
}

harness::DataGenerator size_sweep_source(const VerifyConfig& cfg) {
    if (cfg.source == "oracle") {
        const OracleSpec spec{parse_truth_curve(cfg.curve)};
        return [spec](std::size_t n, std::uint64_t s) { return generate_oracle(spec, n, s); };
    }
    FeatureMap map;
    if (cfg.source == "xor-linear") map = FeatureMap::Linear;
    else if (cfg.source == "xor-quadratic") map = FeatureMap::Quadratic;
    else throw InputError(fmt::format("unknown size-sweep source '{}'", cfg.source));
    LogisticOptions lo;
    lo.feature_map = map;
    const auto model = fit_logistic(generate_xor(cfg.train_size, cfg.noise_sd, derive_seed(cfg.seed, {7})), lo);
    const double noise = cfg.noise_sd;
    return [model, noise](std::size_t n, std::uint64_t s) { return score_dataset(model, generate_xor(n, noise, s)); };
}

int cmd_verify(const std::string& which, VerifyConfig cfg, std::ostream& out) {
    const OracleSpec spec{parse_truth_curve(cfg.curve)};
    const auto opts = harness_options(cfg);
    if (which == "mce-bound") {
        const std::size_t n = cfg.n ? cfg.n : 1000;
        const std::size_t trials = cfg.trials ? cfg.trials : 200;
        fmt::print(out, "bound {:.4f} (B = {}, N = {}, delta = {})\n", harness::mce_bound(cfg.bins, n, cfg.delta),
                   cfg.bins, n, cfg.delta);
        return finish_verify(harness::verify_mce_bound(spec, n, cfg.bins, cfg.delta, trials, cfg.seed, opts), cfg, out);
    }
    if (which == "ece-rate") {
        const std::size_t trials = cfg.trials ? cfg.trials : 50;
        return finish_verify(harness::verify_ece_rate(spec, cfg.bins, cfg.n_grid, trials, cfg.seed, opts), cfg, out);
    }
    if (which == "auc-loss") {
        const std::size_t n = cfg.n ? cfg.n : 100000;
        const std::size_t trials = cfg.trials ? cfg.trials : 20;
        return finish_verify(harness::verify_auc_loss(spec, n, cfg.bin_grid, trials, cfg.seed, opts), cfg, out);
    }
    if (which == "theta-conc") {
        const std::size_t n = cfg.n ? cfg.n : 10000;
        const std::size_t trials = cfg.trials ? cfg.trials : 500;
        return finish_verify(
            harness::verify_theta_concentration(spec, n, cfg.bins, cfg.eps_grid, trials, cfg.seed, opts), cfg, out);
    }
    if (which == "size-sweep") {
        const std::size_t trials = cfg.trials ? cfg.trials : 10;
        const std::size_t test_size = cfg.test_size ? cfg.test_size : harness::kSizeSweepTestSize;
        harness::Options o = opts;
        o.test_size.reset();
        return finish_verify(
            harness::calibration_size_sweep(size_sweep_source(cfg), cfg.sizes, trials, cfg.seed, test_size, o), cfg,
            out);
    }
    throw InputError(fmt::format("unknown verify target '{}'", which));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Post-processing probability calibration: fit, apply, evaluate, simulate, verify"};
    app.require_subcommand(1);

    FitConfig fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a calibration map to a scored CSV and write it as JSON");
    fit_cmd->add_option("--method", fit.method, "histogram | histogram-width | platt | isotonic | kde | kde-shared | dpm")
        ->required();
    fit_cmd->add_option("--in", fit.in, "Scored CSV (header row)")->required();
    fit_cmd->add_option("--out", fit.out, "Model JSON path")->required();
    fit_cmd->add_option("--score-column", fit.score_column, "Score column name")->capture_default_str();
    fit_cmd->add_option("--label-column", fit.label_column, "Label column name")->capture_default_str();
    fit_cmd->add_option("--bins", fit.bins, "Histogram bins (default round(N^(1/3)))");
    fit_cmd->add_option("--kde-form", fit.kde_form, "bayes | printed")->capture_default_str();
    fit_cmd->add_option("--truncation", fit.truncation, "DPM truncation level T")->capture_default_str();
    fit_cmd->add_option("--alpha", fit.alpha, "DPM concentration")->capture_default_str();
    fit_cmd->add_option("--max-iter", fit.max_iter, "DPM iteration cap")->capture_default_str();
    fit_cmd->add_option("--elbo-tol", fit.elbo_tol, "DPM relative bound tolerance")->capture_default_str();
    fit_cmd->add_option("--platt-max-iter", fit.platt_max_iter, "Platt Newton iteration cap")->capture_default_str();
    fit_cmd->add_option("--platt-tol", fit.platt_tol, "Platt gradient-norm tolerance")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "Seed for DPM initialization")->capture_default_str();

    ApplyConfig ap;
    auto* apply_cmd = app.add_subcommand("apply", "Append a calibrated column to a scored CSV");
    apply_cmd->add_option("--model", ap.model, "Model JSON")->required();
    apply_cmd->add_option("--in", ap.in, "Scored CSV")->required();
    apply_cmd->add_option("--out", ap.out, "Output CSV")->required();
    apply_cmd->add_option("--score-column", ap.score_column, "Score column name")->capture_default_str();
    apply_cmd->add_option("--output-column", ap.output_column, "Calibrated column name")->capture_default_str();

    EvalConfig ev;
    auto* eval_cmd = app.add_subcommand("eval", "RMSE, AUC, ACC, MCE, ECE for raw and calibrated scores");
    eval_cmd->add_option("--in", ev.in, "Scored CSV")->required();
    eval_cmd->add_option("--model", ev.model, "Model JSON to apply to the score column");
    eval_cmd->add_option("--score-column", ev.score_column, "Raw score column")->capture_default_str();
    eval_cmd->add_option("--label-column", ev.label_column, "Label column")->capture_default_str();
    eval_cmd->add_option("--prob-column", ev.prob_column, "Calibrated column used when no model is given")
        ->capture_default_str();
    eval_cmd->add_option("--bins", ev.bins, "Reliability bins")->capture_default_str();
    eval_cmd->add_option("--scheme", ev.scheme, "equal-frequency | equal-width")->capture_default_str();
    eval_cmd->add_option("--threshold", ev.threshold, "Accuracy threshold")->capture_default_str();
    eval_cmd->add_option("--reliability-out", ev.reliability_out, "Reliability CSV (bin_index,e_i,o_i,weight,count)");
    eval_cmd->add_option("--report-out", ev.report_out, "Measures CSV");

    SimulateConfig sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic datasets");
    sim_cmd->require_subcommand(1);
    auto* sim_oracle = sim_cmd->add_subcommand("oracle", "Uniform scores with labels from a truth curve");
    sim_oracle->add_option("--curve", sim.curve, "identity | square | logistic-warp | flipped-warp | constant:<p>")
        ->capture_default_str();
    sim_oracle->add_option("--n", sim.n, "Samples")->capture_default_str();
    sim_oracle->add_option("--seed", sim.seed, "Seed")->capture_default_str();
    sim_oracle->add_option("--out", sim.out, "Scored CSV")->required();
    auto* sim_xor = sim_cmd->add_subcommand("xor", "XOR Gaussian blobs (features x1,x2,label)");
    sim_xor->add_option("--n", sim.n, "Rows")->capture_default_str();
    sim_xor->add_option("--noise-sd", sim.noise_sd, "Blob standard deviation")->capture_default_str();
    sim_xor->add_option("--seed", sim.seed, "Seed")->capture_default_str();
    sim_xor->add_option("--out", sim.out, "Feature CSV")->required();
    auto* sim_scored = sim_cmd->add_subcommand("scored", "XOR train/test sets scored by a logistic base learner");
    sim_scored->add_option("--learner", sim.learner, "linear | quadratic")->capture_default_str();
    sim_scored->add_option("--n-train", sim.n_train, "Training rows")->capture_default_str();
    sim_scored->add_option("--n-test", sim.n_test, "Test rows")->capture_default_str();
    sim_scored->add_option("--noise-sd", sim.noise_sd, "Blob standard deviation")->capture_default_str();
    sim_scored->add_option("--l2", sim.l2, "Ridge penalty")->capture_default_str();
    sim_scored->add_option("--seed", sim.seed, "Seed")->capture_default_str();
    sim_scored->add_option("--out-train", sim.out_train, "Scored training CSV")->required();
    sim_scored->add_option("--out-test", sim.out_test, "Scored test CSV")->required();
    sim_scored->add_option("--out-features-train", sim.out_features_train, "Training features CSV");
    sim_scored->add_option("--out-features-test", sim.out_features_test, "Test features CSV");

    VerifyConfig ver;
    auto* ver_cmd = app.add_subcommand("verify", "Monte-Carlo checks of the histogram-binning guarantees");
    ver_cmd->require_subcommand(1);
    auto common = [&ver](CLI::App* c) {
        c->add_option("--curve", ver.curve, "Oracle truth curve")->capture_default_str();
        c->add_option("--trials", ver.trials, "Trials per point");
        c->add_option("--threads", ver.threads, "Worker threads (0: all cores)")->capture_default_str();
        c->add_option("--seed", ver.seed, "Master seed")->capture_default_str();
        c->add_option("--out-csv", ver.out_csv, "Per-point CSV");
        c->add_option("--out-json", ver.out_json, "JSON summary");
    };
    auto* v_mce = ver_cmd->add_subcommand("mce-bound", "MCE <= sqrt(2B log(2B/delta)/N) w.p. >= 1 - delta");
    common(v_mce);
    v_mce->add_option("--n", ver.n, "Calibration-set size (default 1000)");
    v_mce->add_option("--bins", ver.bins, "Histogram bins")->capture_default_str();
    v_mce->add_option("--delta", ver.delta, "Failure probability")->capture_default_str();
    v_mce->add_option("--test-size", ver.test_size, "Test-set size (default max(10N, 1e5))");
    auto* v_ece = ver_cmd->add_subcommand("ece-rate", "ECE decays like sqrt(B/N)");
    common(v_ece);
    v_ece->add_option("--bins", ver.bins, "Histogram bins")->capture_default_str();
    v_ece->add_option("--n-grid", ver.n_grid, "Calibration-set sizes")->delimiter(',')->capture_default_str();
    v_ece->add_option("--test-size", ver.test_size, "Test-set size (default max(10N, 1e5))");
    auto* v_auc = ver_cmd->add_subcommand("auc-loss", "Mean AUC loss <= 1/(2B)");
    common(v_auc);
    v_auc->add_option("--n", ver.n, "Calibration-set size (default 1e5)");
    v_auc->add_option("--bin-grid", ver.bin_grid, "Bin counts")->delimiter(',')->capture_default_str();
    v_auc->add_option("--test-size", ver.test_size, "Test-set size (default max(10N, 1e5))");
    auto* v_theta = ver_cmd->add_subcommand("theta-conc", "Hoeffding concentration of per-bin positive fractions");
    common(v_theta);
    v_theta->add_option("--n", ver.n, "Calibration-set size (default 1e4)");
    v_theta->add_option("--bins", ver.bins, "Histogram bins")->capture_default_str();
    v_theta->add_option("--eps-grid", ver.eps_grid, "Deviation thresholds")->delimiter(',')->capture_default_str();
    auto* v_size = ver_cmd->add_subcommand("size-sweep", "MCE/ECE/AUC against calibration-set size");
    common(v_size);
    v_size->add_option("--sizes", ver.sizes, "Calibration-set sizes (ascending)")->delimiter(',')->capture_default_str();
    v_size->add_option("--source", ver.source, "xor-linear | xor-quadratic | oracle")->capture_default_str();
    v_size->add_option("--train-size", ver.train_size, "Base-learner training rows (XOR sources)")->capture_default_str();
    v_size->add_option("--noise-sd", ver.noise_sd, "XOR blob standard deviation")->capture_default_str();
    v_size->add_option("--test-size", ver.test_size, "Fixed test-set size (default 10000)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
        if (apply_cmd->parsed()) return cmd_apply(ap, out);
        if (eval_cmd->parsed()) return cmd_eval(ev, out);
        if (sim_oracle->parsed()) return cmd_simulate_oracle(sim, out);
        if (sim_xor->parsed()) return cmd_simulate_xor(sim, out);
        if (sim_scored->parsed()) return cmd_simulate_scored(sim, out);
        for (auto* v : {v_mce, v_ece, v_auc, v_theta, v_size})
            if (v->parsed()) return cmd_verify(v->get_name(), ver, out);
    } catch (const InputError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kInputError;
    } catch (const FitError& e) {
        fmt::print(err, "fit error: {}\n", e.what());
        return kFitError;
    }
    fmt::print(err, "error: no command given\n");
    return kInputError;
}

}  // namespace calib::cli
