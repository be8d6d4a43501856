#include "calib/calibrator.hpp"

#include "calib/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>

namespace calib {

using nlohmann::json;

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::Histogram: return "histogram";
        case Method::HistogramWidth: return "histogram-width";
        case Method::Platt: return "platt";
        case Method::Isotonic: return "isotonic";
        case Method::Kde: return "kde";
        case Method::KdeShared: return "kde-shared";
        case Method::Dpm: return "dpm";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    for (auto m : {Method::Histogram, Method::HistogramWidth, Method::Platt, Method::Isotonic,
                   Method::Kde, Method::KdeShared, Method::Dpm})
        if (to_string(m) == text) return m;
    throw InputError(fmt::format("unknown calibration method '{}'", text));
}

FitResult fit_calibrator(Method method, const Dataset& data, const FitOptions& options) {
    FitResult result;
    switch (method) {
        case Method::Histogram:
        case Method::HistogramWidth: {
            const auto scheme = method == Method::Histogram ? BinScheme::EqualFrequency : BinScheme::EqualWidth;
            if (data.empty()) throw FitError("histogram binning needs at least one sample");
            if (options.bins && *options.bins > data.size())
                throw FitError(fmt::format("histogram binning with B = {} exceeds N = {}", *options.bins, data.size()));
            result.model = fit_histogram(data, options.bins, scheme);
            break;
        }
        case Method::Platt: {
            const auto fit = fit_platt(data, options.platt);
            if (!fit.converged)
                result.warnings.push_back(fmt::format(
                    "Platt scaling stopped after {} iterations with gradient norm {:.3g}", fit.iterations,
                    fit.gradient_norm));
            result.model = fit.model;
            break;
        }
        case Method::Isotonic: result.model = fit_isotonic(data); break;
        case Method::Kde:
        case Method::KdeShared: {
            auto model = fit_kde(data, method == Method::KdeShared);
            model.form = options.kde_form;
            result.model = std::move(model);
            break;
        }
        case Method::Dpm: {
            auto model = fit_dpm(data, options.dpm);
            for (const auto* d : {&model.positive, &model.negative})
                if (!d->converged)
                    result.warnings.push_back(fmt::format(
                        "DPM stopped at max_iter = {} before the bound settled", d->iterations));
            result.model = std::move(model);
            break;
        }
    }
    return result;
}

double apply(const CalibrationModel& model, double score) {
    return std::visit(
        [score](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BinLayout>) return apply_histogram(m, score);
            else if constexpr (std::is_same_v<T, PlattModel>) return apply_platt(m, score);
            else if constexpr (std::is_same_v<T, IsotonicModel>) return apply_isotonic(m, score);
            else if constexpr (std::is_same_v<T, KdeModel>) return apply_kde(m, score);
            else return apply_dpm(m, score);
        },
        model);
}

Dataset calibrate(const CalibrationModel& model, const Dataset& data) {
    std::vector<ScoredSample> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back({apply(model, s.score), s.label});
    return Dataset(std::move(out));
}

std::string describe(const CalibrationModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BinLayout>) {
                return fmt::format("histogram scheme={} B={}", to_string(m.scheme), m.bin_count());
            } else if constexpr (std::is_same_v<T, PlattModel>) {
                return fmt::format("platt A={} B={}", m.a, m.b);
            } else if constexpr (std::is_same_v<T, IsotonicModel>) {
                return fmt::format("isotonic breakpoints={}", m.breakpoints.size());
            } else if constexpr (std::is_same_v<T, KdeModel>) {
                return fmt::format("kde h0={} h1={} prior={}", m.h0, m.h1, m.prior_positive);
            } else {
                return fmt::format("dpm T={} alpha={} prior={} elbo+={} elbo-={}", m.positive.truncation(),
                                   m.positive.alpha, m.prior_positive, m.positive.elbo(), m.negative.elbo());
            }
        },
        model);
}

namespace {

json ng_to_json(const NormalGamma& q) {
    return {{"mean", q.mean}, {"precision_scale", q.precision_scale}, {"shape", q.shape}, {"rate", q.rate}};
}

NormalGamma ng_from_json(const json& j) {
    return {j.at("mean").get<double>(), j.at("precision_scale").get<double>(), j.at("shape").get<double>(),
            j.at("rate").get<double>()};
}

json density_to_json(const DpmDensity& d) {
    json sticks = json::array();
    for (const auto& [g1, g2] : d.sticks) sticks.push_back({g1, g2});
    json comps = json::array();
    for (const auto& c : d.components) comps.push_back(ng_to_json(c));
    return {{"sticks", sticks},
            {"components", comps},
            {"base", ng_to_json(d.prior)},
            {"elbo", d.elbo()},
            {"elbo_trace", d.elbo_trace},
            {"iterations", d.iterations},
            {"converged", d.converged}};
}

DpmDensity density_from_json(const json& j, double alpha) {
    DpmDensity d;
    d.alpha = alpha;
    d.prior = ng_from_json(j.at("base"));
    for (const auto& s : j.at("sticks")) d.sticks.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
    for (const auto& c : j.at("components")) d.components.push_back(ng_from_json(c));
    d.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
    d.iterations = j.at("iterations").get<std::size_t>();
    d.converged = j.at("converged").get<bool>();
    if (d.components.empty() || d.sticks.size() + 1 != d.components.size())
        throw InputError("dpm model: expected T components and T-1 sticks");
    return d;
}

}  // namespace

json to_json(const CalibrationModel& model) {
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BinLayout>) {
                json theta = json::array();
                for (std::size_t i = 0; i < m.bin_count(); ++i) {
                    const auto t = m.theta(i);
                    theta.push_back(t ? json(*t) : json(nullptr));
                }
                return {{"method", "histogram"},    {"scheme", std::string(to_string(m.scheme))},
                        {"edges", m.edges},         {"theta", theta},
                        {"counts", m.counts},       {"positives", m.positive_counts}};
            } else if constexpr (std::is_same_v<T, PlattModel>) {
                return {{"method", "platt"}, {"A", m.a}, {"B", m.b}};
            } else if constexpr (std::is_same_v<T, IsotonicModel>) {
                return {{"method", "isotonic"}, {"breakpoints", m.breakpoints}, {"values", m.values}};
            } else if constexpr (std::is_same_v<T, KdeModel>) {
                return {{"method", "kde"},
                        {"positives", m.positive_scores},
                        {"negatives", m.negative_scores},
                        {"h0", m.h0},
                        {"h1", m.h1},
                        {"prior", m.prior_positive},
                        {"form", m.form == KdeForm::Bayes ? "bayes" : "printed"}};
            } else {
                return {{"method", "dpm"},
                        {"T", m.positive.truncation()},
                        {"alpha", m.positive.alpha},
                        {"prior", m.prior_positive},
                        {"elbo", {{"positive", m.positive.elbo()}, {"negative", m.negative.elbo()}}},
                        {"positive", density_to_json(m.positive)},
                        {"negative", density_to_json(m.negative)}};
            }
        },
        model);
}

CalibrationModel model_from_json(const json& doc) {
    try {
        const auto method = doc.at("method").get<std::string>();
        if (method == "histogram") {
            BinLayout layout;
            layout.scheme = parse_bin_scheme(doc.at("scheme").get<std::string>());
            layout.edges = doc.at("edges").get<std::vector<double>>();
            layout.counts = doc.at("counts").get<std::vector<std::size_t>>();
            layout.positive_counts = doc.at("positives").get<std::vector<std::size_t>>();
            layout.validate();
            return layout;
        }
        if (method == "platt") return PlattModel{doc.at("A").get<double>(), doc.at("B").get<double>()};
        if (method == "isotonic") {
            IsotonicModel m{doc.at("breakpoints").get<std::vector<double>>(),
                            doc.at("values").get<std::vector<double>>()};
            if (m.breakpoints.empty() || m.breakpoints.size() != m.values.size())
                throw InputError("isotonic model: breakpoints and values must be non-empty and equal in length");
            for (std::size_t i = 0; i < m.values.size(); ++i) {
                if (!(m.values[i] >= 0.0 && m.values[i] <= 1.0))
                    throw InputError("isotonic model: values must lie in [0,1]");
                if (i > 0 && !(m.breakpoints[i] > m.breakpoints[i - 1] && m.values[i] >= m.values[i - 1]))
                    throw InputError("isotonic model: breakpoints must increase and values must not decrease");
            }
            return m;
        }
        if (method == "kde") {
            KdeModel m;
            m.positive_scores = doc.at("positives").get<std::vector<double>>();
            m.negative_scores = doc.at("negatives").get<std::vector<double>>();
            m.h0 = doc.at("h0").get<double>();
            m.h1 = doc.at("h1").get<double>();
            m.prior_positive = doc.at("prior").get<double>();
            m.form = doc.value("form", std::string("bayes")) == "printed" ? KdeForm::Printed : KdeForm::Bayes;
            if (!(m.h0 > 0.0 && m.h1 > 0.0)) throw InputError("kde model: bandwidths must be positive");
            return m;
        }
        if (method == "dpm") {
            DpmModel m;
            const double alpha = doc.at("alpha").get<double>();
            m.prior_positive = doc.at("prior").get<double>();
            m.positive = density_from_json(doc.at("positive"), alpha);
            m.negative = density_from_json(doc.at("negative"), alpha);
            return m;
        }
        throw InputError(fmt::format("unknown model method '{}'", method));
    } catch (const json::exception& e) {
        throw InputError(fmt::format("malformed model document: {}", e.what()));
    }
}

void save_model(const std::filesystem::path& path, const CalibrationModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    out << to_json(model).dump(2) << '\n';
}

CalibrationModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return model_from_json(doc);
}

}  // namespace calib
