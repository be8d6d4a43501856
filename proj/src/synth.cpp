#include "calib/synth.hpp"

#include "calib/error.hpp"
#include "calib/rng.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace calib {

double TruthCurve::operator()(double y) const {
    auto warp = [](double v) { return 1.0 / (1.0 + std::exp(-8.0 * (v - 0.5))); };
    switch (kind) {
        case Kind::Identity: return y;
        case Kind::Square: return y * y;
        case Kind::LogisticWarp: return warp(y);
        case Kind::FlippedWarp: return y < 0.3 ? 1.0 - warp(y) : warp(y);
        case Kind::Constant: return constant;
    }
    return y;
}

std::string TruthCurve::name() const {
    switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::Square: return "square";
        case Kind::LogisticWarp: return "logistic-warp";
        case Kind::FlippedWarp: return "flipped-warp";
        case Kind::Constant: return fmt::format("constant:{}", constant);
    }
    return "identity";
}

TruthCurve parse_truth_curve(std::string_view text) {
    if (text == "identity") return {TruthCurve::Kind::Identity};
    if (text == "square") return {TruthCurve::Kind::Square};
    if (text == "logistic-warp") return {TruthCurve::Kind::LogisticWarp};
    if (text == "flipped-warp") return {TruthCurve::Kind::FlippedWarp};
    if (text.starts_with("constant:")) {
        const auto arg = text.substr(9);
        double p = 0.0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
        if (ec != std::errc{} || ptr != arg.data() + arg.size() || !(p >= 0.0 && p <= 1.0))
            throw InputError(fmt::format("constant curve needs a probability, got '{}'", arg));
        return {TruthCurve::Kind::Constant, p};
    }
    throw InputError(fmt::format("unknown truth curve '{}'", text));
}

Dataset generate_oracle(const OracleSpec& spec, std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ScoredSample> samples(n);
    for (auto& s : samples) {
        s.score = unit(rng);
        s.label = unit(rng) < spec.curve(s.score) ? 1 : 0;
    }
    return Dataset(std::move(samples));
}

std::vector<double> true_theta(const OracleSpec& spec, const BinLayout& layout) {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> theta;
    theta.reserve(layout.bin_count());
    for (std::size_t i = 0; i < layout.bin_count(); ++i) {
        const double lo = layout.edges[i];
        const double hi = layout.edges[i + 1];
        const double integral =
            gauss_kronrod<double, 15>::integrate([&](double y) { return spec.curve(y); }, lo, hi, 20, 1e-12);
        // Scores are uniform, so the conditional mean is the average of c over the bin.
        theta.push_back(std::clamp(integral / (hi - lo), 0.0, 1.0));
    }
    return theta;
}

FeatureDataset generate_xor(std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 4) throw InputError(fmt::format("XOR generator needs N >= 4, got {}", n));
    if (!(noise_sd >= 0.0)) throw InputError("XOR noise_sd must be >= 0");
    static constexpr double kCorners[4][2] = {{1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}};

    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<FeatureRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i / 2;
        const int label = i % 2 == 0 ? 1 : 0;
        std::size_t corner;
        if (label == 1)
            corner = j % kPositiveCycle < kPositiveLead ? 0 : 1;
        else
            corner = 2 + j % 2;
        const auto& c = kCorners[corner];
        rows[i].features = {c[0] + noise_sd * noise(rng), c[1] + noise_sd * noise(rng)};
        rows[i].label = label;
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    return FeatureDataset(2, std::move(rows));
}

std::string_view to_string(FeatureMap map) noexcept {
    return map == FeatureMap::Linear ? "linear" : "quadratic";
}

FeatureMap parse_feature_map(std::string_view text) {
    if (text == "linear") return FeatureMap::Linear;
    if (text == "quadratic") return FeatureMap::Quadratic;
    throw InputError(fmt::format("unknown feature map '{}'", text));
}

std::vector<double> expand_features(std::span<const double> x, FeatureMap map) {
    std::vector<double> out(x.begin(), x.end());
    if (map == FeatureMap::Quadratic)
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = i; j < x.size(); ++j) out.push_back(x[i] * x[j]);
    return out;
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log1pexp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double LogisticModel::score(std::span<const double> x) const {
    const auto phi = expand_features(x, feature_map);
    if (phi.size() + 1 != weights.size())
        throw InputError(fmt::format("logistic model expects {} expanded features, got {}", weights.size() - 1,
                                     phi.size()));
    double z = weights[0];
    for (std::size_t k = 0; k < phi.size(); ++k) z += weights[k + 1] * phi[k];
    return std::clamp(sigmoid(z), kScoreMargin, 1.0 - kScoreMargin);
}

ScoreFunction LogisticModel::as_function() const {
    return [model = *this](std::span<const double> x) { return model.score(x); };
}

LogisticModel fit_logistic(const FeatureDataset& data, const LogisticOptions& options) {
    const std::size_t pos = data.positives();
    if (pos == 0 || pos == data.size()) throw FitError("logistic regression needs both classes");

    const auto n = static_cast<Eigen::Index>(data.size());
    const auto width = static_cast<Eigen::Index>(
        expand_features(std::vector<double>(data.dimension(), 0.0), options.feature_map).size() + 1);
    Eigen::MatrixXd design(n, width);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = data[static_cast<std::size_t>(i)];
        const auto phi = expand_features(row.features, options.feature_map);
        design(i, 0) = 1.0;
        for (Eigen::Index k = 1; k < width; ++k) design(i, k) = phi[static_cast<std::size_t>(k - 1)];
        z(i) = row.label;
    }
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(width, options.l2);
    penalty(0) = 0.0;

    auto objective = [&](const Eigen::VectorXd& w) {
        const Eigen::VectorXd eta = design * w;
        double f = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) f += log1pexp(eta(i)) - z(i) * eta(i);
        return f + 0.5 * (penalty.array() * w.array().square()).sum();
    };

    LogisticModel model;
    model.feature_map = options.feature_map;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(width);
    double f = objective(w);
    for (std::size_t it = 0; it <= options.max_iter; ++it) {
        const Eigen::VectorXd eta = design * w;
        Eigen::VectorXd p(n), curv(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = sigmoid(eta(i));
            curv(i) = p(i) * (1.0 - p(i));
        }
        const Eigen::VectorXd grad = design.transpose() * (p - z) + penalty.cwiseProduct(w);
        model.gradient_norm = grad.norm();
        model.iterations = it;
        if (model.gradient_norm < options.tol) {
            model.converged = true;
            break;
        }
        if (it == options.max_iter) break;

        Eigen::MatrixXd hess = design.transpose() * curv.asDiagonal() * design;
        hess.diagonal() += penalty;
        hess.diagonal().array() += 1e-10;
        const Eigen::VectorXd step = hess.ldlt().solve(-grad);

        double t = 1.0;
        bool moved = false;
        while (t > 1e-12) {
            const Eigen::VectorXd cand = w + t * step;
            const double fc = objective(cand);
            // Rounding noise in f can swamp the predicted decrease near the optimum.
            const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
            if (fc <= f + 1e-4 * t * grad.dot(step) + noise) {
                w = cand;
                f = fc;
                moved = true;
                break;
            }
            t /= 2.0;
        }
        if (!moved) break;
    }
    if (!w.allFinite()) throw FitError("logistic regression diverged");
    model.weights.assign(w.data(), w.data() + w.size());
    return model;
}

Dataset score_dataset(const LogisticModel& model, const FeatureDataset& data) {
    std::vector<ScoredSample> out;
    out.reserve(data.size());
    for (const auto& row : data) out.push_back({model.score(row.features), row.label});
    return Dataset(std::move(out));
}

}  // namespace calib
