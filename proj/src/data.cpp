#include "calib/data.hpp"

#include "calib/csv.hpp"
#include "calib/error.hpp"
#include "calib/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace calib {

namespace {

void check_sample(const ScoredSample& s, std::size_t row) {
    if (!(s.score >= 0.0 && s.score <= 1.0))
        throw InputError(fmt::format("row {}: score {} outside [0,1]", row, s.score));
    if (s.label != 0 && s.label != 1)
        throw InputError(fmt::format("row {}: label {} not in {{0,1}}", row, s.label));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {}));
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

std::size_t first_part_size(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InputError(fmt::format("split fraction {} not in (0,1)", fraction));
    if (n == 0) throw InputError("cannot split an empty dataset");
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

template <typename Row>
std::pair<std::vector<Row>, std::vector<Row>> split_rows(const std::vector<Row>& rows,
                                                         double fraction, std::uint64_t seed) {
    const std::size_t first = first_part_size(rows.size(), fraction);
    const auto idx = shuffled_indices(rows.size(), seed);
    std::vector<Row> a, b;
    a.reserve(first);
    b.reserve(rows.size() - first);
    for (std::size_t i = 0; i < idx.size(); ++i) (i < first ? a : b).push_back(rows[idx[i]]);
    return {std::move(a), std::move(b)};
}

}  // namespace

Dataset::Dataset(std::vector<ScoredSample> samples) : samples_(std::move(samples)) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        check_sample(samples_[i], i + 1);
        positives_ += static_cast<std::size_t>(samples_[i].label);
    }
}

std::vector<double> Dataset::scores() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.score);
    return out;
}

std::vector<double> Dataset::scores_with_label(int label) const {
    std::vector<double> out;
    for (const auto& s : samples_)
        if (s.label == label) out.push_back(s.score);
    return out;
}

FeatureDataset::FeatureDataset(std::size_t dimension, std::vector<FeatureRow> rows)
    : dimension_(dimension), rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].features.size() != dimension_)
            throw InputError(fmt::format("row {}: expected {} features, found {}", i + 1,
                                         dimension_, rows_[i].features.size()));
        if (rows_[i].label != 0 && rows_[i].label != 1)
            throw InputError(fmt::format("row {}: label {} not in {{0,1}}", i + 1, rows_[i].label));
    }
}

std::size_t FeatureDataset::positives() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        rows_.begin(), rows_.end(), [](const FeatureRow& r) { return r.label == 1; }));
}

Dataset load_scored_csv(const std::filesystem::path& path, const std::string& score_column,
                        const std::string& label_column) {
    const auto table = csv::read(path);
    try {
        const auto sc = table.column(score_column);
        const auto lc = table.column(label_column);
        std::vector<ScoredSample> samples;
        samples.reserve(table.rows.size());
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            ScoredSample s;
            s.score = csv::parse_double(row[sc], r + 1, score_column);
            const auto label = csv::parse_integer(row[lc], r + 1, label_column);
            if (label != 0 && label != 1)
                throw InputError(fmt::format("row {}: label {} not in {{0,1}}", r + 1, label));
            s.label = static_cast<int>(label);
            check_sample(s, r + 1);
            samples.push_back(s);
        }
        return Dataset(std::move(samples));
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_scored_csv(const std::filesystem::path& path, const Dataset& data,
                      const std::string& score_column, const std::string& label_column) {
    csv::Table table;
    table.header = {score_column, label_column};
    table.rows.reserve(data.size());
    for (const auto& s : data) table.rows.push_back({csv::format_double(s.score), std::to_string(s.label)});
    csv::write(path, table);
}

FeatureDataset load_feature_csv(const std::filesystem::path& path, const std::string& label_column) {
    const auto table = csv::read(path);
    try {
        const auto lc = table.column(label_column);
        const std::size_t dim = table.header.size() - 1;
        std::vector<FeatureRow> rows;
        rows.reserve(table.rows.size());
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            FeatureRow row;
            row.features.reserve(dim);
            for (std::size_t c = 0; c < table.header.size(); ++c) {
                if (c == lc) continue;
                row.features.push_back(csv::parse_double(table.rows[r][c], r + 1, table.header[c]));
            }
            const auto label = csv::parse_integer(table.rows[r][lc], r + 1, label_column);
            if (label != 0 && label != 1)
                throw InputError(fmt::format("row {}: label {} not in {{0,1}}", r + 1, label));
            row.label = static_cast<int>(label);
            rows.push_back(std::move(row));
        }
        return FeatureDataset(dim, std::move(rows));
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureDataset& data) {
    csv::Table table;
    for (std::size_t d = 0; d < data.dimension(); ++d) table.header.push_back(fmt::format("x{}", d + 1));
    table.header.emplace_back("label");
    for (const auto& row : data) {
        std::vector<std::string> fields;
        for (double x : row.features) fields.push_back(csv::format_double(x));
        fields.push_back(std::to_string(row.label));
        table.rows.push_back(std::move(fields));
    }
    csv::write(path, table);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
    auto [a, b] = split_rows(data.samples(), fraction, seed);
    return {Dataset(std::move(a)), Dataset(std::move(b))};
}

std::pair<FeatureDataset, FeatureDataset> split(const FeatureDataset& data, double fraction,
                                                std::uint64_t seed) {
    auto [a, b] = split_rows(data.rows(), fraction, seed);
    return {FeatureDataset(data.dimension(), std::move(a)),
            FeatureDataset(data.dimension(), std::move(b))};
}

Dataset kfold_calibration_set(const FeatureDataset& data, std::size_t k, const Trainer& trainer,
                              std::uint64_t seed) {
    const std::size_t n = data.size();
    if (k < 2) throw InputError(fmt::format("k-fold needs k >= 2, got {}", k));
    if (k > n) throw InputError(fmt::format("k-fold with k = {} exceeds N = {}", k, n));

    const auto order = shuffled_indices(n, seed);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t f = 0; f < k; ++f)
        for (std::size_t i = f * n / k; i < (f + 1) * n / k; ++i) fold_of[order[i]] = f;

    std::vector<ScoredSample> out(n);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<FeatureRow> train;
        train.reserve(n - n / k);
        for (std::size_t i = 0; i < n; ++i)
            if (fold_of[i] != f) train.push_back(data[i]);
        try {
            const ScoreFunction score = trainer(FeatureDataset(data.dimension(), std::move(train)));
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] != f) continue;
                const double y = score(data[i].features);
                if (!(y >= 0.0 && y <= 1.0))
                    throw FitError(fmt::format("score {} for row {} outside [0,1]", y, i + 1));
                out[i] = {y, data[i].label};
            }
        } catch (const std::exception& e) {
            throw FitError(fmt::format("fold {}: {}", f, e.what()));
        }
    }
    return Dataset(std::move(out));
}

}  // namespace calib
