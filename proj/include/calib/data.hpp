#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace calib {

// One instance: base-classifier score y in [0,1] and true class z in {0,1}.
struct ScoredSample {
    double score = 0.0;
    int label = 0;

    friend bool operator==(const ScoredSample&, const ScoredSample&) = default;
};

// Immutable collection of scored samples with cached class counts.
class Dataset {
public:
    Dataset() = default;
    // Validates every sample (score in [0,1], label in {0,1}); throws InputError.
    explicit Dataset(std::vector<ScoredSample> samples);

    const std::vector<ScoredSample>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    std::size_t positives() const noexcept { return positives_; }
    std::size_t negatives() const noexcept { return samples_.size() - positives_; }
    const ScoredSample& operator[](std::size_t i) const { return samples_[i]; }

    std::vector<double> scores() const;
    // Scores of all samples with the given label, in dataset order.
    std::vector<double> scores_with_label(int label) const;

    auto begin() const noexcept { return samples_.begin(); }
    auto end() const noexcept { return samples_.end(); }

    friend bool operator==(const Dataset& a, const Dataset& b) { return a.samples_ == b.samples_; }

private:
    std::vector<ScoredSample> samples_;
    std::size_t positives_ = 0;
};

struct FeatureRow {
    std::vector<double> features;
    int label = 0;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

class FeatureDataset {
public:
    FeatureDataset() = default;
    // Throws InputError if any row's length differs from `dimension` or a label is not 0/1.
    FeatureDataset(std::size_t dimension, std::vector<FeatureRow> rows);

    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<FeatureRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const FeatureRow& operator[](std::size_t i) const { return rows_[i]; }
    std::size_t positives() const noexcept;

    auto begin() const noexcept { return rows_.begin(); }
    auto end() const noexcept { return rows_.end(); }

    friend bool operator==(const FeatureDataset& a, const FeatureDataset& b) {
        return a.dimension_ == b.dimension_ && a.rows_ == b.rows_;
    }

private:
    std::size_t dimension_ = 0;
    std::vector<FeatureRow> rows_;
};

// Reads a scored CSV. Errors carry the 1-based data row number.
Dataset load_scored_csv(const std::filesystem::path& path,
                        const std::string& score_column = "score",
                        const std::string& label_column = "label");

void write_scored_csv(const std::filesystem::path& path, const Dataset& data,
                      const std::string& score_column = "score",
                      const std::string& label_column = "label");

// Feature CSV: columns x1..xd then label.
FeatureDataset load_feature_csv(const std::filesystem::path& path,
                                const std::string& label_column = "label");
void write_feature_csv(const std::filesystem::path& path, const FeatureDataset& data);

// Seeded shuffle, then the first round(fraction * N) rows go to the first part.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);
std::pair<FeatureDataset, FeatureDataset> split(const FeatureDataset& data, double fraction,
                                                std::uint64_t seed);

using ScoreFunction = std::function<double(std::span<const double>)>;
using Trainer = std::function<ScoreFunction(const FeatureDataset&)>;

// Builds a calibration set of out-of-fold scores: rows are shuffled with the
// seed and cut into k contiguous folds; each fold is scored by a model trained
// on the remaining folds. Output keeps the input row order. k == N is
// leave-one-out.
Dataset kfold_calibration_set(const FeatureDataset& data, std::size_t k, const Trainer& trainer,
                              std::uint64_t seed);

}  // namespace calib
