#pragma once

#include "calib/data.hpp"
#include "calib/rng.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace calib::testing {

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("calib-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Dataset make_dataset(std::initializer_list<std::pair<double, int>> rows) {
    std::vector<ScoredSample> s;
    for (auto [score, label] : rows) s.push_back({score, label});
    return Dataset(std::move(s));
}

// Scores drawn from a small grid so ties are common; labels independent coin flips
// biased by the score. Both classes are present.
inline Dataset random_small_dataset(Rng& rng, std::size_t max_n, std::size_t grid = 20) {
    std::uniform_int_distribution<std::size_t> size(2, max_n);
    std::uniform_int_distribution<std::size_t> level(0, grid);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (;;) {
        const std::size_t n = size(rng);
        std::vector<ScoredSample> s(n);
        for (auto& x : s) {
            x.score = static_cast<double>(level(rng)) / static_cast<double>(grid);
            x.label = unit(rng) < 0.2 + 0.6 * x.score ? 1 : 0;
        }
        Dataset d(std::move(s));
        if (d.positives() > 0 && d.negatives() > 0) return d;
    }
}

}  // namespace calib::testing
