#pragma once

#include "calib/data.hpp"
#include "calib/density.hpp"
#include "calib/histogram.hpp"
#include "calib/monotone.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace calib {

enum class Method { Histogram, HistogramWidth, Platt, Isotonic, Kde, KdeShared, Dpm };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);

using CalibrationModel = std::variant<BinLayout, PlattModel, IsotonicModel, KdeModel, DpmModel>;

struct FitOptions {
    std::optional<std::size_t> bins;  // histogram; default round(N^(1/3))
    PlattOptions platt;
    KdeForm kde_form = KdeForm::Bayes;
    DpmOptions dpm;
};

struct FitResult {
    CalibrationModel model;
    std::vector<std::string> warnings;  // e.g. Platt stopping short of tolerance
};

FitResult fit_calibrator(Method method, const Dataset& data, const FitOptions& options = {});

double apply(const CalibrationModel& model, double score);
// Copy of `data` with every score replaced by its calibrated value.
Dataset calibrate(const CalibrationModel& model, const Dataset& data);

// One-line description of the fitted parameters.
std::string describe(const CalibrationModel& model);

nlohmann::json to_json(const CalibrationModel& model);
// Throws InputError on a malformed document.
CalibrationModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const CalibrationModel& model);
CalibrationModel load_model(const std::filesystem::path& path);

}  // namespace calib
