#pragma once

#include "rivercast/metrics.hpp"
#include "rivercast/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rivercast {

/// Forecasts and scores of one model, as reported.
struct ModelReport {
    std::string model;
    std::vector<ForecastEntry> entries;
    MetricsReport metrics;
    AlertThresholds alerts;
};

/// `date,actual_cms,predicted_cms,step,alert` rows; actual is empty when unknown.
std::string forecast_csv(const ModelReport& report);

/// `model,mse,rmse,mae,r2` with one row per model; r2 is NA when undefined.
std::string metrics_csv(const std::vector<ModelReport>& reports);

/// Self-contained SVG line chart of actual (where known) and predicted discharge,
/// step-1 entries only, with a legend.
std::string forecast_svg(const ModelReport& report);

/// Writes forecast_<model>.csv and forecast_<model>.svg per model plus metrics.csv
/// into `dir` (created when absent). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const std::vector<ModelReport>& reports,
                                               const std::filesystem::path& dir);

/// Writes `text` to `path`, throwing DataError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rivercast
