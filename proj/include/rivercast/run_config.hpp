#pragma once

#include "rivercast/pipeline.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rivercast {

/// Inputs of a run: either an aligned series CSV or raw climate/discharge files.
struct DataSources {
    std::vector<std::filesystem::path> climate;
    std::optional<std::filesystem::path> discharge;
    std::optional<std::filesystem::path> series;
};

/// One JSON document drives a run. Relative paths resolve against the config
/// file's directory. Unknown keys anywhere are rejected.
struct RunConfig {
    PipelineConfig pipeline;
    DataSources data;
    double train_fraction = 0.8;
    std::filesystem::path output_dir = "out";
    std::optional<ParamGrid> grid;
    CvOptions cv;
    unsigned jobs = 1;
};

/// Per-family grid. SVR: c {0.1, 1, 10, 100, 1000} x gamma {1e-3, 1e-2, 1e-1, 1}
/// x epsilon {0.01, 0.05, 0.1, 0.2}, 80 combinations. GBT: max_depth {3, 5, 7} x
/// n_estimators {50, 100, 200} x learning_rate {0.05, 0.1, 0.2} x subsample {0.8, 1}
/// x colsample {0.8, 1}, 108 combinations.
ParamGrid default_grid(ModelKind model);

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads the series named by `data`: reads an aligned CSV, or parses, averages and
/// merges the climate files with the discharge file. Quality reports are appended
/// to `reports` when non-null.
AlignedSeries load_series(const DataSources& data, std::vector<QualityReport>* reports = nullptr);

}  // namespace rivercast
