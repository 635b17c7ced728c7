#pragma once

#include "rivercast/pipeline.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace rivercast {

inline constexpr const char* kCheckpointFormat = "rivercast-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Pipeline settings as a JSON object. Keys are sorted, so the dump is canonical.
nlohmann::json pipeline_config_to_json(const PipelineConfig& config);

/// Reads the pipeline keys of `doc` on top of default_pipeline_config(regime, model).
/// "regime" and "model" are required; unknown keys inside nested objects are
/// rejected. Top-level keys outside the pipeline set are left to the caller.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);

/// Top-level keys understood by pipeline_config_from_json.
const std::vector<std::string>& pipeline_config_keys();

nlohmann::json scaler_to_json(const ScalerParams& scaler);
ScalerParams scaler_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

/// Versioned document with the config, fingerprint, scaler, model parameters,
/// feature names, alert levels, loss history and training end date.
std::string serialize_checkpoint(const TrainedPipeline& pipeline);

/// Throws DataError on a foreign format, a version mismatch, or a fingerprint
/// that does not match the stored config.
TrainedPipeline deserialize_checkpoint(const std::string& text);

void save_checkpoint(const TrainedPipeline& pipeline, const std::filesystem::path& path);
TrainedPipeline load_checkpoint(const std::filesystem::path& path);

}  // namespace rivercast
