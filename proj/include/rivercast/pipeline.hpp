#pragma once

#include "rivercast/dataset.hpp"
#include "rivercast/features.hpp"
#include "rivercast/gbt.hpp"
#include "rivercast/metrics.hpp"
#include "rivercast/neural.hpp"
#include "rivercast/regime.hpp"
#include "rivercast/svr.hpp"
#include "rivercast/train.hpp"
#include "rivercast/tuning.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rivercast {

struct AlertLevel {
    std::string name;
    double lower = 0.0;  // m^3/s, closed lower bound
};

/// Ordered alert levels; the first bound is 0 and bounds strictly increase.
struct AlertThresholds {
    std::vector<AlertLevel> levels;

    void validate() const;
};

/// normal from 0, watch from Q3, warning from Q3 + 1.5 IQR, severe from Q3 + 3 IQR,
/// with quartiles of the given discharge values. Coinciding bounds (a constant
/// series) are pushed apart by a relative 1e-9 so the levels stay ordered.
AlertThresholds derive_alert_thresholds(std::span<const double> discharge);

/// Index of the highest level whose lower bound is <= discharge.
std::size_t classify_alert(double discharge, const AlertThresholds& thresholds);

/// Network settings shared by the neural families.
struct NeuralSettings {
    std::vector<int> hidden_layers{50};  // mlp
    Activation hidden_activation = Activation::relu;
    int hidden_size = 16;  // lstm, gru
    bool forget_bias_one = true;
    TrainConfig train;
};

enum class CvMethod { kfold, forward_chain };

std::string to_string(CvMethod method);
CvMethod cv_method_from_string(const std::string& name);

struct CvOptions {
    CvMethod method = CvMethod::kfold;
    int folds = 5;
    bool shuffle = true;
    /// Training prefix of the first forward-chaining fold; 0 means samples / (folds + 1).
    int min_train = 0;
};

struct PipelineConfig {
    Regime regime = Regime::climate_plus_lags;
    ModelKind model = ModelKind::svr;
    /// Lags for the flat lag regimes. Discharge lags are dropped under climate_only.
    std::vector<LagSpec> lags;
    /// Window of the sequence regimes; for recurrent models in the lag regimes,
    /// `window.window` is the lag-sequence length.
    WindowSpec window;
    /// Whether the sequence regimes feed discharge as a window channel.
    bool sequence_include_discharge = true;
    ScaleCenter scale_center = ScaleCenter::q1;
    SvrConfig svr;
    GbtConfig gbt;
    NeuralSettings neural;
    std::optional<AlertThresholds> alerts;  // derived from training discharge when absent
    std::uint64_t seed = 42;

    void validate() const;
};

/// Regime-appropriate defaults: discharge lags 1..5 and precipitation lag 1, window
/// 5/1 (daily) or 20/5 (multistep), and per-family training settings.
PipelineConfig default_pipeline_config(Regime regime, ModelKind model);

/// Applies one grid assignment. Recognized names: c, gamma, epsilon (svr);
/// n_estimators, max_depth, learning_rate, lambda, subsample, colsample (gbt);
/// learning_rate, batch_size, epochs, hidden_size, hidden_units, optimizer,
/// activation (neural). Throws ConfigError on a name the model does not have.
void apply_params(PipelineConfig& config, const ParamConfig& params);

using TrainedModel = std::variant<SvrModel, GbtModel, NeuralModel>;

/// Input feature assembly, shared verbatim by training and prediction.
/// `scaled` is a series already passed through the pipeline's scaler.
SupervisedMatrix assemble_features(const PipelineConfig& config, const AlignedSeries& scaled);

/// Feature row for the forecast whose first target is `target`; nullopt with the
/// missing history dates appended to `missing` when the history is incomplete.
std::optional<Eigen::VectorXd> assemble_row(const PipelineConfig& config, const AlignedSeries& scaled,
                                            Date target, std::vector<Date>* missing = nullptr);

/// Fits the configured model on a matrix of scaled targets.
TrainedModel fit_model(const PipelineConfig& config, const SupervisedMatrix& data,
                       std::vector<double>* loss_history = nullptr,
                       const EpochCallback& on_epoch = {});

/// Scaled predictions, one row per input row and one column per horizon step.
Eigen::MatrixXd predict_scaled(const TrainedModel& model, const Eigen::MatrixXd& x);

struct TuneOptions {
    ParamGrid grid;
    CvOptions cv;
    unsigned jobs = 1;
};

/// Hex FNV-1a hash of the canonical serialized config (seed included).
std::string config_fingerprint(const PipelineConfig& config);

struct TrainedPipeline {
    PipelineConfig config;  // with any tuned parameters applied
    ScalerParams scaler;
    TrainedModel model;
    std::vector<std::string> columns;        // series columns seen at training time
    std::vector<std::string> feature_names;
    AlertThresholds alerts;
    std::vector<double> loss_history;
    Date train_end;
    std::string fingerprint;
    std::optional<TuneResult> tuning;
};

/// Fits the scaler on `train` only, builds regime features, optionally runs the
/// grid search, and fits the final model.
TrainedPipeline train_pipeline(const PipelineConfig& config, const AlignedSeries& train,
                               const TuneOptions* tune = nullptr, const EpochCallback& on_epoch = {});

/// Cross-validated grid search on the training features alone.
TuneResult tune_pipeline(const PipelineConfig& config, const AlignedSeries& train,
                         const TuneOptions& tune);

struct ForecastEntry {
    Date date;             // target date
    Date origin;           // first target date of the forecast (equal to date for daily)
    int step = 1;          // horizon step, 1-based
    std::optional<double> actual;
    double predicted = 0.0;  // m^3/s, clamped at 0
    bool clamped = false;    // raw prediction was negative
    std::size_t alert = 0;
    std::string window_fingerprint;  // hash of the input features
};

/// One forecast for `date`: a single entry for daily regimes, `horizon` entries
/// (dates date .. date + horizon - 1) for the multistep regime. Throws DataError
/// naming the missing dates when the history is incomplete.
std::vector<ForecastEntry> predict_daily(const TrainedPipeline& pipeline, const AlignedSeries& series,
                                         Date date);
std::vector<ForecastEntry> predict_multistep(const TrainedPipeline& pipeline,
                                             const AlignedSeries& series, Date date);

struct Evaluation {
    std::vector<ForecastEntry> entries;
    MetricsReport overall;
    std::vector<MetricsReport> per_step;  // index 0 is step 1
    std::size_t skipped = 0;              // target dates without full history
};

/// Forecasts every date in `series` on or after `from` (after train_end when
/// absent) with full history and known actuals, and scores them in m^3/s.
Evaluation evaluate(const TrainedPipeline& pipeline, const AlignedSeries& series,
                    std::optional<Date> from = std::nullopt);

}  // namespace rivercast
