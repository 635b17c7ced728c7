#include "rivercast/pipeline.hpp"

#include "rivercast/error.hpp"
#include "rivercast/quantile.hpp"
#include "rivercast/rng.hpp"
#include "rivercast/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rivercast {

namespace {

std::vector<std::string> sequence_columns(const PipelineConfig& config, const AlignedSeries& series) {
    std::vector<std::string> cols;
    for (const auto& c : series.columns) {
        if (c != kDischargeColumn) cols.push_back(c);
    }
    if (config.sequence_include_discharge) cols.emplace_back(kDischargeColumn);
    return cols;
}

bool plus_lags(const PipelineConfig& config) { return config.regime == Regime::climate_plus_lags; }

double number(const ParamValue& v, const std::string& name) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw ConfigError("parameter " + name + " needs a number");
}

int whole(const ParamValue& v, const std::string& name) {
    const double d = number(v, name);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("parameter " + name + " needs an integer");
    return static_cast<int>(d);
}

std::string text(const ParamValue& v, const std::string& name) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError("parameter " + name + " needs a string");
}

std::vector<double> flat(const Eigen::MatrixXd& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

std::string row_fingerprint(const Eigen::VectorXd& row) {
    std::string bytes;
    for (Eigen::Index i = 0; i < row.size(); ++i) {
        bytes += format_double(row(i));
        bytes += ',';
    }
    return to_hex(fnv1a64(bytes));
}

struct Prepared {
    ScalerParams scaler;
    SupervisedMatrix data;
};

Prepared prepare(const PipelineConfig& config, const AlignedSeries& train) {
    config.validate();
    train.validate();
    if (!train.has_column(kDischargeColumn)) throw DataError("training series has no discharge column");
    Prepared p;
    p.scaler = fit_robust_scaler(train, train.columns, config.scale_center);
    p.data = assemble_features(config, scale_series(train, p.scaler));
    if (p.data.samples() < 2) {
        throw DataError("insufficient data: " + std::to_string(train.rows()) + " rows give " +
                        std::to_string(p.data.samples()) + " training samples for regime " +
                        to_string(config.regime));
    }
    return p;
}

CvSplit make_splits(const CvOptions& cv, std::size_t n, std::uint64_t seed) {
    if (cv.folds < 1) throw ConfigError("cv folds must be >= 1");
    const auto k = static_cast<std::size_t>(cv.folds);
    if (cv.method == CvMethod::kfold) return kfold_splits(n, k, seed, cv.shuffle);
    const std::size_t min_train =
        cv.min_train > 0 ? static_cast<std::size_t>(cv.min_train) : n / (k + 1);
    return forward_chain_splits(n, k, min_train);
}

void check_columns(const TrainedPipeline& pipeline, const AlignedSeries& series) {
    if (series.columns != pipeline.columns) {
        std::string want, got;
        for (const auto& c : pipeline.columns) want += (want.empty() ? "" : ",") + c;
        for (const auto& c : series.columns) got += (got.empty() ? "" : ",") + c;
        throw DataError("series columns [" + got + "] differ from the training columns [" + want + "]");
    }
}

/// Forecasts for the given origins from an already scaled series.
std::vector<ForecastEntry> forecast_batch(const TrainedPipeline& pipeline, const AlignedSeries& raw,
                                          const std::vector<Date>& origins,
                                          const std::vector<Eigen::VectorXd>& rows) {
    std::vector<ForecastEntry> out;
    if (origins.empty()) return out;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    const Eigen::MatrixXd pred = predict_scaled(pipeline.model, x);
    const ColumnScale& q_scale = pipeline.scaler.at(kDischargeColumn);
    const auto q_col = static_cast<Eigen::Index>(raw.discharge_index());
    for (std::size_t i = 0; i < origins.size(); ++i) {
        const std::string fp = row_fingerprint(rows[i]);
        for (Eigen::Index h = 0; h < pred.cols(); ++h) {
            ForecastEntry e;
            e.origin = origins[i];
            e.date = add_days(origins[i], static_cast<int>(h));
            e.step = static_cast<int>(h) + 1;
            const double value = inverse_transform(pred(static_cast<Eigen::Index>(i), h), q_scale);
            e.clamped = value < 0.0;
            e.predicted = e.clamped ? 0.0 : value;
            const std::size_t r = raw.find_row(e.date);
            if (r < raw.rows()) e.actual = raw.values(static_cast<Eigen::Index>(r), q_col);
            e.alert = classify_alert(e.predicted, pipeline.alerts);
            e.window_fingerprint = fp;
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<ForecastEntry> forecast_one(const TrainedPipeline& pipeline, const AlignedSeries& series,
                                        Date date) {
    check_columns(pipeline, series);
    const AlignedSeries scaled = scale_series(series, pipeline.scaler);
    std::vector<Date> missing;
    auto row = assemble_row(pipeline.config, scaled, date, &missing);
    if (!row) {
        std::string list;
        for (Date d : missing) list += (list.empty() ? "" : ", ") + format_iso_date(d);
        throw DataError("missing history for " + format_iso_date(date) + ": " + list);
    }
    return forecast_batch(pipeline, series, {date}, {*row});
}

}  // namespace

void AlertThresholds::validate() const {
    if (levels.empty()) throw ConfigError("alert thresholds need at least one level");
    if (levels.front().lower != 0.0) throw ConfigError("the first alert bound must be 0");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i].lower > levels[i - 1].lower) || !std::isfinite(levels[i].lower)) {
            throw ConfigError("alert bounds must be finite and strictly increasing");
        }
    }
}

AlertThresholds derive_alert_thresholds(std::span<const double> discharge) {
    if (discharge.empty()) throw DataError("no discharge values for alert thresholds");
    std::vector<double> sorted(discharge.begin(), discharge.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    const double iqr = q3 - q1;
    AlertThresholds t{{{"normal", 0.0},
                       {"watch", q3},
                       {"warning", q3 + 1.5 * iqr},
                       {"severe", q3 + 3.0 * iqr}}};
    for (std::size_t i = 1; i < t.levels.size(); ++i) {
        const double prev = t.levels[i - 1].lower;
        const double gap = 1e-9 * std::max(1.0, std::abs(prev));
        t.levels[i].lower = std::max(t.levels[i].lower, prev + gap);
    }
    return t;
}

std::size_t classify_alert(double discharge, const AlertThresholds& thresholds) {
    std::size_t level = 0;
    for (std::size_t i = 0; i < thresholds.levels.size(); ++i) {
        if (thresholds.levels[i].lower <= discharge) level = i;
    }
    return level;
}

std::string to_string(CvMethod method) { return method == CvMethod::kfold ? "kfold" : "forward_chain"; }

CvMethod cv_method_from_string(const std::string& name) {
    if (name == "kfold") return CvMethod::kfold;
    if (name == "forward_chain") return CvMethod::forward_chain;
    throw ConfigError("unknown cv method: " + name);
}

void PipelineConfig::validate() const {
    if (!regime_allows(regime, model)) {
        throw ConfigError("regime " + to_string(regime) + " does not accept model " + to_string(model) +
                          " (sequence regimes need lstm or gru)");
    }
    window.validate();
    if (regime != Regime::sequence_multistep && window.horizon != 1) {
        throw ConfigError("only the sequence_multistep regime forecasts more than one step");
    }
    for (const auto& lag : lags) lag.validate();
    if (!(svr.c > 0.0) || !(svr.epsilon >= 0.0) || !(svr.gamma >= 0.0) || !(svr.tol > 0.0)) {
        throw ConfigError("svr needs c > 0, epsilon >= 0, gamma >= 0, tol > 0");
    }
    gbt.validate();
    neural.train.validate();
    if (model == ModelKind::mlp) {
        for (int w : neural.hidden_layers) {
            if (w < 1) throw ConfigError("mlp hidden layer widths must be >= 1");
        }
    }
    if (is_recurrent(model) && neural.hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
    if (alerts) alerts->validate();
}

PipelineConfig default_pipeline_config(Regime regime, ModelKind model) {
    PipelineConfig c;
    c.regime = regime;
    c.model = model;
    c.lags = {{std::string(kDischargeColumn), {1, 2, 3, 4, 5}}, {"precip_mm", {1}}};
    c.window = regime == Regime::sequence_multistep ? WindowSpec{20, 5} : WindowSpec{5, 1};

    auto& t = c.neural.train;
    switch (model) {
        case ModelKind::svr:
        case ModelKind::gbt:
            break;
        case ModelKind::mlp:
            c.neural.hidden_layers = {50};
            c.neural.hidden_activation = Activation::relu;
            t.optimizer = Optimizer::adam;
            t.learning_rate = 1e-3;
            t.batch_size = 32;
            t.epochs = 200;
            break;
        case ModelKind::lstm:
            c.neural.hidden_size = 16;
            t.optimizer = Optimizer::sgd;
            t.learning_rate = 0.05;
            t.batch_size = 10;
            t.epochs = 30;
            break;
        case ModelKind::gru:
            c.neural.hidden_size = 16;
            t.optimizer = Optimizer::adam;
            t.learning_rate = 5e-3;
            t.batch_size = 32;
            t.epochs = 20;
            break;
    }
    if (regime == Regime::sequence_multistep) {
        t.optimizer = Optimizer::adam;
        t.learning_rate = 5e-3;
        t.batch_size = model == ModelKind::gru ? 16 : 32;
        t.epochs = 10;
    }
    return c;
}

void apply_params(PipelineConfig& config, const ParamConfig& params) {
    for (const auto& [name, value] : params) {
        const bool neural = config.model == ModelKind::mlp || is_recurrent(config.model);
        if (config.model == ModelKind::svr && (name == "c" || name == "C")) {
            config.svr.c = number(value, name);
        } else if (config.model == ModelKind::svr && name == "gamma") {
            config.svr.gamma = number(value, name);
        } else if (config.model == ModelKind::svr && name == "epsilon") {
            config.svr.epsilon = number(value, name);
        } else if (config.model == ModelKind::gbt && name == "n_estimators") {
            config.gbt.n_estimators = whole(value, name);
        } else if (config.model == ModelKind::gbt && name == "max_depth") {
            config.gbt.max_depth = whole(value, name);
        } else if (config.model == ModelKind::gbt && name == "learning_rate") {
            config.gbt.learning_rate = number(value, name);
        } else if (config.model == ModelKind::gbt && name == "lambda") {
            config.gbt.lambda = number(value, name);
        } else if (config.model == ModelKind::gbt && name == "subsample") {
            config.gbt.subsample = number(value, name);
        } else if (config.model == ModelKind::gbt && name == "colsample") {
            config.gbt.colsample = number(value, name);
        } else if (neural && name == "learning_rate") {
            config.neural.train.learning_rate = number(value, name);
        } else if (neural && name == "batch_size") {
            config.neural.train.batch_size = whole(value, name);
        } else if (neural && name == "epochs") {
            config.neural.train.epochs = whole(value, name);
        } else if (neural && name == "optimizer") {
            config.neural.train.optimizer = optimizer_from_string(text(value, name));
        } else if (is_recurrent(config.model) && name == "hidden_size") {
            config.neural.hidden_size = whole(value, name);
        } else if (config.model == ModelKind::mlp && name == "hidden_units") {
            config.neural.hidden_layers = {whole(value, name)};
        } else if (config.model == ModelKind::mlp && name == "activation") {
            config.neural.hidden_activation = activation_from_string(text(value, name));
        } else {
            throw ConfigError("model " + to_string(config.model) + " has no tunable parameter " + name);
        }
    }
}

SupervisedMatrix assemble_features(const PipelineConfig& config, const AlignedSeries& scaled) {
    switch (config.regime) {
        case Regime::climate_only:
        case Regime::climate_plus_lags:
            if (is_recurrent(config.model)) {
                return make_lag_sequences(scaled, config.window.window, plus_lags(config));
            }
            return make_lag_features(scaled, config.lags, plus_lags(config));
        case Regime::sequence_daily:
        case Regime::sequence_multistep:
            return make_windows(scaled, config.window, sequence_columns(config, scaled));
    }
    throw ConfigError("unknown regime");
}

std::optional<Eigen::VectorXd> assemble_row(const PipelineConfig& config, const AlignedSeries& scaled,
                                            Date target, std::vector<Date>* missing) {
    if (is_sequence(config.regime)) {
        std::vector<std::size_t> cols;
        for (const auto& name : sequence_columns(config, scaled)) cols.push_back(scaled.column_index(name));
        return window_row(scaled, cols, config.window.window, target, missing);
    }
    const std::size_t row = scaled.find_row(target);
    if (row >= scaled.rows()) {
        if (missing) missing->push_back(target);
        return std::nullopt;
    }
    if (is_recurrent(config.model)) {
        return lag_sequence_row(scaled, config.window.window, plus_lags(config), row, missing);
    }
    return lag_row(scaled, lag_layout(scaled, config.lags, plus_lags(config)), row, missing);
}

TrainedModel fit_model(const PipelineConfig& config, const SupervisedMatrix& data,
                       std::vector<double>* loss_history, const EpochCallback& on_epoch) {
    if (data.samples() == 0) throw DataError("no training samples");
    switch (config.model) {
        case ModelKind::svr: {
            if (data.horizon() != 1) throw ConfigError("svr predicts a single step");
            SvrModel m = svr_fit(data.x, data.y.col(0), config.svr);
            if (loss_history) loss_history->clear();
            return m;
        }
        case ModelKind::gbt: {
            if (data.horizon() != 1) throw ConfigError("gbt predicts a single step");
            GbtConfig g = config.gbt;
            g.seed = config.seed;
            return gbt_fit(data.x, data.y.col(0), g, loss_history);
        }
        case ModelKind::mlp:
        case ModelKind::lstm:
        case ModelKind::gru: {
            NeuralArch arch;
            arch.kind = config.model == ModelKind::mlp   ? NeuralKind::mlp
                        : config.model == ModelKind::lstm ? NeuralKind::lstm
                                                          : NeuralKind::gru;
            arch.input_size = static_cast<int>(config.model == ModelKind::mlp ? data.x.cols()
                                                                              : static_cast<Eigen::Index>(data.channels));
            arch.output_size = static_cast<int>(data.horizon());
            arch.hidden_layers = config.neural.hidden_layers;
            arch.hidden_activation = config.neural.hidden_activation;
            arch.hidden_size = config.neural.hidden_size;
            arch.forget_bias_one = config.neural.forget_bias_one;
            TrainConfig t = config.neural.train;
            t.seed = config.seed;
            FitResult r = fit(arch, data.x, data.y, t, on_epoch);
            if (loss_history) *loss_history = std::move(r.loss_history);
            return std::move(r.model);
        }
    }
    throw ConfigError("unknown model kind");
}

Eigen::MatrixXd predict_scaled(const TrainedModel& model, const Eigen::MatrixXd& x) {
    return std::visit(
        [&](const auto& m) -> Eigen::MatrixXd {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, SvrModel>) {
                return svr_predict(m, x);
            } else if constexpr (std::is_same_v<M, GbtModel>) {
                return gbt_predict(m, x);
            } else {
                return predict(m, x);
            }
        },
        model);
}

TuneResult tune_pipeline(const PipelineConfig& config, const AlignedSeries& train, const TuneOptions& tune) {
    const Prepared prep = prepare(config, train);
    tune.grid.validate();
    if (!tune.grid.model_kind.empty() && tune.grid.model_kind != to_string(config.model)) {
        throw ConfigError("grid is for model " + tune.grid.model_kind + " but the pipeline trains " +
                          to_string(config.model));
    }
    // Reject unknown parameter names before any fitting.
    for (const auto& combo : tune.grid.combinations()) {
        PipelineConfig probe = config;
        apply_params(probe, combo);
        probe.validate();
    }
    const CvSplit splits = make_splits(tune.cv, prep.data.samples(), config.seed);
    const ColumnScale& q_scale = prep.scaler.at(kDischargeColumn);
    const FoldScorer scorer = [&](const ParamConfig& params, const CvFold& fold, std::uint64_t seed) {
        PipelineConfig c = config;
        apply_params(c, params);
        c.seed = seed;
        const SupervisedMatrix fit_part = prep.data.subset(fold.train);
        const SupervisedMatrix val = prep.data.subset(fold.validation);
        const TrainedModel m = fit_model(c, fit_part);
        const std::vector<double> y = flat(val.y);
        const std::vector<double> p = flat(predict_scaled(m, val.x));
        std::vector<double> y_raw, p_raw;
        for (std::size_t i = 0; i < y.size(); ++i) {
            y_raw.push_back(inverse_transform(y[i], q_scale));
            p_raw.push_back(inverse_transform(p[i], q_scale));
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return FoldScore{r2(y, p).value_or(nan), r2(y_raw, p_raw).value_or(nan)};
    };
    return grid_search(tune.grid, splits, scorer, config.seed, tune.jobs);
}

TrainedPipeline train_pipeline(const PipelineConfig& config, const AlignedSeries& train,
                               const TuneOptions* tune, const EpochCallback& on_epoch) {
    TrainedPipeline p;
    p.config = config;
    if (tune) {
        p.tuning = tune_pipeline(config, train, *tune);
        apply_params(p.config, p.tuning->best_config());
    }
    const Prepared prep = prepare(p.config, train);
    p.scaler = prep.scaler;
    p.columns = train.columns;
    p.feature_names = prep.data.feature_names;
    p.model = fit_model(p.config, prep.data, &p.loss_history, on_epoch);
    if (p.config.alerts) {
        p.alerts = *p.config.alerts;
    } else {
        const auto q = train.values.col(static_cast<Eigen::Index>(train.discharge_index()));
        const std::vector<double> values(q.data(), q.data() + q.size());
        p.alerts = derive_alert_thresholds(values);
    }
    p.train_end = train.dates.back();
    p.fingerprint = config_fingerprint(p.config);
    return p;
}

std::vector<ForecastEntry> predict_daily(const TrainedPipeline& pipeline, const AlignedSeries& series,
                                         Date date) {
    if (pipeline.config.regime == Regime::sequence_multistep) {
        throw ConfigError("multistep pipeline: use a multistep forecast");
    }
    return forecast_one(pipeline, series, date);
}

std::vector<ForecastEntry> predict_multistep(const TrainedPipeline& pipeline,
                                             const AlignedSeries& series, Date date) {
    if (pipeline.config.regime != Regime::sequence_multistep) {
        throw ConfigError("pipeline regime " + to_string(pipeline.config.regime) +
                          " forecasts one day; use a daily forecast");
    }
    return forecast_one(pipeline, series, date);
}

Evaluation evaluate(const TrainedPipeline& pipeline, const AlignedSeries& series, std::optional<Date> from) {
    check_columns(pipeline, series);
    const Date start = from ? *from : add_days(pipeline.train_end, 1);
    const AlignedSeries scaled = scale_series(series, pipeline.scaler);
    const int horizon = pipeline.config.regime == Regime::sequence_multistep ? pipeline.config.window.horizon : 1;

    Evaluation ev;
    std::vector<Date> origins;
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t t = 0; t < series.rows(); ++t) {
        const Date d = series.dates[t];
        if (d < start) continue;
        bool targets_known = true;
        for (int h = 1; h < horizon; ++h) {
            if (series.find_row(add_days(d, h)) >= series.rows()) targets_known = false;
        }
        if (!targets_known) continue;
        auto row = assemble_row(pipeline.config, scaled, d);
        if (!row) {
            ++ev.skipped;
            continue;
        }
        origins.push_back(d);
        rows.push_back(std::move(*row));
    }
    if (origins.empty()) throw DataError("no evaluable dates from " + format_iso_date(start));
    ev.entries = forecast_batch(pipeline, series, origins, rows);

    std::vector<double> all_y, all_p;
    std::vector<std::vector<double>> step_y(static_cast<std::size_t>(horizon)), step_p(step_y.size());
    for (const auto& e : ev.entries) {
        all_y.push_back(*e.actual);
        all_p.push_back(e.predicted);
        step_y[static_cast<std::size_t>(e.step - 1)].push_back(*e.actual);
        step_p[static_cast<std::size_t>(e.step - 1)].push_back(e.predicted);
    }
    ev.overall = compute_metrics(all_y, all_p);
    for (std::size_t h = 0; h < step_y.size(); ++h) ev.per_step.push_back(compute_metrics(step_y[h], step_p[h]));
    return ev;
}

}  // namespace rivercast
