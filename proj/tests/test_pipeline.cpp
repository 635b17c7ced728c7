#include "doctest.h"

#include "oracles.hpp"
#include "rivercast/error.hpp"
#include "rivercast/pipeline.hpp"
#include "rivercast/synth.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace rivercast;

namespace {

const std::string kQ(kDischargeColumn);

AlignedSeries basin(int days, std::uint64_t seed = 42) {
    BasinParams p;
    p.n_days = days;
    p.seed = seed;
    return generate_basin(p);
}

PipelineConfig quick(Regime regime, ModelKind model) {
    auto c = default_pipeline_config(regime, model);
    c.gbt.n_estimators = 30;
    c.neural.train.epochs = 3;
    c.neural.hidden_size = 4;
    c.neural.hidden_layers = {8};
    return c;
}

bool discharge_derived(const std::string& name) { return name.find("discharge") != std::string::npos; }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("climate-only pipelines see no discharge feature") {
    const auto s = basin(300);
    for (auto model : {ModelKind::svr, ModelKind::gbt, ModelKind::mlp, ModelKind::lstm, ModelKind::gru}) {
        const auto p = train_pipeline(quick(Regime::climate_only, model), s);
        REQUIRE_FALSE(p.feature_names.empty());
        for (const auto& n : p.feature_names) CHECK_FALSE(discharge_derived(n));
    }
}

TEST_CASE("lag pipelines use exactly discharge lags 1 to 5") {
    const auto s = basin(300);
    const auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), s);
    std::vector<std::string> q;
    for (const auto& n : p.feature_names) {
        if (discharge_derived(n)) q.push_back(n);
    }
    CHECK(q == std::vector<std::string>{kQ + "_lag1", kQ + "_lag2", kQ + "_lag3", kQ + "_lag4", kQ + "_lag5"});
    CHECK(std::find(p.feature_names.begin(), p.feature_names.end(), "precip_mm_lag1") != p.feature_names.end());
}

TEST_CASE("defaults per regime") {
    const auto daily = default_pipeline_config(Regime::sequence_daily, ModelKind::lstm);
    CHECK(daily.window.window == 5);
    CHECK(daily.window.horizon == 1);
    const auto multi = default_pipeline_config(Regime::sequence_multistep, ModelKind::gru);
    CHECK(multi.window.window == 20);
    CHECK(multi.window.horizon == 5);
    CHECK_THROWS_AS(default_pipeline_config(Regime::sequence_daily, ModelKind::svr).validate(), ConfigError);
    auto bad = default_pipeline_config(Regime::climate_plus_lags, ModelKind::gbt);
    bad.window.horizon = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(regime_allows(Regime::sequence_multistep, ModelKind::lstm));
    CHECK_FALSE(regime_allows(Regime::sequence_multistep, ModelKind::mlp));
}

TEST_CASE("multistep needs more than window plus horizon minus one rows") {
    CHECK_THROWS_AS(train_pipeline(quick(Regime::sequence_multistep, ModelKind::lstm), basin(30).slice(0, 24)),
                    DataError);
    CHECK_NOTHROW(train_pipeline(quick(Regime::sequence_multistep, ModelKind::lstm), basin(30).slice(0, 26)));
}

TEST_CASE("scaler is fitted on the training rows only") {
    const auto s = basin(400);
    const auto [train, test] = temporal_split(s, 0.8);
    const auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), train);
    const auto expect = fit_robust_scaler(train, train.columns);
    for (const auto& col : train.columns) {
        CHECK(p.scaler.at(col).q1 == expect.at(col).q1);
        CHECK(p.scaler.at(col).q3 == expect.at(col).q3);
    }
    CHECK(p.train_end == train.dates.back());
    CHECK(p.columns == train.columns);
    CHECK(p.fingerprint == config_fingerprint(p.config));
}

TEST_CASE("constant discharge is forecast exactly") {
    auto s = basin(120);
    s.values.col(static_cast<Eigen::Index>(s.discharge_index())).setConstant(321.5);
    for (auto model : {ModelKind::gbt, ModelKind::svr}) {
        const auto p = train_pipeline(quick(Regime::climate_plus_lags, model), s.slice(0, 100));
        for (std::size_t t = 100; t < 120; ++t) {
            const auto f = predict_daily(p, s, s.dates[t]);
            REQUIRE(f.size() == 1);
            CHECK(f[0].predicted == doctest::Approx(321.5).epsilon(1e-9));
            CHECK(f[0].actual.value() == 321.5);
        }
    }
}

TEST_CASE("missing lag history names the dates") {
    const auto s = basin(200);
    const auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), s.slice(0, 150));
    // Drop 2005-06-20 (row 170): a forecast five days later needs it as lag 5.
    const auto gapped = concat(s.slice(0, 170), s.slice(171, 200));
    const Date target = s.dates[175];
    try {
        predict_daily(p, gapped, target);
        FAIL("expected missing history");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find(format_iso_date(s.dates[170])) != std::string::npos);
        CHECK(what.find(format_iso_date(target)) != std::string::npos);
    }
    CHECK_NOTHROW(predict_daily(p, gapped, s.dates[176]));
    const auto ev = evaluate(p, gapped);
    CHECK(ev.skipped == 5);  // targets 171..175 each need day 170
}

TEST_CASE("forecast regime mismatch and column mismatch") {
    const auto s = basin(200);
    const auto daily = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), s.slice(0, 150));
    CHECK_THROWS_AS(predict_multistep(daily, s, s.dates[160]), ConfigError);
    auto renamed = s;
    renamed.columns[0] = "rain_mm";
    CHECK_THROWS_AS(predict_daily(daily, renamed, s.dates[160]), DataError);
    const auto multi = train_pipeline(quick(Regime::sequence_multistep, ModelKind::gru), s.slice(0, 150));
    CHECK_THROWS_AS(predict_daily(multi, s, s.dates[160]), ConfigError);
}

TEST_CASE("multistep forecasts carry horizon tags and one window fingerprint") {
    const auto s = basin(200);
    for (auto model : {ModelKind::lstm, ModelKind::gru}) {
        const auto p = train_pipeline(quick(Regime::sequence_multistep, model), s.slice(0, 150));
        const auto f = predict_multistep(p, s, s.dates[170]);
        REQUIRE(f.size() == 5);
        std::set<std::string> fps;
        for (int h = 0; h < 5; ++h) {
            CHECK(f[static_cast<std::size_t>(h)].step == h + 1);
            CHECK(f[static_cast<std::size_t>(h)].date == s.dates[static_cast<std::size_t>(170 + h)]);
            CHECK(f[static_cast<std::size_t>(h)].origin == s.dates[170]);
            fps.insert(f[static_cast<std::size_t>(h)].window_fingerprint);
        }
        CHECK(fps.size() == 1);
        const auto later = predict_multistep(p, s, s.dates[171]);
        CHECK(later[0].window_fingerprint != f[0].window_fingerprint);
    }
}

TEST_CASE("zero-weight multistep model predicts its head bias at every step") {
    const auto s = basin(200);
    auto p = train_pipeline(quick(Regime::sequence_multistep, ModelKind::lstm), s.slice(0, 150));
    auto& net = std::get<NeuralModel>(p.model);
    std::vector<double> zeros(parameter_count(net), 0.0);
    unflatten(net, zeros);
    std::get<LstmParams>(net).head.biases.setConstant(0.4);
    const auto f = predict_multistep(p, s, s.dates[180]);
    const double expect = inverse_transform(0.4, p.scaler.at(kQ));
    for (const auto& e : f) CHECK(e.predicted == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("negative outputs are clamped and flagged") {
    const auto s = basin(200);
    auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), s.slice(0, 150));
    std::get<GbtModel>(p.model).base_score = -1e6;
    const auto f = predict_daily(p, s, s.dates[160]);
    CHECK(f[0].predicted == 0.0);
    CHECK(f[0].clamped);
    CHECK(f[0].alert == 0);
}

TEST_CASE("prediction-time features equal training-time features") {
    const auto s = basin(150);
    for (auto [regime, model] : {std::pair{Regime::climate_only, ModelKind::gbt},
                                 std::pair{Regime::climate_plus_lags, ModelKind::svr},
                                 std::pair{Regime::climate_plus_lags, ModelKind::lstm},
                                 std::pair{Regime::sequence_daily, ModelKind::gru},
                                 std::pair{Regime::sequence_multistep, ModelKind::lstm}}) {
        const auto config = quick(regime, model);
        const auto scaled = scale_series(s, fit_robust_scaler(s, s.columns));
        const auto m = assemble_features(config, scaled);
        REQUIRE(m.samples() > 0);
        for (std::size_t i = 0; i < m.samples(); ++i) {
            const auto row = assemble_row(config, scaled, m.target_dates[i]);
            REQUIRE(row.has_value());
            const auto r = static_cast<Eigen::Index>(i);
            CHECK(std::equal(row->data(), row->data() + row->size(), m.x.row(r).eval().data()));
        }
    }
}

TEST_CASE("reported predictions invert the scaled outputs") {
    const auto s = basin(400);
    const auto [train, test] = temporal_split(s, 0.8);
    const auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::mlp), train);
    const auto ev = evaluate(p, s);
    const auto scaled = scale_series(s, p.scaler);
    const auto& q = p.scaler.at(kQ);
    for (const auto& e : ev.entries) {
        const auto row = assemble_row(p.config, scaled, e.date);
        const double raw = predict_scaled(p.model, row->transpose())(0, 0);
        if (!e.clamped) CHECK(transform(e.predicted, q) == doctest::Approx(raw).epsilon(1e-9));
    }
}

TEST_CASE("evaluation scores the held-out dates") {
    const auto s = basin(1000);
    const auto [train, test] = temporal_split(s, 0.8);
    const auto p = train_pipeline(default_pipeline_config(Regime::climate_plus_lags, ModelKind::gbt), train);
    const auto ev = evaluate(p, s);
    REQUIRE(ev.entries.size() == test.rows());
    CHECK(ev.entries.front().date == test.dates.front());
    std::vector<double> y, yhat;
    for (const auto& e : ev.entries) {
        y.push_back(*e.actual);
        yhat.push_back(e.predicted);
        CHECK(std::isfinite(e.predicted));
        CHECK(e.predicted >= 0.0);
    }
    CHECK(ev.overall.mse == doctest::Approx(oracle::mse(y, yhat)).epsilon(1e-12));
    CHECK(ev.overall.r2.value() == doctest::Approx(oracle::r2(y, yhat)).epsilon(1e-12));
    CHECK(ev.overall.r2.value() > 0.5);
    REQUIRE(ev.per_step.size() == 1);
    CHECK(ev.per_step[0].mse == ev.overall.mse);
    for (std::size_t i = 1; i < ev.entries.size(); ++i) CHECK(ev.entries[i - 1].date < ev.entries[i].date);
}

TEST_CASE("multistep evaluation reports every step") {
    const auto s = basin(260);
    const auto p = train_pipeline(quick(Regime::sequence_multistep, ModelKind::gru), s.slice(0, 200));
    const auto ev = evaluate(p, s);
    REQUIRE(ev.per_step.size() == 5);
    // Origins 200..255 have all five targets inside the series.
    CHECK(ev.entries.size() == 56 * 5);
    for (const auto& m : ev.per_step) CHECK(m.n == 56);
}

TEST_CASE("alert thresholds from training quartiles") {
    const auto s = basin(4000);
    const auto [train, test] = temporal_split(s, 0.8);
    const auto q = train.values.col(static_cast<Eigen::Index>(train.discharge_index()));
    const std::vector<double> v(q.data(), q.data() + q.size());
    const auto t = derive_alert_thresholds(v);
    REQUIRE(t.levels.size() == 4);
    CHECK(t.levels[0].name == "normal");
    CHECK(t.levels[2].name == "warning");
    const double q1 = oracle::quantile7(v, 0.25), q3 = oracle::quantile7(v, 0.75);
    CHECK(t.levels[0].lower == 0.0);
    CHECK(t.levels[1].lower == doctest::Approx(q3).epsilon(1e-12));
    CHECK(t.levels[2].lower == doctest::Approx(q3 + 1.5 * (q3 - q1)).epsilon(1e-12));
    CHECK(t.levels[3].lower == doctest::Approx(q3 + 3.0 * (q3 - q1)).epsilon(1e-12));
    std::size_t warning_plus = 0;
    for (double x : v) warning_plus += x >= t.levels[2].lower ? 1 : 0;
    CHECK(static_cast<double>(warning_plus) < 0.05 * static_cast<double>(v.size()));

    const auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), train);
    CHECK(p.alerts.levels[2].lower == t.levels[2].lower);
}

TEST_CASE("alert classification") {
    AlertThresholds t{{{"normal", 0.0}, {"watch", 100.0}, {"warning", 250.0}, {"severe", 500.0}}};
    CHECK_NOTHROW(t.validate());
    CHECK(classify_alert(50.0, t) == 0);
    CHECK(classify_alert(99.999, t) == 0);
    CHECK(classify_alert(100.0, t) == 1);
    CHECK(classify_alert(250.0, t) == 2);
    CHECK(classify_alert(1e9, t) == 3);
    std::size_t prev = 0;
    for (double x = 0.0; x < 1000.0; x += 0.37) {
        const auto level = classify_alert(x, t);
        CHECK(level >= prev);
        prev = level;
    }
    AlertThresholds bad{{{"normal", 1.0}, {"watch", 2.0}}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    AlertThresholds unordered{{{"normal", 0.0}, {"watch", 2.0}, {"warning", 2.0}}};
    CHECK_THROWS_AS(unordered.validate(), ConfigError);
    const std::vector<double> flat(10, 5.0);
    CHECK_NOTHROW(derive_alert_thresholds(flat).validate());
}

TEST_CASE("tuning parameters") {
    auto c = default_pipeline_config(Regime::climate_plus_lags, ModelKind::svr);
    apply_params(c, {{"c", 10.0}, {"gamma", 0.5}, {"epsilon", 0.2}});
    CHECK(c.svr.c == 10.0);
    CHECK(c.svr.gamma == 0.5);
    CHECK(c.svr.epsilon == 0.2);
    CHECK_THROWS_AS(apply_params(c, {{"hidden_size", 4.0}}), ConfigError);
    auto l = default_pipeline_config(Regime::sequence_daily, ModelKind::lstm);
    apply_params(l, {{"optimizer", std::string("sgd")}, {"batch_size", 10.0}, {"hidden_size", 8.0}});
    CHECK(l.neural.train.optimizer == Optimizer::sgd);
    CHECK(l.neural.train.batch_size == 10);
    CHECK(l.neural.hidden_size == 8);
    CHECK_THROWS_AS(apply_params(l, {{"batch_size", 2.5}}), ConfigError);
    CHECK_THROWS_AS(apply_params(l, {{"optimizer", 1.0}}), ConfigError);
}

TEST_CASE("grid search inside training") {
    const auto s = basin(300);
    const auto [train, test] = temporal_split(s, 0.8);
    TuneOptions tune;
    tune.grid.model_kind = "gbt";
    tune.grid.axes = {{"max_depth", {1.0, 3.0}}, {"learning_rate", {0.0, 0.1}}};
    tune.cv.method = CvMethod::forward_chain;
    tune.cv.folds = 3;
    const auto p = train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), train, &tune);
    REQUIRE(p.tuning.has_value());
    CHECK(p.tuning->table.size() == 4);
    CHECK(p.tuning->fits() == 12);
    CHECK(p.config.gbt.learning_rate == 0.1);
    for (const auto& row : p.tuning->table) CHECK(row.raw_fold_scores.size() == 3);
    tune.grid.model_kind = "svr";
    CHECK_THROWS_AS(train_pipeline(quick(Regime::climate_plus_lags, ModelKind::gbt), train, &tune), ConfigError);
}

TEST_CASE("training is deterministic") {
    const auto s = basin(300);
    for (auto model : {ModelKind::gbt, ModelKind::mlp, ModelKind::gru}) {
        auto c = quick(Regime::climate_plus_lags, model);
        c.gbt.subsample = 0.8;
        const auto a = train_pipeline(c, s);
        const auto b = train_pipeline(c, s);
        CHECK(predict_scaled(a.model, assemble_features(c, scale_series(s, a.scaler)).x) ==
              predict_scaled(b.model, assemble_features(c, scale_series(s, b.scaler)).x));
        CHECK(a.loss_history == b.loss_history);
    }
}

}  // TEST_SUITE
