#include "rivercast/run_config.hpp"

#include "rivercast/checkpoint.hpp"
#include "rivercast/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rivercast {

using nlohmann::json;

namespace {

const std::set<std::string> kRunKeys{"data", "train_fraction", "output_dir", "grid", "cv", "jobs"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) throw ConfigError("unknown key in " + where + ": " + item.key());
    }
}

ParamAxis axis(const std::string& name, std::vector<ParamValue> values) { return {name, std::move(values)}; }

ParamGrid parse_grid(const json& g, ModelKind model) {
    if (g.is_string()) {
        if (g.get<std::string>() != "default") throw ConfigError("grid must be \"default\" or an object");
        return default_grid(model);
    }
    check_keys(g, {"axes"}, "grid");
    if (!g.contains("axes") || !g.at("axes").is_array()) throw ConfigError("grid.axes must be an array");
    ParamGrid grid;
    grid.model_kind = to_string(model);
    for (const auto& a : g.at("axes")) {
        check_keys(a, {"name", "values"}, "grid.axes[]");
        if (!a.contains("name") || !a.at("name").is_string()) throw ConfigError("grid axis needs a name");
        if (!a.contains("values") || !a.at("values").is_array()) throw ConfigError("grid axis needs values");
        ParamAxis ax{a.at("name").get<std::string>(), {}};
        for (const auto& v : a.at("values")) {
            if (v.is_number()) ax.values.emplace_back(v.get<double>());
            else if (v.is_string()) ax.values.emplace_back(v.get<std::string>());
            else throw ConfigError("grid values must be numbers or strings");
        }
        grid.axes.push_back(std::move(ax));
    }
    grid.validate();
    return grid;
}

}  // namespace

ParamGrid default_grid(ModelKind model) {
    ParamGrid g;
    g.model_kind = to_string(model);
    switch (model) {
        case ModelKind::svr:
            g.axes = {axis("c", {0.1, 1.0, 10.0, 100.0, 1000.0}), axis("gamma", {1e-3, 1e-2, 1e-1, 1.0}),
                      axis("epsilon", {0.01, 0.05, 0.1, 0.2})};
            break;
        case ModelKind::gbt:
            g.axes = {axis("max_depth", {3.0, 5.0, 7.0}), axis("n_estimators", {50.0, 100.0, 200.0}),
                      axis("learning_rate", {0.05, 0.1, 0.2}), axis("subsample", {0.8, 1.0}),
                      axis("colsample", {0.8, 1.0})};
            break;
        case ModelKind::mlp:
            g.axes = {axis("hidden_units", {25.0, 50.0}), axis("learning_rate", {1e-3, 3e-3})};
            break;
        case ModelKind::lstm:
        case ModelKind::gru:
            g.axes = {axis("hidden_size", {8.0, 16.0}), axis("optimizer", {std::string("sgd"), std::string("adam")}),
                      axis("batch_size", {10.0, 32.0})};
            break;
    }
    return g;
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    std::set<std::string> allowed = kRunKeys;
    for (const auto& k : pipeline_config_keys()) allowed.insert(k);
    check_keys(doc, allowed, "config");

    RunConfig rc;
    rc.pipeline = pipeline_config_from_json(doc);
    try {
        if (doc.contains("data")) {
            const json& d = doc.at("data");
            check_keys(d, {"climate", "discharge", "series"}, "data");
            if (d.contains("climate")) {
                for (const auto& p : d.at("climate").get<std::vector<std::string>>()) {
                    rc.data.climate.push_back(resolve(base_dir, p));
                }
            }
            if (d.contains("discharge")) rc.data.discharge = resolve(base_dir, d.at("discharge").get<std::string>());
            if (d.contains("series")) rc.data.series = resolve(base_dir, d.at("series").get<std::string>());
            if (rc.data.series && (rc.data.discharge || !rc.data.climate.empty())) {
                throw ConfigError("data takes either series or climate + discharge, not both");
            }
            if (!rc.data.series && (rc.data.climate.empty() != !rc.data.discharge)) {
                throw ConfigError("data needs both climate files and a discharge file");
            }
        }
        if (doc.contains("train_fraction")) rc.train_fraction = doc.at("train_fraction").get<double>();
        if (!(rc.train_fraction > 0.0 && rc.train_fraction < 1.0)) {
            throw ConfigError("train_fraction must lie in (0, 1)");
        }
        if (doc.contains("output_dir")) rc.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
        else rc.output_dir = resolve(base_dir, "out");
        if (doc.contains("grid")) rc.grid = parse_grid(doc.at("grid"), rc.pipeline.model);
        if (doc.contains("cv")) {
            const json& cv = doc.at("cv");
            check_keys(cv, {"method", "folds", "shuffle", "min_train"}, "cv");
            if (cv.contains("method")) rc.cv.method = cv_method_from_string(cv.at("method").get<std::string>());
            if (cv.contains("folds")) rc.cv.folds = cv.at("folds").get<int>();
            if (cv.contains("shuffle")) rc.cv.shuffle = cv.at("shuffle").get<bool>();
            if (cv.contains("min_train")) rc.cv.min_train = cv.at("min_train").get<int>();
            if (rc.cv.folds < 1 || rc.cv.min_train < 0) throw ConfigError("cv needs folds >= 1 and min_train >= 0");
            if (rc.cv.method == CvMethod::kfold && rc.cv.folds < 2) throw ConfigError("kfold needs folds >= 2");
        }
        if (doc.contains("jobs")) {
            const int jobs = doc.at("jobs").get<int>();
            if (jobs < 1) throw ConfigError("jobs must be >= 1");
            rc.jobs = static_cast<unsigned>(jobs);
        }
        if (rc.grid) {
            for (const auto& combo : rc.grid->combinations()) {
                PipelineConfig probe = rc.pipeline;
                apply_params(probe, combo);
                probe.validate();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing config file: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    json doc;
    try {
        doc = json::parse(text.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(doc, path.parent_path());
}

AlignedSeries load_series(const DataSources& data, std::vector<QualityReport>* reports) {
    if (data.series) return read_aligned_csv(*data.series);
    if (data.climate.empty() || !data.discharge) throw ConfigError("config names no input data");
    std::vector<std::vector<ClimateRecord>> stations;
    for (const auto& path : data.climate) {
        auto parsed = parse_climate_csv(path);
        if (reports) reports->push_back(parsed.report);
        stations.push_back(std::move(parsed.records));
    }
    auto discharge = parse_discharge_csv(*data.discharge);
    if (reports) reports->push_back(discharge.report);
    return align_merge(average_stations(stations), discharge.records);
}

}  // namespace rivercast
