#include "rivercast/checkpoint.hpp"

#include "rivercast/error.hpp"
#include "rivercast/rng.hpp"
#include "rivercast/text.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rivercast {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) throw ConfigError("unknown key in " + where + ": " + item.key());
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("wrong type for " + where + "." + key);
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key " + where + "." + key);
    T out{};
    read(obj, key, out, where);
    return out;
}

const char* center_name(ScaleCenter c) { return c == ScaleCenter::q1 ? "q1" : "median"; }

ScaleCenter center_from(const std::string& name) {
    if (name == "q1") return ScaleCenter::q1;
    if (name == "median") return ScaleCenter::median;
    throw ConfigError("unknown scale_center: " + name);
}

const char* init_name(InitScheme s) { return s == InitScheme::zeros ? "zeros" : "glorot_uniform"; }

InitScheme init_from(const std::string& name) {
    if (name == "glorot_uniform") return InitScheme::glorot_uniform;
    if (name == "zeros") return InitScheme::zeros;
    throw ConfigError("unknown init scheme: " + name);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& doc) {
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    const json& data = doc.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw DataError("matrix row count mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = data.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& doc) {
    const auto values = doc.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json dense_to_json(const DenseLayer& layer) {
    return json{{"weights", matrix_to_json(layer.weights)},
                {"biases", vector_to_json(layer.biases)},
                {"activation", to_string(layer.activation)}};
}

DenseLayer dense_from_json(const json& doc) {
    DenseLayer layer;
    layer.weights = matrix_from_json(doc.at("weights"));
    layer.biases = vector_from_json(doc.at("biases"));
    layer.activation = activation_from_string(doc.at("activation").get<std::string>());
    if (layer.biases.size() != layer.weights.rows()) throw DataError("layer bias length mismatch");
    return layer;
}

json neural_to_json(const NeuralModel& model) {
    json out{{"family", "neural"}, {"kind", to_string(kind_of(model))}};
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, MlpModel>) {
                json layers = json::array();
                for (const auto& l : m.layers) layers.push_back(dense_to_json(l));
                out["layers"] = std::move(layers);
            } else if constexpr (std::is_same_v<M, LstmParams>) {
                out["hidden_size"] = m.hidden_size;
                out["input_size"] = m.input_size;
                out["w_f"] = matrix_to_json(m.w_f);
                out["w_i"] = matrix_to_json(m.w_i);
                out["w_o"] = matrix_to_json(m.w_o);
                out["w_c"] = matrix_to_json(m.w_c);
                out["b_f"] = vector_to_json(m.b_f);
                out["b_i"] = vector_to_json(m.b_i);
                out["b_o"] = vector_to_json(m.b_o);
                out["b_c"] = vector_to_json(m.b_c);
                out["head"] = dense_to_json(m.head);
            } else {
                out["hidden_size"] = m.hidden_size;
                out["input_size"] = m.input_size;
                out["w_r"] = matrix_to_json(m.w_r);
                out["w_z"] = matrix_to_json(m.w_z);
                out["w_h"] = matrix_to_json(m.w_h);
                out["b_r"] = vector_to_json(m.b_r);
                out["b_z"] = vector_to_json(m.b_z);
                out["b_h"] = vector_to_json(m.b_h);
                out["head"] = dense_to_json(m.head);
            }
        },
        model);
    return out;
}

NeuralModel neural_from_json(const json& doc) {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "mlp") {
        MlpModel m;
        for (const auto& l : doc.at("layers")) m.layers.push_back(dense_from_json(l));
        for (std::size_t i = 1; i < m.layers.size(); ++i) {
            if (m.layers[i].inputs() != m.layers[i - 1].outputs()) throw DataError("mlp layers do not chain");
        }
        if (m.layers.empty()) throw DataError("mlp without layers");
        return m;
    }
    const int hidden = doc.at("hidden_size").get<int>();
    const int input = doc.at("input_size").get<int>();
    const auto gate = [&](const char* key) {
        Eigen::MatrixXd w = matrix_from_json(doc.at(key));
        if (w.rows() != hidden || w.cols() != hidden + input) throw DataError(std::string("bad shape of ") + key);
        return w;
    };
    const auto bias = [&](const char* key) {
        Eigen::VectorXd b = vector_from_json(doc.at(key));
        if (b.size() != hidden) throw DataError(std::string("bad length of ") + key);
        return b;
    };
    if (kind == "lstm") {
        LstmParams p;
        p.hidden_size = hidden;
        p.input_size = input;
        p.w_f = gate("w_f");
        p.w_i = gate("w_i");
        p.w_o = gate("w_o");
        p.w_c = gate("w_c");
        p.b_f = bias("b_f");
        p.b_i = bias("b_i");
        p.b_o = bias("b_o");
        p.b_c = bias("b_c");
        p.head = dense_from_json(doc.at("head"));
        return p;
    }
    if (kind == "gru") {
        GruParams p;
        p.hidden_size = hidden;
        p.input_size = input;
        p.w_r = gate("w_r");
        p.w_z = gate("w_z");
        p.w_h = gate("w_h");
        p.b_r = bias("b_r");
        p.b_z = bias("b_z");
        p.b_h = bias("b_h");
        p.head = dense_from_json(doc.at("head"));
        return p;
    }
    throw DataError("unknown network kind in checkpoint: " + kind);
}

}  // namespace

const std::vector<std::string>& pipeline_config_keys() {
    static const std::vector<std::string> keys{
        "regime", "model", "seed", "lags", "window", "sequence_include_discharge", "scale_center",
        "svr", "gbt", "neural", "alerts"};
    return keys;
}

json pipeline_config_to_json(const PipelineConfig& c) {
    json lags = json::array();
    for (const auto& l : c.lags) lags.push_back({{"column", l.column}, {"lags", l.lags}});
    const auto& t = c.neural.train;
    json doc{
        {"regime", to_string(c.regime)},
        {"model", to_string(c.model)},
        {"seed", c.seed},
        {"lags", std::move(lags)},
        {"window", {{"window", c.window.window}, {"horizon", c.window.horizon}}},
        {"sequence_include_discharge", c.sequence_include_discharge},
        {"scale_center", center_name(c.scale_center)},
        {"svr",
         {{"c", c.svr.c}, {"epsilon", c.svr.epsilon}, {"gamma", c.svr.gamma}, {"tol", c.svr.tol},
          {"max_iter", c.svr.max_iter}, {"cache_mb", c.svr.cache_mb}}},
        {"gbt",
         {{"n_estimators", c.gbt.n_estimators}, {"max_depth", c.gbt.max_depth},
          {"learning_rate", c.gbt.learning_rate}, {"lambda", c.gbt.lambda},
          {"gamma_split", c.gbt.gamma_split}, {"subsample", c.gbt.subsample},
          {"colsample", c.gbt.colsample}}},
        {"neural",
         {{"hidden_layers", c.neural.hidden_layers},
          {"activation", to_string(c.neural.hidden_activation)},
          {"hidden_size", c.neural.hidden_size},
          {"forget_bias_one", c.neural.forget_bias_one},
          {"optimizer", to_string(t.optimizer)},
          {"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"gradient_clip_norm", t.gradient_clip_norm},
          {"init", init_name(t.init_scheme)}}},
    };
    if (c.alerts) {
        json levels = json::array();
        for (const auto& l : c.alerts->levels) levels.push_back({{"name", l.name}, {"lower", l.lower}});
        doc["alerts"] = std::move(levels);
    }
    return doc;
}

PipelineConfig pipeline_config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    const Regime regime = regime_from_string(require<std::string>(doc, "regime", "config"));
    const ModelKind model = model_kind_from_string(require<std::string>(doc, "model", "config"));
    PipelineConfig c = default_pipeline_config(regime, model);
    read(doc, "seed", c.seed, "config");
    if (doc.contains("lags")) {
        const json& lags = doc.at("lags");
        if (!lags.is_array()) throw ConfigError("lags must be an array");
        c.lags.clear();
        for (const auto& l : lags) {
            check_keys(l, {"column", "lags"}, "lags[]");
            c.lags.push_back({require<std::string>(l, "column", "lags[]"),
                              require<std::vector<int>>(l, "lags", "lags[]")});
        }
    }
    if (doc.contains("window")) {
        const json& w = doc.at("window");
        check_keys(w, {"window", "horizon"}, "window");
        read(w, "window", c.window.window, "window");
        read(w, "horizon", c.window.horizon, "window");
    }
    read(doc, "sequence_include_discharge", c.sequence_include_discharge, "config");
    if (doc.contains("scale_center")) c.scale_center = center_from(require<std::string>(doc, "scale_center", "config"));
    if (doc.contains("svr")) {
        const json& s = doc.at("svr");
        check_keys(s, {"c", "epsilon", "gamma", "tol", "max_iter", "cache_mb"}, "svr");
        read(s, "c", c.svr.c, "svr");
        read(s, "epsilon", c.svr.epsilon, "svr");
        read(s, "gamma", c.svr.gamma, "svr");
        read(s, "tol", c.svr.tol, "svr");
        read(s, "max_iter", c.svr.max_iter, "svr");
        read(s, "cache_mb", c.svr.cache_mb, "svr");
    }
    if (doc.contains("gbt")) {
        const json& g = doc.at("gbt");
        check_keys(g, {"n_estimators", "max_depth", "learning_rate", "lambda", "gamma_split", "subsample",
                       "colsample"},
                   "gbt");
        read(g, "n_estimators", c.gbt.n_estimators, "gbt");
        read(g, "max_depth", c.gbt.max_depth, "gbt");
        read(g, "learning_rate", c.gbt.learning_rate, "gbt");
        read(g, "lambda", c.gbt.lambda, "gbt");
        read(g, "gamma_split", c.gbt.gamma_split, "gbt");
        read(g, "subsample", c.gbt.subsample, "gbt");
        read(g, "colsample", c.gbt.colsample, "gbt");
    }
    if (doc.contains("neural")) {
        const json& n = doc.at("neural");
        check_keys(n, {"hidden_layers", "activation", "hidden_size", "forget_bias_one", "optimizer",
                       "learning_rate", "batch_size", "epochs", "gradient_clip_norm", "init"},
                   "neural");
        auto& t = c.neural.train;
        read(n, "hidden_layers", c.neural.hidden_layers, "neural");
        if (n.contains("activation")) {
            c.neural.hidden_activation = activation_from_string(require<std::string>(n, "activation", "neural"));
        }
        read(n, "hidden_size", c.neural.hidden_size, "neural");
        read(n, "forget_bias_one", c.neural.forget_bias_one, "neural");
        if (n.contains("optimizer")) t.optimizer = optimizer_from_string(require<std::string>(n, "optimizer", "neural"));
        read(n, "learning_rate", t.learning_rate, "neural");
        read(n, "batch_size", t.batch_size, "neural");
        read(n, "epochs", t.epochs, "neural");
        read(n, "gradient_clip_norm", t.gradient_clip_norm, "neural");
        if (n.contains("init")) t.init_scheme = init_from(require<std::string>(n, "init", "neural"));
    }
    if (doc.contains("alerts")) {
        const json& a = doc.at("alerts");
        if (!a.is_array()) throw ConfigError("alerts must be an array");
        AlertThresholds t;
        for (const auto& l : a) {
            check_keys(l, {"name", "lower"}, "alerts[]");
            t.levels.push_back({require<std::string>(l, "name", "alerts[]"), require<double>(l, "lower", "alerts[]")});
        }
        c.alerts = std::move(t);
    }
    c.validate();
    return c;
}

std::string config_fingerprint(const PipelineConfig& config) {
    return to_hex(fnv1a64(pipeline_config_to_json(config).dump()));
}

json scaler_to_json(const ScalerParams& scaler) {
    json cols = json::array();
    for (const auto& c : scaler.columns) {
        cols.push_back({{"name", c.name}, {"q1", c.q1}, {"q3", c.q3}, {"iqr", c.iqr},
                        {"center", c.center}, {"fallback", c.fallback}});
    }
    return json{{"center", center_name(scaler.center)}, {"columns", std::move(cols)}};
}

ScalerParams scaler_from_json(const json& doc) {
    ScalerParams s;
    s.center = center_from(doc.at("center").get<std::string>());
    for (const auto& c : doc.at("columns")) {
        s.columns.push_back({c.at("name").get<std::string>(), c.at("q1").get<double>(),
                             c.at("q3").get<double>(), c.at("iqr").get<double>(),
                             c.at("center").get<double>(), c.at("fallback").get<bool>()});
    }
    return s;
}

json model_to_json(const TrainedModel& model) {
    return std::visit(
        [](const auto& m) -> json {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, SvrModel>) {
                return json{{"family", "svr"},
                            {"support_vectors", matrix_to_json(m.support_vectors)},
                            {"alphas", vector_to_json(m.alphas)},
                            {"bias", m.bias},
                            {"gamma", m.gamma},
                            {"c", m.c},
                            {"epsilon", m.epsilon},
                            {"converged", m.converged},
                            {"iterations", m.iterations}};
            } else if constexpr (std::is_same_v<M, GbtModel>) {
                json trees = json::array();
                for (const auto& t : m.trees) {
                    std::vector<int> feature, left, right;
                    std::vector<double> threshold, weight;
                    for (const auto& n : t.nodes) {
                        feature.push_back(n.feature);
                        left.push_back(n.left);
                        right.push_back(n.right);
                        threshold.push_back(n.threshold);
                        weight.push_back(n.weight);
                    }
                    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                                     {"right", right}, {"weight", weight}});
                }
                return json{{"family", "gbt"},
                            {"base_score", m.base_score},
                            {"learning_rate", m.learning_rate},
                            {"lambda", m.lambda},
                            {"gamma_split", m.gamma_split},
                            {"max_depth", m.max_depth},
                            {"subsample", m.subsample},
                            {"colsample", m.colsample},
                            {"n_features", m.n_features},
                            {"trees", std::move(trees)}};
            } else {
                return neural_to_json(m);
            }
        },
        model);
}

TrainedModel model_from_json(const json& doc) {
    const auto family = doc.at("family").get<std::string>();
    if (family == "svr") {
        SvrModel m;
        m.support_vectors = matrix_from_json(doc.at("support_vectors"));
        m.alphas = vector_from_json(doc.at("alphas"));
        m.bias = doc.at("bias").get<double>();
        m.gamma = doc.at("gamma").get<double>();
        m.c = doc.at("c").get<double>();
        m.epsilon = doc.at("epsilon").get<double>();
        m.converged = doc.at("converged").get<bool>();
        m.iterations = doc.at("iterations").get<std::size_t>();
        if (m.alphas.size() != m.support_vectors.rows()) throw DataError("svr alpha count mismatch");
        return m;
    }
    if (family == "gbt") {
        GbtModel m;
        m.base_score = doc.at("base_score").get<double>();
        m.learning_rate = doc.at("learning_rate").get<double>();
        m.lambda = doc.at("lambda").get<double>();
        m.gamma_split = doc.at("gamma_split").get<double>();
        m.max_depth = doc.at("max_depth").get<int>();
        m.subsample = doc.at("subsample").get<double>();
        m.colsample = doc.at("colsample").get<double>();
        m.n_features = doc.at("n_features").get<std::size_t>();
        for (const auto& t : doc.at("trees")) {
            const auto feature = t.at("feature").get<std::vector<int>>();
            const auto left = t.at("left").get<std::vector<int>>();
            const auto right = t.at("right").get<std::vector<int>>();
            const auto threshold = t.at("threshold").get<std::vector<double>>();
            const auto weight = t.at("weight").get<std::vector<double>>();
            const std::size_t n = feature.size();
            if (left.size() != n || right.size() != n || threshold.size() != n || weight.size() != n) {
                throw DataError("tree arrays differ in length");
            }
            RegressionTree tree;
            for (std::size_t i = 0; i < n; ++i) {
                const auto in_range = [&](int k) { return k >= 0 && static_cast<std::size_t>(k) < n; };
                if (feature[i] >= 0 && (!in_range(left[i]) || !in_range(right[i]) ||
                                        static_cast<std::size_t>(feature[i]) >= m.n_features)) {
                    throw DataError("tree node out of range");
                }
                tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], weight[i]});
            }
            m.trees.push_back(std::move(tree));
        }
        return m;
    }
    if (family == "neural") return neural_from_json(doc);
    throw DataError("unknown model family in checkpoint: " + family);
}

std::string serialize_checkpoint(const TrainedPipeline& p) {
    json alerts = json::array();
    for (const auto& l : p.alerts.levels) alerts.push_back({{"name", l.name}, {"lower", l.lower}});
    const json doc{
        {"format", kCheckpointFormat},
        {"version", kCheckpointVersion},
        {"fingerprint", p.fingerprint},
        {"config", pipeline_config_to_json(p.config)},
        {"scaler", scaler_to_json(p.scaler)},
        {"model", model_to_json(p.model)},
        {"columns", p.columns},
        {"feature_names", p.feature_names},
        {"alerts", std::move(alerts)},
        {"loss_history", p.loss_history},
        {"train_end", format_iso_date(p.train_end)},
    };
    return doc.dump(1) + "\n";
}

TrainedPipeline deserialize_checkpoint(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", std::string{}) != kCheckpointFormat) {
            throw DataError("not a rivercast checkpoint");
        }
        const int version = doc.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw DataError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
        }
        TrainedPipeline p;
        p.config = pipeline_config_from_json(doc.at("config"));
        p.fingerprint = doc.at("fingerprint").get<std::string>();
        if (p.fingerprint != config_fingerprint(p.config)) {
            throw DataError("checkpoint fingerprint does not match its config");
        }
        p.scaler = scaler_from_json(doc.at("scaler"));
        p.model = model_from_json(doc.at("model"));
        p.columns = doc.at("columns").get<std::vector<std::string>>();
        p.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        for (const auto& l : doc.at("alerts")) {
            p.alerts.levels.push_back({l.at("name").get<std::string>(), l.at("lower").get<double>()});
        }
        p.alerts.validate();
        p.loss_history = doc.at("loss_history").get<std::vector<double>>();
        const auto end = parse_iso_date(doc.at("train_end").get<std::string>());
        if (!end) throw DataError("bad train_end date in checkpoint");
        p.train_end = *end;
        return p;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed checkpoint config: ") + e.what());
    }
}

void save_checkpoint(const TrainedPipeline& pipeline, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out << serialize_checkpoint(pipeline);
    if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

TrainedPipeline load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing checkpoint: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return deserialize_checkpoint(text.str());
}

}  // namespace rivercast
