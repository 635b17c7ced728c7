#include "rivercast/regime.hpp"

#include "rivercast/error.hpp"

#include <array>
#include <utility>

namespace rivercast {

namespace {

constexpr std::array<std::pair<Regime, const char*>, 4> kRegimes{{
    {Regime::climate_only, "climate_only"},
    {Regime::climate_plus_lags, "climate_plus_lags"},
    {Regime::sequence_daily, "sequence_daily"},
    {Regime::sequence_multistep, "sequence_multistep"},
}};

constexpr std::array<std::pair<ModelKind, const char*>, 5> kModels{{
    {ModelKind::svr, "svr"},
    {ModelKind::gbt, "gbt"},
    {ModelKind::mlp, "mlp"},
    {ModelKind::lstm, "lstm"},
    {ModelKind::gru, "gru"},
}};

}  // namespace

std::string to_string(Regime regime) {
    for (const auto& [r, name] : kRegimes) {
        if (r == regime) return name;
    }
    return "unknown";
}

Regime regime_from_string(const std::string& name) {
    for (const auto& [r, n] : kRegimes) {
        if (name == n) return r;
    }
    throw ConfigError("unknown regime: " + name);
}

std::string to_string(ModelKind kind) {
    for (const auto& [k, name] : kModels) {
        if (k == kind) return name;
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (const auto& [k, n] : kModels) {
        if (name == n) return k;
    }
    throw ConfigError("unknown model: " + name);
}

bool is_recurrent(ModelKind kind) { return kind == ModelKind::lstm || kind == ModelKind::gru; }

bool is_sequence(Regime regime) {
    return regime == Regime::sequence_daily || regime == Regime::sequence_multistep;
}

bool regime_allows(Regime regime, ModelKind kind) { return !is_sequence(regime) || is_recurrent(kind); }

}  // namespace rivercast
