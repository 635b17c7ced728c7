#pragma once

#include <string>

namespace rivercast {

/// Feature regimes of the forecasting experiments.
enum class Regime {
    climate_only,        // same-day climate, no discharge-derived input
    climate_plus_lags,   // climate plus discharge lags 1..5
    sequence_daily,      // recurrent model over a 5-day window, next-day target
    sequence_multistep,  // recurrent model over a 20-day window, 5-day direct output
};

enum class ModelKind { svr, gbt, mlp, lstm, gru };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

bool is_recurrent(ModelKind kind);
bool is_sequence(Regime regime);

/// Sequence regimes accept only recurrent models; the lag regimes accept all.
bool regime_allows(Regime regime, ModelKind kind);

}  // namespace rivercast
