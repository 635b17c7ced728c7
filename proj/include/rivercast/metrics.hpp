#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace rivercast {

/// Error statistics in the units of the inputs (m^3/s when fed raw discharge).
struct MetricsReport {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;  // nullopt when the observations are constant
    std::size_t n = 0;
};

double mae(std::span<const double> actual, std::span<const double> predicted);
double mse(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

/// 1 - SS_res / SS_tot. Undefined (nullopt) for fewer than two points or constant `actual`.
std::optional<double> r2(std::span<const double> actual, std::span<const double> predicted);

MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted);

}  // namespace rivercast
