#include "rivercast/metrics.hpp"

#include "rivercast/error.hpp"

#include <cmath>
#include <string>

namespace rivercast {

namespace {

void check(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw DimensionError("metric inputs differ in length: " + std::to_string(actual.size()) +
                             " vs " + std::to_string(predicted.size()));
    }
    if (actual.empty()) throw DataError("metric inputs are empty");
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
    check(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
    return sum / static_cast<double>(actual.size());
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
    check(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        sum += e * e;
    }
    return sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    return std::sqrt(mse(actual, predicted));
}

std::optional<double> r2(std::span<const double> actual, std::span<const double> predicted) {
    check(actual, predicted);
    if (actual.size() < 2) return std::nullopt;
    double sum = 0.0;
    for (double v : actual) sum += v;
    const double mean = sum / static_cast<double>(actual.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        const double d = actual[i] - mean;
        ss_res += e * e;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) return std::nullopt;
    return 1.0 - ss_res / ss_tot;
}

MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
    MetricsReport m;
    m.mae = mae(actual, predicted);
    m.mse = mse(actual, predicted);
    m.rmse = std::sqrt(m.mse);
    m.r2 = r2(actual, predicted);
    m.n = actual.size();
    return m;
}

}  // namespace rivercast
