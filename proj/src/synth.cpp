#include "rivercast/synth.hpp"

#include "rivercast/error.hpp"
#include "rivercast/metrics.hpp"
#include "rivercast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rivercast {

namespace {

constexpr int kOracleSeeds = 10;

double day_of_year(Date date) {
    const std::chrono::year_month_day ymd{date};
    const Date jan1{ymd.year() / 1 / 1};
    return static_cast<double>(days_between(jan1, date) + 1);
}

double seasonal(double doy, double phase) {
    return std::sin(2.0 * std::numbers::pi * (doy - phase) / 365.25);
}

/// Noise-free reservoir step from `prev` with yesterday's precipitation and today's melt.
double reservoir_step(const BasinParams& p, double prev, double precip_prev, double melt) {
    return p.base_flow + p.ar_coeff * (prev - p.base_flow) + p.precip_gain * precip_prev +
           p.melt_gain * melt;
}

}  // namespace

void BasinParams::validate() const {
    if (n_days < 30) throw ConfigError("n_days must be >= 30");
    if (!(ar_coeff > 0.0 && ar_coeff < 1.0)) throw ConfigError("ar_coeff must lie in (0, 1)");
    if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale must be >= 0");
    if (!(base_flow > 0.0)) throw ConfigError("base_flow must be > 0");
    if (!(initial_flow > 0.0)) throw ConfigError("initial_flow must be > 0");
    if (!(precip_gain >= 0.0) || !(melt_gain >= 0.0)) throw ConfigError("gains must be >= 0");
    if (!(temp_noise >= 0.0)) throw ConfigError("temp_noise must be >= 0");
    if (!(wet_probability >= 0.0 && wet_probability <= 1.0)) {
        throw ConfigError("wet_probability must lie in [0, 1]");
    }
    for (double v : {melt_threshold, temp_mean, temp_amplitude, temp_phase_day, precip_mean,
                     precip_amplitude, precip_phase_day}) {
        if (!std::isfinite(v)) throw ConfigError("basin parameters must be finite");
    }
}

BasinTrace generate_basin_trace(const BasinParams& p) {
    p.validate();
    Rng temp_rng = Rng::stream(p.seed, "synth.temperature");
    Rng range_rng = Rng::stream(p.seed, "synth.temperature_range");
    Rng wet_rng = Rng::stream(p.seed, "synth.wet_day");
    Rng amount_rng = Rng::stream(p.seed, "synth.precip_amount");
    Rng rh_rng = Rng::stream(p.seed, "synth.humidity");
    Rng flow_rng = Rng::stream(p.seed, "synth.discharge");

    const auto n = static_cast<std::size_t>(p.n_days);
    BasinTrace trace;
    auto& s = trace.series;
    s.columns = {"precip_mm", "tmin_c", "tmax_c", "rh_pct", std::string(kDischargeColumn)};
    s.values.resize(static_cast<Eigen::Index>(n), 5);
    s.dates.reserve(n);
    trace.melt.resize(n);
    trace.conditional_mean.resize(n);

    const double floor = 0.2 * p.base_flow;
    double prev_q = p.initial_flow;
    double prev_precip = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const Date date = add_days(p.start, static_cast<int>(t));
        const double doy = day_of_year(date);
        const double temp = p.temp_mean + p.temp_amplitude * seasonal(doy, p.temp_phase_day) +
                            p.temp_noise * temp_rng.normal();
        const double range = 8.0 + 4.0 * range_rng.uniform();
        const double intensity =
            std::max(0.5, p.precip_mean + p.precip_amplitude * seasonal(doy, p.precip_phase_day));
        const bool wet = wet_rng.uniform() < p.wet_probability;
        // Exponential amounts give the skewed, gamma(1)-shaped daily totals.
        const double amount = intensity * amount_rng.exponential() * 1.2;
        const double precip = wet ? amount : 0.0;
        const double rh = std::clamp(55.0 + (precip > 0.0 ? 20.0 : 0.0) -
                                         10.0 * seasonal(doy, p.temp_phase_day) + 6.0 * rh_rng.normal(),
                                     5.0, 100.0);
        const double melt = std::max(0.0, temp - p.melt_threshold);

        double q = p.initial_flow;
        double mean = p.initial_flow;
        const double shock = flow_rng.normal();
        if (t > 0) {
            mean = reservoir_step(p, prev_q, prev_precip, melt);
            q = std::max(floor, mean + p.noise_scale * std::sqrt(prev_q / p.base_flow) * shock);
        }

        const auto r = static_cast<Eigen::Index>(t);
        s.dates.push_back(date);
        s.values(r, 0) = precip;
        s.values(r, 1) = temp - range / 2.0;
        s.values(r, 2) = temp + range / 2.0;
        s.values(r, 3) = rh;
        s.values(r, 4) = q;
        trace.melt[t] = melt;
        trace.conditional_mean[t] = mean;
        prev_q = q;
        prev_precip = precip;
    }
    return trace;
}

AlignedSeries generate_basin(const BasinParams& params) { return generate_basin_trace(params).series; }

double theoretical_best_r2(const BasinParams& params, Regime regime, int step) {
    params.validate();
    if (step < 1) throw ConfigError("step must be >= 1");
    if (regime != Regime::sequence_multistep) step = 1;
    double total = 0.0;
    for (int k = 0; k < kOracleSeeds; ++k) {
        BasinParams p = params;
        p.seed = mix_seed(params.seed, static_cast<std::uint64_t>(k));
        const BasinTrace trace = generate_basin_trace(p);
        const auto n = trace.series.rows();
        const auto q_col = static_cast<Eigen::Index>(trace.series.discharge_index());
        const auto q = [&](std::size_t t) { return trace.series.values(static_cast<Eigen::Index>(t), q_col); };
        const auto precip = [&](std::size_t t) { return trace.series.values(static_cast<Eigen::Index>(t), 0); };
        const auto first_test = static_cast<std::size_t>(
            std::floor((1.0 - kOracleTestFraction) * static_cast<double>(n)));

        std::vector<double> actual, predicted;
        if (regime == Regime::climate_only) {
            double m = p.initial_flow;
            for (std::size_t t = 1; t < n; ++t) {
                m = reservoir_step(p, m, precip(t - 1), trace.melt[t]);
                if (t >= first_test) {
                    actual.push_back(q(t));
                    predicted.push_back(m);
                }
            }
        } else {
            const auto h = static_cast<std::size_t>(step);
            for (std::size_t t = std::max<std::size_t>(first_test, h); t < n; ++t) {
                // Flow known up to day t - h; climate known throughout.
                double m = q(t - h);
                for (std::size_t d = t - h + 1; d <= t; ++d) {
                    m = reservoir_step(p, m, precip(d - 1), trace.melt[d]);
                }
                actual.push_back(q(t));
                predicted.push_back(m);
            }
        }
        total += r2(actual, predicted).value_or(0.0);
    }
    return total / kOracleSeeds;
}

void write_basin_csvs(const AlignedSeries& series, const std::filesystem::path& climate_path,
                      const std::filesystem::path& discharge_path) {
    const ClimateSchema schema;
    const auto cols = schema.variable_columns();
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(series.column_index(c));
    const auto q_col = static_cast<Eigen::Index>(series.discharge_index());
    std::vector<ClimateRecord> climate;
    std::vector<DischargeRecord> discharge;
    for (std::size_t t = 0; t < series.rows(); ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        const auto at = [&](std::size_t k) { return series.values(r, static_cast<Eigen::Index>(idx[k])); };
        climate.push_back({series.dates[t], at(0), at(1), at(2), at(3), {}});
        discharge.push_back({series.dates[t], series.values(r, q_col)});
    }
    write_climate_csv(climate, schema, climate_path);
    write_discharge_csv(discharge, discharge_path);
}

}  // namespace rivercast
