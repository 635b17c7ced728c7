#pragma once

#include "rivercast/dataset.hpp"
#include "rivercast/regime.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rivercast {

/// Parameters of the synthetic linear-reservoir basin.
///
/// Climate, per day d with day-of-year doy (each variable drawn from its own
/// named random stream):
///   temp     = temp_mean + temp_amplitude * sin(2 pi (doy - temp_phase_day) / 365.25) + N(0, temp_noise)
///   range    = 8 + 4 U(0,1);  tmin/tmax = temp -/+ range / 2
///   precip   = wet ? intensity * Exp(1) * 1.2 : 0, wet with probability wet_probability,
///              intensity = max(0.5, precip_mean + precip_amplitude * sin(2 pi (doy - precip_phase_day) / 365.25))
///   rh       = clamp(55 + 20 [precip > 0] - 10 sin(2 pi (doy - temp_phase_day) / 365.25) + N(0, 6), 5, 100)
///   melt     = max(0, temp - melt_threshold)
/// Discharge:
///   Q_t = base + a (Q_{t-1} - base) + precip_gain P_{t-1} + melt_gain melt_t
///         + noise_scale sqrt(Q_{t-1} / base) N(0, 1),
/// floored at 0.2 base so flows stay positive; Q_0 = initial_flow.
struct BasinParams {
    std::uint64_t seed = 42;
    int n_days = 4000;
    Date start = Date{std::chrono::year{2005} / 1 / 1};
    double ar_coeff = 0.95;
    double precip_gain = 10.0;
    double melt_gain = 3.0;
    double melt_threshold = 6.0;
    double noise_scale = 20.0;
    double base_flow = 200.0;
    double initial_flow = 600.0;
    double temp_mean = 14.0;
    double temp_amplitude = 13.0;
    double temp_phase_day = 105.0;
    double temp_noise = 3.0;
    double precip_mean = 4.0;
    double precip_amplitude = 4.0;
    double precip_phase_day = 40.0;
    double wet_probability = 0.3;

    void validate() const;
};

/// Generated series plus the hidden quantities an oracle needs.
struct BasinTrace {
    AlignedSeries series;
    std::vector<double> melt;
    /// E[Q_t | Q_{t-1}, climate]: the one-step conditional mean.
    std::vector<double> conditional_mean;
};

BasinTrace generate_basin_trace(const BasinParams& params);

/// Columns precip_mm, tmin_c, tmax_c, rh_pct, discharge_cms; one row per day.
AlignedSeries generate_basin(const BasinParams& params);

/// Held-out fraction used by theoretical_best_r2.
inline constexpr double kOracleTestFraction = 0.2;

/// Ceiling R^2 on the last 20% of the days, averaged over 10 seeds derived from
/// params.seed. The oracle predictor per regime:
///   climate_plus_lags, sequence_daily: the one-step conditional mean;
///   climate_only: the noise-free reservoir driven by the observed climate, started
///     from initial_flow (flow history unobservable);
///   sequence_multistep step h: the conditional mean of Q_{t+h-1} given Q_{t-1}
///     and the realized climate, i.e. the noise-free recursion run h steps.
double theoretical_best_r2(const BasinParams& params, Regime regime, int step = 1);

/// Writes the climate columns and discharge as the two ingest CSV schemas.
void write_basin_csvs(const AlignedSeries& series, const std::filesystem::path& climate_path,
                      const std::filesystem::path& discharge_path);

}  // namespace rivercast
