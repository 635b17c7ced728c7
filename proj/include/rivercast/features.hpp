#pragma once

#include "rivercast/dataset.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace rivercast {

inline constexpr double kIqrEpsilon = 1e-12;

enum class ScaleCenter { q1, median };

/// Robust-scaling statistics for one column: (x - center) / scale, where
/// center is Q1 (or the median) and scale is the IQR, or 1 when the IQR is degenerate.
struct ColumnScale {
    std::string name;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double center = 0.0;
    bool fallback = false;

    double scale() const { return fallback ? 1.0 : iqr; }
};

struct ScalerParams {
    ScaleCenter center = ScaleCenter::q1;
    std::vector<ColumnScale> columns;

    const ColumnScale& at(std::string_view name) const;
    bool contains(std::string_view name) const;
};

/// Fits quartiles per column on the given rows. Callers pass training rows only.
ScalerParams fit_robust_scaler(const AlignedSeries& series, const std::vector<std::string>& columns,
                               ScaleCenter center = ScaleCenter::q1);

double transform(double value, const ColumnScale& column);
double inverse_transform(double scaled, const ColumnScale& column);

/// Copy of `series` with every column present in `params` scaled.
AlignedSeries scale_series(const AlignedSeries& series, const ScalerParams& params);

/// Past day offsets of one column used as features.
struct LagSpec {
    std::string column;
    std::vector<int> lags;

    void validate() const;
};

struct WindowSpec {
    int window = 5;
    int horizon = 1;

    void validate() const;
};

/// Model-ready samples. Each row of `x` holds `steps` consecutive blocks of
/// `channels` values (steps == 1 for flat lag features); `y` has one column per
/// horizon step.
struct SupervisedMatrix {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    std::vector<std::string> feature_names;
    std::vector<Date> target_dates;
    std::size_t steps = 1;
    std::size_t channels = 0;
    bool targets_scaled = false;

    std::size_t samples() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t horizon() const { return static_cast<std::size_t>(y.cols()); }

    /// Rows `indices` of this matrix, same layout.
    SupervisedMatrix subset(const std::vector<std::size_t>& indices) const;
};

/// Recipe for one flat feature row: same-day values of every non-discharge
/// column, then each lag spec's columns at date - lag.
struct LagLayout {
    std::vector<std::size_t> same_day_columns;
    std::vector<std::pair<std::size_t, int>> lagged;  // (column, lag days)
    std::vector<std::string> names;
    int max_lag = 0;
};

LagLayout lag_layout(const AlignedSeries& series, const std::vector<LagSpec>& lag_specs,
                     bool include_target_lags);

/// Flat feature row for target `row`; nullopt when a lagged date is absent.
/// Missing dates are appended to `missing` when it is non-null.
std::optional<Eigen::VectorXd> lag_row(const AlignedSeries& series, const LagLayout& layout,
                                       std::size_t row, std::vector<Date>* missing = nullptr);

/// One row per date whose lagged dates all exist; target = discharge that day.
/// With include_target_lags false, discharge lag specs are ignored so no
/// discharge-derived feature appears.
SupervisedMatrix make_lag_features(const AlignedSeries& series, const std::vector<LagSpec>& lag_specs,
                                   bool include_target_lags);

/// Sample i uses rows i..i+window-1 of `feature_columns` as inputs and discharge at
/// rows i+window..i+window+horizon-1 as targets. Windows that straddle a calendar
/// gap are skipped; on gap-free data the count is N - window - horizon + 1.
SupervisedMatrix make_windows(const AlignedSeries& series, const WindowSpec& spec,
                              const std::vector<std::string>& feature_columns);

/// Input block of the `window` days preceding `first_target`, or nullopt (with the
/// missing dates) when any of those days is absent.
std::optional<Eigen::VectorXd> window_row(const AlignedSeries& series,
                                          const std::vector<std::size_t>& feature_columns,
                                          int window, Date first_target,
                                          std::vector<Date>* missing = nullptr);

/// Recurrent form of the lag regimes: a `length`-day sequence ending on the target
/// day; each step carries that day's non-discharge columns and, when
/// include_target_lags, the previous day's discharge.
SupervisedMatrix make_lag_sequences(const AlignedSeries& series, int length,
                                    bool include_target_lags);

std::optional<Eigen::VectorXd> lag_sequence_row(const AlignedSeries& series, int length,
                                                bool include_target_lags, std::size_t target_row,
                                                std::vector<Date>* missing = nullptr);

}  // namespace rivercast
