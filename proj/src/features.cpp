#include "rivercast/features.hpp"

#include "rivercast/error.hpp"
#include "rivercast/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rivercast {

namespace {

std::size_t row_of(const AlignedSeries& series, Date date, std::vector<Date>* missing, bool& ok) {
    const std::size_t r = series.find_row(date);
    if (r == series.rows()) {
        ok = false;
        if (missing) missing->push_back(date);
    }
    return r;
}

std::vector<std::size_t> non_discharge_columns(const AlignedSeries& series) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < series.columns.size(); ++c) {
        if (series.columns[c] != kDischargeColumn) cols.push_back(c);
    }
    return cols;
}

SupervisedMatrix assemble(std::vector<Eigen::VectorXd> rows, std::vector<Eigen::VectorXd> targets,
                          std::vector<Date> dates, std::vector<std::string> names, std::size_t steps,
                          std::size_t channels) {
    if (rows.empty()) throw DataError("no complete samples could be built from the series");
    SupervisedMatrix m;
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.x.resize(n, rows.front().size());
    m.y.resize(n, targets.front().size());
    for (Eigen::Index i = 0; i < n; ++i) {
        m.x.row(i) = rows[static_cast<std::size_t>(i)].transpose();
        m.y.row(i) = targets[static_cast<std::size_t>(i)].transpose();
    }
    m.feature_names = std::move(names);
    m.target_dates = std::move(dates);
    m.steps = steps;
    m.channels = channels;
    return m;
}

}  // namespace

const ColumnScale& ScalerParams::at(std::string_view name) const {
    for (const auto& c : columns) {
        if (c.name == name) return c;
    }
    throw DataError("scaler has no column " + std::string(name));
}

bool ScalerParams::contains(std::string_view name) const {
    return std::any_of(columns.begin(), columns.end(), [&](const auto& c) { return c.name == name; });
}

ScalerParams fit_robust_scaler(const AlignedSeries& series, const std::vector<std::string>& columns,
                               ScaleCenter center) {
    ScalerParams params;
    params.center = center;
    for (const auto& name : columns) {
        const auto col = static_cast<Eigen::Index>(series.column_index(name));
        std::vector<double> values;
        values.reserve(series.rows());
        for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
            const double v = series.values(r, col);
            if (std::isfinite(v)) values.push_back(v);
        }
        if (values.empty()) throw DataError("cannot fit scaler on empty column " + name);
        std::sort(values.begin(), values.end());
        ColumnScale cs;
        cs.name = name;
        cs.q1 = quantile_sorted(values, 0.25);
        cs.q3 = quantile_sorted(values, 0.75);
        cs.iqr = cs.q3 - cs.q1;
        cs.fallback = cs.iqr < kIqrEpsilon;
        cs.center = center == ScaleCenter::q1 ? cs.q1 : quantile_sorted(values, 0.5);
        params.columns.push_back(std::move(cs));
    }
    return params;
}

double transform(double value, const ColumnScale& column) {
    if (!std::isfinite(value)) throw DataError("cannot scale non-finite value in " + column.name);
    return (value - column.center) / column.scale();
}

double inverse_transform(double scaled, const ColumnScale& column) {
    if (!std::isfinite(scaled)) throw DataError("cannot unscale non-finite value in " + column.name);
    return scaled * column.scale() + column.center;
}

AlignedSeries scale_series(const AlignedSeries& series, const ScalerParams& params) {
    AlignedSeries out = series;
    for (const auto& cs : params.columns) {
        if (!series.has_column(cs.name)) continue;
        const auto col = static_cast<Eigen::Index>(series.column_index(cs.name));
        for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
            out.values(r, col) = transform(out.values(r, col), cs);
        }
    }
    return out;
}

void LagSpec::validate() const {
    if (lags.empty()) throw ConfigError("lag spec for " + column + " has no lags");
    std::set<int> seen;
    for (int lag : lags) {
        if (lag <= 0) throw ConfigError("lags must be positive (column " + column + ")");
        if (!seen.insert(lag).second) throw ConfigError("duplicate lag in column " + column);
    }
}

void WindowSpec::validate() const {
    if (window < 1 || horizon < 1) throw ConfigError("window and horizon must be at least 1");
}

SupervisedMatrix SupervisedMatrix::subset(const std::vector<std::size_t>& indices) const {
    SupervisedMatrix out;
    out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(indices.size()), y.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(indices[i]));
        out.y.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(indices[i]));
        out.target_dates.push_back(target_dates[indices[i]]);
    }
    out.feature_names = feature_names;
    out.steps = steps;
    out.channels = channels;
    out.targets_scaled = targets_scaled;
    return out;
}

LagLayout lag_layout(const AlignedSeries& series, const std::vector<LagSpec>& lag_specs,
                     bool include_target_lags) {
    LagLayout layout;
    layout.same_day_columns = non_discharge_columns(series);
    for (auto c : layout.same_day_columns) layout.names.push_back(series.columns[c]);
    for (const auto& spec : lag_specs) {
        spec.validate();
        if (spec.column == kDischargeColumn && !include_target_lags) continue;
        const std::size_t col = series.column_index(spec.column);
        for (int lag : spec.lags) {
            layout.lagged.emplace_back(col, lag);
            layout.names.push_back(spec.column + "_lag" + std::to_string(lag));
            layout.max_lag = std::max(layout.max_lag, lag);
        }
    }
    return layout;
}

std::optional<Eigen::VectorXd> lag_row(const AlignedSeries& series, const LagLayout& layout,
                                       std::size_t row, std::vector<Date>* missing) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(layout.names.size()));
    Eigen::Index k = 0;
    const auto r = static_cast<Eigen::Index>(row);
    for (auto c : layout.same_day_columns) out(k++) = series.values(r, static_cast<Eigen::Index>(c));
    bool ok = true;
    for (const auto& [col, lag] : layout.lagged) {
        const std::size_t src = row_of(series, add_days(series.dates[row], -lag), missing, ok);
        out(k++) = ok ? series.values(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(col))
                      : 0.0;
    }
    if (!ok) return std::nullopt;
    return out;
}

SupervisedMatrix make_lag_features(const AlignedSeries& series, const std::vector<LagSpec>& lag_specs,
                                   bool include_target_lags) {
    const LagLayout layout = lag_layout(series, lag_specs, include_target_lags);
    if (static_cast<std::size_t>(layout.max_lag) >= series.rows()) {
        throw DataError("lag " + std::to_string(layout.max_lag) + " is not shorter than the series (" +
                        std::to_string(series.rows()) + " rows)");
    }
    const auto q = static_cast<Eigen::Index>(series.discharge_index());
    std::vector<Eigen::VectorXd> rows, targets;
    std::vector<Date> dates;
    for (std::size_t t = 0; t < series.rows(); ++t) {
        auto row = lag_row(series, layout, t);
        if (!row) continue;
        rows.push_back(std::move(*row));
        targets.push_back(Eigen::VectorXd::Constant(1, series.values(static_cast<Eigen::Index>(t), q)));
        dates.push_back(series.dates[t]);
    }
    const std::size_t width = layout.names.size();
    return assemble(std::move(rows), std::move(targets), std::move(dates), layout.names, 1, width);
}

std::optional<Eigen::VectorXd> window_row(const AlignedSeries& series,
                                          const std::vector<std::size_t>& feature_columns,
                                          int window, Date first_target, std::vector<Date>* missing) {
    const auto channels = static_cast<Eigen::Index>(feature_columns.size());
    Eigen::VectorXd out(window * channels);
    bool ok = true;
    for (int s = 0; s < window; ++s) {
        const std::size_t r = row_of(series, add_days(first_target, s - window), missing, ok);
        if (!ok) continue;
        for (Eigen::Index c = 0; c < channels; ++c) {
            out(s * channels + c) =
                series.values(static_cast<Eigen::Index>(r),
                              static_cast<Eigen::Index>(feature_columns[static_cast<std::size_t>(c)]));
        }
    }
    if (!ok) return std::nullopt;
    return out;
}

SupervisedMatrix make_windows(const AlignedSeries& series, const WindowSpec& spec,
                              const std::vector<std::string>& feature_columns) {
    spec.validate();
    const std::size_t span = static_cast<std::size_t>(spec.window + spec.horizon);
    if (series.rows() < span) {
        throw DataError("series of " + std::to_string(series.rows()) +
                        " rows is shorter than window + horizon (" + std::to_string(span) + ")");
    }
    if (feature_columns.empty()) throw ConfigError("window needs at least one feature column");
    std::vector<std::size_t> cols;
    for (const auto& name : feature_columns) cols.push_back(series.column_index(name));
    std::vector<std::string> names;
    for (int s = 0; s < spec.window; ++s) {
        for (const auto& name : feature_columns) {
            names.push_back(name + "_t-" + std::to_string(spec.window - s));
        }
    }

    const auto q = static_cast<Eigen::Index>(series.discharge_index());
    std::vector<Eigen::VectorXd> rows, targets;
    std::vector<Date> dates;
    for (std::size_t i = 0; i + span <= series.rows(); ++i) {
        if (days_between(series.dates[i], series.dates[i + span - 1]) !=
            static_cast<long>(span) - 1) {
            continue;
        }
        const std::size_t first_target = i + static_cast<std::size_t>(spec.window);
        rows.push_back(*window_row(series, cols, spec.window, series.dates[first_target]));
        Eigen::VectorXd y(spec.horizon);
        for (int h = 0; h < spec.horizon; ++h) {
            y(h) = series.values(static_cast<Eigen::Index>(first_target) + h, q);
        }
        targets.push_back(std::move(y));
        dates.push_back(series.dates[first_target]);
    }
    return assemble(std::move(rows), std::move(targets), std::move(dates), std::move(names),
                    static_cast<std::size_t>(spec.window), cols.size());
}

std::optional<Eigen::VectorXd> lag_sequence_row(const AlignedSeries& series, int length,
                                                bool include_target_lags, std::size_t target_row,
                                                std::vector<Date>* missing) {
    const auto climate = non_discharge_columns(series);
    const auto q = static_cast<Eigen::Index>(series.discharge_index());
    const auto channels = static_cast<Eigen::Index>(climate.size() + (include_target_lags ? 1 : 0));
    Eigen::VectorXd out(length * channels);
    const Date target = series.dates[target_row];
    bool ok = true;
    for (int s = 0; s < length; ++s) {
        const Date day = add_days(target, s - length + 1);
        const std::size_t r = row_of(series, day, missing, ok);
        std::size_t prev = series.rows();
        if (include_target_lags) prev = row_of(series, add_days(day, -1), missing, ok);
        if (!ok) continue;
        Eigen::Index k = s * channels;
        for (auto c : climate) {
            out(k++) = series.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
        if (include_target_lags) out(k) = series.values(static_cast<Eigen::Index>(prev), q);
    }
    if (!ok) return std::nullopt;
    return out;
}

SupervisedMatrix make_lag_sequences(const AlignedSeries& series, int length,
                                    bool include_target_lags) {
    if (length < 1) throw ConfigError("sequence length must be at least 1");
    const std::size_t needed = static_cast<std::size_t>(length) + (include_target_lags ? 1 : 0);
    if (series.rows() < needed) {
        throw DataError("series of " + std::to_string(series.rows()) +
                        " rows is too short for sequences of length " + std::to_string(length));
    }
    std::vector<std::string> channel_names;
    for (auto c : non_discharge_columns(series)) channel_names.push_back(series.columns[c]);
    if (include_target_lags) channel_names.push_back(std::string(kDischargeColumn) + "_lag1");
    std::vector<std::string> names;
    for (int s = 0; s < length; ++s) {
        for (const auto& ch : channel_names) names.push_back(ch + "_t-" + std::to_string(length - 1 - s));
    }

    const auto q = static_cast<Eigen::Index>(series.discharge_index());
    std::vector<Eigen::VectorXd> rows, targets;
    std::vector<Date> dates;
    for (std::size_t t = 0; t < series.rows(); ++t) {
        auto row = lag_sequence_row(series, length, include_target_lags, t);
        if (!row) continue;
        rows.push_back(std::move(*row));
        targets.push_back(Eigen::VectorXd::Constant(1, series.values(static_cast<Eigen::Index>(t), q)));
        dates.push_back(series.dates[t]);
    }
    return assemble(std::move(rows), std::move(targets), std::move(dates), std::move(names),
                    static_cast<std::size_t>(length), channel_names.size());
}

}  // namespace rivercast
