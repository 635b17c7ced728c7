#pragma once

#include "rivercast/date.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rivercast {

inline constexpr std::string_view kDischargeColumn = "discharge_cms";

/// Column names of a climate CSV. The four core variables are required;
/// `extras` lists further numeric columns (e.g. absolute humidity) to carry along.
struct ClimateSchema {
    std::string date = "date";
    std::string precip = "precip_mm";
    std::string t_min = "tmin_c";
    std::string t_max = "tmax_c";
    std::string rel_humidity = "rh_pct";
    std::vector<std::string> extras;

    /// Output column order: precip, t_min, t_max, rel_humidity, extras...
    std::vector<std::string> variable_columns() const;
};

struct ClimateRecord {
    Date date;
    double precip = 0.0;        // mm/day
    double t_min = 0.0;         // degrees C
    double t_max = 0.0;         // degrees C
    double rel_humidity = 0.0;  // percent
    std::vector<double> extras;
};

struct DischargeRecord {
    Date date;
    double discharge = 0.0;  // m^3/s
};

struct RowIssue {
    std::size_t line = 0;  // 1-based line number in the source file
    std::string reason;
    std::string text;
};

struct DateRange {
    Date first;
    Date last;
};

struct OutlierFlag {
    Date date;
    std::string column;
    double value = 0.0;
};

/// Everything the cleaning pass did to one source file. Outliers are reported,
/// never removed.
struct QualityReport {
    std::string source;
    std::size_t total_rows = 0;
    std::size_t accepted_rows = 0;
    std::vector<RowIssue> rejected;
    std::vector<RowIssue> duplicates;
    std::vector<DateRange> gaps;
    std::vector<OutlierFlag> outliers;

    std::size_t duplicates_removed() const { return duplicates.size(); }
    bool clean() const { return rejected.empty() && duplicates.empty(); }

    /// Human-readable summary.
    std::string to_text() const;
    /// Line-delimited key=value form for machines.
    std::string to_key_values() const;
};

template <typename Record>
struct Parsed {
    std::vector<Record> records;
    QualityReport report;
};

/// Date-indexed table of climate drivers plus discharge (always the last column).
/// Rows are strictly increasing by date and every cell is finite.
struct AlignedSeries {
    std::vector<Date> dates;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows x columns
    std::vector<Date> gap_report;

    std::size_t rows() const { return dates.size(); }
    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;
    std::size_t discharge_index() const { return column_index(kDischargeColumn); }

    /// Row of `date`, or rows() when absent.
    std::size_t find_row(Date date) const;

    /// Rows [begin, end).
    AlignedSeries slice(std::size_t begin, std::size_t end) const;

    /// Throws DataError when an invariant does not hold.
    void validate() const;
};

Parsed<ClimateRecord> parse_climate_csv(const std::filesystem::path& path,
                                        const ClimateSchema& schema = {});

Parsed<DischargeRecord> parse_discharge_csv(const std::filesystem::path& path);

/// Averages same-date values across station files; each date is averaged over
/// the stations that report it.
std::vector<ClimateRecord> average_stations(
    const std::vector<std::vector<ClimateRecord>>& stations);

/// Inner join on date. Dates present in only one input are listed in gap_report.
AlignedSeries align_merge(const std::vector<ClimateRecord>& climate,
                          const std::vector<DischargeRecord>& discharge,
                          const ClimateSchema& schema = {});

/// First floor(train_fraction * N) rows train, the rest test. No shuffling.
std::pair<AlignedSeries, AlignedSeries> temporal_split(const AlignedSeries& series,
                                                       double train_fraction);

/// Concatenates two series whose dates do not overlap (a precedes b).
AlignedSeries concat(const AlignedSeries& a, const AlignedSeries& b);

void write_aligned_csv(const AlignedSeries& series, const std::filesystem::path& path);
AlignedSeries read_aligned_csv(const std::filesystem::path& path);

void write_climate_csv(const std::vector<ClimateRecord>& records, const ClimateSchema& schema,
                       const std::filesystem::path& path);
void write_discharge_csv(const std::vector<DischargeRecord>& records,
                         const std::filesystem::path& path);

}  // namespace rivercast
