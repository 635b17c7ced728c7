#include "rivercast/dataset.hpp"

#include "rivercast/error.hpp"
#include "rivercast/quantile.hpp"
#include "rivercast/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace rivercast {

namespace fs = std::filesystem;

namespace {

struct CsvFile {
    std::vector<std::string> header;
    // (1-based line number, raw text)
    std::vector<std::pair<std::size_t, std::string>> lines;
};

CsvFile read_csv_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing file: " + path.string());
    CsvFile file;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        if (!have_header) {
            for (auto cell : split_csv_line(line)) file.header.emplace_back(cell);
            have_header = true;
            continue;
        }
        file.lines.emplace_back(number, line);
    }
    return file;
}

std::size_t require_column(const CsvFile& file, const std::string& name, const fs::path& path) {
    const auto it = std::find(file.header.begin(), file.header.end(), name);
    if (it == file.header.end()) {
        throw DataError("schema column absent from header: " + name + " in " + path.string());
    }
    return static_cast<std::size_t>(it - file.header.begin());
}

/// Parses a numeric cell, filling `reason` on failure.
std::optional<double> parse_cell(std::string_view cell, std::string& reason) {
    cell = trim(cell);
    if (cell.empty()) {
        reason = "missing value";
        return std::nullopt;
    }
    const auto value = parse_double(cell);
    if (!value) {
        const bool has_digit =
            std::any_of(cell.begin(), cell.end(), [](char c) { return c >= '0' && c <= '9'; });
        reason = has_digit ? "special character" : "non-numeric value";
        return std::nullopt;
    }
    if (!std::isfinite(*value)) {
        reason = "non-finite value";
        return std::nullopt;
    }
    return value;
}

template <typename Record>
struct Accepted {
    Record record;
    std::size_t line;
    std::string text;
};

/// Sorts by date, keeps the first occurrence of each date (file order) and logs the rest.
template <typename Record>
std::vector<Record> sort_and_dedupe(std::vector<Accepted<Record>> accepted, QualityReport& report) {
    std::stable_sort(accepted.begin(), accepted.end(),
                     [](const auto& a, const auto& b) { return a.record.date < b.record.date; });
    std::vector<Record> out;
    out.reserve(accepted.size());
    for (auto& item : accepted) {
        if (!out.empty() && out.back().date == item.record.date) {
            report.duplicates.push_back(
                {item.line, "duplicate date " + format_iso_date(item.record.date), item.text});
            continue;
        }
        out.push_back(std::move(item.record));
    }
    report.accepted_rows = out.size();
    return out;
}

template <typename Record>
std::vector<DateRange> find_gaps(const std::vector<Record>& records) {
    std::vector<DateRange> gaps;
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (days_between(records[i - 1].date, records[i].date) > 1) {
            gaps.push_back({add_days(records[i - 1].date, 1), add_days(records[i].date, -1)});
        }
    }
    return gaps;
}

/// Flags values outside [Q1 - 3 IQR, Q3 + 3 IQR].
template <typename Record, typename Getter>
void flag_outliers(const std::vector<Record>& records, const std::string& column, Getter get,
                   QualityReport& report) {
    if (records.size() < 4) return;
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(get(r));
    std::sort(values.begin(), values.end());
    const double q1 = quantile_sorted(values, 0.25);
    const double q3 = quantile_sorted(values, 0.75);
    const double iqr = q3 - q1;
    const double lo = q1 - 3.0 * iqr;
    const double hi = q3 + 3.0 * iqr;
    for (const auto& r : records) {
        const double v = get(r);
        if (v < lo || v > hi) report.outliers.push_back({r.date, column, v});
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

std::vector<std::string> ClimateSchema::variable_columns() const {
    std::vector<std::string> cols{precip, t_min, t_max, rel_humidity};
    cols.insert(cols.end(), extras.begin(), extras.end());
    return cols;
}

std::string QualityReport::to_text() const {
    std::ostringstream os;
    os << "Quality report for " << source << "\n";
    os << "  data rows:          " << total_rows << "\n";
    os << "  accepted:           " << accepted_rows << "\n";
    os << "  rejected:           " << rejected.size() << "\n";
    os << "  duplicates removed: " << duplicates.size() << "\n";
    os << "  date gaps:          " << gaps.size() << "\n";
    os << "  outliers flagged:   " << outliers.size() << "\n";
    for (const auto& r : rejected) {
        os << "  rejected line " << r.line << " (" << r.reason << "): " << r.text << "\n";
    }
    for (const auto& d : duplicates) {
        os << "  duplicate line " << d.line << " (" << d.reason << ")\n";
    }
    for (const auto& g : gaps) {
        os << "  gap " << format_iso_date(g.first) << " .. " << format_iso_date(g.last) << "\n";
    }
    for (const auto& o : outliers) {
        os << "  outlier " << format_iso_date(o.date) << " " << o.column << " = "
           << format_double(o.value) << "\n";
    }
    return os.str();
}

std::string QualityReport::to_key_values() const {
    std::ostringstream os;
    os << "source=" << source << "\n";
    os << "total_rows=" << total_rows << "\n";
    os << "accepted_rows=" << accepted_rows << "\n";
    os << "rejected_rows=" << rejected.size() << "\n";
    os << "duplicates_removed=" << duplicates.size() << "\n";
    os << "gap_count=" << gaps.size() << "\n";
    os << "outlier_count=" << outliers.size() << "\n";
    for (const auto& r : rejected) os << "rejected=" << r.line << "|" << r.reason << "\n";
    for (const auto& d : duplicates) os << "duplicate=" << d.line << "|" << d.reason << "\n";
    for (const auto& g : gaps) {
        os << "gap=" << format_iso_date(g.first) << "|" << format_iso_date(g.last) << "\n";
    }
    for (const auto& o : outliers) {
        os << "outlier=" << format_iso_date(o.date) << "|" << o.column << "|"
           << format_double(o.value) << "\n";
    }
    return os.str();
}

std::size_t AlignedSeries::column_index(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DataError("series has no column " + std::string(name));
    return static_cast<std::size_t>(it - columns.begin());
}

bool AlignedSeries::has_column(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t AlignedSeries::find_row(Date date) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), date);
    if (it == dates.end() || *it != date) return rows();
    return static_cast<std::size_t>(it - dates.begin());
}

AlignedSeries AlignedSeries::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) throw DataError("slice out of range");
    AlignedSeries out;
    out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(begin),
                     dates.begin() + static_cast<std::ptrdiff_t>(end));
    out.columns = columns;
    out.values = values.middleRows(static_cast<Eigen::Index>(begin),
                                   static_cast<Eigen::Index>(end - begin));
    return out;
}

void AlignedSeries::validate() const {
    if (static_cast<std::size_t>(values.rows()) != dates.size() ||
        static_cast<std::size_t>(values.cols()) != columns.size()) {
        throw DataError("series shape does not match dates/columns");
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw DataError("series dates not strictly increasing at " + format_iso_date(dates[i]));
        }
    }
    if (!values.allFinite()) throw DataError("series contains non-finite cells");
}

Parsed<ClimateRecord> parse_climate_csv(const fs::path& path, const ClimateSchema& schema) {
    const CsvFile file = read_csv_file(path);
    const std::size_t date_col = require_column(file, schema.date, path);
    std::vector<std::size_t> var_cols;
    for (const auto& name : schema.variable_columns()) {
        var_cols.push_back(require_column(file, name, path));
    }

    Parsed<ClimateRecord> result;
    result.report.source = path.string();
    std::vector<Accepted<ClimateRecord>> accepted;
    for (const auto& [number, line] : file.lines) {
        ++result.report.total_rows;
        const auto cells = split_csv_line(line);
        auto reject = [&](std::string reason) {
            result.report.rejected.push_back({number, std::move(reason), line});
        };
        if (cells.size() != file.header.size()) {
            reject("column count");
            continue;
        }
        const auto date = parse_iso_date(cells[date_col]);
        if (!date) {
            reject("bad date");
            continue;
        }
        std::vector<double> values;
        std::string reason;
        for (auto col : var_cols) {
            const auto v = parse_cell(cells[col], reason);
            if (!v) break;
            values.push_back(*v);
        }
        if (values.size() != var_cols.size()) {
            reject(reason);
            continue;
        }
        ClimateRecord rec{*date, values[0], values[1], values[2], values[3],
                          std::vector<double>(values.begin() + 4, values.end())};
        if (rec.t_min > rec.t_max) {
            reject("temperature order");
            continue;
        }
        if (rec.precip < 0.0) {
            reject("negative precipitation");
            continue;
        }
        if (rec.rel_humidity < 0.0 || rec.rel_humidity > 100.0) {
            reject("humidity range");
            continue;
        }
        accepted.push_back({std::move(rec), number, line});
    }

    result.records = sort_and_dedupe(std::move(accepted), result.report);
    if (result.records.empty()) throw DataError("zero parseable rows in " + path.string());
    result.report.gaps = find_gaps(result.records);
    // Precipitation is zero-inflated and humidity is range-checked, so only
    // temperatures get outlier fences.
    flag_outliers(result.records, schema.t_min, [](const auto& r) { return r.t_min; },
                  result.report);
    flag_outliers(result.records, schema.t_max, [](const auto& r) { return r.t_max; },
                  result.report);
    return result;
}

Parsed<DischargeRecord> parse_discharge_csv(const fs::path& path) {
    const CsvFile file = read_csv_file(path);
    const std::size_t date_col = require_column(file, "date", path);
    const std::size_t q_col = require_column(file, std::string(kDischargeColumn), path);

    Parsed<DischargeRecord> result;
    result.report.source = path.string();
    std::vector<Accepted<DischargeRecord>> accepted;
    for (const auto& [number, line] : file.lines) {
        ++result.report.total_rows;
        const auto cells = split_csv_line(line);
        auto reject = [&](std::string reason) {
            result.report.rejected.push_back({number, std::move(reason), line});
        };
        if (cells.size() != file.header.size()) {
            reject("column count");
            continue;
        }
        const auto date = parse_iso_date(cells[date_col]);
        if (!date) {
            reject("bad date");
            continue;
        }
        std::string reason;
        const auto q = parse_cell(cells[q_col], reason);
        if (!q) {
            reject(reason);
            continue;
        }
        if (*q < 0.0) {
            reject("negative discharge");
            continue;
        }
        accepted.push_back({{*date, *q}, number, line});
    }

    result.records = sort_and_dedupe(std::move(accepted), result.report);
    if (result.records.empty()) throw DataError("zero parseable rows in " + path.string());
    result.report.gaps = find_gaps(result.records);
    flag_outliers(result.records, std::string(kDischargeColumn),
                  [](const auto& r) { return r.discharge; }, result.report);
    return result;
}

std::vector<ClimateRecord> average_stations(
    const std::vector<std::vector<ClimateRecord>>& stations) {
    if (stations.empty()) throw DataError("no climate stations to average");
    if (stations.size() == 1) return stations.front();

    struct Sum {
        ClimateRecord total;
        int count = 0;
    };
    std::map<Date, Sum> by_date;
    std::size_t n_extras = stations.front().empty() ? 0 : stations.front().front().extras.size();
    for (const auto& station : stations) {
        for (const auto& rec : station) {
            if (rec.extras.size() != n_extras) {
                throw DataError("stations disagree on extra climate columns");
            }
            auto& s = by_date[rec.date];
            if (s.count == 0) {
                s.total = rec;
            } else {
                s.total.precip += rec.precip;
                s.total.t_min += rec.t_min;
                s.total.t_max += rec.t_max;
                s.total.rel_humidity += rec.rel_humidity;
                for (std::size_t k = 0; k < n_extras; ++k) s.total.extras[k] += rec.extras[k];
            }
            ++s.count;
        }
    }
    std::vector<ClimateRecord> out;
    out.reserve(by_date.size());
    for (auto& [date, s] : by_date) {
        const double n = s.count;
        ClimateRecord rec = s.total;
        rec.precip /= n;
        rec.t_min /= n;
        rec.t_max /= n;
        rec.rel_humidity /= n;
        for (auto& e : rec.extras) e /= n;
        out.push_back(std::move(rec));
    }
    return out;
}

AlignedSeries align_merge(const std::vector<ClimateRecord>& climate,
                          const std::vector<DischargeRecord>& discharge,
                          const ClimateSchema& schema) {
    const auto sorted_unique = [](const auto& records) {
        for (std::size_t i = 1; i < records.size(); ++i) {
            if (!(records[i - 1].date < records[i].date)) return false;
        }
        return true;
    };
    if (!sorted_unique(climate) || !sorted_unique(discharge)) {
        throw DataError("align_merge inputs must be sorted and deduplicated");
    }

    AlignedSeries out;
    out.columns = schema.variable_columns();
    out.columns.emplace_back(kDischargeColumn);
    const std::size_t n_cols = out.columns.size();

    std::vector<std::pair<std::size_t, std::size_t>> matches;
    std::size_t i = 0, j = 0;
    while (i < climate.size() || j < discharge.size()) {
        if (j == discharge.size() || (i < climate.size() && climate[i].date < discharge[j].date)) {
            out.gap_report.push_back(climate[i++].date);
        } else if (i == climate.size() || discharge[j].date < climate[i].date) {
            out.gap_report.push_back(discharge[j++].date);
        } else {
            matches.emplace_back(i++, j++);
        }
    }
    if (matches.empty()) throw DataError("empty intersection of climate and discharge dates");

    out.values.resize(static_cast<Eigen::Index>(matches.size()), static_cast<Eigen::Index>(n_cols));
    out.dates.reserve(matches.size());
    for (std::size_t r = 0; r < matches.size(); ++r) {
        const auto& c = climate[matches[r].first];
        if (c.extras.size() != schema.extras.size()) {
            throw DataError("climate record extras do not match schema");
        }
        const auto row = static_cast<Eigen::Index>(r);
        out.dates.push_back(c.date);
        out.values(row, 0) = c.precip;
        out.values(row, 1) = c.t_min;
        out.values(row, 2) = c.t_max;
        out.values(row, 3) = c.rel_humidity;
        for (std::size_t k = 0; k < c.extras.size(); ++k) {
            out.values(row, static_cast<Eigen::Index>(4 + k)) = c.extras[k];
        }
        out.values(row, static_cast<Eigen::Index>(n_cols - 1)) = discharge[matches[r].second].discharge;
    }
    out.validate();
    return out;
}

std::pair<AlignedSeries, AlignedSeries> temporal_split(const AlignedSeries& series,
                                                       double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DataError("train fraction must lie in (0, 1)");
    }
    const std::size_t n = series.rows();
    const auto n_train =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    if (n < 2 || n_train == 0 || n_train >= n) {
        throw DataError("series too small for a nonempty train and test split");
    }
    return {series.slice(0, n_train), series.slice(n_train, n)};
}

AlignedSeries concat(const AlignedSeries& a, const AlignedSeries& b) {
    if (a.columns != b.columns) throw DataError("cannot concatenate series with different columns");
    if (a.rows() > 0 && b.rows() > 0 && !(a.dates.back() < b.dates.front())) {
        throw DataError("cannot concatenate overlapping series");
    }
    AlignedSeries out;
    out.columns = a.columns;
    out.dates = a.dates;
    out.dates.insert(out.dates.end(), b.dates.begin(), b.dates.end());
    out.values.resize(a.values.rows() + b.values.rows(), static_cast<Eigen::Index>(a.columns.size()));
    out.values.topRows(a.values.rows()) = a.values;
    out.values.bottomRows(b.values.rows()) = b.values;
    return out;
}

void write_aligned_csv(const AlignedSeries& series, const fs::path& path) {
    std::ostringstream os;
    os << "date";
    for (const auto& c : series.columns) os << "," << c;
    os << "\n";
    for (std::size_t r = 0; r < series.rows(); ++r) {
        os << format_iso_date(series.dates[r]);
        for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
            os << "," << format_double(series.values(static_cast<Eigen::Index>(r), c));
        }
        os << "\n";
    }
    write_text(path, os.str());
}

AlignedSeries read_aligned_csv(const fs::path& path) {
    const CsvFile file = read_csv_file(path);
    if (file.header.size() < 2 || file.header.front() != "date" ||
        file.header.back() != kDischargeColumn) {
        throw DataError("aligned series header must start with date and end with " +
                        std::string(kDischargeColumn) + ": " + path.string());
    }
    AlignedSeries out;
    out.columns.assign(file.header.begin() + 1, file.header.end());
    const auto n_cols = static_cast<Eigen::Index>(out.columns.size());
    out.values.resize(static_cast<Eigen::Index>(file.lines.size()), n_cols);
    Eigen::Index row = 0;
    for (const auto& [number, line] : file.lines) {
        const auto cells = split_csv_line(line);
        const auto where = path.string() + ":" + std::to_string(number);
        if (cells.size() != file.header.size()) throw DataError("column count mismatch at " + where);
        const auto date = parse_iso_date(cells[0]);
        if (!date) throw DataError("bad date at " + where);
        out.dates.push_back(*date);
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            const auto v = parse_double(cells[static_cast<std::size_t>(c + 1)]);
            if (!v || !std::isfinite(*v)) throw DataError("bad value at " + where);
            out.values(row, c) = *v;
        }
        ++row;
    }
    if (out.rows() == 0) throw DataError("zero parseable rows in " + path.string());
    out.validate();
    return out;
}

void write_climate_csv(const std::vector<ClimateRecord>& records, const ClimateSchema& schema,
                       const fs::path& path) {
    std::ostringstream os;
    os << schema.date;
    for (const auto& c : schema.variable_columns()) os << "," << c;
    os << "\n";
    for (const auto& r : records) {
        os << format_iso_date(r.date) << "," << format_double(r.precip) << ","
           << format_double(r.t_min) << "," << format_double(r.t_max) << ","
           << format_double(r.rel_humidity);
        for (double e : r.extras) os << "," << format_double(e);
        os << "\n";
    }
    write_text(path, os.str());
}

void write_discharge_csv(const std::vector<DischargeRecord>& records, const fs::path& path) {
    std::ostringstream os;
    os << "date," << kDischargeColumn << "\n";
    for (const auto& r : records) {
        os << format_iso_date(r.date) << "," << format_double(r.discharge) << "\n";
    }
    write_text(path, os.str());
}

}  // namespace rivercast
