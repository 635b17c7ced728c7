#include "rivercast/report.hpp"

#include "rivercast/error.hpp"
#include "rivercast/text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace rivercast {

namespace {

std::string safe_name(const std::string& name) {
    std::string out;
    for (char ch : name) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                        ch == '_' || ch == '-' || ch == '.';
        out += ok ? ch : '_';
    }
    return out.empty() ? "model" : out;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

std::string forecast_csv(const ModelReport& report) {
    std::string out = "date,actual_cms,predicted_cms,step,alert\n";
    for (const auto& e : report.entries) {
        out += format_iso_date(e.date) + ',';
        if (e.actual) out += format_double(*e.actual);
        out += ',' + format_double(e.predicted) + ',' + std::to_string(e.step) + ',';
        out += e.alert < report.alerts.levels.size() ? report.alerts.levels[e.alert].name
                                                     : std::to_string(e.alert);
        out += '\n';
    }
    return out;
}

std::string metrics_csv(const std::vector<ModelReport>& reports) {
    std::string out = "model,mse,rmse,mae,r2\n";
    for (const auto& r : reports) {
        out += r.model + ',' + format_double(r.metrics.mse) + ',' + format_double(r.metrics.rmse) + ',' +
               format_double(r.metrics.mae) + ',' + (r.metrics.r2 ? format_double(*r.metrics.r2) : "NA") + '\n';
    }
    return out;
}

std::string forecast_svg(const ModelReport& report) {
    constexpr double width = 900, height = 400, left = 70, right = 20, top = 40, bottom = 50;
    std::vector<const ForecastEntry*> points;
    for (const auto& e : report.entries) {
        if (e.step == 1) points.push_back(&e);
    }
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto* e : points) {
        for (double v : {e->predicted, e->actual.value_or(e->predicted)}) {
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    const auto n = points.size();
    const auto px = [&](std::size_t i) { return left + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2); };
    const auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::string actual, predicted;
    for (std::size_t i = 0; i < n; ++i) {
        if (points[i]->actual) actual += fixed(px(i)) + ',' + fixed(py(*points[i]->actual)) + ' ';
        predicted += fixed(px(i)) + ',' + fixed(py(points[i]->predicted)) + ' ';
    }
    const std::string title = xml_escape(report.model);
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
           fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + ' ' + fixed(height, 0) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fixed(left, 0) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" + title +
           ": actual vs predicted discharge</text>\n";
    svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top + plot_h) + "\" x2=\"" + fixed(left + plot_w) +
           "\" y2=\"" + fixed(top + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
           fixed(top + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"4\" y=\"" + fixed(top + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
           fixed(hi, 1) + "</text>\n";
    svg += "<text x=\"4\" y=\"" + fixed(top + plot_h) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
           fixed(lo, 1) + "</text>\n";
    if (n > 0) {
        svg += "<text x=\"" + fixed(left) + "\" y=\"" + fixed(height - 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + format_iso_date(points.front()->date) + "</text>\n";
        svg += "<text x=\"" + fixed(left + plot_w - 70) + "\" y=\"" + fixed(height - 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + format_iso_date(points.back()->date) + "</text>\n";
    }
    svg += "<text x=\"" + fixed(left + plot_w / 2 - 60) + "\" y=\"" + fixed(height - 6) +
           "\" font-family=\"sans-serif\" font-size=\"12\">discharge (m3/s) by date</text>\n";
    svg += "<polyline class=\"actual\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"" + actual +
           "\"/>\n";
    svg += "<polyline class=\"predicted\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.2\" points=\"" +
           predicted + "\"/>\n";
    const double lx = left + plot_w - 160, ly = top + 10;
    svg += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(lx + 24) + "\" y2=\"" + fixed(ly) +
           "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fixed(lx + 30) + "\" y=\"" + fixed(ly + 4) + "\">actual</text>\n";
    svg += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(ly + 18) + "\" x2=\"" + fixed(lx + 24) + "\" y2=\"" +
           fixed(ly + 18) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fixed(lx + 30) + "\" y=\"" + fixed(ly + 22) + "\">predicted (" + title + ")</text>\n";
    svg += "</g>\n</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> emit_report(const std::vector<ModelReport>& reports,
                                               const std::filesystem::path& dir) {
    if (reports.empty()) throw DataError("no results to report");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
    std::vector<std::filesystem::path> written;
    for (const auto& r : reports) {
        if (r.entries.empty()) throw DataError("model " + r.model + " has no forecasts to report");
        const auto csv = dir / ("forecast_" + safe_name(r.model) + ".csv");
        write_text_file(csv, forecast_csv(r));
        written.push_back(csv);
        const auto svg = dir / ("forecast_" + safe_name(r.model) + ".svg");
        write_text_file(svg, forecast_svg(r));
        written.push_back(svg);
    }
    const auto metrics = dir / "metrics.csv";
    write_text_file(metrics, metrics_csv(reports));
    written.push_back(metrics);
    return written;
}

}  // namespace rivercast
