// rivercast: command-line front end for ingesting, training, tuning,
// evaluating and forecasting river discharge models.

#include "rivercast/checkpoint.hpp"
#include "rivercast/dataset.hpp"
#include "rivercast/error.hpp"
#include "rivercast/pipeline.hpp"
#include "rivercast/report.hpp"
#include "rivercast/run_config.hpp"
#include "rivercast/synth.hpp"
#include "rivercast/text.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rivercast;

namespace {

struct IngestArgs {
    std::vector<std::string> climate;
    std::string discharge;
    std::string out;
};

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<unsigned> jobs;
    bool quiet = false;
};

struct EvaluateArgs {
    std::vector<std::string> checkpoints;
    std::string series;
    std::string config;
    std::string from;
    std::string out = "evaluation";
};

struct ForecastArgs {
    std::string checkpoint;
    std::string series;
    std::vector<std::string> dates;
    bool multistep = false;
    std::string out = "forecast";
};

struct SynthArgs {
    BasinParams params;
    std::string start = "2005-01-01";
    std::string out = "synth";
};

Date parse_date_arg(const std::string& text, const std::string& what) {
    const auto d = parse_iso_date(text);
    if (!d) throw ConfigError(what + " is not a YYYY-MM-DD date: " + text);
    return *d;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

RunConfig load_with_overrides(const RunArgs& args) {
    RunConfig rc = load_run_config(args.config);
    if (args.seed) rc.pipeline.seed = *args.seed;
    if (args.output_dir) rc.output_dir = *args.output_dir;
    if (args.jobs) rc.jobs = *args.jobs;
    return rc;
}

void summarize_reports(const std::vector<QualityReport>& reports) {
    for (const auto& r : reports) {
        if (!r.rejected.empty() || !r.duplicates.empty() || !r.gaps.empty() || !r.outliers.empty()) {
            std::cerr << r.to_text();
        }
    }
}

int run_ingest(const IngestArgs& args) {
    DataSources data;
    for (const auto& c : args.climate) data.climate.emplace_back(c);
    data.discharge = args.discharge;
    std::vector<QualityReport> reports;
    const AlignedSeries series = load_series(data, &reports);
    const fs::path out(args.out);
    ensure_dir(out);
    write_aligned_csv(series, out / "series.csv");
    std::string text;
    for (const auto& r : reports) text += r.to_key_values() + "\n";
    text += "merged_rows=" + std::to_string(series.rows()) + "\n";
    text += "unmatched_dates=" + std::to_string(series.gap_report.size()) + "\n";
    write_text_file(out / "quality_report.txt", text);
    summarize_reports(reports);
    std::cerr << "ingest: " << series.rows() << " aligned rows written to " << (out / "series.csv").string() << "\n";
    return 0;
}

std::pair<AlignedSeries, AlignedSeries> load_split(const RunConfig& rc) {
    std::vector<QualityReport> reports;
    const AlignedSeries series = load_series(rc.data, &reports);
    summarize_reports(reports);
    return temporal_split(series, rc.train_fraction);
}

TuneOptions tune_options(const RunConfig& rc) {
    return TuneOptions{rc.grid ? *rc.grid : default_grid(rc.pipeline.model), rc.cv, rc.jobs};
}

int run_train(const RunArgs& args) {
    const RunConfig rc = load_with_overrides(args);
    const auto [train, test] = load_split(rc);
    std::optional<TuneOptions> tune;
    if (rc.grid) tune = tune_options(rc);
    const int epochs = rc.pipeline.neural.train.epochs;
    const EpochCallback progress = [&](int epoch, double loss) {
        if (!args.quiet) std::cerr << "epoch " << epoch << "/" << epochs << " loss " << format_double(loss) << "\n";
    };
    const TrainedPipeline pipeline = train_pipeline(rc.pipeline, train, tune ? &*tune : nullptr, progress);
    ensure_dir(rc.output_dir);
    save_checkpoint(pipeline, rc.output_dir / "checkpoint.json");
    std::string losses = "epoch,loss\n";
    for (std::size_t i = 0; i < pipeline.loss_history.size(); ++i) {
        losses += std::to_string(i + 1) + "," + format_double(pipeline.loss_history[i]) + "\n";
    }
    write_text_file(rc.output_dir / "loss_history.csv", losses);
    if (pipeline.tuning) write_text_file(rc.output_dir / "tune_results.csv", pipeline.tuning->to_csv());
    std::cerr << "train: " << to_string(rc.pipeline.model) << " on " << to_string(rc.pipeline.regime) << ", "
              << train.rows() << " training rows, checkpoint " << (rc.output_dir / "checkpoint.json").string()
              << " (fingerprint " << pipeline.fingerprint << ")\n";
    return 0;
}

int run_tune(const RunArgs& args) {
    const RunConfig rc = load_with_overrides(args);
    const auto [train, test] = load_split(rc);
    const TuneOptions options = tune_options(rc);
    ensure_dir(rc.output_dir);
    try {
        const TuneResult result = tune_pipeline(rc.pipeline, train, options);
        write_text_file(rc.output_dir / "tune_results.csv", result.to_csv());
        write_text_file(rc.output_dir / "tune_summary.txt", result.summary());
        std::cout << result.summary();
    } catch (const GridSearchError& e) {
        write_text_file(rc.output_dir / "tune_results.csv", e.result().to_csv());
        throw;
    }
    return 0;
}

int run_evaluate(const EvaluateArgs& args) {
    AlignedSeries series;
    if (!args.series.empty()) {
        series = read_aligned_csv(args.series);
    } else if (!args.config.empty()) {
        series = load_series(load_run_config(args.config).data);
    } else {
        throw ConfigError("evaluate needs --series or --config");
    }
    std::optional<Date> from;
    if (!args.from.empty()) from = parse_date_arg(args.from, "--from");
    std::vector<ModelReport> reports;
    std::map<std::string, int> seen;
    for (const auto& path : args.checkpoints) {
        const TrainedPipeline pipeline = load_checkpoint(path);
        const Evaluation ev = evaluate(pipeline, series, from);
        std::string name = to_string(pipeline.config.model);
        if (const int n = seen[name]++; n > 0) name += "_" + std::to_string(n + 1);
        reports.push_back({name, ev.entries, ev.overall, pipeline.alerts});
        if (pipeline.config.regime == Regime::sequence_multistep) {
            for (std::size_t h = 0; h < ev.per_step.size(); ++h) {
                std::cerr << name << " step " << h + 1 << ": r2 "
                          << (ev.per_step[h].r2 ? format_double(*ev.per_step[h].r2) : "NA") << "\n";
            }
        }
        if (ev.skipped > 0) std::cerr << name << ": " << ev.skipped << " dates skipped for missing history\n";
    }
    const auto written = emit_report(reports, args.out);
    std::cout << metrics_csv(reports);
    std::cerr << "evaluate: wrote " << written.size() << " files to " << args.out << "\n";
    return 0;
}

int run_forecast(const ForecastArgs& args) {
    const TrainedPipeline pipeline = load_checkpoint(args.checkpoint);
    const AlignedSeries series = read_aligned_csv(args.series);
    ModelReport report{to_string(pipeline.config.model), {}, {}, pipeline.alerts};
    for (const auto& text : args.dates) {
        const Date date = parse_date_arg(text, "--date");
        auto entries = args.multistep ? predict_multistep(pipeline, series, date)
                                      : predict_daily(pipeline, series, date);
        for (auto& e : entries) {
            if (e.clamped) std::cerr << "note: negative prediction for " << format_iso_date(e.date) << " clamped to 0\n";
            report.entries.push_back(std::move(e));
        }
    }
    std::vector<double> actual, predicted;
    for (const auto& e : report.entries) {
        if (e.actual) {
            actual.push_back(*e.actual);
            predicted.push_back(e.predicted);
        }
    }
    if (!actual.empty()) report.metrics = compute_metrics(actual, predicted);
    emit_report({report}, args.out);
    std::cout << forecast_csv(report);
    return 0;
}

int run_synth(SynthArgs args) {
    args.params.start = parse_date_arg(args.start, "--start");
    const AlignedSeries series = generate_basin(args.params);
    const fs::path out(args.out);
    ensure_dir(out);
    write_basin_csvs(series, out / "climate.csv", out / "discharge.csv");
    std::cerr << "synth: " << series.rows() << " days written to " << out.string() << "\n";
    return 0;
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("config", args.config, "JSON run config")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--output-dir", args.output_dir, "override the config output directory");
    cmd->add_option("--jobs", args.jobs, "maximum concurrent grid-search fits")->check(CLI::PositiveNumber);
    cmd->add_flag("--quiet", args.quiet, "suppress the epoch counter");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rivercast: river discharge forecasting"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "parse, clean and merge climate and discharge CSVs");
    cmd_ingest->add_option("--climate", ingest.climate, "climate station CSV (repeatable)")->required();
    cmd_ingest->add_option("--discharge", ingest.discharge, "discharge CSV")->required();
    cmd_ingest->add_option("--out", ingest.out, "output directory")->required();

    RunArgs train_args, tune_args;
    auto* cmd_train = app.add_subcommand("train", "train a pipeline and write a checkpoint");
    add_run_options(cmd_train, train_args);
    auto* cmd_tune = app.add_subcommand("tune", "grid search with cross-validation");
    add_run_options(cmd_tune, tune_args);

    EvaluateArgs eval;
    auto* cmd_eval = app.add_subcommand("evaluate", "score checkpoints on a held-out series");
    cmd_eval->add_option("--checkpoint", eval.checkpoints, "checkpoint file (repeatable)")->required();
    cmd_eval->add_option("--series", eval.series, "aligned series CSV");
    cmd_eval->add_option("--config", eval.config, "run config whose data section names the series");
    cmd_eval->add_option("--from", eval.from, "first target date (default: day after training end)");
    cmd_eval->add_option("--out", eval.out, "output directory");

    ForecastArgs fc;
    auto* cmd_fc = app.add_subcommand("forecast", "forecast discharge for given dates");
    cmd_fc->add_option("--checkpoint", fc.checkpoint, "checkpoint file")->required();
    cmd_fc->add_option("--series", fc.series, "aligned series CSV with the history")->required();
    cmd_fc->add_option("--date", fc.dates, "forecast (first target) date, repeatable")->required();
    cmd_fc->add_flag("--multistep", fc.multistep, "emit every horizon step");
    cmd_fc->add_option("--out", fc.out, "output directory");

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic basin");
    cmd_synth->add_option("--out", synth.out, "output directory");
    cmd_synth->add_option("--seed", synth.params.seed, "random seed");
    cmd_synth->add_option("--days", synth.params.n_days, "number of days");
    cmd_synth->add_option("--start", synth.start, "first date");
    cmd_synth->add_option("--ar-coeff", synth.params.ar_coeff, "reservoir recession coefficient");
    cmd_synth->add_option("--precip-gain", synth.params.precip_gain, "flow per mm of precipitation");
    cmd_synth->add_option("--melt-gain", synth.params.melt_gain, "flow per melt degree-day");
    cmd_synth->add_option("--noise-scale", synth.params.noise_scale, "discharge noise scale");
    cmd_synth->add_option("--base-flow", synth.params.base_flow, "base flow in m3/s");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_ingest) return run_ingest(ingest);
        if (*cmd_train) return run_train(train_args);
        if (*cmd_tune) return run_tune(tune_args);
        if (*cmd_eval) return run_evaluate(eval);
        if (*cmd_fc) return run_forecast(fc);
        if (*cmd_synth) return run_synth(synth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
