// gridflow: mesoscopic city-traffic simulation and one-hour speed
// forecasting on a uniform grid, parameterized from floating-car GPS data.
//
// Pipeline stages (each reads/writes file artifacts in --dir):
//   synth -> preprocess -> estimate -> fit -> calibrate -> forecast ->
//   evaluate -> report

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridflow/config.hpp"
#include "gridflow/stages.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitDataError = 4;

struct CommonOpts {
    std::string config_path;
    std::string dir = "artifacts";
    int workers = 1; // accepted for symmetry; outputs never depend on it
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "pipeline config JSON file");
    cmd->add_option("-d,--dir", opts.dir, "artifact directory")->capture_default_str();
    cmd->add_option("-w,--workers", opts.workers, "worker count (does not affect outputs)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--set", opts.overrides,
                    "config override as dotted.path=value (repeatable)");
}

nlohmann::json parse_override_value(const std::string& text) {
    nlohmann::json v = nlohmann::json::parse(text, nullptr, false);
    if (v.is_discarded()) return text; // bare strings stay strings
    return v;
}

gridflow::PipelineConfig load(const CommonOpts& opts) {
    nlohmann::json j = nlohmann::json::object();
    if (!opts.config_path.empty()) {
        auto in = gridflow::open_input(opts.config_path);
        j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded())
            throw gridflow::ConfigError("config file is not valid JSON: " + opts.config_path);
    }
    for (const auto& ov : opts.overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw gridflow::ConfigError("--set expects dotted.path=value, got: " + ov);
        std::string path = "/" + ov.substr(0, eq);
        for (auto& c : path)
            if (c == '.') c = '/';
        j[nlohmann::json::json_pointer(path)] = parse_override_value(ov.substr(eq + 1));
    }
    return gridflow::parse_config(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mesoscopic grid traffic simulator and speed forecaster"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> scatter_cells;
    std::string fd_file, tag = "model";
    std::vector<std::string> method_specs;
    std::string truth_file;

    auto* synth = app.add_subcommand("synth", "generate a synthetic city, demand and GPS data");
    add_common(synth, opts);
    auto* preprocess = app.add_subcommand("preprocess", "clean GPS records into routes");
    add_common(preprocess, opts);
    auto* estimate = app.add_subcommand("estimate", "compute 10-minute speed/occupancy snapshots");
    add_common(estimate, opts);
    auto* fit = app.add_subcommand("fit", "fit per-cell fundamental diagrams");
    add_common(fit, opts);
    fit->add_option("--scatter-cell", scatter_cells,
                    "dump scatter+curve for a cell, as 'col,row,DIR' (repeatable)");
    auto* calibrate = app.add_subcommand("calibrate", "tune Vf/Nc against historical statistics");
    add_common(calibrate, opts);
    auto* forecast = app.add_subcommand("forecast", "rolling one-hour speed forecasts");
    add_common(forecast, opts);
    forecast->add_option("--fd", fd_file,
                         "fd csv to simulate with (default fd_tuned.csv, then fd.csv; "
                         "'default' forces unfitted defaults)");
    forecast->add_option("--tag", tag, "archive tag: writes forecasts_<tag>.csv")
        ->capture_default_str();
    auto* evaluate = app.add_subcommand("evaluate", "score forecasts on road segments");
    add_common(evaluate, opts);
    evaluate->add_option("--forecast", method_specs,
                         "method=forecast_csv to score (repeatable; default model archive)");
    evaluate->add_option("--truth", truth_file, "truth snapshot csv (default snapshots.csv)");
    auto* report = app.add_subcommand("report", "aggregate evaluation outputs into the summary");
    add_common(report, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        gridflow::PipelineConfig cfg = load(opts);
        gridflow::stages::fs::path dir(opts.dir);

        if (synth->parsed()) {
            auto r = gridflow::stages::run_synth(cfg, dir);
            std::printf("synth: %zu corridors, %zu routes, %zu gps records (%zu corrupted)\n",
                        r.city.corridors.size(), r.routes, r.records,
                        r.emission.corrupted_total());
        } else if (preprocess->parsed()) {
            auto s = gridflow::stages::run_preprocess(cfg, dir);
            std::printf("preprocess: %zu records -> %zu routes "
                        "(dropped: %zu macro, %zu dedup, %zu status, %zu meso)\n",
                        s.input, s.routes_emitted, s.dropped_macroscopic, s.dropped_dedup,
                        s.dropped_status, s.dropped_mesoscopic);
        } else if (estimate->parsed()) {
            auto n = gridflow::stages::run_estimate(cfg, dir);
            std::printf("estimate: %zu snapshots\n", n);
        } else if (fit->parsed()) {
            auto r = gridflow::stages::run_fit(cfg, dir, scatter_cells);
            std::printf("fit: %zu of %zu (cell,direction) pairs fitted\n", r.fitted, r.total);
        } else if (calibrate->parsed()) {
            auto r = gridflow::stages::run_calibrate(cfg, dir);
            std::printf("calibrate: %zu iterations, final mean gap %.3f km/h%s\n", r.iterations,
                        r.report.iterations.empty() ? 0.0
                                                    : r.report.iterations.back().mean_gap_kmh,
                        r.report.converged ? " (converged)" : "");
            if (!r.report.warning.empty())
                std::printf("calibrate: warning: %s\n", r.report.warning.c_str());
        } else if (forecast->parsed()) {
            std::string fd_path = fd_file;
            if (fd_path == "default") {
                fd_path.clear();
            } else if (fd_path.empty()) {
                auto tuned = gridflow::stages::art_fd_tuned(dir);
                fd_path = gridflow::stages::fs::exists(tuned) ? tuned
                                                              : gridflow::stages::art_fd(dir);
            }
            auto n = gridflow::stages::run_forecast(cfg, dir, fd_path, tag);
            std::printf("forecast: %zu frames -> forecasts_%s.csv\n", n, tag.c_str());
        } else if (evaluate->parsed()) {
            std::vector<std::pair<std::string, std::string>> methods;
            for (const auto& arg : method_specs) {
                auto eq = arg.find('=');
                if (eq == std::string::npos)
                    throw gridflow::ConfigError("--forecast expects method=file, got: " + arg);
                methods.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
            }
            if (methods.empty())
                methods.emplace_back("model", gridflow::stages::art_forecasts(dir, "model"));
            auto r = gridflow::stages::run_evaluate(cfg, dir, methods, truth_file);
            for (const auto& s : r.scores)
                std::printf("evaluate: %-16s rmse %.3f km/h, accuracy %.3f (%zu segments)\n",
                            s.method.c_str(), s.rmse_kmh, s.accuracy, s.segments_scored);
            if (r.trips_scored > 0)
                std::printf("evaluate: %zu trips, median travel-time error %+.1f%%\n",
                            r.trips_scored, 100.0 * r.median_tt_rel_err);
        } else if (report->parsed()) {
            std::string rendered = gridflow::stages::run_report(cfg, dir);
            std::fputs(rendered.c_str(), stdout);
        }
        return kExitOk;
    } catch (const gridflow::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitBadConfig;
    } catch (const gridflow::MissingArtifactError& e) {
        std::fprintf(stderr, "missing artifact: %s\n", e.what());
        return kExitMissingArtifact;
    } catch (const gridflow::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitDataError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
