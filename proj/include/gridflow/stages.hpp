#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridflow/config.hpp"
#include "gridflow/evaluation.hpp"
#include "gridflow/synth.hpp"

namespace gridflow::stages {

namespace fs = std::filesystem;

// Stage artifacts, all relative to one working directory. Stages communicate
// only through these files.
inline std::string art_scenario(const fs::path& dir) { return (dir / "scenario.json").string(); }
inline std::string art_gps(const fs::path& dir) { return (dir / "gps.csv").string(); }
inline std::string art_truth_fd(const fs::path& dir) { return (dir / "truth_fd.csv").string(); }
inline std::string art_truth_snaps(const fs::path& dir) { return (dir / "truth_snapshots.csv").string(); }
inline std::string art_segments(const fs::path& dir) { return (dir / "segments.csv").string(); }
inline std::string art_routes(const fs::path& dir) { return (dir / "routes.ndjson").string(); }
inline std::string art_ingest_stats(const fs::path& dir) { return (dir / "ingest_stats.json").string(); }
inline std::string art_snapshots(const fs::path& dir) { return (dir / "snapshots.csv").string(); }
inline std::string art_fd(const fs::path& dir) { return (dir / "fd.csv").string(); }
inline std::string art_fd_tuned(const fs::path& dir) { return (dir / "fd_tuned.csv").string(); }
inline std::string art_calibration(const fs::path& dir) { return (dir / "calibration.csv").string(); }
inline std::string art_sim_snapshots(const fs::path& dir) { return (dir / "sim_snapshots.csv").string(); }
inline std::string art_sim_arrivals(const fs::path& dir) { return (dir / "sim_arrivals.csv").string(); }
inline std::string art_arrivals(const fs::path& dir) { return (dir / "arrivals_truth.csv").string(); }
inline std::string art_forecasts(const fs::path& dir, const std::string& tag) {
    return (dir / ("forecasts_" + tag + ".csv")).string();
}

inline void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        throw MissingArtifactError("missing artifact '" + path + "' (produced by `" + producer +
                                   "`)");
}

// ---------------------------------------------------------------------------
// synth: generate the oracle city, run it for one day, emit GPS + truth files.

struct SynthResult {
    OracleCity city;
    std::size_t routes = 0;
    std::size_t records = 0;
    EmissionStats emission;
};

/// Road segments for scoring: alternating right/up, arterial segments run
/// along corridors, local ones on plain rows/columns; every segment starts on
/// the central row or central column.
inline std::vector<RoadSegment> select_segments(const OracleCity& city, int n_arterial = 4,
                                                int n_local = 4) {
    const GridConfig& g = city.grid;
    int ccol = g.nx / 2, crow = g.ny / 2;
    std::vector<RoadSegment> segments;
    int made = 0;

    auto corridor_ok = [&](const Corridor& k) {
        // room for 10 cells from the central line
        return k.horizontal ? ccol + 9 < g.nx : crow + 9 < g.ny;
    };
    for (const auto& k : city.corridors) {
        if (made >= n_arterial) break;
        if (!corridor_ok(k)) continue;
        if (k.horizontal)
            segments.push_back(RoadSegment::make("arterial" + std::to_string(made + 1),
                                                 {ccol, k.line}, Direction::Right));
        else
            segments.push_back(RoadSegment::make("arterial" + std::to_string(made + 1),
                                                 {k.line, crow}, Direction::Up));
        ++made;
    }
    made = 0;
    for (const auto& k : city.collectors) {
        if (made >= n_local) break;
        if (!corridor_ok(k)) continue;
        if (k.horizontal)
            segments.push_back(RoadSegment::make("local" + std::to_string(made + 1),
                                                 {ccol, k.line}, Direction::Right));
        else
            segments.push_back(RoadSegment::make("local" + std::to_string(made + 1),
                                                 {k.line, crow}, Direction::Up));
        ++made;
    }
    for (const auto& s : segments) s.validate(g);
    return segments;
}

inline SynthResult run_synth(const PipelineConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    SynthResult result;
    CityConfig city_cfg = cfg.city;
    city_cfg.nx = cfg.grid.nx;
    city_cfg.ny = cfg.grid.ny;
    city_cfg.cell_size_m = cfg.grid.cell_size;
    result.city = generate_city(cfg.seed, city_cfg);
    result.city.proj = cfg.proj;

    SimConfig sim_cfg = cfg.sim;
    OracleRun run = run_oracle(result.city, cfg.day_start_s, cfg.day_end_s,
                               mix_seed(cfg.seed, "oracle-run"), sim_cfg);
    result.routes = run.routes.size();

    EmissionStats em;
    auto records = emit_gps(run.routes, result.city, cfg.emission,
                            mix_seed(cfg.seed, "emission"), em);
    result.records = records.size();
    result.emission = em;

    write_gps_csv(art_gps(dir), records);
    write_fd_csv(art_truth_fd(dir), result.city.truth);
    write_snapshots_csv(art_truth_snaps(dir), run.snapshots);
    write_segments_csv(art_segments(dir), select_segments(result.city));
    write_arrivals_csv(art_arrivals(dir), run.arrivals);

    nlohmann::json scenario = scenario_to_json(result.city);
    scenario["day_start_s"] = cfg.day_start_s;
    scenario["day_end_s"] = cfg.day_end_s;
    scenario["routes"] = run.routes.size();
    scenario["gps_records"] = records.size();
    scenario["emission"] = {{"emitted", em.emitted},
                            {"corrupted_macro", em.corrupted_macro},
                            {"corrupted_meso", em.corrupted_meso},
                            {"dropped_out", em.dropped_out}};
    std::ofstream out(art_scenario(dir));
    out << scenario.dump(2) << '\n';
    return result;
}

// ---------------------------------------------------------------------------
// preprocess: gps.csv -> routes.ndjson + ingest_stats.json

inline IngestStats run_preprocess(const PipelineConfig& cfg, const fs::path& dir) {
    require_artifact(art_gps(dir), "synth");
    auto records = read_gps_csv(art_gps(dir));
    IngestStats stats;
    auto routes = ingest_records(records, cfg.proj, cfg.grid, cfg.ingest, stats);
    write_routes_ndjson(art_routes(dir), routes);

    nlohmann::json j;
    j["input"] = stats.input;
    j["kept"] = stats.kept;
    j["dropped_macroscopic"] = stats.dropped_macroscopic;
    j["dropped_dedup"] = stats.dropped_dedup;
    j["dropped_status"] = stats.dropped_status;
    j["dropped_mesoscopic"] = stats.dropped_mesoscopic;
    j["routes_emitted"] = stats.routes_emitted;
    j["routes_short"] = stats.routes_short;
    j["routes_degenerate"] = stats.routes_degenerate;
    std::ofstream out(art_ingest_stats(dir));
    out << j.dump(2) << '\n';
    return stats;
}

// ---------------------------------------------------------------------------
// estimate: routes.ndjson -> snapshots.csv on the 10-minute lattice

inline std::pair<std::int64_t, std::int64_t> route_span(std::span<const ContinuousRoute> routes,
                                                        double stride_s) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& r : routes) {
        if (r.degenerate()) continue;
        if (!any || r.depart_s() < lo) lo = r.depart_s();
        if (!any || r.arrival_s() > hi) hi = r.arrival_s();
        any = true;
    }
    if (!any) throw DataError("route archive has no usable routes");
    auto first = static_cast<std::int64_t>(std::ceil(lo / stride_s) * stride_s);
    auto last = static_cast<std::int64_t>(std::floor(hi / stride_s) * stride_s);
    return {first, last};
}

inline std::size_t run_estimate(const PipelineConfig& cfg, const fs::path& dir) {
    require_artifact(art_routes(dir), "preprocess");
    auto routes = read_routes_ndjson(art_routes(dir), cfg.grid);
    auto [first, last] = route_span(routes, cfg.estimation.stride_s);

    RouteSet set(routes);
    InstantFrame scratch(cfg.grid.nx, cfg.grid.ny);
    std::vector<DirectedCellState> snaps;
    for (std::int64_t t = first; t <= last;
         t += static_cast<std::int64_t>(cfg.estimation.stride_s)) {
        DirectedCellState st{static_cast<double>(t),
                             DirectedField<double>(cfg.grid.nx, cfg.grid.ny, 0.0),
                             DirectedField<double>(cfg.grid.nx, cfg.grid.ny, 0.0)};
        std::vector<std::size_t> touched;
        detail::fold_window(set, static_cast<double>(t), cfg.grid, cfg.estimation, scratch, st.V,
                            st.N, touched);
        snaps.push_back(std::move(st));
    }
    write_snapshots_csv(art_snapshots(dir), snaps);
    return snaps.size();
}

// ---------------------------------------------------------------------------
// fit: routes.ndjson -> fd.csv (+ optional scatter dumps)

struct FitResult {
    std::size_t fitted = 0;
    std::size_t total = 0;
};

inline FitResult run_fit(const PipelineConfig& cfg, const fs::path& dir,
                         std::span<const std::string> scatter_cells = {}) {
    require_artifact(art_routes(dir), "preprocess");
    auto routes = read_routes_ndjson(art_routes(dir), cfg.grid);
    auto [first, last] = route_span(routes, cfg.estimation.stride_s);
    auto archive = window_samples(routes, static_cast<double>(first) - cfg.estimation.stride_s,
                                  static_cast<double>(last), cfg.grid, cfg.estimation);
    FdField field = fit_field(archive, cfg.fd);
    write_fd_csv(art_fd(dir), field);

    for (const auto& cell_arg : scatter_cells) {
        // "col,row,D" -> per-cell scatter + fitted curve
        std::vector<std::string_view> f;
        split_csv_line(cell_arg, f);
        if (f.size() != 3 || f[2].size() != 1)
            throw ConfigError("scatter cell must be 'col,row,dir': " + cell_arg);
        CellIndex c{static_cast<int>(parse_int(f[0], "col")),
                    static_cast<int>(parse_int(f[1], "row"))};
        if (!in_bounds(c, cfg.grid)) throw ConfigError("scatter cell out of bounds: " + cell_arg);
        Direction d = dir_from_char(f[2][0]);
        std::string name = "fd_scatter_c" + std::to_string(c.col) + "_r" + std::to_string(c.row) +
                           "_" + f[2][0] + ".csv";
        write_fd_scatter_csv((dir / name).string(), archive[field.params.flat(c, d)],
                             field.at(c, d), cfg.fd.v_min_kmh);
    }
    return {field.fitted_count, field.params.size()};
}

// ---------------------------------------------------------------------------
// calibrate: fd.csv + routes + snapshots -> fd_tuned.csv + calibration.csv

inline std::vector<DirectedCellState> simulate_day_snapshots(
    const RouteSet& routes, const GridConfig& grid, const FdField& fd,
    const ChiProfile& chi, const SimConfig& sim_cfg, double start_s, double end_s,
    double stride_s, std::vector<Arrival>* arrivals_out = nullptr) {
    Simulator sim(grid, fd, chi, sim_cfg, routes, start_s);
    std::vector<DirectedCellState> snaps;
    double next_snap = std::ceil(start_s / stride_s) * stride_s;
    while (sim.clock_s() < end_s - 1e-9) {
        sim.step();
        if (sim.clock_s() >= next_snap - 1e-9) {
            snaps.push_back(sim.snapshot());
            next_snap += stride_s;
        }
    }
    if (arrivals_out) *arrivals_out = sim.arrivals();
    return snaps;
}

struct CalibrateResult {
    CalibrationReport report;
    std::size_t iterations = 0;
};

inline CalibrateResult run_calibrate(const PipelineConfig& cfg, const fs::path& dir) {
    require_artifact(art_fd(dir), "fit");
    require_artifact(art_routes(dir), "preprocess");
    require_artifact(art_snapshots(dir), "estimate");
    auto routes = read_routes_ndjson(art_routes(dir), cfg.grid);
    FdField fd = read_fd_csv(art_fd(dir), cfg.grid, cfg.fd.defaults);
    auto series = read_snapshots_csv(art_snapshots(dir), cfg.grid);

    std::vector<DirectedCellState> real_snaps;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        DirectedCellState st{static_cast<double>(series.times[k]),
                             DirectedField<double>(cfg.grid.nx, cfg.grid.ny, 0.0),
                             DirectedField<double>(cfg.grid.nx, cfg.grid.ny, 0.0)};
        for (const auto& row : series.frames[k]) {
            st.V.at(row.cell, row.dir) = row.v_kmh;
            st.N.at(row.cell, row.dir) = row.n;
        }
        real_snaps.push_back(std::move(st));
    }
    if (real_snaps.empty()) throw DataError("snapshots.csv contains no snapshots");

    double day_start = real_snaps.front().t_s - cfg.estimation.stride_s;
    double day_end = real_snaps.back().t_s;
    RouteSet demand(routes);
    auto run_day = [&](const FdField& candidate) {
        return simulate_day_snapshots(demand, cfg.grid, candidate, cfg.chi, cfg.sim, day_start,
                                      day_end, cfg.estimation.stride_s);
    };

    CalibrateResult result;
    result.report = calibrate(fd, real_snaps, run_day, cfg.tuning);
    result.iterations = result.report.iterations.size();
    write_fd_csv(art_fd_tuned(dir), fd);
    write_calibration_csv(art_calibration(dir), result.report);

    // Final-parameter simulator output: snapshots in the estimation format
    // plus the arrivals log.
    std::vector<Arrival> arrivals;
    auto sim_snaps = simulate_day_snapshots(demand, cfg.grid, fd, cfg.chi, cfg.sim, day_start,
                                            day_end, cfg.estimation.stride_s, &arrivals);
    write_snapshots_csv(art_sim_snapshots(dir), sim_snaps);
    write_arrivals_csv(art_sim_arrivals(dir), arrivals);
    return result;
}

// ---------------------------------------------------------------------------
// forecast: rolling one-hour forecasts from an fd file

inline std::size_t run_forecast(const PipelineConfig& cfg, const fs::path& dir,
                                const std::string& fd_file, const std::string& tag) {
    require_artifact(art_routes(dir), "preprocess");
    require_artifact(art_snapshots(dir), "estimate");
    FdField fd(cfg.grid.nx, cfg.grid.ny, cfg.fd.defaults);
    if (!fd_file.empty()) {
        require_artifact(fd_file, "fit or calibrate");
        fd = read_fd_csv(fd_file, cfg.grid, cfg.fd.defaults);
    }
    auto routes = read_routes_ndjson(art_routes(dir), cfg.grid);
    auto observations = read_snapshots_csv(art_snapshots(dir), cfg.grid);
    RouteSet history(routes);

    ForecastConfig fcfg;
    fcfg.horizon_s = cfg.horizon_s;
    fcfg.lead_stride_s = cfg.estimation.stride_s;
    fcfg.sim = cfg.sim;
    auto frames = rolling_forecasts(history, observations, cfg.origin_start_s, cfg.origin_end_s,
                                    cfg.origin_stride_s, cfg.grid, fd, cfg.chi, fcfg);
    write_forecasts_csv(art_forecasts(dir, tag), frames);
    return frames.size();
}

// ---------------------------------------------------------------------------
// evaluate: score forecast archives against the truth snapshots

struct MethodScore {
    std::string method;
    double rmse_kmh = 0.0;
    double accuracy = 0.0;
    std::size_t segments_scored = 0;
};

struct EvaluateResult {
    std::vector<MethodScore> scores; // persistence baseline last
    std::size_t trips_scored = 0;
    double median_tt_rel_err = 0.0;
};

namespace detail_eval {

// Per-segment prediction series over the forecast origins at one lead.
inline std::vector<std::vector<std::optional<double>>>
segment_series(const ForecastArchive& archive, std::span<const std::int64_t> origins,
               int lead_min, std::span<const RoadSegment> segments) {
    std::vector<std::vector<std::optional<double>>> series(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s) series[s].reserve(origins.size());
    for (std::int64_t t0 : origins) {
        const auto* frame = archive.frame_at(t0, lead_min);
        for (std::size_t s = 0; s < segments.size(); ++s)
            series[s].push_back(frame ? segment_speed(*frame, segments[s]) : std::nullopt);
    }
    return series;
}

inline std::vector<std::vector<std::optional<double>>>
truth_series(const SnapshotSeries& truth, std::span<const std::int64_t> times,
             std::span<const RoadSegment> segments) {
    std::vector<std::vector<std::optional<double>>> series(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s) series[s].reserve(times.size());
    for (std::int64_t t : times) {
        const auto* frame = truth.frame_at(t);
        for (std::size_t s = 0; s < segments.size(); ++s)
            series[s].push_back(frame ? segment_speed(*frame, segments[s]) : std::nullopt);
    }
    return series;
}

} // namespace detail_eval

inline EvaluateResult run_evaluate(const PipelineConfig& cfg, const fs::path& dir,
                                   const std::vector<std::pair<std::string, std::string>>& methods,
                                   const std::string& truth_file = "") {
    std::string truth_path = truth_file.empty() ? art_snapshots(dir) : truth_file;
    require_artifact(truth_path, "estimate");
    require_artifact(art_segments(dir), "synth");
    require_artifact(art_routes(dir), "preprocess");

    auto truth = read_snapshots_csv(truth_path, cfg.grid);
    auto segments = read_segments_csv(art_segments(dir), cfg.grid);
    auto routes = read_routes_ndjson(art_routes(dir), cfg.grid);

    std::vector<std::int64_t> origins;
    for (std::int64_t t0 = cfg.origin_start_s; t0 < cfg.origin_end_s; t0 += cfg.origin_stride_s)
        origins.push_back(t0);
    std::vector<std::int64_t> target_times;
    for (std::int64_t t0 : origins) target_times.push_back(t0 + 60ll * cfg.eval_lead_min);

    auto real = detail_eval::truth_series(truth, target_times, segments);

    fs::path eval_dir = dir / "eval";
    fs::create_directories(eval_dir);

    EvaluateResult result;
    std::ofstream series_csv(eval_dir / "segment_series.csv");
    series_csv << "method,segment,t_s,real_kmh,pred_kmh\n";
    auto dump_series = [&](const std::string& method,
                           const std::vector<std::vector<std::optional<double>>>& pred) {
        for (std::size_t s = 0; s < segments.size(); ++s)
            for (std::size_t k = 0; k < target_times.size(); ++k) {
                if (!pred[s][k] && !real[s][k]) continue;
                series_csv << method << ',' << segments[s].label << ',' << target_times[k] << ','
                           << (real[s][k] ? fmt_g10(*real[s][k]) : "") << ','
                           << (pred[s][k] ? fmt_g10(*pred[s][k]) : "") << '\n';
            }
    };

    ErrorHistogram hist;
    std::vector<double> tt_rel_errs;

    for (const auto& [method, file] : methods) {
        require_artifact(file, "forecast");
        auto archive = read_forecasts_csv(file, cfg.grid);
        auto pred = detail_eval::segment_series(archive, origins, cfg.eval_lead_min, segments);
        SegmentScores sc = score_segments(pred, real, cfg.eval_min_pairs);
        result.scores.push_back({method, sc.rmse_kmh, sc.accuracy, sc.segments_scored});
        dump_series(method, pred);

        // Travel-time scoring uses the first (primary) forecast archive.
        if (tt_rel_errs.empty() && !routes.empty()) {
            std::ofstream trips_csv(eval_dir / "traveltime_trips.csv");
            trips_csv << "taxi_id,depart_s,real_s,pred_s,rel_err\n";
            for (const auto& r : routes) {
                if (r.degenerate()) continue;
                double real_tt = r.arrival_s() - r.depart_s();
                if (real_tt < cfg.traveltime_min_s || real_tt > cfg.traveltime_max_s) continue;
                if (origins.empty()) break;
                // forecast issued one horizon before departure; trips outside
                // the covered departure window are not scorable
                if (r.depart_s() < static_cast<double>(origins.front()) + cfg.horizon_s ||
                    r.depart_s() >= static_cast<double>(origins.back()) + cfg.horizon_s +
                                        static_cast<double>(cfg.origin_stride_s))
                    continue;
                auto t0 = static_cast<std::int64_t>(
                              std::floor((r.depart_s() - cfg.horizon_s) / cfg.origin_stride_s)) *
                          cfg.origin_stride_s;
                t0 = std::clamp(t0, origins.front(), origins.back());
                std::vector<DirectedCellState> frames;
                for (int lead = 10; lead <= 60; lead += 10) {
                    const auto* fr = archive.frame_at(t0, lead);
                    if (!fr) continue;
                    DirectedCellState st{static_cast<double>(t0 + 60ll * lead),
                                         DirectedField<double>(cfg.grid.nx, cfg.grid.ny, 0.0),
                                         DirectedField<double>(cfg.grid.nx, cfg.grid.ny, 0.0)};
                    for (const auto& row : *fr) st.V.at(row.cell, row.dir) = row.v_kmh;
                    frames.push_back(std::move(st));
                }
                if (frames.empty()) continue;
                auto tt = travel_time(r, frames, cfg.grid.cell_size, cfg.sim.v_min_kmh);
                double rel = (tt.seconds - real_tt) / real_tt;
                tt_rel_errs.push_back(rel);
                hist.add(rel);
                trips_csv << r.taxi_id << ',' << fmt_g10(r.depart_s()) << ',' << fmt_g10(real_tt)
                          << ',' << fmt_g10(tt.seconds) << ',' << fmt_g10(rel) << '\n';
            }
        }
    }

    // Extrapolation baseline: truth at the origin predicted for the target.
    auto base = detail_eval::truth_series(truth, origins, segments);
    std::vector<std::vector<std::optional<double>>> base_pred(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s)
        base_pred[s] = extrapolation_baseline(base[s]);
    SegmentScores sc = score_segments(base_pred, real, cfg.eval_min_pairs);
    result.scores.push_back({"extrapolation", sc.rmse_kmh, sc.accuracy, sc.segments_scored});
    dump_series("extrapolation", base_pred);

    write_histogram_csv((eval_dir / "traveltime_hist.csv").string(), hist);
    if (!tt_rel_errs.empty()) {
        std::sort(tt_rel_errs.begin(), tt_rel_errs.end());
        result.median_tt_rel_err = tt_rel_errs[tt_rel_errs.size() / 2];
        result.trips_scored = tt_rel_errs.size();
    }

    std::ofstream scores_csv(eval_dir / "scores.csv");
    scores_csv << "method,rmse_kmh,accuracy,segments\n";
    for (const auto& s : result.scores)
        scores_csv << s.method << ',' << fmt_g10(s.rmse_kmh) << ',' << fmt_g10(s.accuracy) << ','
                   << s.segments_scored << '\n';
    return result;
}

// ---------------------------------------------------------------------------
// report: aggregate evaluation outputs into the summary table + figure data

inline std::string run_report(const PipelineConfig&, const fs::path& dir) {
    fs::path eval_dir = dir / "eval";
    if (!fs::exists(eval_dir / "scores.csv"))
        throw MissingArtifactError("evaluation directory is empty; run `evaluate` first");

    fs::path report_dir = dir / "report";
    fs::create_directories(report_dir);

    // table: method,rmse_kmh,accuracy
    std::ifstream in(eval_dir / "scores.csv");
    std::string line, table;
    std::vector<std::string_view> f;
    bool first = true;
    std::string rendered = "method               rmse_kmh   accuracy\n";
    table = "method,rmse_kmh,accuracy\n";
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue;
        }
        split_csv_line(line, f);
        if (f.size() < 3) continue;
        table += std::string(f[0]) + "," + std::string(f[1]) + "," + std::string(f[2]) + "\n";
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-20s %-10.4g %-10.4g\n", std::string(f[0]).c_str(),
                      parse_double(f[1], "rmse"), parse_double(f[2], "accuracy"));
        rendered += buf;
        ++rows;
    }
    if (rows == 0) throw MissingArtifactError("scores.csv has no data rows; evaluation was empty");

    std::ofstream(report_dir / "table1.csv") << table;
    fs::copy_file(eval_dir / "segment_series.csv", report_dir / "fig7_segment_series.csv",
                  fs::copy_options::overwrite_existing);
    fs::copy_file(eval_dir / "traveltime_hist.csv", report_dir / "fig9_traveltime_hist.csv",
                  fs::copy_options::overwrite_existing);
    return rendered;
}

} // namespace gridflow::stages
