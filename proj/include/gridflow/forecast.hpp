#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gridflow/csv.hpp"
#include "gridflow/estimation.hpp"
#include "gridflow/simulator.hpp"

namespace gridflow {

struct ForecastConfig {
    double horizon_s = 3600.0;
    double lead_stride_s = 600.0; // snapshot spacing within the horizon
    SimConfig sim{};
};

/// One emitted forecast: state predicted for t0 + lead, issued at t0.
struct ForecastFrame {
    std::int64_t t0_s = 0;
    int lead_min = 0;
    DirectedCellState state;
};

/// Builds a simulator whose vehicle population is restarted from the
/// historical routes at t0: trips en route are placed at their interpolated
/// position, later departures stay pending, and the occupancy window is
/// seeded from the historical instantaneous counts of the preceding minutes.
/// The speed field starts at the fundamental-diagram equilibrium for the
/// seeded occupancy; assimilating an observation at t0 then overwrites every
/// cell that has data.
namespace detail {

// Seeds the simulator's population, occupancy window and speed field from
// the historical routes it was constructed over.
inline void seed_state_from_history(Simulator& sim, std::int64_t t0_s, const GridConfig& grid,
                                    const FdField& fd, const ChiProfile& chi,
                                    const SimConfig& cfg) {
    const RouteSet& history = sim.demand_set();
    sim.skip_departures_before(static_cast<double>(t0_s));

    double t0 = static_cast<double>(t0_s);
    for (std::size_t k = 0; k < history.size(); ++k) {
        const auto& r = history.route(k);
        if (r.degenerate() || r.depart_s() >= t0 || r.arrival_s() <= t0) continue;
        double l = route_position_at(r, t0, grid.cell_size);
        auto st = vehicle_state_at(r, history.dirs(k), t0, grid.cell_size, cfg.v_cap_kmh);
        sim.seed_agent(k, l, st ? st->v_kmh : cfg.v_min_kmh);
    }

    // Historical occupancy for the nine instants before t0; the first step's
    // own frame completes the ten-point window.
    InstantFrame frame(grid.nx, grid.ny);
    for (int s = cfg.occupancy_window - 1; s >= 1; --s) {
        frame.clear();
        accumulate_instant(history, t0 - s * cfg.dt_s, grid.cell_size, cfg.v_cap_kmh, frame);
        std::vector<std::pair<std::size_t, int>> counts;
        counts.reserve(frame.touched().size());
        for (std::size_t i : frame.touched()) counts.emplace_back(i, frame.count_at(i));
        std::sort(counts.begin(), counts.end());
        sim.seed_occupancy(counts);
    }

    double chi0 = chi(t0);
    auto& v = sim.speed_field();
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = eval_vn(fd.params[i], chi0 * sim.occupancy().at(i), cfg.v_min_kmh);
}

} // namespace detail

inline Simulator make_forecast_state(const RouteSet& history, std::int64_t t0_s,
                                     const GridConfig& grid, const FdField& fd,
                                     const ChiProfile& chi, const SimConfig& cfg) {
    Simulator sim(grid, fd, chi, cfg, history, static_cast<double>(t0_s));
    detail::seed_state_from_history(sim, t0_s, grid, fd, chi, cfg);
    return sim;
}

inline Simulator make_forecast_state(std::span<const ContinuousRoute> routes, std::int64_t t0_s,
                                     const GridConfig& grid, const FdField& fd,
                                     const ChiProfile& chi, const SimConfig& cfg) {
    Simulator sim(grid, fd, chi, cfg, routes, static_cast<double>(t0_s));
    detail::seed_state_from_history(sim, t0_s, grid, fd, chi, cfg);
    return sim;
}

/// Rolls an assimilated state one horizon forward with no further
/// observations, emitting a visited-cell snapshot every lead_stride seconds.
inline std::vector<ForecastFrame> forecast(Simulator& sim, std::int64_t t0_s,
                                           const ForecastConfig& cfg) {
    std::vector<ForecastFrame> frames;
    int leads = static_cast<int>(std::llround(cfg.horizon_s / cfg.lead_stride_s));
    for (int k = 1; k <= leads; ++k) {
        double target = static_cast<double>(t0_s) + k * cfg.lead_stride_s;
        sim.run_until(target);
        ForecastFrame f;
        f.t0_s = t0_s;
        f.lead_min = static_cast<int>(std::llround(k * cfg.lead_stride_s / 60.0));
        f.state = sim.snapshot();
        frames.push_back(std::move(f));
    }
    return frames;
}

/// Issues one forecast per origin on the lattice [start, end) with stride
/// origin_stride: assimilate the historical snapshot at t0, then roll the
/// horizon. Origins without a historical snapshot are skipped.
inline std::vector<ForecastFrame>
rolling_forecasts(const RouteSet& history, const SnapshotSeries& observations,
                  std::int64_t start_s, std::int64_t end_s, std::int64_t origin_stride_s,
                  const GridConfig& grid, const FdField& fd, const ChiProfile& chi,
                  const ForecastConfig& cfg) {
    std::vector<ForecastFrame> all;
    for (std::int64_t t0 = start_s; t0 < end_s; t0 += origin_stride_s) {
        const auto* obs = observations.frame_at(t0);
        if (!obs) continue;
        Simulator sim = make_forecast_state(history, t0, grid, fd, chi, cfg.sim);
        sim.assimilate(*obs, static_cast<double>(t0));
        auto frames = forecast(sim, t0, cfg);
        for (auto& f : frames) all.push_back(std::move(f));
    }
    return all;
}

inline std::vector<ForecastFrame>
rolling_forecasts(std::span<const ContinuousRoute> routes, const SnapshotSeries& observations,
                  std::int64_t start_s, std::int64_t end_s, std::int64_t origin_stride_s,
                  const GridConfig& grid, const FdField& fd, const ChiProfile& chi,
                  const ForecastConfig& cfg) {
    RouteSet history(routes);
    return rolling_forecasts(history, observations, start_s, end_s, origin_stride_s, grid, fd,
                             chi, cfg);
}

// ---------------------------------------------------------------------------
// Forecast archive CSV: t0_s,lead_min,col,row,dir,V_pred_kmh

inline void write_forecasts_csv(const std::string& path, std::span<const ForecastFrame> frames) {
    auto out = open_output(path);
    out << "t0_s,lead_min,col,row,dir,V_pred_kmh\n";
    for (const auto& f : frames) {
        for (std::size_t i = 0; i < f.state.V.size(); ++i) {
            if (f.state.N[i] == 0.0 && f.state.V[i] == 0.0) continue;
            CellIndex c = f.state.V.cell_of_flat(i);
            out << f.t0_s << ',' << f.lead_min << ',' << c.col << ',' << c.row << ','
                << dir_char(f.state.V.dir_of_flat(i)) << ',' << fmt_g10(f.state.V[i]) << '\n';
        }
    }
}

struct ForecastArchive {
    struct Key {
        std::int64_t t0_s;
        int lead_min;
        bool operator<(const Key& o) const {
            if (t0_s != o.t0_s) return t0_s < o.t0_s;
            return lead_min < o.lead_min;
        }
        bool operator==(const Key&) const = default;
    };
    std::vector<Key> keys; // sorted
    std::vector<std::vector<SnapshotRow>> frames;

    const std::vector<SnapshotRow>* frame_at(std::int64_t t0_s, int lead_min) const {
        Key k{t0_s, lead_min};
        auto it = std::lower_bound(keys.begin(), keys.end(), k);
        if (it == keys.end() || !(*it == k)) return nullptr;
        return &frames[static_cast<std::size_t>(it - keys.begin())];
    }
};

inline ForecastArchive read_forecasts_csv(const std::string& path, const GridConfig& grid) {
    auto in = open_input(path);
    ForecastArchive archive;
    std::string line;
    std::vector<std::string_view> f;
    bool first = true;
    struct Row {
        ForecastArchive::Key key;
        SnapshotRow row;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("t0_s", 0) == 0) continue;
        }
        split_csv_line(line, f);
        if (f.size() != 6) throw DataError("forecast csv: expected 6 fields: " + line);
        Row r;
        r.key.t0_s = parse_int(f[0], "t0_s");
        r.key.lead_min = static_cast<int>(parse_int(f[1], "lead_min"));
        r.row.t_s = r.key.t0_s + 60ll * r.key.lead_min;
        r.row.cell = {static_cast<int>(parse_int(f[2], "col")),
                      static_cast<int>(parse_int(f[3], "row"))};
        if (!in_bounds(r.row.cell, grid)) throw DataError("forecast csv: cell out of bounds: " + line);
        if (f[4].size() != 1) throw DataError("forecast csv: bad dir: " + line);
        r.row.dir = dir_from_char(f[4][0]);
        r.row.v_kmh = parse_double(f[5], "V_pred_kmh");
        r.row.n = 0.0;
        rows.push_back(r);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.key < b.key; });
    for (auto& r : rows) {
        if (archive.keys.empty() || !(archive.keys.back() == r.key)) {
            archive.keys.push_back(r.key);
            archive.frames.emplace_back();
        }
        archive.frames.back().push_back(r.row);
    }
    return archive;
}

} // namespace gridflow
