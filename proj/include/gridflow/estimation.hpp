#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridflow/csv.hpp"
#include "gridflow/field.hpp"
#include "gridflow/route.hpp"

namespace gridflow {

struct EstimationConfig {
    double dt_s = 60.0;     // spacing of the instantaneous picture frames
    int window_steps = 10;  // frames averaged/summed per window
    double stride_s = 600.0; // non-overlapping window stride
    double v_cap_kmh = 120.0; // guard against zero-duration cell traversals
};

/// Where a vehicle is at time t: its cell, the direction of the current step,
/// and its speed across the current cell in km/h.
struct VehicleState {
    CellIndex cell;
    Direction dir;
    double v_kmh;
};

inline std::optional<VehicleState> vehicle_state_at(const ContinuousRoute& r,
                                                    std::span<const Direction> dirs, double t,
                                                    double cell_size, double v_cap_kmh) {
    auto seg = route_segment_at(r, t);
    if (!seg) return std::nullopt;
    std::size_t i = *seg;
    double dt = r.entries_s[i + 1] - r.entries_s[i];
    double v = dt > 0.0 ? 3.6 * cell_size / dt : v_cap_kmh;
    if (v > v_cap_kmh) v = v_cap_kmh;
    return VehicleState{r.cells[i], dirs[i + 1], v};
}

inline std::optional<VehicleState> vehicle_state_at(const ContinuousRoute& r, double t,
                                                    double cell_size, double v_cap_kmh = 120.0) {
    if (r.degenerate()) return std::nullopt;
    auto dirs = route_directions(r);
    return vehicle_state_at(r, dirs, t, cell_size, v_cap_kmh);
}

/// One picture frame of the traffic state: per (cell, direction) vehicle
/// count and speed sum, with a touched-index list so sparse frames can be
/// folded and cleared in O(vehicles).
class InstantFrame {
public:
    InstantFrame(int nx, int ny) : sum_v_(nx, ny, 0.0), count_(nx, ny, 0) {}

    void add(CellIndex c, Direction d, double v_kmh) {
        std::size_t i = sum_v_.flat(c, d);
        if (count_[i] == 0) touched_.push_back(i);
        count_[i] += 1;
        sum_v_[i] += v_kmh;
    }

    void clear() {
        for (std::size_t i : touched_) {
            count_[i] = 0;
            sum_v_[i] = 0.0;
        }
        touched_.clear();
    }

    int count_at(std::size_t flat) const { return count_[flat]; }
    double mean_v_at(std::size_t flat) const { return sum_v_[flat] / count_[flat]; }
    const std::vector<std::size_t>& touched() const { return touched_; }
    const DirectedField<int>& counts() const { return count_; }
    int total_count() const {
        int n = 0;
        for (std::size_t i : touched_) n += count_[i];
        return n;
    }

private:
    DirectedField<double> sum_v_;
    DirectedField<int> count_;
    std::vector<std::size_t> touched_;
};

/// Routes with their per-step direction cache. Building the cache once and
/// sharing it matters: estimation sweeps, the simulator and every forecast
/// origin all walk the same route set.
class RouteSet {
public:
    RouteSet() = default;
    explicit RouteSet(std::span<const ContinuousRoute> rs) : routes_(rs) {
        dirs_.reserve(rs.size());
        for (const auto& r : rs)
            dirs_.push_back(r.degenerate() ? std::vector<Direction>{} : route_directions(r));
    }

    std::span<const ContinuousRoute> routes() const { return routes_; }
    std::size_t size() const { return routes_.size(); }
    const ContinuousRoute& route(std::size_t i) const { return routes_[i]; }
    std::span<const Direction> dirs(std::size_t i) const { return dirs_[i]; }

private:
    std::span<const ContinuousRoute> routes_;
    std::vector<std::vector<Direction>> dirs_;
};

namespace detail {

inline void accumulate_instant(const RouteSet& set, double t, double cell_size, double v_cap,
                               InstantFrame& frame) {
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& r = set.route(k);
        if (r.degenerate()) continue;
        if (t < r.entries_s.front() || t >= r.entries_s.back()) continue;
        auto st = vehicle_state_at(r, set.dirs(k), t, cell_size, v_cap);
        if (st) frame.add(st->cell, st->dir, st->v_kmh);
    }
}

} // namespace detail

/// Instantaneous per-(cell, direction) state at time t. Cells with no
/// vehicles have count 0 and an undefined mean speed.
inline InstantFrame instantaneous_state(std::span<const ContinuousRoute> routes, double t,
                                        const GridConfig& grid, double v_cap_kmh = 120.0) {
    RouteSet set(routes);
    InstantFrame frame(grid.nx, grid.ny);
    detail::accumulate_instant(set, t, grid.cell_size, v_cap_kmh, frame);
    return frame;
}

/// Windowed state: V averaged and N summed over the window's frames.
struct DirectedCellState {
    double t_s = 0.0;
    DirectedField<double> V; // km/h, 0 where the window saw no vehicles
    DirectedField<double> N; // frame-count sum, dimensionless
};

namespace detail {

// Folds the window_steps frames at t_n, t_n-dt, ... into V (mean with empty
// frames contributing zero) and N (plain sum). Shared by averaged_state and
// the window sweep so both are bit-identical.
inline void fold_window(const RouteSet& set, double t_n, const GridConfig& grid,
                        const EstimationConfig& cfg, InstantFrame& scratch,
                        DirectedField<double>& V, DirectedField<double>& N,
                        std::vector<std::size_t>& touched) {
    for (int s = 0; s < cfg.window_steps; ++s) {
        double t = t_n - s * cfg.dt_s;
        scratch.clear();
        accumulate_instant(set, t, grid.cell_size, cfg.v_cap_kmh, scratch);
        for (std::size_t i : scratch.touched()) {
            if (N[i] == 0.0 && V[i] == 0.0) touched.push_back(i);
            V[i] += scratch.mean_v_at(i);
            N[i] += scratch.count_at(i);
        }
    }
    for (std::size_t i : touched) V[i] /= cfg.window_steps;
}

} // namespace detail

inline DirectedCellState averaged_state(std::span<const ContinuousRoute> routes, double t_n,
                                        const GridConfig& grid, const EstimationConfig& cfg = {}) {
    RouteSet set(routes);
    DirectedCellState out{t_n, DirectedField<double>(grid.nx, grid.ny, 0.0),
                          DirectedField<double>(grid.nx, grid.ny, 0.0)};
    InstantFrame scratch(grid.nx, grid.ny);
    std::vector<std::size_t> touched;
    detail::fold_window(set, t_n, grid, cfg, scratch, out.V, out.N, touched);
    return out;
}

/// One flux-occupancy sample from a ten-minute window.
struct FluxSample {
    double n = 0.0;    // occupancy (ten-frame count sum)
    double flux = 0.0; // n * mean speed, km/h-weighted
};

/// Flux-occupancy samples per flat (cell, direction) index over all
/// non-overlapping windows in [start_s, end_s]. Windows where a cell saw no
/// vehicle are omitted for that cell.
class SampleArchive {
public:
    SampleArchive(int nx, int ny)
        : nx_(nx), ny_(ny),
          samples_(static_cast<std::size_t>(nx) * ny * kNumDirections) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return samples_.size(); }
    std::vector<FluxSample>& operator[](std::size_t i) { return samples_[i]; }
    const std::vector<FluxSample>& operator[](std::size_t i) const { return samples_[i]; }

private:
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<FluxSample>> samples_;
};

inline SampleArchive window_samples(const RouteSet& set, double start_s, double end_s,
                                    const GridConfig& grid, const EstimationConfig& cfg = {}) {
    SampleArchive archive(grid.nx, grid.ny);
    DirectedField<double> V(grid.nx, grid.ny, 0.0);
    DirectedField<double> N(grid.nx, grid.ny, 0.0);
    InstantFrame scratch(grid.nx, grid.ny);
    std::vector<std::size_t> touched;
    for (double t_n = start_s + cfg.stride_s; t_n <= end_s + 1e-9; t_n += cfg.stride_s) {
        touched.clear();
        detail::fold_window(set, t_n, grid, cfg, scratch, V, N, touched);
        for (std::size_t i : touched) {
            if (N[i] > 0.0) archive[i].push_back({N[i], N[i] * V[i]});
            V[i] = 0.0;
            N[i] = 0.0;
        }
    }
    return archive;
}

inline SampleArchive window_samples(std::span<const ContinuousRoute> routes, double start_s,
                                    double end_s, const GridConfig& grid,
                                    const EstimationConfig& cfg = {}) {
    RouteSet set(routes);
    return window_samples(set, start_s, end_s, grid, cfg);
}

// ---------------------------------------------------------------------------
// Snapshot CSV: t_s,col,row,dir,V_kmh,N  (only nonzero entries are written)

struct SnapshotRow {
    std::int64_t t_s;
    CellIndex cell;
    Direction dir;
    double v_kmh;
    double n;
};

inline void write_snapshot_rows(std::ofstream& out, const DirectedCellState& st) {
    std::int64_t t = static_cast<std::int64_t>(std::llround(st.t_s));
    for (std::size_t i = 0; i < st.V.size(); ++i) {
        if (st.N[i] == 0.0 && st.V[i] == 0.0) continue;
        CellIndex c = st.V.cell_of_flat(i);
        out << t << ',' << c.col << ',' << c.row << ',' << dir_char(st.V.dir_of_flat(i)) << ','
            << fmt_g10(st.V[i]) << ',' << fmt_g10(st.N[i]) << '\n';
    }
}

inline void write_snapshots_csv(const std::string& path, std::span<const DirectedCellState> snaps) {
    auto out = open_output(path);
    out << "t_s,col,row,dir,V_kmh,N\n";
    for (const auto& s : snaps) write_snapshot_rows(out, s);
}

/// Sparse snapshot series keyed by integer second. Reading tolerates any row
/// order; rows for one timestamp form one snapshot.
struct SnapshotSeries {
    GridConfig grid;
    std::vector<std::int64_t> times;                 // sorted
    std::vector<std::vector<SnapshotRow>> frames;    // aligned with times

    const std::vector<SnapshotRow>* frame_at(std::int64_t t) const {
        auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.end() || *it != t) return nullptr;
        return &frames[static_cast<std::size_t>(it - times.begin())];
    }
};

inline SnapshotSeries read_snapshots_csv(const std::string& path, const GridConfig& grid) {
    auto in = open_input(path);
    SnapshotSeries series;
    series.grid = grid;
    std::string line;
    std::vector<std::string_view> f;
    bool first = true;
    std::vector<SnapshotRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, f);
        if (first) {
            first = false;
            if (line.rfind("t_s", 0) == 0) continue; // header
        }
        if (f.size() != 6) throw DataError("snapshot csv: expected 6 fields: " + line);
        SnapshotRow r;
        r.t_s = parse_int(f[0], "t_s");
        r.cell = {static_cast<int>(parse_int(f[1], "col")), static_cast<int>(parse_int(f[2], "row"))};
        if (!in_bounds(r.cell, grid)) throw DataError("snapshot csv: cell out of bounds: " + line);
        if (f[3].size() != 1) throw DataError("snapshot csv: bad dir: " + line);
        r.dir = dir_from_char(f[3][0]);
        r.v_kmh = parse_double(f[4], "V_kmh");
        r.n = parse_double(f[5], "N");
        rows.push_back(r);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SnapshotRow& a, const SnapshotRow& b) { return a.t_s < b.t_s; });
    for (const auto& r : rows) {
        if (series.times.empty() || series.times.back() != r.t_s) {
            series.times.push_back(r.t_s);
            series.frames.emplace_back();
        }
        series.frames.back().push_back(r);
    }
    return series;
}

} // namespace gridflow
