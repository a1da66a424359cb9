#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/errors.hpp"
#include "gridflow/grid.hpp"

namespace gridflow {

/// A cleaned trip on the grid: cells[i] is entered at entries[i]; the trip
/// ends when the last cell is entered. cells[0] is the departure cell and
/// entries[0] the departure time. A single-cell route is degenerate (no
/// movement evidence) and is skipped by estimation and simulation.
struct ContinuousRoute {
    std::string taxi_id;
    std::vector<CellIndex> cells;
    std::vector<double> entries_s;

    double depart_s() const { return entries_s.front(); }
    double arrival_s() const { return entries_s.back(); }
    std::size_t steps() const { return cells.size() - 1; }
    bool degenerate() const { return cells.size() < 2; }
    double length_m(double cell_size) const { return static_cast<double>(steps()) * cell_size; }

    void validate() const {
        if (cells.empty() || cells.size() != entries_s.size())
            throw DataError("route: cells/entries size mismatch");
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (l1_distance(cells[i - 1], cells[i]) != 1)
                throw DataError("route: path is not 4-connected");
            if (entries_s[i] < entries_s[i - 1])
                throw DataError("route: entry times decrease");
        }
    }
};

/// Per-step directions for a route: dirs[i] is the move entering cells[i]
/// (dirs[0] is unused padding so indices line up with cells).
inline std::vector<Direction> route_directions(const ContinuousRoute& r) {
    std::vector<Direction> dirs(r.cells.size(), Direction::Right);
    for (std::size_t i = 1; i < r.cells.size(); ++i)
        dirs[i] = direction_between(r.cells[i - 1], r.cells[i]);
    return dirs;
}

/// Index i of the segment active at time t, i.e. entries[i] <= t < entries[i+1].
/// nullopt outside [depart, arrival) or for degenerate routes.
inline std::optional<std::size_t> route_segment_at(const ContinuousRoute& r, double t) {
    if (r.degenerate()) return std::nullopt;
    if (t < r.entries_s.front() || t >= r.entries_s.back()) return std::nullopt;
    auto it = std::upper_bound(r.entries_s.begin(), r.entries_s.end(), t);
    return static_cast<std::size_t>(it - r.entries_s.begin()) - 1;
}

/// Distance in meters along the route at time t (linear within a cell),
/// clamped to [0, length]. Used to seed mid-flight vehicles at forecast time.
inline double route_position_at(const ContinuousRoute& r, double t, double cell_size) {
    if (r.degenerate()) return 0.0;
    if (t <= r.entries_s.front()) return 0.0;
    if (t >= r.entries_s.back()) return r.length_m(cell_size);
    auto seg = route_segment_at(r, t);
    std::size_t i = *seg;
    double t0 = r.entries_s[i];
    double t1 = r.entries_s[i + 1];
    double frac = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    return (static_cast<double>(i) + frac) * cell_size;
}

} // namespace gridflow
