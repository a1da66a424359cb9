#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridflow/csv.hpp"
#include "gridflow/geo.hpp"
#include "gridflow/grid.hpp"
#include "gridflow/route.hpp"

namespace gridflow {

enum class TaxiStatus : int { Vacant = 0, Occupied = 1, NonOperating = 2 };

struct GpsRecord {
    std::string taxi_id;
    double t_s = 0.0; // seconds since epoch
    double lon_deg = 0.0;
    double lat_deg = 0.0;
    TaxiStatus status = TaxiStatus::Vacant;
};

/// Record-level bookkeeping across the cleaning pipeline. Every input record
/// lands in exactly one bucket, so kept + all drop counters == input.
struct IngestStats {
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t dropped_macroscopic = 0; // invalid or out-of-bounds position
    std::size_t dropped_dedup = 0;       // duplicate timestamp within a trajectory
    std::size_t dropped_status = 0;      // not occupied
    std::size_t dropped_mesoscopic = 0;  // >= 10 km displacement
    std::size_t routes_emitted = 0;
    std::size_t routes_short = 0;      // trips with < 2 points
    std::size_t routes_degenerate = 0; // trips that never left one cell

    std::size_t dropped_total() const {
        return dropped_macroscopic + dropped_dedup + dropped_status + dropped_mesoscopic;
    }
};

struct IngestConfig {
    double max_displacement_m = 10000.0; // mesoscopic error threshold
    double max_gap_s = 300.0;            // time gap that splits a trip
};

/// A cleaned record with its projected position and grid cell.
struct CleanRecord {
    std::string taxi_id;
    double t_s;
    Vec2 pos;
    CellIndex cell;
    TaxiStatus status;
};

/// One occupied trip as a list of (time, cell) points, before rasterization.
struct DiscreteRoute {
    std::string taxi_id;
    std::int64_t day = 0;
    std::vector<double> t_s;
    std::vector<CellIndex> cells;
    std::vector<Vec2> pos;
};

inline std::int64_t civil_day(double t_s) {
    return static_cast<std::int64_t>(std::floor(t_s / 86400.0));
}

/// Drops records with non-finite fields or positions outside the grid.
/// Order is preserved.
inline std::vector<CleanRecord> filter_macroscopic(std::span<const GpsRecord> records,
                                                   const GeoProjection& proj,
                                                   const GridConfig& grid, IngestStats& stats) {
    std::vector<CleanRecord> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        stats.input += 1;
        if (!std::isfinite(rec.t_s) || !std::isfinite(rec.lon_deg) || !std::isfinite(rec.lat_deg)) {
            stats.dropped_macroscopic += 1;
            continue;
        }
        Vec2 p = proj.to_planar(rec.lon_deg, rec.lat_deg);
        auto cell = cell_of_point(p, grid);
        if (!cell) {
            stats.dropped_macroscopic += 1;
            continue;
        }
        out.push_back({rec.taxi_id, rec.t_s, p, *cell, rec.status});
    }
    return out;
}

/// Groups records by (taxi, civil day), sorts each group by time and drops
/// exact duplicate timestamps keeping the first-seen record. Groups come out
/// ordered by (taxi_id, day).
inline std::vector<std::vector<CleanRecord>> build_trajectories(std::vector<CleanRecord> records,
                                                                IngestStats& stats) {
    std::stable_sort(records.begin(), records.end(), [](const CleanRecord& a, const CleanRecord& b) {
        if (a.taxi_id != b.taxi_id) return a.taxi_id < b.taxi_id;
        std::int64_t da = civil_day(a.t_s), db = civil_day(b.t_s);
        if (da != db) return da < db;
        return a.t_s < b.t_s;
    });
    std::vector<std::vector<CleanRecord>> groups;
    for (auto& rec : records) {
        bool fresh = groups.empty() || groups.back().front().taxi_id != rec.taxi_id ||
                     civil_day(groups.back().front().t_s) != civil_day(rec.t_s);
        if (fresh) {
            groups.emplace_back();
        } else if (groups.back().back().t_s == rec.t_s) {
            stats.dropped_dedup += 1;
            continue;
        }
        groups.back().push_back(std::move(rec));
    }
    return groups;
}

/// Occupied-only trip extraction from one (taxi, day) trajectory: walks
/// first to last, removes records displaced >= 10 km from the previous kept
/// record, and starts a new trip after a >= 5 min silence. Trips need at
/// least two points to count.
inline std::vector<DiscreteRoute> split_trips(std::span<const CleanRecord> trajectory,
                                              const IngestConfig& cfg, IngestStats& stats) {
    std::vector<DiscreteRoute> out;
    DiscreteRoute cur;
    const CleanRecord* last_kept = nullptr;

    auto flush = [&]() {
        if (cur.t_s.size() >= 2) {
            stats.routes_emitted += 1;
            out.push_back(std::move(cur));
        } else if (!cur.t_s.empty()) {
            stats.routes_short += 1;
            stats.kept += cur.t_s.size(); // still cleaned records, just too few
        }
        cur = DiscreteRoute{};
    };

    for (const auto& rec : trajectory) {
        if (rec.status != TaxiStatus::Occupied) {
            stats.dropped_status += 1;
            continue;
        }
        if (last_kept) {
            double dx = rec.pos.x - last_kept->pos.x;
            double dy = rec.pos.y - last_kept->pos.y;
            if (std::hypot(dx, dy) >= cfg.max_displacement_m) {
                stats.dropped_mesoscopic += 1;
                continue;
            }
            if (rec.t_s - last_kept->t_s >= cfg.max_gap_s) flush();
        }
        if (cur.t_s.empty()) {
            cur.taxi_id = rec.taxi_id;
            cur.day = civil_day(rec.t_s);
        }
        cur.t_s.push_back(rec.t_s);
        cur.cells.push_back(rec.cell);
        cur.pos.push_back(rec.pos);
        last_kept = &rec;
    }
    flush();
    for (const auto& r : out) stats.kept += r.t_s.size();
    return out;
}

/// Rasterizes a discrete route onto the grid. Cell entry times are linear in
/// the bracketing record timestamps, proportional to cells traversed; records
/// that stay in one cell only stretch the dwell. A route whose records never
/// leave one cell comes out degenerate (single cell).
inline ContinuousRoute rasterize_route(const DiscreteRoute& r, const GridConfig& grid) {
    (void)grid;
    ContinuousRoute out;
    out.taxi_id = r.taxi_id;
    out.cells.push_back(r.cells.front());
    out.entries_s.push_back(r.t_s.front());
    for (std::size_t i = 1; i < r.cells.size(); ++i) {
        auto steps = rasterize_segment(out.cells.back(), r.cells[i]);
        if (steps.empty()) continue; // dwell inside the current cell
        double t0 = out.entries_s.back() > r.t_s[i - 1] ? out.entries_s.back() : r.t_s[i - 1];
        double span = r.t_s[i] - t0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            out.cells.push_back(steps[k].cell);
            out.entries_s.push_back(t0 + span * static_cast<double>(k + 1) /
                                             static_cast<double>(steps.size()));
        }
    }
    return out;
}

/// Full cleaning pipeline: macroscopic filter, trajectory grouping, trip
/// splitting and rasterization. Output routes are ordered by (taxi_id,
/// departure time).
inline std::vector<ContinuousRoute> ingest_records(std::span<const GpsRecord> records,
                                                   const GeoProjection& proj,
                                                   const GridConfig& grid,
                                                   const IngestConfig& cfg, IngestStats& stats) {
    auto clean = filter_macroscopic(records, proj, grid, stats);
    auto groups = build_trajectories(std::move(clean), stats);
    std::vector<ContinuousRoute> routes;
    for (const auto& traj : groups) {
        for (const auto& disc : split_trips(traj, cfg, stats)) {
            ContinuousRoute route = rasterize_route(disc, grid);
            if (route.degenerate()) {
                stats.routes_degenerate += 1;
                stats.routes_emitted -= 1;
                continue;
            }
            route.validate();
            routes.push_back(std::move(route));
        }
    }
    std::stable_sort(routes.begin(), routes.end(), [](const ContinuousRoute& a, const ContinuousRoute& b) {
        if (a.taxi_id != b.taxi_id) return a.taxi_id < b.taxi_id;
        return a.depart_s() < b.depart_s();
    });
    return routes;
}

// ---------------------------------------------------------------------------
// GPS CSV: taxi_id,timestamp_unix_s,lon_deg,lat_deg,status (header optional)

inline void write_gps_csv(const std::string& path, std::span<const GpsRecord> records) {
    auto out = open_output(path);
    out << "taxi_id,timestamp_unix_s,lon_deg,lat_deg,status\n";
    char buf[96];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, ",%.3f,%.8f,%.8f,%d\n", r.t_s, r.lon_deg, r.lat_deg,
                      static_cast<int>(r.status));
        out << r.taxi_id << buf;
    }
}

inline std::vector<GpsRecord> read_gps_csv(const std::string& path) {
    auto in = open_input(path);
    std::vector<GpsRecord> records;
    std::string line;
    std::vector<std::string_view> f;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("taxi_id", 0) == 0) continue; // header detected
        }
        split_csv_line(line, f);
        if (f.size() != 5) throw DataError("gps csv: expected 5 fields: " + line);
        GpsRecord r;
        r.taxi_id = std::string(f[0]);
        r.t_s = parse_double(f[1], "timestamp");
        r.lon_deg = parse_double(f[2], "lon");
        r.lat_deg = parse_double(f[3], "lat");
        long long st = parse_int(f[4], "status");
        if (st < 0 || st > 2) throw DataError("gps csv: status must be 0, 1 or 2: " + line);
        r.status = static_cast<TaxiStatus>(st);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Route archive: newline-delimited JSON, one route per line.

inline void write_routes_ndjson(const std::string& path, std::span<const ContinuousRoute> routes) {
    auto out = open_output(path);
    for (const auto& r : routes) {
        nlohmann::json j;
        j["taxi_id"] = r.taxi_id;
        j["depart_s"] = r.depart_s();
        auto cells = nlohmann::json::array();
        for (const auto& c : r.cells) cells.push_back({c.col, c.row});
        j["cells"] = std::move(cells);
        j["entries_s"] = r.entries_s;
        out << j.dump() << '\n';
    }
}

inline std::vector<ContinuousRoute> read_routes_ndjson(const std::string& path,
                                                       const GridConfig& grid) {
    auto in = open_input(path);
    std::vector<ContinuousRoute> routes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError("route archive: invalid JSON line: " + line);
        ContinuousRoute r;
        r.taxi_id = j.at("taxi_id").get<std::string>();
        for (const auto& c : j.at("cells")) {
            CellIndex cell{c.at(0).get<int>(), c.at(1).get<int>()};
            if (!in_bounds(cell, grid)) throw DataError("route archive: cell out of bounds");
            r.cells.push_back(cell);
        }
        r.entries_s = j.at("entries_s").get<std::vector<double>>();
        r.validate();
        routes.push_back(std::move(r));
    }
    return routes;
}

} // namespace gridflow
