#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridflow/geo.hpp"
#include "gridflow/ingest.hpp"
#include "gridflow/rng.hpp"
#include "gridflow/simulator.hpp"

namespace gridflow {

/// One arterial line across the city: a full row (horizontal) or column
/// (vertical) whose cells carry arterial-tier parameters along the axis.
struct Corridor {
    bool horizontal = true;
    int line = 0; // row index if horizontal, column index otherwise
};

/// Demand rates in trips per minute. The corridor rate applies per corridor
/// and direction; rates are modulated by the rush-hour surge profile.
struct DemandProfile {
    double corridor_rate_per_min = 6.0;
    double collector_rate_per_min = 3.3;  // per collector street and direction
    double cross_rate_per_min = 0.1;      // corridor-to-corridor trips, citywide
    double background_rate_per_min = 0.2; // uniform random O-D, citywide
    double surge_am_amp = 0.6;            // multiplicative bump at the peaks
    double surge_pm_amp = 0.5;
    double surge_sigma_am_s = 4500.0;
    double surge_sigma_pm_s = 4500.0;
    double t_am_s = 7 * 3600.0;
    double t_pm_s = 17 * 3600.0 + 1800.0;

    double multiplier(double t_s) const {
        double za = (t_s - t_am_s) / surge_sigma_am_s;
        double zp = (t_s - t_pm_s) / surge_sigma_pm_s;
        return 1.0 + surge_am_amp * std::exp(-0.5 * za * za) +
               surge_pm_amp * std::exp(-0.5 * zp * zp);
    }
};

/// A synthetic city with known ground truth: per-cell true fundamental
/// diagrams, corridor layout and a demand profile.
struct OracleCity {
    GridConfig grid;
    GeoProjection proj; // lon/lat frame the emitted GPS uses
    FdField truth;
    std::vector<Corridor> corridors;
    std::vector<Corridor> collectors; // slower side streets with steady flow
    DemandProfile demand;
    ChiProfile chi; // true capacity coefficient driving the oracle dynamics
    std::uint64_t seed = 0;

    static bool on_line(const Corridor& k, CellIndex c, Direction d) {
        if (k.horizontal)
            return c.row == k.line && (d == Direction::Right || d == Direction::Left);
        return c.col == k.line && (d == Direction::Up || d == Direction::Down);
    }

    bool on_corridor(CellIndex c, Direction d) const {
        for (const auto& k : corridors)
            if (on_line(k, c, d)) return true;
        return false;
    }

    bool on_collector(CellIndex c, Direction d) const {
        for (const auto& k : collectors)
            if (on_line(k, c, d)) return true;
        return false;
    }
};

struct CityConfig {
    int nx = 64;
    int ny = 64;
    double cell_size_m = 100.0;
    int corridors = 20;
    DemandProfile demand{};
    ChiProfile chi{};
    // Parameter tiers. Arterials are slow-but-wide (high capacity in
    // vehicle-instant units) so that busy windows saturate the one-minute
    // sampling frames while staying in free flow; every truth diagram keeps a
    // valid congested branch whose flux falls past the apex.
    double arterial_vf_lo = 11.0, arterial_vf_hi = 15.0;
    double arterial_vs_frac_lo = 0.30, arterial_vs_frac_hi = 0.36;
    double arterial_nc_lo = 42.0, arterial_nc_hi = 54.0;
    double arterial_nm_mult_lo = 3.4, arterial_nm_mult_hi = 4.0;
    double local_vf_lo = 7.0, local_vf_hi = 11.0;
    double local_vs_frac = 0.30;
    double local_nc_lo = 6.0, local_nc_hi = 10.0;
    double local_nm_mult = 3.0;
    // Collector streets keep local speeds but enough capacity to carry their
    // own steady flow below congestion off-peak.
    int collectors = 4;
    double collector_nc_lo = 20.0, collector_nc_hi = 28.0;
};

/// Deterministic city generation: pick corridor lines, then draw tiered
/// parameters per (cell, direction).
inline OracleCity generate_city(std::uint64_t seed, const CityConfig& cfg) {
    OracleCity city;
    city.seed = seed;
    city.grid = GridConfig::centered(cfg.nx, cfg.ny, cfg.cell_size_m);
    city.proj = GeoProjection{116.39, 39.9};
    city.demand = cfg.demand;
    city.chi = cfg.chi;

    Rng rng(mix_seed(seed, "city"));

    // Corridor lines: alternate horizontal/vertical, away from the border,
    // no two corridors on the same line.
    std::vector<int> rows_free, cols_free;
    for (int r = 2; r < cfg.ny - 2; ++r) rows_free.push_back(r);
    for (int c = 2; c < cfg.nx - 2; ++c) cols_free.push_back(c);
    for (int k = 0; k < cfg.corridors; ++k) {
        bool horizontal = (k % 2) == 0;
        auto& pool = horizontal ? rows_free : cols_free;
        if (pool.empty()) break;
        std::size_t pick = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
        city.corridors.push_back({horizontal, pool[pick]});
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }

    // Collector side streets: deterministic sweep over non-corridor lines,
    // alternating orientation, away from the border.
    {
        int made = 0;
        for (int line = 3; line < std::max(cfg.nx, cfg.ny) - 12 && made < cfg.collectors;
             line += 7) {
            bool horizontal = (made % 2) == 0;
            bool taken = false;
            for (const auto& k : city.corridors)
                if (k.horizontal == horizontal && k.line == line) taken = true;
            if (taken) continue;
            if (horizontal && line >= cfg.ny) continue;
            if (!horizontal && line >= cfg.nx) continue;
            city.collectors.push_back({horizontal, line});
            ++made;
        }
    }

    auto draw_params = [&](bool arterial, bool collector) {
        FdParams p;
        if (arterial) {
            p.v_f = rng.uniform(cfg.arterial_vf_lo, cfg.arterial_vf_hi);
            p.n_c = rng.uniform(cfg.arterial_nc_lo, cfg.arterial_nc_hi);
            p.v_s = p.v_f * rng.uniform(cfg.arterial_vs_frac_lo, cfg.arterial_vs_frac_hi);
            p.n_m = p.n_c * rng.uniform(cfg.arterial_nm_mult_lo, cfg.arterial_nm_mult_hi);
        } else {
            p.v_f = rng.uniform(cfg.local_vf_lo, cfg.local_vf_hi);
            p.n_c = collector ? rng.uniform(cfg.collector_nc_lo, cfg.collector_nc_hi)
                              : rng.uniform(cfg.local_nc_lo, cfg.local_nc_hi);
            p.v_s = p.v_f * cfg.local_vs_frac;
            p.n_m = p.n_c * cfg.local_nm_mult;
        }
        p.fitted = true;
        return p;
    };

    city.truth = FdField(cfg.nx, cfg.ny);
    for (int row = 0; row < cfg.ny; ++row)
        for (int col = 0; col < cfg.nx; ++col)
            for (int d = 0; d < kNumDirections; ++d) {
                CellIndex c{col, row};
                Direction dir = static_cast<Direction>(d);
                city.truth.at(c, dir) =
                    draw_params(city.on_corridor(c, dir), city.on_collector(c, dir));
            }
    city.truth.recount_fitted();
    return city;
}

// ---------------------------------------------------------------------------
// Demand sampling and the oracle run

namespace detail {

inline std::string taxi_name(std::size_t k) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "t%06zu", k);
    return buf;
}

struct TripRequest {
    double depart_s;
    CellIndex origin;
    CellIndex dest;
};

// Poisson departures per minute for each demand component.
inline std::vector<TripRequest> sample_demand(const OracleCity& city, double start_s,
                                              double end_s, Rng& rng) {
    std::vector<TripRequest> trips;
    const auto& d = city.demand;
    const GridConfig& g = city.grid;

    auto jitter_along = [&](const Corridor& k, double lo_frac, double hi_frac) {
        int span = k.horizontal ? g.nx : g.ny;
        int pos = static_cast<int>(rng.uniform(lo_frac * span, hi_frac * span));
        pos = std::clamp(pos, 0, span - 1);
        return k.horizontal ? CellIndex{pos, k.line} : CellIndex{k.line, pos};
    };
    auto random_cell = [&]() {
        return CellIndex{static_cast<int>(rng.uniform_int(0, g.nx - 1)),
                         static_cast<int>(rng.uniform_int(0, g.ny - 1))};
    };

    auto line_stream = [&](const Corridor& k, double rate) {
        for (int rev = 0; rev < 2; ++rev) {
            int n = rng.poisson(rate);
            for (int i = 0; i < n; ++i) {
                CellIndex o = jitter_along(k, 0.0, 0.05);
                CellIndex dst = jitter_along(k, 0.95, 1.0);
                if (rev) std::swap(o, dst);
                trips.push_back({0.0, o, dst}); // depart filled by the caller
            }
        }
    };

    for (double t0 = start_s; t0 < end_s; t0 += 60.0) {
        double m = d.multiplier(t0);
        std::size_t minute_begin = trips.size();
        for (const auto& k : city.corridors) line_stream(k, d.corridor_rate_per_min * m);
        for (const auto& k : city.collectors) line_stream(k, d.collector_rate_per_min * m);
        for (std::size_t i = minute_begin; i < trips.size(); ++i)
            trips[i].depart_s = t0 + rng.uniform(0.0, 60.0);
        if (!city.corridors.empty()) {
            int n = rng.poisson(d.cross_rate_per_min * m);
            for (int i = 0; i < n; ++i) {
                const Corridor& ka = city.corridors[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(city.corridors.size()) - 1))];
                const Corridor& kb = city.corridors[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(city.corridors.size()) - 1))];
                trips.push_back({t0 + rng.uniform(0.0, 60.0), jitter_along(ka, 0.1, 0.9),
                                 jitter_along(kb, 0.1, 0.9)});
            }
        }
        int n = rng.poisson(d.background_rate_per_min * m);
        for (int i = 0; i < n; ++i)
            trips.push_back({t0 + rng.uniform(0.0, 60.0), random_cell(), random_cell()});
    }

    std::erase_if(trips, [](const TripRequest& t) { return l1_distance(t.origin, t.dest) < 3; });
    std::stable_sort(trips.begin(), trips.end(),
                     [](const TripRequest& a, const TripRequest& b) { return a.depart_s < b.depart_s; });
    return trips;
}

// Per-agent entry-time recorder: reconstructs each vehicle's ContinuousRoute
// with the times at which it crossed cell borders. The next border to record
// is derived from the number of entries already taken (entry j is the
// crossing of border j*cell_size), so a step that stops within epsilon of a
// border cannot record it twice.
class EntryRecorder {
public:
    explicit EntryRecorder(double cell_size) : cell_size_(cell_size) {}

    void on_departure(std::size_t trip, double t, std::size_t route_cells) {
        if (trip >= entries_.size()) {
            entries_.resize(trip + 1);
            max_entries_.resize(trip + 1, 0);
        }
        entries_[trip].push_back(t);
        max_entries_[trip] = route_cells;
    }

    void on_advance(std::size_t trip, double l_before, double l_after, double t_before,
                    double v_mps) {
        auto& entries = entries_[trip];
        double next_border = static_cast<double>(entries.size()) * cell_size_;
        while (entries.size() < max_entries_[trip] && next_border <= l_after + 1e-9) {
            double t = t_before + (next_border - l_before) / v_mps;
            entries.push_back(std::max(t, entries.back()));
            next_border += cell_size_;
        }
    }

    const std::vector<double>& entries(std::size_t trip) const { return entries_[trip]; }

private:
    double cell_size_;
    std::vector<std::vector<double>> entries_;
    std::vector<std::size_t> max_entries_;
};

} // namespace detail

struct OracleRun {
    std::vector<ContinuousRoute> routes;        // ground-truth trips (exact times)
    std::vector<DirectedCellState> snapshots;   // true windowed state, 10-min lattice
    std::vector<Arrival> arrivals;
    std::size_t trips_requested = 0;
};

/// Runs the oracle dynamics: sample trips, rasterize their routes, advance
/// them with the TRUE parameters and true chi, and record exact cell entry
/// times. The stepper logic is deliberately the production Simulator rule
/// set so closed-loop recovery tests are well-posed; the bespoke loop here
/// only exists to capture per-vehicle entry times.
inline OracleRun run_oracle(const OracleCity& city, double start_s, double end_s,
                            std::uint64_t run_seed, const SimConfig& sim_cfg_in = {},
                            double snapshot_stride_s = 600.0) {
    Rng demand_rng(mix_seed(run_seed ^ city.seed, "demand"));
    auto trips = detail::sample_demand(city, start_s, end_s, demand_rng);

    SimConfig sim_cfg = sim_cfg_in;
    sim_cfg.seed = mix_seed(run_seed ^ city.seed, "dynamics");

    OracleRun out;
    out.trips_requested = trips.size();

    // Pre-rasterized route plans; entry times get filled by the recorder.
    std::vector<ContinuousRoute> plans;
    plans.reserve(trips.size());
    for (std::size_t k = 0; k < trips.size(); ++k) {
        ContinuousRoute r;
        r.taxi_id = detail::taxi_name(k);
        r.cells.push_back(trips[k].origin);
        for (const auto& s : rasterize_segment(trips[k].origin, trips[k].dest))
            r.cells.push_back(s.cell);
        r.entries_s.assign(r.cells.size(), trips[k].depart_s);
        plans.push_back(std::move(r));
    }

    const GridConfig& g = city.grid;
    const double cell = g.cell_size;
    detail::EntryRecorder recorder(cell);

    // Bespoke advance loop (same update rules as Simulator::step) recording
    // cell-border crossing times.
    struct Agent {
        std::size_t trip;
        double l_m;
        double v_kmh;
    };
    std::vector<std::vector<Direction>> dirs;
    dirs.reserve(plans.size());
    for (const auto& r : plans) dirs.push_back(route_directions(r));

    Rng rng(sim_cfg.seed);
    DirectedField<double> v(g.nx, g.ny, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = city.truth.params[i].v_f;
    RollingOccupancy occ(g.nx, g.ny, sim_cfg.occupancy_window);
    InstantFrame frame(g.nx, g.ny);
    std::vector<Agent> active;
    std::size_t next_trip = 0;

    std::vector<std::pair<double, std::vector<double>>> pending_entries;
    double next_snapshot = std::ceil(start_s / snapshot_stride_s) * snapshot_stride_s;

    for (double t = start_s; t < end_s - 1e-9; t += sim_cfg.dt_s) {
        // inject
        while (next_trip < trips.size() && trips[next_trip].depart_s <= t) {
            const auto& plan = plans[next_trip];
            if (plan.degenerate()) {
                ++next_trip;
                continue;
            }
            double v0 = city.truth.at(plan.cells[0], dirs[next_trip][1]).v_f;
            active.push_back({next_trip, 0.0, std::clamp(v0, sim_cfg.v_min_kmh, sim_cfg.v_cap_kmh)});
            recorder.on_departure(next_trip, trips[next_trip].depart_s, plan.cells.size());
            ++next_trip;
        }
        // occupancy
        frame.clear();
        for (const auto& a : active) {
            std::size_t seg = std::min(static_cast<std::size_t>(a.l_m / cell),
                                       plans[a.trip].steps() - 1);
            frame.add(plans[a.trip].cells[seg], dirs[a.trip][seg + 1], a.v_kmh);
        }
        occ.push(frame);
        // relax field toward the chi-scaled target
        double chi = city.chi(t);
        for (std::size_t i = 0; i < v.size(); ++i) {
            double target = eval_vn(city.truth.params[i], chi * occ.at(i), sim_cfg.v_min_kmh);
            v[i] += sim_cfg.omega * (target - v[i]);
        }
        // move
        for (std::size_t k = 0; k < active.size();) {
            Agent& a = active[k];
            const auto& plan = plans[a.trip];
            std::size_t seg = std::min(static_cast<std::size_t>(a.l_m / cell), plan.steps() - 1);
            double v_cur = v.at(plan.cells[seg], dirs[a.trip][seg + 1]);
            double v_next =
                (seg + 1 < plan.steps()) ? v.at(plan.cells[seg + 1], dirs[a.trip][seg + 2]) : v_cur;
            double speed = sim_cfg.lambda * v_cur + (1.0 - sim_cfg.lambda) * v_next;
            if (sim_cfg.sigma_eta_kmh > 0.0) speed += rng.normal(0.0, sim_cfg.sigma_eta_kmh);
            speed = std::clamp(speed, sim_cfg.v_min_kmh, sim_cfg.v_cap_kmh);
            a.v_kmh = speed;

            double len = plan.length_m(cell);
            double dl = speed / 3.6 * sim_cfg.dt_s;
            double l_after = std::min(a.l_m + dl, len);
            recorder.on_advance(a.trip, a.l_m, l_after, t, speed / 3.6);
            if (a.l_m + dl >= len) {
                double t_arr = t + (len - a.l_m) / (speed / 3.6);
                out.arrivals.push_back({plan.taxi_id, trips[a.trip].depart_s, t_arr, len});
                active[k] = active.back();
                active.pop_back();
            } else {
                a.l_m = l_after;
                ++k;
            }
        }
    }

    // Routes: full trips keep their planned cells; trips still in flight at
    // the end are truncated to the cells actually entered.
    for (std::size_t k = 0; k < next_trip; ++k) {
        if (plans[k].degenerate()) continue;
        const auto& entries = recorder.entries(k);
        if (entries.size() < 2) continue;
        ContinuousRoute r;
        r.taxi_id = plans[k].taxi_id;
        r.cells.assign(plans[k].cells.begin(),
                       plans[k].cells.begin() + static_cast<std::ptrdiff_t>(entries.size()));
        r.entries_s = entries;
        r.validate();
        out.routes.push_back(std::move(r));
    }
    std::stable_sort(out.routes.begin(), out.routes.end(),
                     [](const ContinuousRoute& a, const ContinuousRoute& b) {
                         if (a.taxi_id != b.taxi_id) return a.taxi_id < b.taxi_id;
                         return a.depart_s() < b.depart_s();
                     });

    // True windowed state on the snapshot lattice, estimated from the exact
    // routes with the same estimator the pipeline uses on recovered routes.
    EstimationConfig est;
    est.v_cap_kmh = sim_cfg.v_cap_kmh;
    RouteSet set(out.routes);
    InstantFrame scratch(g.nx, g.ny);
    for (double ts = next_snapshot; ts <= end_s + 1e-9; ts += snapshot_stride_s) {
        DirectedCellState st{ts, DirectedField<double>(g.nx, g.ny, 0.0),
                             DirectedField<double>(g.nx, g.ny, 0.0)};
        std::vector<std::size_t> touched;
        detail::fold_window(set, ts, g, est, scratch, st.V, st.N, touched);
        out.snapshots.push_back(std::move(st));
    }
    return out;
}

// ---------------------------------------------------------------------------
// GPS emission

struct EmissionConfig {
    double interval_min_s = 20.0; // per-taxi report interval bounds
    double interval_max_s = 60.0;
    double noise_sigma_m = 10.0;
    double dropout_prob = 0.0;
    double corruption_prob = 0.0; // macroscopic/mesoscopic error injection
    double teleport_m = 15000.0;
    double macro_frac = 0.5; // share of corruptions made macroscopic

    void validate() const {
        if (interval_min_s <= 0 || interval_max_s < interval_min_s)
            throw ConfigError("emission: bad report interval bounds");
        for (double p : {dropout_prob, corruption_prob, macro_frac})
            if (p < 0.0 || p > 1.0) throw ConfigError("emission: probabilities must be in [0,1]");
    }
};

struct EmissionStats {
    std::size_t emitted = 0;
    std::size_t corrupted_macro = 0;
    std::size_t corrupted_meso = 0;
    std::size_t dropped_out = 0;

    std::size_t corrupted_total() const { return corrupted_macro + corrupted_meso; }
};

namespace detail {

// Planar position along a route at time t: linear between the centers of the
// current and next cell.
inline Vec2 route_planar_at(const ContinuousRoute& r, double t, const GridConfig& g) {
    if (t <= r.entries_s.front()) return cell_center(r.cells.front(), g);
    if (t >= r.entries_s.back()) return cell_center(r.cells.back(), g);
    auto seg = route_segment_at(r, t);
    std::size_t i = *seg;
    double t0 = r.entries_s[i], t1 = r.entries_s[i + 1];
    double frac = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    Vec2 a = cell_center(r.cells[i], g);
    Vec2 b = cell_center(r.cells[i + 1], g);
    return {a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)};
}

// 15 km displacement that stays inside the grid, if one exists; tried over
// eight compass headings in a seed-dependent order.
inline std::optional<Vec2> teleport_target(Vec2 from, double dist, const GridConfig& g, Rng& rng) {
    static const double headings[8][2] = {{1, 0},  {0.7071067811865476, 0.7071067811865476},
                                          {0, 1},  {-0.7071067811865476, 0.7071067811865476},
                                          {-1, 0}, {-0.7071067811865476, -0.7071067811865476},
                                          {0, -1}, {0.7071067811865476, -0.7071067811865476}};
    int first = static_cast<int>(rng.uniform_int(0, 7));
    for (int k = 0; k < 8; ++k) {
        const auto& h = headings[(first + k) % 8];
        Vec2 p{from.x + dist * h[0], from.y + dist * h[1]};
        if (cell_of_point(p, g)) return p;
    }
    return std::nullopt;
}

} // namespace detail

/// Samples each route at a per-taxi report interval, adds GPS noise, applies
/// dropouts and injects the configured error records. The per-taxi stream is
/// seeded from the taxi id, so emission order cannot change the output.
inline std::vector<GpsRecord> emit_gps(std::span<const ContinuousRoute> routes,
                                       const OracleCity& city, const EmissionConfig& cfg,
                                       std::uint64_t seed, EmissionStats& stats) {
    cfg.validate();
    std::vector<GpsRecord> out;
    const GridConfig& g = city.grid;

    for (const auto& r : routes) {
        if (r.degenerate()) continue;
        Rng rng(mix_seed(seed, r.taxi_id));
        double interval = rng.uniform(cfg.interval_min_s, cfg.interval_max_s);
        double depart = r.depart_s();
        double arrival = r.arrival_s();

        std::vector<double> times;
        for (double t = depart; t < arrival; t += interval) times.push_back(t);
        times.push_back(arrival); // trip-end report at the destination

        bool first_of_route = true;
        for (double t : times) {
            if (!first_of_route && rng.uniform01() < cfg.dropout_prob) {
                stats.dropped_out += 1;
                continue;
            }
            Vec2 p = detail::route_planar_at(r, t, g);
            if (cfg.noise_sigma_m > 0.0) {
                p.x += rng.normal(0.0, cfg.noise_sigma_m);
                p.y += rng.normal(0.0, cfg.noise_sigma_m);
            }
            // Error injection skips each route's first record: a corrupted
            // leading fix would poison the displacement chain of everything
            // after it rather than being filtered itself.
            if (!first_of_route && cfg.corruption_prob > 0.0 &&
                rng.uniform01() < cfg.corruption_prob) {
                if (rng.uniform01() < cfg.macro_frac) {
                    p.x = g.origin_x - 10.0 * g.width_m();
                    stats.corrupted_macro += 1;
                } else if (auto tp = detail::teleport_target(p, cfg.teleport_m, g, rng)) {
                    p = *tp;
                    stats.corrupted_meso += 1;
                } else {
                    p.x = g.origin_x - 10.0 * g.width_m(); // grid too small to teleport inside
                    stats.corrupted_macro += 1;
                }
            }
            GpsRecord rec;
            rec.taxi_id = r.taxi_id;
            rec.t_s = t;
            city.proj.to_lonlat(p, rec.lon_deg, rec.lat_deg);
            rec.status = TaxiStatus::Occupied;
            out.push_back(std::move(rec));
            stats.emitted += 1;
            first_of_route = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario persistence (JSON) so synth output is reproducible and inspectable.

inline nlohmann::json scenario_to_json(const OracleCity& city) {
    nlohmann::json j;
    j["seed"] = city.seed;
    j["grid"] = {{"nx", city.grid.nx},
                 {"ny", city.grid.ny},
                 {"cell_size_m", city.grid.cell_size},
                 {"center_lon", city.proj.lon0_deg},
                 {"center_lat", city.proj.lat0_deg}};
    auto ks = nlohmann::json::array();
    for (const auto& k : city.corridors)
        ks.push_back({{"horizontal", k.horizontal}, {"line", k.line}});
    j["corridors"] = std::move(ks);
    auto cs = nlohmann::json::array();
    for (const auto& k : city.collectors)
        cs.push_back({{"horizontal", k.horizontal}, {"line", k.line}});
    j["collectors"] = std::move(cs);
    j["chi"] = {{"t_am_s", city.chi.t_am_s},     {"t_pm_s", city.chi.t_pm_s},
                {"a_am", city.chi.a_am},         {"a_pm", city.chi.a_pm},
                {"sigma_am_s", city.chi.sigma_am_s}, {"sigma_pm_s", city.chi.sigma_pm_s}};
    j["demand"] = {{"corridor_rate_per_min", city.demand.corridor_rate_per_min},
                   {"collector_rate_per_min", city.demand.collector_rate_per_min},
                   {"cross_rate_per_min", city.demand.cross_rate_per_min},
                   {"background_rate_per_min", city.demand.background_rate_per_min},
                   {"surge_am_amp", city.demand.surge_am_amp},
                   {"surge_pm_amp", city.demand.surge_pm_amp},
                   {"surge_sigma_am_s", city.demand.surge_sigma_am_s},
                   {"surge_sigma_pm_s", city.demand.surge_sigma_pm_s},
                   {"t_am_s", city.demand.t_am_s},
                   {"t_pm_s", city.demand.t_pm_s}};
    return j;
}

} // namespace gridflow
