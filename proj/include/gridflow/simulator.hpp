#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gridflow/estimation.hpp"
#include "gridflow/field.hpp"
#include "gridflow/fundamental_diagram.hpp"
#include "gridflow/rng.hpp"
#include "gridflow/route.hpp"

namespace gridflow {

/// Time-varying capacity coefficient mimicking the rush-hour share of
/// unobserved traffic: chi(t) = 1 + two Gaussian bumps at the peaks.
struct ChiProfile {
    double t_am_s = 7 * 3600.0;
    double t_pm_s = 17 * 3600.0 + 1800.0;
    double a_am = 0.5;
    double a_pm = 0.5;
    double sigma_am_s = 3600.0;
    double sigma_pm_s = 3600.0;

    double operator()(double t_s) const {
        double za = (t_s - t_am_s) / sigma_am_s;
        double zp = (t_s - t_pm_s) / sigma_pm_s;
        return 1.0 + a_am * std::exp(-0.5 * za * za) + a_pm * std::exp(-0.5 * zp * zp);
    }
};

struct SimConfig {
    double dt_s = 60.0;
    double lambda = 0.5;        // look-ahead weight on the current cell
    double omega = 0.5;         // speed relaxation coefficient
    double sigma_eta_kmh = 2.0; // per-step speed noise
    double v_min_kmh = 1.0;
    double v_cap_kmh = 120.0;
    int occupancy_window = 10;  // steps summed into the rolling occupancy
    std::uint64_t seed = 1;
};

struct Arrival {
    std::string taxi_id;
    double depart_s;
    double arrive_s;
    double route_len_m;
};

/// Rolling window of per-step instantaneous counts. Keeps the dense running
/// sum plus the sparse per-step increments so pushes are O(vehicles).
class RollingOccupancy {
public:
    RollingOccupancy(int nx, int ny, int window) : window_(window), sum_(nx, ny, 0) {}

    void push(const InstantFrame& frame) {
        std::vector<std::pair<std::size_t, int>> step;
        step.reserve(frame.touched().size());
        for (std::size_t i : frame.touched()) {
            sum_[i] += frame.count_at(i);
            step.emplace_back(i, frame.count_at(i));
        }
        steps_.push_back(std::move(step));
        if (static_cast<int>(steps_.size()) > window_) {
            for (auto [i, c] : steps_.front()) sum_[i] -= c;
            steps_.pop_front();
        }
    }

    void push_counts(std::span<const std::pair<std::size_t, int>> counts) {
        std::vector<std::pair<std::size_t, int>> step(counts.begin(), counts.end());
        for (auto [i, c] : step) sum_[i] += c;
        steps_.push_back(std::move(step));
        if (static_cast<int>(steps_.size()) > window_) {
            for (auto [i, c] : steps_.front()) sum_[i] -= c;
            steps_.pop_front();
        }
    }

    int at(std::size_t flat) const { return sum_[flat]; }
    const DirectedField<int>& sum() const { return sum_; }
    int depth() const { return static_cast<int>(steps_.size()); }

private:
    int window_;
    DirectedField<int> sum_;
    std::deque<std::vector<std::pair<std::size_t, int>>> steps_;
};

/// The coarse-grained stepper. One step: inject due departures, roll the
/// occupancy window, relax the speed field toward the fundamental-diagram
/// target at the chi-scaled occupancy, then move every vehicle along its
/// pre-determined route.
class Simulator {
public:
    /// Shares a prebuilt plan set; the caller keeps it alive and in-grid
    /// (route archives are bounds-checked on load).
    Simulator(const GridConfig& grid, const FdField& fd, ChiProfile chi, SimConfig cfg,
              const RouteSet& demand, double start_s)
        : grid_(grid), fd_(&fd), chi_(chi), cfg_(cfg), set_(&demand),
          clock_s_(start_s), rng_(cfg.seed),
          v_(grid.nx, grid.ny, 0.0),
          occupancy_(grid.nx, grid.ny, cfg.occupancy_window),
          frame_(grid.nx, grid.ny) {
        init();
    }

    /// Owning variant for ad-hoc demand; validates the routes against the
    /// grid.
    Simulator(const GridConfig& grid, const FdField& fd, ChiProfile chi, SimConfig cfg,
              std::span<const ContinuousRoute> demand, double start_s)
        : grid_(grid), fd_(&fd), chi_(chi), cfg_(cfg),
          owned_(std::make_shared<RouteSet>(demand)), set_(owned_.get()),
          clock_s_(start_s), rng_(cfg.seed),
          v_(grid.nx, grid.ny, 0.0),
          occupancy_(grid.nx, grid.ny, cfg.occupancy_window),
          frame_(grid.nx, grid.ny) {
        for (const auto& r : demand)
            for (const auto& c : r.cells)
                if (!in_bounds(c, grid_)) throw DataError("demand route leaves the grid");
        init();
    }

    double clock_s() const { return clock_s_; }
    const RouteSet& demand_set() const { return *set_; }
    const DirectedField<double>& speed_field() const { return v_; }
    DirectedField<double>& speed_field() { return v_; }
    const RollingOccupancy& occupancy() const { return occupancy_; }
    std::size_t injected() const { return injected_; }
    std::size_t active() const { return active_.size(); }
    const std::vector<Arrival>& arrivals() const { return arrivals_; }

    /// (route index, position in meters) of every active agent; diagnostics.
    std::vector<std::pair<std::size_t, double>> agent_positions() const {
        std::vector<std::pair<std::size_t, double>> out;
        out.reserve(active_.size());
        for (std::size_t ai : active_) out.emplace_back(agents_[ai].route, agents_[ai].l_m);
        return out;
    }

    /// Mid-flight agent injection used when a forecast restarts the vehicle
    /// population from historical positions. Skips finished/degenerate trips.
    void seed_agent(std::size_t route_idx, double l_m, double v_kmh) {
        const auto& r = set_->route(route_idx);
        if (r.degenerate() || l_m >= r.length_m(grid_.cell_size)) return;
        agents_.push_back({route_idx, l_m, std::clamp(v_kmh, cfg_.v_min_kmh, cfg_.v_cap_kmh)});
        active_.push_back(agents_.size() - 1);
        ++injected_;
    }

    /// Marks routes departing before the clock as already handled so the
    /// stepper injects only genuinely pending trips.
    void skip_departures_before(double t_s) {
        while (next_pending_ < pending_.size() &&
               set_->route(pending_[next_pending_]).depart_s() < t_s)
            ++next_pending_;
    }

    void seed_occupancy(std::span<const std::pair<std::size_t, int>> counts) {
        occupancy_.push_counts(counts);
    }

    /// Replaces the simulated speed wherever the observation has data
    /// (V > 0). Occupancy and vehicle positions are left untouched.
    void assimilate(const DirectedCellState& observed) {
        if (std::llround(observed.t_s) != std::llround(clock_s_))
            throw DataError("assimilate: observation time does not match simulation clock");
        for (std::size_t i = 0; i < v_.size(); ++i)
            if (observed.V[i] > 0.0) v_[i] = observed.V[i];
    }

    void assimilate(std::span<const SnapshotRow> rows, double t_s) {
        if (std::llround(t_s) != std::llround(clock_s_))
            throw DataError("assimilate: observation time does not match simulation clock");
        for (const auto& r : rows)
            if (r.v_kmh > 0.0) v_.at(r.cell, r.dir) = r.v_kmh;
    }

    void step() {
        inject_departures(clock_s_);
        update_occupancy();
        update_speed_field(clock_s_);
        advance_vehicles();
        clock_s_ += cfg_.dt_s;
    }

    void run_until(double t_end_s) {
        while (clock_s_ < t_end_s - 1e-9) step();
    }

    /// Chi-scaled occupancy currently used as the fundamental-diagram input.
    double effective_occupancy(CellIndex c, Direction d, double t_s) const {
        return chi_(t_s) * occupancy_.at(v_.flat(c, d));
    }

    /// Visited-cell snapshot of the current field state (estimation CSV
    /// semantics: cells the rolling window never saw are "no data").
    DirectedCellState snapshot() const {
        DirectedCellState st{clock_s_, DirectedField<double>(grid_.nx, grid_.ny, 0.0),
                             DirectedField<double>(grid_.nx, grid_.ny, 0.0)};
        for (std::size_t i = 0; i < v_.size(); ++i) {
            int n = occupancy_.at(i);
            if (n > 0) {
                st.V[i] = v_[i];
                st.N[i] = n;
            }
        }
        return st;
    }

private:
    struct Agent {
        std::size_t route;
        double l_m;
        double v_kmh;
    };

    void init() {
        // Free flow everywhere until told otherwise.
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] = fd_->params[i].v_f;
        pending_.resize(set_->size());
        std::iota(pending_.begin(), pending_.end(), std::size_t{0});
        std::stable_sort(pending_.begin(), pending_.end(), [&](std::size_t a, std::size_t b) {
            return set_->route(a).depart_s() < set_->route(b).depart_s();
        });
        next_pending_ = 0;
    }

    void inject_departures(double t_s) {
        while (next_pending_ < pending_.size()) {
            std::size_t ri = pending_[next_pending_];
            const auto& r = set_->route(ri);
            if (r.depart_s() > t_s) break;
            ++next_pending_;
            if (r.degenerate()) continue;
            double v0 = fd_->at(r.cells[0], set_->dirs(ri)[1]).v_f;
            agents_.push_back({ri, 0.0, std::clamp(v0, cfg_.v_min_kmh, cfg_.v_cap_kmh)});
            active_.push_back(agents_.size() - 1);
            ++injected_;
        }
    }

    // Current cell index along the route for a position l strictly inside it.
    std::size_t segment_of(const Agent& a) const {
        auto seg = static_cast<std::size_t>(a.l_m / grid_.cell_size);
        return std::min(seg, set_->route(a.route).steps() - 1);
    }

    void update_occupancy() {
        frame_.clear();
        for (std::size_t ai : active_) {
            const Agent& a = agents_[ai];
            std::size_t seg = segment_of(a);
            frame_.add(set_->route(a.route).cells[seg], set_->dirs(a.route)[seg + 1], a.v_kmh);
        }
        occupancy_.push(frame_);
    }

    void update_speed_field(double t_s) {
        double chi = chi_(t_s);
        for (std::size_t i = 0; i < v_.size(); ++i) {
            double n_eff = chi * occupancy_.at(i);
            double target = eval_vn(fd_->params[i], n_eff, cfg_.v_min_kmh);
            v_[i] += cfg_.omega * (target - v_[i]);
        }
    }

    double vehicle_speed(const Agent& a) {
        const auto& r = set_->route(a.route);
        auto dirs = set_->dirs(a.route);
        std::size_t seg = segment_of(a);
        double v_cur = v_.at(r.cells[seg], dirs[seg + 1]);
        double v_next = (seg + 1 < r.steps()) ? v_.at(r.cells[seg + 1], dirs[seg + 2]) : v_cur;
        double v = cfg_.lambda * v_cur + (1.0 - cfg_.lambda) * v_next;
        if (cfg_.sigma_eta_kmh > 0.0) v += rng_.normal(0.0, cfg_.sigma_eta_kmh);
        return std::clamp(v, cfg_.v_min_kmh, cfg_.v_cap_kmh);
    }

    void advance_vehicles() {
        for (std::size_t k = 0; k < active_.size();) {
            Agent& a = agents_[active_[k]];
            a.v_kmh = vehicle_speed(a);
            const auto& r = set_->route(a.route);
            double len = r.length_m(grid_.cell_size);
            double dl = a.v_kmh / 3.6 * cfg_.dt_s;
            if (a.l_m + dl >= len) {
                double t_arr = clock_s_ + (len - a.l_m) / (a.v_kmh / 3.6);
                arrivals_.push_back({r.taxi_id, r.depart_s(), t_arr, len});
                active_[k] = active_.back();
                active_.pop_back();
            } else {
                a.l_m += dl;
                ++k;
            }
        }
    }

    GridConfig grid_;
    const FdField* fd_;
    ChiProfile chi_;
    SimConfig cfg_;
    std::shared_ptr<RouteSet> owned_; // only for the owning constructor
    const RouteSet* set_;

    double clock_s_;
    Rng rng_;
    DirectedField<double> v_;
    RollingOccupancy occupancy_;
    InstantFrame frame_;

    std::vector<std::size_t> pending_; // route indices sorted by departure
    std::size_t next_pending_ = 0;
    std::vector<Agent> agents_;
    std::vector<std::size_t> active_; // indices into agents_
    std::size_t injected_ = 0;
    std::vector<Arrival> arrivals_;
};

inline void write_arrivals_csv(const std::string& path, std::span<const Arrival> arrivals) {
    std::vector<const Arrival*> sorted;
    sorted.reserve(arrivals.size());
    for (const auto& a : arrivals) sorted.push_back(&a);
    std::stable_sort(sorted.begin(), sorted.end(), [](const Arrival* a, const Arrival* b) {
        if (a->arrive_s != b->arrive_s) return a->arrive_s < b->arrive_s;
        return a->taxi_id < b->taxi_id;
    });
    auto out = open_output(path);
    out << "taxi_id,depart_s,arrive_s,route_len_m\n";
    for (const Arrival* a : sorted)
        out << a->taxi_id << ',' << fmt_g10(a->depart_s) << ',' << fmt_g10(a->arrive_s) << ','
            << fmt_g10(a->route_len_m) << '\n';
}

} // namespace gridflow
