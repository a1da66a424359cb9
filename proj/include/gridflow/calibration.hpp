#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridflow/csv.hpp"
#include "gridflow/estimation.hpp"
#include "gridflow/field.hpp"
#include "gridflow/fundamental_diagram.hpp"

namespace gridflow {

struct TuningConfig {
    double regular_start_s = 12 * 3600.0; // 12:00-15:00
    double regular_end_s = 15 * 3600.0;
    double rush_start_s = 7 * 3600.0; // 7:00-9:00
    double rush_end_s = 9 * 3600.0;
    double delta_vf_kmh = 0.5;
    double delta_n_rel = 0.05;
    int max_iterations = 20;
    double tolerance_kmh = 1.0;
    double v_min_kmh = 1.0;
    double n_c_floor = 1e-6;

    void validate() const {
        if (regular_start_s < rush_end_s && rush_start_s < regular_end_s)
            throw ConfigError("tuning: regular and rush windows overlap");
        if (delta_vf_kmh <= 0.0 || delta_n_rel <= 0.0)
            throw ConfigError("tuning: step sizes must be > 0");
    }
};

/// Per-(cell, direction) statistic with a has-data mask. Cells a window never
/// observed stay absent and are skipped by the tuning rules.
struct CellStat {
    DirectedField<double> value;
    DirectedField<std::uint8_t> present;

    CellStat() = default;
    CellStat(int nx, int ny) : value(nx, ny, 0.0), present(nx, ny, 0) {}

    std::optional<double> at(std::size_t i) const {
        if (!present[i]) return std::nullopt;
        return value[i];
    }
};

/// Mean of the nonzero snapshot speeds inside [start, end] per (cell,
/// direction).
inline CellStat regular_stat(std::span<const DirectedCellState> snapshots, double start_s,
                             double end_s) {
    if (snapshots.empty()) return {};
    int nx = snapshots.front().V.nx(), ny = snapshots.front().V.ny();
    CellStat out(nx, ny);
    DirectedField<int> counts(nx, ny, 0);
    for (const auto& s : snapshots) {
        if (s.t_s < start_s || s.t_s > end_s) continue;
        for (std::size_t i = 0; i < s.V.size(); ++i) {
            if (s.V[i] <= 0.0) continue;
            out.value[i] += s.V[i];
            counts[i] += 1;
        }
    }
    for (std::size_t i = 0; i < out.value.size(); ++i) {
        if (counts[i] > 0) {
            out.value[i] /= counts[i];
            out.present[i] = 1;
        }
    }
    return out;
}

/// Minimum of the nonzero snapshot speeds inside [start, end].
inline CellStat rush_stat(std::span<const DirectedCellState> snapshots, double start_s,
                          double end_s) {
    if (snapshots.empty()) return {};
    int nx = snapshots.front().V.nx(), ny = snapshots.front().V.ny();
    CellStat out(nx, ny);
    for (const auto& s : snapshots) {
        if (s.t_s < start_s || s.t_s > end_s) continue;
        for (std::size_t i = 0; i < s.V.size(); ++i) {
            if (s.V[i] <= 0.0) continue;
            if (!out.present[i] || s.V[i] < out.value[i]) {
                out.value[i] = s.V[i];
                out.present[i] = 1;
            }
        }
    }
    return out;
}

/// One tuning sweep. Regular-hour rule nudges v_f toward the historical mean;
/// rush-hour rule rescales n_c (and n_m with it, preserving their ratio)
/// against the historical minimum. Cells missing either statistic on either
/// side are untouched. Returns the number of tuned cells.
inline std::size_t tune_iteration(FdField& fd, const CellStat& sim_regular,
                                  const CellStat& sim_rush, const CellStat& real_regular,
                                  const CellStat& real_rush, const TuningConfig& cfg,
                                  double delta_vf, double delta_n) {
    if (sim_regular.value.size() != fd.params.size() ||
        real_regular.value.size() != fd.params.size())
        return 0;
    std::size_t tuned = 0;
    for (std::size_t i = 0; i < fd.params.size(); ++i) {
        bool have_regular = sim_regular.present[i] && real_regular.present[i];
        bool have_rush = sim_rush.value.size() == fd.params.size() &&
                         real_rush.value.size() == fd.params.size() && sim_rush.present[i] &&
                         real_rush.present[i];
        if (!have_regular && !have_rush) continue;
        FdParams& p = fd.params[i];
        if (have_regular) {
            double sim = sim_regular.value[i], real = real_regular.value[i];
            if (sim > real)
                p.v_f = std::max(p.v_f - delta_vf, cfg.v_min_kmh);
            else if (sim < real)
                p.v_f += delta_vf;
        }
        if (have_rush) {
            double sim = sim_rush.value[i], real = real_rush.value[i];
            double factor = 1.0;
            if (sim > real)
                factor = 1.0 - delta_n;
            else if (sim < real)
                factor = 1.0 + delta_n;
            if (factor != 1.0) {
                double n_c = std::max(p.n_c * factor, cfg.n_c_floor);
                p.n_m *= n_c / p.n_c; // keeps n_c/n_m fixed even when floored
                p.n_c = n_c;
            }
        }
        ++tuned;
    }
    return tuned;
}

struct CalibrationIteration {
    int iter = 0;
    double mean_gap_kmh = 0.0;
    std::size_t cells_tuned = 0;
};

struct CalibrationReport {
    std::vector<CalibrationIteration> iterations;
    CellStat initial_gap; // per-cell |sim - real| regular gap before tuning
    CellStat final_gap;
    bool converged = false;
    std::string warning;
};

namespace detail {

inline CellStat regular_gap(const CellStat& sim, const CellStat& real) {
    CellStat gap(sim.value.nx(), sim.value.ny());
    for (std::size_t i = 0; i < sim.value.size(); ++i) {
        if (!sim.present[i] || !real.present[i]) continue;
        gap.value[i] = std::abs(sim.value[i] - real.value[i]);
        gap.present[i] = 1;
    }
    return gap;
}

inline double mean_gap(const CellStat& gap) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < gap.value.size(); ++i) {
        if (!gap.present[i]) continue;
        sum += gap.value[i];
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

} // namespace detail

/// Iterative tuning loop. run_day simulates one day with the candidate
/// parameters and returns its 10-minute speed snapshots. Stops at the
/// iteration cap or once the mean absolute regular-hour gap over tuned cells
/// drops under the tolerance; three non-improving iterations in a row halve
/// the step sizes.
inline CalibrationReport
calibrate(FdField& fd, std::span<const DirectedCellState> real_snapshots,
          const std::function<std::vector<DirectedCellState>(const FdField&)>& run_day,
          const TuningConfig& cfg) {
    cfg.validate();
    CalibrationReport report;
    if (real_snapshots.empty()) {
        report.warning = "no historical snapshots; parameters unchanged";
        return report;
    }
    CellStat real_regular = regular_stat(real_snapshots, cfg.regular_start_s, cfg.regular_end_s);
    CellStat real_rush = rush_stat(real_snapshots, cfg.rush_start_s, cfg.rush_end_s);

    double delta_vf = cfg.delta_vf_kmh;
    double delta_n = cfg.delta_n_rel;
    double prev_gap = -1.0;
    int non_improving = 0;

    // One evaluation per loop turn; the last turn only measures, so the
    // reported final gaps always describe the parameters handed back.
    for (int iter = 0; iter <= cfg.max_iterations; ++iter) {
        auto sim_snaps = run_day(fd);
        CellStat sim_regular = regular_stat(sim_snaps, cfg.regular_start_s, cfg.regular_end_s);
        CellStat sim_rush = rush_stat(sim_snaps, cfg.rush_start_s, cfg.rush_end_s);

        CellStat gap = detail::regular_gap(sim_regular, real_regular);
        double mean = detail::mean_gap(gap);
        if (iter == 0) report.initial_gap = gap;
        report.final_gap = gap;

        if (mean < cfg.tolerance_kmh) {
            report.iterations.push_back({iter, mean, 0});
            report.converged = true;
            break;
        }
        if (iter == cfg.max_iterations) {
            report.iterations.push_back({iter, mean, 0});
            break;
        }
        if (prev_gap >= 0.0 && mean >= prev_gap) {
            if (++non_improving >= 3) {
                delta_vf *= 0.5;
                delta_n *= 0.5;
                non_improving = 0;
            }
        } else {
            non_improving = 0;
        }
        prev_gap = mean;

        std::size_t tuned =
            tune_iteration(fd, sim_regular, sim_rush, real_regular, real_rush, cfg, delta_vf, delta_n);
        report.iterations.push_back({iter, mean, tuned});
    }
    return report;
}

inline void write_calibration_csv(const std::string& path, const CalibrationReport& report) {
    auto out = open_output(path);
    out << "iter,mean_gap_kmh,cells_tuned\n";
    for (const auto& it : report.iterations)
        out << it.iter << ',' << fmt_g10(it.mean_gap_kmh) << ',' << it.cells_tuned << '\n';
}

} // namespace gridflow
