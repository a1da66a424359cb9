#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridflow/csv.hpp"
#include "gridflow/estimation.hpp"
#include "gridflow/field.hpp"

namespace gridflow {

/// Two-piece speed law of one road element: constant free-flow speed up to
/// the effective capacity, then a hyperbolic congested branch anchored so
/// that V(n_c) = v_f and V(n_m) = v_s.
struct FdParams {
    double v_f = 20.0; // free-flow speed, km/h
    double v_s = 5.0;  // congested reference speed, km/h
    double n_c = 1.0;  // effective capacity (occupancy units)
    double n_m = 0.5;  // occupancy at which the congested branch reaches v_s
    bool fitted = false;

    bool congested_branch_valid() const { return n_m > n_c && v_f > v_s; }
};

struct FdConfig {
    double outlier_flux_frac = 0.05; // dropped from the top before selection
    double top_flux_frac = 0.20;
    double left_n_frac = 0.20;
    std::size_t min_samples = 50;
    FdParams defaults{};            // assigned to cells that cannot be fitted
    double v_min_kmh = 1.0;         // lower bound of the evaluated speed law
};

/// Speed predicted for occupancy n. Degenerate parameter sets (note the
/// stock defaults have n_m < n_c) fall back to a two-level constant law.
inline double eval_vn(const FdParams& p, double n, double v_min_kmh = 1.0) {
    double v;
    if (n <= p.n_c) {
        v = p.v_f;
    } else if (!p.congested_branch_valid()) {
        v = p.v_s;
    } else {
        double denom = (p.v_f - p.v_s) * n - (p.v_f * p.n_c - p.v_s * p.n_m);
        v = p.v_f * p.v_s * (p.n_m - p.n_c) / denom;
    }
    return std::max(v, v_min_kmh);
}

struct PqPoints {
    FluxSample p; // centroid of the selected free-flow-apex group
    FluxSample q; // centroid of everything to its right
};

/// P/Q selection on a flux-occupancy scatter. Returns nullopt when the
/// scatter is too small or too degenerate to define both groups.
inline std::optional<PqPoints> select_pq(std::span<const FluxSample> samples,
                                         const FdConfig& cfg = {}) {
    std::size_t n = samples.size();
    if (n < cfg.min_samples) return std::nullopt;

    // Rank by (flux, n, index) so percentile cuts are reproducible under ties.
    std::vector<std::size_t> by_flux(n);
    std::iota(by_flux.begin(), by_flux.end(), std::size_t{0});
    std::stable_sort(by_flux.begin(), by_flux.end(), [&](std::size_t a, std::size_t b) {
        if (samples[a].flux != samples[b].flux) return samples[a].flux < samples[b].flux;
        if (samples[a].n != samples[b].n) return samples[a].n < samples[b].n;
        return a < b;
    });

    auto frac_count = [](std::size_t total, double frac) {
        return static_cast<std::size_t>(std::ceil(frac * static_cast<double>(total)));
    };

    std::size_t n_outliers = frac_count(n, cfg.outlier_flux_frac);
    if (n_outliers >= n) return std::nullopt;
    std::span<const std::size_t> survivors(by_flux.data(), n - n_outliers);

    std::size_t n_top = frac_count(survivors.size(), cfg.top_flux_frac);
    std::span<const std::size_t> top = survivors.subspan(survivors.size() - n_top);

    std::vector<std::size_t> top_by_n(top.begin(), top.end());
    std::stable_sort(top_by_n.begin(), top_by_n.end(), [&](std::size_t a, std::size_t b) {
        if (samples[a].n != samples[b].n) return samples[a].n < samples[b].n;
        if (samples[a].flux != samples[b].flux) return samples[a].flux < samples[b].flux;
        return a < b;
    });
    std::size_t n_green = frac_count(top_by_n.size(), cfg.left_n_frac);

    double green_max_n = 0.0;
    FluxSample p{0.0, 0.0};
    for (std::size_t k = 0; k < n_green; ++k) {
        const FluxSample& s = samples[top_by_n[k]];
        p.n += s.n;
        p.flux += s.flux;
        green_max_n = std::max(green_max_n, s.n);
    }
    p.n /= static_cast<double>(n_green);
    p.flux /= static_cast<double>(n_green);

    FluxSample q{0.0, 0.0};
    std::size_t n_blue = 0;
    for (std::size_t idx : survivors) {
        const FluxSample& s = samples[idx];
        if (s.n > green_max_n) {
            q.n += s.n;
            q.flux += s.flux;
            ++n_blue;
        }
    }
    if (n_blue == 0) return std::nullopt;
    q.n /= static_cast<double>(n_blue);
    q.flux /= static_cast<double>(n_blue);

    if (p.n <= 0.0 || q.n <= 0.0) return std::nullopt;
    return PqPoints{p, q};
}

/// Fit one cell: v_f and n_c come from the slope of OP and the x-value of P,
/// v_s and n_m likewise from Q. Falls back to configured defaults.
inline FdParams fit_cell(std::span<const FluxSample> samples, const FdConfig& cfg = {}) {
    auto pq = select_pq(samples, cfg);
    if (!pq) {
        FdParams p = cfg.defaults;
        p.fitted = false;
        return p;
    }
    FdParams p;
    p.v_f = pq->p.flux / pq->p.n;
    p.n_c = pq->p.n;
    p.v_s = pq->q.flux / pq->q.n;
    p.n_m = pq->q.n;
    p.fitted = true;
    return p;
}

struct FdField {
    DirectedField<FdParams> params;
    std::size_t fitted_count = 0;

    FdField() = default;
    FdField(int nx, int ny, FdParams init = {}) : params(nx, ny, init) {}

    const FdParams& at(CellIndex c, Direction d) const { return params.at(c, d); }
    FdParams& at(CellIndex c, Direction d) { return params.at(c, d); }

    std::size_t recount_fitted() {
        fitted_count = 0;
        for (const auto& p : params)
            if (p.fitted) ++fitted_count;
        return fitted_count;
    }
};

inline FdField fit_field(const SampleArchive& archive, const FdConfig& cfg = {}) {
    FdField field(archive.nx(), archive.ny(), cfg.defaults);
    for (std::size_t i = 0; i < archive.size(); ++i)
        field.params[i] = fit_cell(archive[i], cfg);
    field.recount_fitted();
    return field;
}

// ---------------------------------------------------------------------------
// Persistence: col,row,dir,Vf,Vs,Nc,Nm,fitted

inline void write_fd_csv(const std::string& path, const FdField& field) {
    auto out = open_output(path);
    out << "col,row,dir,Vf,Vs,Nc,Nm,fitted\n";
    for (std::size_t i = 0; i < field.params.size(); ++i) {
        const FdParams& p = field.params[i];
        CellIndex c = field.params.cell_of_flat(i);
        out << c.col << ',' << c.row << ',' << dir_char(field.params.dir_of_flat(i)) << ','
            << fmt_g10(p.v_f) << ',' << fmt_g10(p.v_s) << ',' << fmt_g10(p.n_c) << ','
            << fmt_g10(p.n_m) << ',' << (p.fitted ? 1 : 0) << '\n';
    }
}

inline FdField read_fd_csv(const std::string& path, const GridConfig& grid,
                           FdParams defaults = {}) {
    auto in = open_input(path);
    FdField field(grid.nx, grid.ny, defaults);
    std::string line;
    std::vector<std::string_view> f;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, f);
        if (first) {
            first = false;
            if (line.rfind("col", 0) == 0) continue;
        }
        if (f.size() != 8) throw DataError("fd csv: expected 8 fields: " + line);
        CellIndex c{static_cast<int>(parse_int(f[0], "col")),
                    static_cast<int>(parse_int(f[1], "row"))};
        if (!in_bounds(c, grid)) throw DataError("fd csv: cell out of bounds: " + line);
        if (f[2].size() != 1) throw DataError("fd csv: bad dir: " + line);
        FdParams p;
        p.v_f = parse_double(f[3], "Vf");
        p.v_s = parse_double(f[4], "Vs");
        p.n_c = parse_double(f[5], "Nc");
        p.n_m = parse_double(f[6], "Nm");
        p.fitted = parse_int(f[7], "fitted") != 0;
        field.at(c, dir_from_char(f[2][0])) = p;
    }
    field.recount_fitted();
    return field;
}

/// Scatter dump for one (cell, direction): the raw samples plus the fitted
/// curve sampled at 100 points, for external plotting.
inline void write_fd_scatter_csv(const std::string& path, std::span<const FluxSample> samples,
                                 const FdParams& p, double v_min_kmh = 1.0) {
    auto out = open_output(path);
    out << "kind,N,flux\n";
    double n_max = p.n_m * 1.5;
    for (const auto& s : samples) {
        out << "sample," << fmt_g10(s.n) << ',' << fmt_g10(s.flux) << '\n';
        n_max = std::max(n_max, s.n);
    }
    for (int k = 1; k <= 100; ++k) {
        double n = n_max * k / 100.0;
        out << "curve," << fmt_g10(n) << ',' << fmt_g10(n * eval_vn(p, n, v_min_kmh)) << '\n';
    }
}

} // namespace gridflow
