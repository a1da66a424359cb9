#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "gridflow/calibration.hpp"
#include "gridflow/errors.hpp"
#include "gridflow/estimation.hpp"
#include "gridflow/forecast.hpp"
#include "gridflow/fundamental_diagram.hpp"
#include "gridflow/geo.hpp"
#include "gridflow/ingest.hpp"
#include "gridflow/simulator.hpp"
#include "gridflow/synth.hpp"

namespace gridflow {

/// One shared configuration for every pipeline stage, loaded from a JSON file
/// with per-stage sections. Absent keys keep their defaults; unknown keys are
/// rejected so typos cannot silently fall back.
struct PipelineConfig {
    std::uint64_t seed = 42;
    GridConfig grid = GridConfig::centered(64, 64, 100.0);
    GeoProjection proj{116.39, 39.9};
    IngestConfig ingest{};
    EstimationConfig estimation{};
    FdConfig fd{};
    SimConfig sim{};
    ChiProfile chi{};
    TuningConfig tuning{};

    // forecast stage
    std::int64_t origin_start_s = 22800; // 06:20
    std::int64_t origin_end_s = 64800;   // 18:00 (exclusive)
    std::int64_t origin_stride_s = 600;
    double horizon_s = 3600.0;

    // evaluate stage
    int eval_lead_min = 60;
    std::size_t eval_min_pairs = 8; // segment inclusion threshold
    double traveltime_min_s = 1200.0;
    double traveltime_max_s = 1800.0;

    // synth stage
    CityConfig city{};
    double day_start_s = 4 * 3600.0;
    double day_end_s = 22 * 3600.0;
    EmissionConfig emission{};
};

namespace detail {

class JsonReader {
public:
    JsonReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
        for (auto it = j.begin(); it != j.end(); ++it) unread_.insert(it.key());
    }

    ~JsonReader() = default;

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        unread_.erase(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    JsonReader section(const std::string& key) {
        unread_.erase(key);
        return JsonReader(j_.at(key), path_ + "." + key);
    }

    void finish() const {
        if (!unread_.empty())
            throw ConfigError(path_ + ": unknown key '" + *unread_.begin() + "'");
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> unread_;
};

inline void read_chi(JsonReader& r, ChiProfile& chi) {
    r.get("t_am_s", chi.t_am_s);
    r.get("t_pm_s", chi.t_pm_s);
    r.get("a_am", chi.a_am);
    r.get("a_pm", chi.a_pm);
    r.get("sigma_am_s", chi.sigma_am_s);
    r.get("sigma_pm_s", chi.sigma_pm_s);
    r.finish();
}

} // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j) {
    PipelineConfig cfg;
    detail::JsonReader root(j, "config");
    root.get("seed", cfg.seed);

    if (root.has("grid")) {
        auto r = root.section("grid");
        int nx = cfg.grid.nx, ny = cfg.grid.ny;
        double cell = cfg.grid.cell_size;
        r.get("nx", nx);
        r.get("ny", ny);
        r.get("cell_size_m", cell);
        r.get("center_lon", cfg.proj.lon0_deg);
        r.get("center_lat", cfg.proj.lat0_deg);
        r.finish();
        cfg.grid = GridConfig::centered(nx, ny, cell);
    }
    if (root.has("ingest")) {
        auto r = root.section("ingest");
        r.get("max_displacement_m", cfg.ingest.max_displacement_m);
        r.get("max_gap_s", cfg.ingest.max_gap_s);
        r.finish();
    }
    if (root.has("estimation")) {
        auto r = root.section("estimation");
        r.get("dt_s", cfg.estimation.dt_s);
        r.get("window_steps", cfg.estimation.window_steps);
        r.get("stride_s", cfg.estimation.stride_s);
        r.get("v_cap_kmh", cfg.estimation.v_cap_kmh);
        r.finish();
    }
    if (root.has("fd")) {
        auto r = root.section("fd");
        r.get("outlier_flux_frac", cfg.fd.outlier_flux_frac);
        r.get("top_flux_frac", cfg.fd.top_flux_frac);
        r.get("left_n_frac", cfg.fd.left_n_frac);
        r.get("min_samples", cfg.fd.min_samples);
        r.get("v_min_kmh", cfg.fd.v_min_kmh);
        r.get("default_vf_kmh", cfg.fd.defaults.v_f);
        r.get("default_vs_kmh", cfg.fd.defaults.v_s);
        r.get("default_nc", cfg.fd.defaults.n_c);
        r.get("default_nm", cfg.fd.defaults.n_m);
        r.finish();
    }
    if (root.has("sim")) {
        auto r = root.section("sim");
        r.get("dt_s", cfg.sim.dt_s);
        r.get("lambda", cfg.sim.lambda);
        r.get("omega", cfg.sim.omega);
        r.get("sigma_eta_kmh", cfg.sim.sigma_eta_kmh);
        r.get("v_min_kmh", cfg.sim.v_min_kmh);
        r.get("v_cap_kmh", cfg.sim.v_cap_kmh);
        r.get("occupancy_window", cfg.sim.occupancy_window);
        if (r.has("chi")) {
            auto rc = r.section("chi");
            detail::read_chi(rc, cfg.chi);
        }
        r.finish();
        if (cfg.sim.dt_s <= 0) throw ConfigError("sim.dt_s must be > 0");
        if (cfg.sim.omega < 0 || cfg.sim.omega > 1) throw ConfigError("sim.omega must be in [0,1]");
    }
    if (root.has("calibration")) {
        auto r = root.section("calibration");
        r.get("regular_start_s", cfg.tuning.regular_start_s);
        r.get("regular_end_s", cfg.tuning.regular_end_s);
        r.get("rush_start_s", cfg.tuning.rush_start_s);
        r.get("rush_end_s", cfg.tuning.rush_end_s);
        r.get("delta_vf_kmh", cfg.tuning.delta_vf_kmh);
        r.get("delta_n_rel", cfg.tuning.delta_n_rel);
        r.get("max_iterations", cfg.tuning.max_iterations);
        r.get("tolerance_kmh", cfg.tuning.tolerance_kmh);
        r.finish();
        cfg.tuning.validate();
    }
    if (root.has("forecast")) {
        auto r = root.section("forecast");
        r.get("origin_start_s", cfg.origin_start_s);
        r.get("origin_end_s", cfg.origin_end_s);
        r.get("origin_stride_s", cfg.origin_stride_s);
        r.get("horizon_s", cfg.horizon_s);
        r.finish();
        if (cfg.origin_stride_s <= 0) throw ConfigError("forecast.origin_stride_s must be > 0");
    }
    if (root.has("evaluate")) {
        auto r = root.section("evaluate");
        r.get("lead_min", cfg.eval_lead_min);
        r.get("min_pairs", cfg.eval_min_pairs);
        r.get("traveltime_min_s", cfg.traveltime_min_s);
        r.get("traveltime_max_s", cfg.traveltime_max_s);
        r.finish();
    }
    if (root.has("synth")) {
        auto r = root.section("synth");
        cfg.city.nx = cfg.grid.nx;
        cfg.city.ny = cfg.grid.ny;
        cfg.city.cell_size_m = cfg.grid.cell_size;
        r.get("corridors", cfg.city.corridors);
        r.get("day_start_s", cfg.day_start_s);
        r.get("day_end_s", cfg.day_end_s);
        if (r.has("demand")) {
            auto rd = r.section("demand");
            rd.get("corridor_rate_per_min", cfg.city.demand.corridor_rate_per_min);
            rd.get("collector_rate_per_min", cfg.city.demand.collector_rate_per_min);
            rd.get("cross_rate_per_min", cfg.city.demand.cross_rate_per_min);
            rd.get("background_rate_per_min", cfg.city.demand.background_rate_per_min);
            rd.get("surge_am_amp", cfg.city.demand.surge_am_amp);
            rd.get("surge_pm_amp", cfg.city.demand.surge_pm_amp);
            rd.get("surge_sigma_am_s", cfg.city.demand.surge_sigma_am_s);
            rd.get("surge_sigma_pm_s", cfg.city.demand.surge_sigma_pm_s);
            rd.get("t_am_s", cfg.city.demand.t_am_s);
            rd.get("t_pm_s", cfg.city.demand.t_pm_s);
            rd.finish();
        }
        if (r.has("chi")) {
            auto rc = r.section("chi");
            detail::read_chi(rc, cfg.city.chi);
        }
        if (r.has("emission")) {
            auto re = r.section("emission");
            re.get("interval_min_s", cfg.emission.interval_min_s);
            re.get("interval_max_s", cfg.emission.interval_max_s);
            re.get("noise_sigma_m", cfg.emission.noise_sigma_m);
            re.get("dropout_prob", cfg.emission.dropout_prob);
            re.get("corruption_prob", cfg.emission.corruption_prob);
            re.get("teleport_m", cfg.emission.teleport_m);
            re.get("macro_frac", cfg.emission.macro_frac);
            re.finish();
            cfg.emission.validate();
        }
        r.finish();
    }
    root.finish();

    cfg.grid.validate();
    cfg.sim.seed = cfg.seed;
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("config file not found: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return parse_config(j);
}

} // namespace gridflow
