#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <unistd.h>
#include <fstream>
#include <string>
#include <vector>

#ifndef GRIDFLOW_CLI_PATH
#define GRIDFLOW_CLI_PATH "gridflow"
#endif

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "seed": 9,
  "grid": {"nx": 32, "ny": 32, "cell_size_m": 100, "center_lon": 116.39, "center_lat": 39.9},
  "sim": {"v_min_kmh": 2},
  "fd": {"v_min_kmh": 2},
  "calibration": {"max_iterations": 2},
  "forecast": {"origin_start_s": 25200, "origin_end_s": 27000, "origin_stride_s": 600, "horizon_s": 3600},
  "evaluate": {"min_pairs": 2, "traveltime_min_s": 300, "traveltime_max_s": 1500},
  "synth": {
    "corridors": 6,
    "day_start_s": 21600,
    "day_end_s": 32400,
    "demand": {"corridor_rate_per_min": 1.5, "collector_rate_per_min": 0.8,
               "cross_rate_per_min": 0.1, "background_rate_per_min": 0.1,
               "surge_am_amp": 0.8},
    "emission": {"interval_min_s": 40, "interval_max_s": 60, "noise_sigma_m": 5,
                 "dropout_prob": 0, "corruption_prob": 0}
  }
})";

int run_cli(const std::string& args) {
    std::string cmd = std::string(GRIDFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gridflow_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("cli pipeline end to end, exit codes and idempotence") {
    TempDir tmp;
    fs::path cfg_path = tmp.path / "config.json";
    std::ofstream(cfg_path) << kSmallConfig;
    std::string base = "-c " + cfg_path.string() + " -d " + (tmp.path / "art").string();

    SUBCASE("missing artifacts are reported before any stage ran") {
        CHECK(run_cli("fit " + base) == 3);
        CHECK(run_cli("report " + base) == 3);
    }

    SUBCASE("bad config file") {
        fs::path broken = tmp.path / "broken.json";
        std::ofstream(broken) << "{ not json";
        CHECK(run_cli("synth -c " + broken.string() + " -d " + (tmp.path / "x").string()) == 2);
        // unknown keys are rejected too
        fs::path unknown = tmp.path / "unknown.json";
        std::ofstream(unknown) << R"({"grid": {"nx": 16, "ny": 16, "cell_sizee_m": 100}})";
        CHECK(run_cli("synth -c " + unknown.string() + " -d " + (tmp.path / "x").string()) == 2);
    }

    SUBCASE("full chain, determinism, data validation") {
        REQUIRE(run_cli("synth " + base) == 0);
        CHECK(fs::exists(tmp.path / "art" / "gps.csv"));
        CHECK(fs::exists(tmp.path / "art" / "scenario.json"));
        CHECK(fs::exists(tmp.path / "art" / "segments.csv"));

        REQUIRE(run_cli("preprocess " + base + " --workers 2") == 0);
        CHECK(fs::exists(tmp.path / "art" / "routes.ndjson"));

        REQUIRE(run_cli("estimate " + base) == 0);
        REQUIRE(run_cli("fit " + base + " --scatter-cell 16,3,R") == 0);
        CHECK(fs::exists(tmp.path / "art" / "fd.csv"));
        CHECK(fs::exists(tmp.path / "art" / "fd_scatter_c16_r3_R.csv"));

        // stage idempotence: byte-identical artifacts on re-run
        std::string routes_before = slurp(tmp.path / "art" / "routes.ndjson");
        std::string fd_before = slurp(tmp.path / "art" / "fd.csv");
        REQUIRE(run_cli("preprocess " + base) == 0);
        REQUIRE(run_cli("fit " + base) == 0);
        CHECK(slurp(tmp.path / "art" / "routes.ndjson") == routes_before);
        CHECK(slurp(tmp.path / "art" / "fd.csv") == fd_before);

        REQUIRE(run_cli("calibrate " + base) == 0);
        CHECK(fs::exists(tmp.path / "art" / "fd_tuned.csv"));
        CHECK(fs::exists(tmp.path / "art" / "calibration.csv"));
        CHECK(fs::exists(tmp.path / "art" / "sim_snapshots.csv"));

        REQUIRE(run_cli("forecast " + base + " --tag model") == 0);
        std::string fc_before = slurp(tmp.path / "art" / "forecasts_model.csv");
        REQUIRE(run_cli("forecast " + base + " --tag model") == 0);
        CHECK(slurp(tmp.path / "art" / "forecasts_model.csv") == fc_before);
        CHECK(!fc_before.empty());

        REQUIRE(run_cli("evaluate " + base + " --truth " +
                        (tmp.path / "art" / "truth_snapshots.csv").string()) == 0);
        CHECK(fs::exists(tmp.path / "art" / "eval" / "scores.csv"));
        CHECK(fs::exists(tmp.path / "art" / "eval" / "segment_series.csv"));
        CHECK(fs::exists(tmp.path / "art" / "eval" / "traveltime_hist.csv"));

        REQUIRE(run_cli("report " + base) == 0);
        CHECK(fs::exists(tmp.path / "art" / "report" / "table1.csv"));
        CHECK(fs::exists(tmp.path / "art" / "report" / "fig7_segment_series.csv"));
        CHECK(fs::exists(tmp.path / "art" / "report" / "fig9_traveltime_hist.csv"));

        // malformed input data -> exit 4
        {
            std::ofstream gps(tmp.path / "art" / "gps.csv", std::ios::app);
            gps << "t9999,not_a_number,116.4,39.9,1\n";
        }
        CHECK(run_cli("preprocess " + base) == 4);
    }
}
