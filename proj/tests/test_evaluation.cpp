#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "gridflow/evaluation.hpp"

using namespace gridflow;

namespace {

using Series = std::vector<std::optional<double>>;

DirectedCellState field_with(int nx, int ny, std::vector<std::tuple<CellIndex, Direction, double>> vals,
                             double t = 0.0) {
    DirectedCellState st{t, DirectedField<double>(nx, ny, 0.0), DirectedField<double>(nx, ny, 0.0)};
    for (auto& [c, d, v] : vals) {
        st.V.at(c, d) = v;
        st.N.at(c, d) = 1.0;
    }
    return st;
}

} // namespace

TEST_CASE("segment_speed averages nonzero cells") {
    GridConfig g = GridConfig::centered(32, 32);
    auto seg = RoadSegment::make("s1", {4, 16}, Direction::Right);
    seg.validate(g);

    std::vector<std::tuple<CellIndex, Direction, double>> uniform;
    for (const auto& c : seg.cells) uniform.push_back({c, Direction::Right, 20.0});
    CHECK(*segment_speed(field_with(32, 32, uniform), seg) == doctest::Approx(20.0));

    std::vector<std::tuple<CellIndex, Direction, double>> split;
    for (std::size_t i = 0; i < seg.cells.size(); ++i)
        split.push_back({seg.cells[i], Direction::Right, i < 5 ? 10.0 : 30.0});
    CHECK(*segment_speed(field_with(32, 32, split), seg) == doctest::Approx(20.0));

    CHECK_FALSE(segment_speed(field_with(32, 32, {}), seg).has_value());

    // zero cells are excluded, not averaged in
    std::vector<std::tuple<CellIndex, Direction, double>> partial{
        {seg.cells[0], Direction::Right, 12.0}, {seg.cells[1], Direction::Right, 18.0}};
    CHECK(*segment_speed(field_with(32, 32, partial), seg) == doctest::Approx(15.0));
}

TEST_CASE("rmse examples") {
    Series real{10.0, 20.0, 30.0};

    CHECK(rmse(real, real) == doctest::Approx(0.0));

    Series off{13.0, 23.0, 33.0};
    CHECK(rmse(off, real) == doctest::Approx(3.0));

    Series two_pred{13.0, 24.0};
    Series two_real{10.0, 20.0};
    CHECK(rmse(two_pred, two_real) == doctest::Approx(std::sqrt(12.5)));

    Series empty;
    CHECK_THROWS_AS(rmse(empty, empty), DataError);
    Series holes{std::nullopt, std::nullopt};
    CHECK_THROWS_AS(rmse(holes, holes), DataError);
}

TEST_CASE("accuracy examples") {
    Series real{10.0, 20.0, 40.0};
    CHECK(accuracy(real, real) == doctest::Approx(1.0));

    Series thirty_off{13.0, 26.0, 52.0};
    CHECK(accuracy(thirty_off, real) == doctest::Approx(0.7));

    Series doubled{20.0, 40.0, 80.0};
    CHECK(accuracy(doubled, real) == doctest::Approx(0.0));

    // zero real values are dropped and counted
    Series with_zero_real{10.0, 0.0};
    Series pred{11.0, 5.0};
    std::size_t zeros = 0;
    double a = accuracy(pred, with_zero_real, &zeros);
    CHECK(zeros == 1);
    CHECK(a == doctest::Approx(0.9));
}

TEST_CASE("extrapolation baseline shifts the series") {
    Series at_origin{10.0, 12.0, std::nullopt, 15.0};
    auto pred = extrapolation_baseline(at_origin);
    REQUIRE(pred.size() == 4);
    CHECK(*pred[0] == 10.0);
    CHECK_FALSE(pred[2].has_value());

    // constant series: the baseline is perfect
    Series constant{20.0, 20.0, 20.0};
    auto base = extrapolation_baseline(constant);
    CHECK(accuracy(base, constant) == doctest::Approx(1.0));
    CHECK(rmse(base, constant) == doctest::Approx(0.0));

    // a step change is missed for one lead period
    Series before_step{20.0, 20.0, 10.0};
    Series after_step{20.0, 10.0, 10.0};
    auto sp = extrapolation_baseline(before_step);
    CHECK(rmse(sp, after_step) == doctest::Approx(std::sqrt(100.0 / 3.0)));
}

TEST_CASE("travel_time integration") {
    GridConfig g = GridConfig::centered(32, 32);
    ContinuousRoute r;
    r.taxi_id = "t";
    for (int i = 0; i <= 10; ++i) {
        r.cells.push_back({2 + i, 16});
        r.entries_s.push_back(0.0);
    }

    SUBCASE("uniform 6 km/h field: 1 km takes 600 s") {
        std::vector<std::tuple<CellIndex, Direction, double>> vals;
        for (int i = 0; i < 11; ++i) vals.push_back({{2 + i, 16}, Direction::Right, 6.0});
        std::vector<DirectedCellState> frames{field_with(32, 32, vals)};
        auto tt = travel_time(r, frames, g.cell_size);
        CHECK(tt.seconds == doctest::Approx(600.0));
        CHECK_FALSE(tt.used_v_min_fallback);
    }

    SUBCASE("speed doubling halfway cuts the time to 3/4") {
        std::vector<std::tuple<CellIndex, Direction, double>> vals;
        for (int i = 0; i < 11; ++i)
            vals.push_back({{2 + i, 16}, Direction::Right, i < 5 ? 6.0 : 12.0});
        std::vector<DirectedCellState> frames{field_with(32, 32, vals)};
        auto tt = travel_time(r, frames, g.cell_size);
        CHECK(tt.seconds == doctest::Approx(0.75 * 600.0));
    }

    SUBCASE("temporal frame switch, aligned at a cell border") {
        std::vector<std::tuple<CellIndex, Direction, double>> slow, fast;
        for (int i = 0; i < 11; ++i) {
            slow.push_back({{2 + i, 16}, Direction::Right, 6.0});
            fast.push_back({{2 + i, 16}, Direction::Right, 12.0});
        }
        std::vector<DirectedCellState> frames{field_with(32, 32, slow, 0.0),
                                              field_with(32, 32, fast, 300.0)};
        auto tt = travel_time(r, frames, g.cell_size);
        CHECK(tt.seconds == doctest::Approx(450.0)); // 5 cells at 6, 5 at 12
    }

    SUBCASE("missing speed falls back to v_min with a flag") {
        std::vector<DirectedCellState> frames{field_with(32, 32, {})};
        auto tt = travel_time(r, frames, g.cell_size, 1.0);
        CHECK(tt.used_v_min_fallback);
        CHECK(tt.seconds == doctest::Approx(3600.0)); // 1 km at 1 km/h
    }

    SUBCASE("raising every speed weakly decreases the time") {
        std::vector<std::tuple<CellIndex, Direction, double>> vals;
        for (int i = 0; i < 11; ++i)
            vals.push_back({{2 + i, 16}, Direction::Right, 5.0 + (i % 4) * 3.0});
        std::vector<DirectedCellState> lo{field_with(32, 32, vals)};
        for (auto& [c, d, v] : vals) v *= 1.3;
        std::vector<DirectedCellState> hi{field_with(32, 32, vals)};
        CHECK(travel_time(r, hi, g.cell_size).seconds <=
              travel_time(r, lo, g.cell_size).seconds);
    }
}

TEST_CASE("error histogram binning") {
    ErrorHistogram h;
    h.add(-2.0);  // underflow
    h.add(-1.0);  // first regular bin
    h.add(-0.05); // bin 9
    h.add(0.0);   // bin 10
    h.add(0.999); // last regular bin
    h.add(1.0);   // overflow
    CHECK(h.counts.front() == 1);
    CHECK(h.counts.back() == 1);
    CHECK(h.counts[1] == 1);
    CHECK(h.counts[10] == 1);
    CHECK(h.counts[11] == 1);
    CHECK(h.counts[20] == 1);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 6);
}

TEST_CASE("segment construction, validation and central-line layout") {
    GridConfig g = GridConfig::centered(64, 64);
    auto seg = RoadSegment::make("a", {32, 7}, Direction::Right);
    seg.validate(g);
    CHECK(seg.cells.size() == 10);
    CHECK(seg.cells.back() == CellIndex{41, 7});

    // broken: off the grid
    auto off = RoadSegment::make("b", {60, 7}, Direction::Right);
    CHECK_THROWS_AS(off.validate(g), DataError);

    // csv round trip
    std::vector<RoadSegment> segs{seg, RoadSegment::make("c", {5, 32}, Direction::Up)};
    std::string path = "build_test_segments.csv";
    write_segments_csv(path, segs);
    auto back = read_segments_csv(path, g);
    REQUIRE(back.size() == 2);
    CHECK(back[0].cells == seg.cells);
    CHECK(back[1].dir == Direction::Up);
    std::remove(path.c_str());

    // layout constraint: generated segments start on the central row/column
    for (const auto& s : back) {
        bool central = s.cells.front().col == g.nx / 2 || s.cells.front().row == g.ny / 2;
        CHECK(central);
    }
}
