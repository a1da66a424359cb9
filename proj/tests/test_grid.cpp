#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "gridflow/grid.hpp"

using namespace gridflow;

namespace {

// All monotone 4-connected paths a -> b, as cell sequences including a.
void enumerate_monotone(CellIndex cur, CellIndex b, std::vector<CellIndex>& path,
                        std::vector<std::vector<CellIndex>>& out) {
    if (cur == b) {
        out.push_back(path);
        return;
    }
    if (cur.col != b.col) {
        CellIndex next{cur.col + (b.col > cur.col ? 1 : -1), cur.row};
        path.push_back(next);
        enumerate_monotone(next, b, path, out);
        path.pop_back();
    }
    if (cur.row != b.row) {
        CellIndex next{cur.col, cur.row + (b.row > cur.row ? 1 : -1)};
        path.push_back(next);
        enumerate_monotone(next, b, path, out);
        path.pop_back();
    }
}

std::vector<CellIndex> cells_of(CellIndex a, const std::vector<RasterStep>& steps) {
    std::vector<CellIndex> cells{a};
    for (const auto& s : steps) cells.push_back(s.cell);
    return cells;
}

} // namespace

TEST_CASE("cell_of_point basics") {
    GridConfig g = GridConfig::centered(4, 4, 100.0);
    // corner of cell (0,0)
    auto c = cell_of_point({g.origin_x, g.origin_y}, g);
    REQUIRE(c.has_value());
    CHECK(*c == CellIndex{0, 0});

    c = cell_of_point({g.origin_x + 150.0, g.origin_y + 250.0}, g);
    REQUIRE(c.has_value());
    CHECK(*c == CellIndex{1, 2});

    // one meter past the far edge
    CHECK_FALSE(cell_of_point({g.origin_x + 4 * 100.0 + 1.0, g.origin_y}, g).has_value());
    // exactly on the far edge is already outside
    CHECK_FALSE(cell_of_point({g.origin_x + 4 * 100.0, g.origin_y}, g).has_value());
    CHECK_FALSE(cell_of_point({std::nan(""), 0.0}, g).has_value());
}

TEST_CASE("direction_between adjacent cells") {
    CHECK(direction_between({5, 5}, {6, 5}) == Direction::Right);
    CHECK(direction_between({5, 5}, {5, 6}) == Direction::Up);
    CHECK(direction_between({5, 5}, {4, 5}) == Direction::Left);
    CHECK(direction_between({5, 5}, {5, 4}) == Direction::Down);
    CHECK_THROWS_AS(direction_between({5, 5}, {7, 5}), DataError);
    CHECK_THROWS_AS(direction_between({5, 5}, {6, 6}), DataError);
}

TEST_CASE("rasterize_segment examples") {
    CHECK(rasterize_segment({0, 0}, {0, 0}).empty());

    auto right3 = rasterize_segment({0, 0}, {3, 0});
    REQUIRE(right3.size() == 3);
    for (const auto& s : right3) CHECK(s.dir == Direction::Right);
    CHECK(right3.back().cell == CellIndex{3, 0});

    // Diagonal: four steps, alternating right/up starting horizontal, and the
    // result must be one of the monotone staircases.
    auto diag = rasterize_segment({0, 0}, {2, 2});
    REQUIRE(diag.size() == 4);
    CHECK(diag[0].dir == Direction::Right);
    CHECK(diag[1].dir == Direction::Up);
    CHECK(diag[2].dir == Direction::Right);
    CHECK(diag[3].dir == Direction::Up);

    std::vector<std::vector<CellIndex>> all;
    CellIndex a{0, 0}, b{2, 2};
    std::vector<CellIndex> scratch{a};
    enumerate_monotone(a, b, scratch, all);
    CHECK(all.size() == 6); // C(4,2) monotone staircases
    auto chosen = cells_of(a, diag);
    CHECK(std::find(all.begin(), all.end(), chosen) != all.end());
}

TEST_CASE("rasterize_segment properties on random endpoints") {
    std::mt19937 gen(7);
    std::uniform_int_distribution<int> coord(0, 15);
    for (int it = 0; it < 300; ++it) {
        CellIndex a{coord(gen), coord(gen)};
        CellIndex b{coord(gen), coord(gen)};
        auto fwd = rasterize_segment(a, b);

        // length equals the L1 distance and consecutive cells are 4-adjacent
        CHECK(static_cast<int>(fwd.size()) == l1_distance(a, b));
        auto cells = cells_of(a, fwd);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            CHECK(l1_distance(cells[i - 1], cells[i]) == 1);
            CHECK(direction_between(cells[i - 1], cells[i]) == fwd[i - 1].dir);
        }

        // reversal: the opposite query walks the same cells backwards with
        // flipped directions
        auto bwd = rasterize_segment(b, a);
        REQUIRE(bwd.size() == fwd.size());
        auto bwd_cells = cells_of(b, bwd);
        std::vector<CellIndex> expect(cells.rbegin(), cells.rend());
        CHECK(bwd_cells == expect);
        for (std::size_t i = 0; i < fwd.size(); ++i)
            CHECK(bwd[i].dir == opposite(fwd[fwd.size() - 1 - i].dir));
    }
}

TEST_CASE("rasterize_segment sub-paths are closed under re-rasterization") {
    // Sampling any two cells of a produced path and rasterizing between them
    // must reproduce the sub-path exactly; route recovery from sparse GPS
    // samples depends on this.
    std::mt19937 gen(13);
    std::uniform_int_distribution<int> coord(0, 15);
    for (int it = 0; it < 300; ++it) {
        CellIndex a{coord(gen), coord(gen)};
        CellIndex b{coord(gen), coord(gen)};
        auto cells = cells_of(a, rasterize_segment(a, b));
        if (cells.size() < 3) continue;
        std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
        std::size_t i = pick(gen), j = pick(gen);
        if (i > j) std::swap(i, j);
        auto sub = cells_of(cells[i], rasterize_segment(cells[i], cells[j]));
        std::vector<CellIndex> expect(cells.begin() + i, cells.begin() + j + 1);
        CHECK(sub == expect);
    }
}

TEST_CASE("grid config validation") {
    GridConfig g;
    g.cell_size = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GridConfig{};
    g.nx = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}
