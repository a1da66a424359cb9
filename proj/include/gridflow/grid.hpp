#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow {

/// Uniform cell lattice in local planar coordinates (meters).
struct GridConfig {
    double origin_x = 0.0; // lower-left corner, meters
    double origin_y = 0.0;
    double cell_size = 100.0; // meters
    int nx = 256;
    int ny = 256;

    void validate() const {
        if (!(cell_size > 0.0)) throw ConfigError("grid: cell_size must be > 0");
        if (nx < 1 || ny < 1) throw ConfigError("grid: nx and ny must be >= 1");
    }

    double width_m() const { return nx * cell_size; }
    double height_m() const { return ny * cell_size; }

    /// Grid of nx-by-ny cells whose planar frame is centered on (0,0).
    static GridConfig centered(int nx, int ny, double cell_size = 100.0) {
        GridConfig g;
        g.nx = nx;
        g.ny = ny;
        g.cell_size = cell_size;
        g.origin_x = -0.5 * nx * cell_size;
        g.origin_y = -0.5 * ny * cell_size;
        g.validate();
        return g;
    }
};

enum class Direction : std::uint8_t { Right = 0, Up = 1, Left = 2, Down = 3 };

constexpr int kNumDirections = 4;

constexpr Direction opposite(Direction d) {
    return static_cast<Direction>((static_cast<int>(d) + 2) % 4);
}

constexpr int dir_dcol(Direction d) {
    constexpr std::array<int, 4> dc{1, 0, -1, 0};
    return dc[static_cast<int>(d)];
}

constexpr int dir_drow(Direction d) {
    constexpr std::array<int, 4> dr{0, 1, 0, -1};
    return dr[static_cast<int>(d)];
}

constexpr char dir_char(Direction d) {
    constexpr std::array<char, 4> c{'R', 'U', 'L', 'D'};
    return c[static_cast<int>(d)];
}

inline Direction dir_from_char(char c) {
    switch (c) {
    case 'R': return Direction::Right;
    case 'U': return Direction::Up;
    case 'L': return Direction::Left;
    case 'D': return Direction::Down;
    default: throw DataError(std::string("unknown direction code '") + c + "'");
    }
}

struct CellIndex {
    int col = 0;
    int row = 0;

    bool operator==(const CellIndex&) const = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline bool in_bounds(CellIndex c, const GridConfig& g) {
    return c.col >= 0 && c.col < g.nx && c.row >= 0 && c.row < g.ny;
}

/// Cell containing a planar point, or nullopt when the point is non-finite
/// or outside the lattice.
inline std::optional<CellIndex> cell_of_point(Vec2 p, const GridConfig& g) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;
    double fx = std::floor((p.x - g.origin_x) / g.cell_size);
    double fy = std::floor((p.y - g.origin_y) / g.cell_size);
    if (fx < 0.0 || fy < 0.0 || fx >= static_cast<double>(g.nx) || fy >= static_cast<double>(g.ny))
        return std::nullopt;
    return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

inline Vec2 cell_center(CellIndex c, const GridConfig& g) {
    return {g.origin_x + (c.col + 0.5) * g.cell_size, g.origin_y + (c.row + 0.5) * g.cell_size};
}

inline int l1_distance(CellIndex a, CellIndex b) {
    return std::abs(a.col - b.col) + std::abs(a.row - b.row);
}

/// Direction of the single step a -> b. Throws unless the cells are 4-adjacent.
inline Direction direction_between(CellIndex a, CellIndex b) {
    int dc = b.col - a.col;
    int dr = b.row - a.row;
    if (dc == 1 && dr == 0) return Direction::Right;
    if (dc == -1 && dr == 0) return Direction::Left;
    if (dc == 0 && dr == 1) return Direction::Up;
    if (dc == 0 && dr == -1) return Direction::Down;
    throw DataError("direction_between: cells are not 4-adjacent");
}

/// One rasterization step: the cell entered and the direction of the move.
struct RasterStep {
    CellIndex cell;
    Direction dir;

    bool operator==(const RasterStep&) const = default;
};

namespace detail {

inline bool raster_canonical(CellIndex a, CellIndex b) {
    if (a.col != b.col) return a.col < b.col;
    return a.row <= b.row;
}

// Staircase walk with a memoryless step rule: while both axes still differ
// from the target, the cell parity (col+row) decides whether the horizontal
// or the vertical move comes next. Because the choice depends only on the
// current cell and the remaining displacement signs, any sub-path between two
// cells of a produced path is itself the produced path for those endpoints —
// which is what makes GPS samples taken along a route re-rasterize to the
// original cell sequence.
inline std::vector<RasterStep> raster_walk(CellIndex a, CellIndex b) {
    std::vector<RasterStep> steps;
    steps.reserve(static_cast<std::size_t>(l1_distance(a, b)));
    CellIndex cur = a;
    while (!(cur == b)) {
        bool need_h = cur.col != b.col;
        bool need_v = cur.row != b.row;
        bool move_h = need_h && (!need_v || ((cur.col + cur.row) & 1) == 0);
        Direction d;
        if (move_h)
            d = b.col > cur.col ? Direction::Right : Direction::Left;
        else
            d = b.row > cur.row ? Direction::Up : Direction::Down;
        cur = CellIndex{cur.col + dir_dcol(d), cur.row + dir_drow(d)};
        steps.push_back({cur, d});
    }
    return steps;
}

} // namespace detail

/// 4-connected staircase path from a to b, as (cell entered, move direction)
/// steps; the start cell is not included. The path is monotone per axis, has
/// exactly |dcol| + |drow| steps, and is symmetric: the path for (b, a) walks
/// the same cells in reverse with opposite directions.
inline std::vector<RasterStep> rasterize_segment(CellIndex a, CellIndex b) {
    if (detail::raster_canonical(a, b)) return detail::raster_walk(a, b);

    // Non-canonical orientation: reverse the canonical walk so both
    // orientations traverse the same cells.
    std::vector<RasterStep> fwd = detail::raster_walk(b, a);
    std::vector<RasterStep> steps;
    steps.reserve(fwd.size());
    for (std::size_t i = fwd.size(); i-- > 0;) {
        CellIndex entered = (i == 0) ? b : fwd[i - 1].cell;
        steps.push_back({entered, opposite(fwd[i].dir)});
    }
    return steps;
}

} // namespace gridflow
