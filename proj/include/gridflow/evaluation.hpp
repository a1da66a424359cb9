#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridflow/csv.hpp"
#include "gridflow/estimation.hpp"
#include "gridflow/forecast.hpp"
#include "gridflow/grid.hpp"
#include "gridflow/route.hpp"

namespace gridflow {

/// Ten connected cells scored together in one direction (1 km of road).
struct RoadSegment {
    std::string label;
    std::vector<CellIndex> cells;
    Direction dir = Direction::Right;

    static constexpr std::size_t kLength = 10;

    static RoadSegment make(std::string label, CellIndex start, Direction dir) {
        RoadSegment seg;
        seg.label = std::move(label);
        seg.dir = dir;
        seg.cells.push_back(start);
        for (std::size_t i = 1; i < kLength; ++i) {
            CellIndex prev = seg.cells.back();
            seg.cells.push_back({prev.col + dir_dcol(dir), prev.row + dir_drow(dir)});
        }
        return seg;
    }

    void validate(const GridConfig& grid) const {
        if (cells.size() != kLength) throw DataError("segment '" + label + "': must have 10 cells");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!in_bounds(cells[i], grid))
                throw DataError("segment '" + label + "': cell out of bounds");
            if (i > 0 && direction_between(cells[i - 1], cells[i]) != dir)
                throw DataError("segment '" + label + "': cells not consecutive along direction");
        }
    }
};

/// Mean of the nonzero per-cell directional speeds; absent when no cell of
/// the segment has data.
inline std::optional<double> segment_speed(const DirectedCellState& field,
                                           const RoadSegment& seg) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : seg.cells) {
        double v = field.V.at(c, seg.dir);
        if (v > 0.0) {
            sum += v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

inline std::optional<double> segment_speed(std::span<const SnapshotRow> rows,
                                           const RoadSegment& seg) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : seg.cells) {
        for (const auto& r : rows) {
            if (r.cell == c && r.dir == seg.dir && r.v_kmh > 0.0) {
                sum += r.v_kmh;
                ++n;
                break;
            }
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

/// Root mean square difference over one aligned series; pairs with an absent
/// side are dropped. Throws when nothing is scorable.
inline double rmse(std::span<const std::optional<double>> pred,
                   std::span<const std::optional<double>> real) {
    if (pred.size() != real.size()) throw DataError("rmse: series length mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!pred[i] || !real[i]) continue;
        double d = *real[i] - *pred[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw DataError("rmse: no scorable pairs");
    return std::sqrt(sum / static_cast<double>(n));
}

/// Accuracy = 1 - MAPE over one aligned series. Pairs whose real value is
/// zero are dropped and counted.
inline double accuracy(std::span<const std::optional<double>> pred,
                       std::span<const std::optional<double>> real,
                       std::size_t* zero_dropped = nullptr) {
    if (pred.size() != real.size()) throw DataError("accuracy: series length mismatch");
    double sum = 0.0;
    std::size_t n = 0, zeros = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!pred[i] || !real[i]) continue;
        if (*real[i] == 0.0) {
            ++zeros;
            continue;
        }
        sum += std::abs(*real[i] - *pred[i]) / *real[i];
        ++n;
    }
    if (zero_dropped) *zero_dropped = zeros;
    if (n == 0) throw DataError("accuracy: no scorable pairs");
    return 1.0 - sum / static_cast<double>(n);
}

/// Persistence forecast: the current value predicted to hold at the lead.
inline std::vector<std::optional<double>>
extrapolation_baseline(std::span<const std::optional<double>> real_at_origin) {
    return {real_at_origin.begin(), real_at_origin.end()};
}

/// Segment-level score sheet: per-segment series are scored individually and
/// averaged over the segments that had any scorable pair.
struct SegmentScores {
    double rmse_kmh = 0.0;
    double accuracy = 0.0;
    std::size_t segments_scored = 0;
};

/// Segments enter the average only with at least min_pairs scorable pairs; a
/// segment observed once or twice in a whole day says nothing about a method.
inline SegmentScores score_segments(std::span<const std::vector<std::optional<double>>> pred,
                                    std::span<const std::vector<std::optional<double>>> real,
                                    std::size_t min_pairs = 8) {
    if (pred.size() != real.size()) throw DataError("score: segment count mismatch");
    SegmentScores out;
    for (std::size_t s = 0; s < pred.size(); ++s) {
        std::size_t pairs = 0;
        for (std::size_t k = 0; k < pred[s].size(); ++k)
            if (pred[s][k] && real[s][k]) ++pairs;
        if (pairs < std::max<std::size_t>(min_pairs, 1)) continue;
        out.rmse_kmh += rmse(pred[s], real[s]);
        out.accuracy += accuracy(pred[s], real[s]);
        out.segments_scored += 1;
    }
    if (out.segments_scored == 0) throw DataError("score: no segment had enough scorable pairs");
    out.rmse_kmh /= static_cast<double>(out.segments_scored);
    out.accuracy /= static_cast<double>(out.segments_scored);
    return out;
}

// ---------------------------------------------------------------------------
// Travel time

struct TravelTimeResult {
    double seconds = 0.0;
    bool used_v_min_fallback = false;
};

/// Integrates the route against forecast frames: each cell is traversed at
/// the directional speed of the frame active when the cell is entered
/// (piecewise-constant frames, clamped to the available range). Cells with
/// no data in the active frame fall back to v_min and are flagged.
inline TravelTimeResult travel_time(const ContinuousRoute& route,
                                    std::span<const DirectedCellState> frames,
                                    double cell_size, double v_min_kmh = 1.0) {
    if (frames.empty()) throw DataError("travel_time: no forecast frames");
    if (route.degenerate()) return {0.0, false};
    auto dirs = route_directions(route);

    TravelTimeResult out;
    double clock = route.depart_s();
    for (std::size_t i = 0; i + 1 < route.cells.size(); ++i) {
        // latest frame at or before the clock; clamp outside the range
        std::size_t f = 0;
        while (f + 1 < frames.size() && frames[f + 1].t_s <= clock) ++f;
        double v = frames[f].V.at(route.cells[i], dirs[i + 1]);
        if (v <= 0.0) {
            v = v_min_kmh;
            out.used_v_min_fallback = true;
        }
        double dt = cell_size / (v / 3.6);
        out.seconds += dt;
        clock += dt;
    }
    return out;
}

/// Histogram of relative errors over [-1, 1]: 20 uniform bins plus an
/// underflow and an overflow bin.
struct ErrorHistogram {
    static constexpr int kBins = 20;
    std::vector<std::size_t> counts = std::vector<std::size_t>(kBins + 2, 0);

    void add(double rel_err) {
        if (rel_err < -1.0) {
            counts.front() += 1;
        } else if (rel_err >= 1.0) {
            counts.back() += 1;
        } else {
            int bin = static_cast<int>(std::floor((rel_err + 1.0) / 2.0 * kBins));
            counts[static_cast<std::size_t>(bin) + 1] += 1;
        }
    }
};

inline void write_histogram_csv(const std::string& path, const ErrorHistogram& h) {
    auto out = open_output(path);
    out << "bin_lo,bin_hi,count\n";
    out << "-inf,-1," << h.counts.front() << '\n';
    for (int b = 0; b < ErrorHistogram::kBins; ++b) {
        double lo = -1.0 + 2.0 * b / ErrorHistogram::kBins;
        double hi = -1.0 + 2.0 * (b + 1) / ErrorHistogram::kBins;
        out << fmt_g10(lo) << ',' << fmt_g10(hi) << ',' << h.counts[static_cast<std::size_t>(b) + 1]
            << '\n';
    }
    out << "1,inf," << h.counts.back() << '\n';
}

// ---------------------------------------------------------------------------
// Segment layout and persistence. Generated segments start on the central
// row or central column of the grid.

inline void write_segments_csv(const std::string& path, std::span<const RoadSegment> segments) {
    auto out = open_output(path);
    out << "label,start_col,start_row,dir\n";
    for (const auto& s : segments)
        out << s.label << ',' << s.cells.front().col << ',' << s.cells.front().row << ','
            << dir_char(s.dir) << '\n';
}

inline std::vector<RoadSegment> read_segments_csv(const std::string& path,
                                                  const GridConfig& grid) {
    auto in = open_input(path);
    std::vector<RoadSegment> segments;
    std::string line;
    std::vector<std::string_view> f;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("label", 0) == 0) continue;
        }
        split_csv_line(line, f);
        if (f.size() != 4) throw DataError("segments csv: expected 4 fields: " + line);
        if (f[3].size() != 1) throw DataError("segments csv: bad dir: " + line);
        auto seg = RoadSegment::make(std::string(f[0]),
                                     {static_cast<int>(parse_int(f[1], "start_col")),
                                      static_cast<int>(parse_int(f[2], "start_row"))},
                                     dir_from_char(f[3][0]));
        seg.validate(grid);
        segments.push_back(std::move(seg));
    }
    return segments;
}

} // namespace gridflow
