#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow {

// Minimal CSV helpers. All artifacts here are plain comma-separated numeric
// tables without quoting, so nothing fancier is needed.

inline std::vector<std::string_view> split_csv_line(std::string_view line,
                                                    std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(std::string("bad numeric field for ") + what + ": '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s, const char* what) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(std::string("bad integer field for ") + what + ": '" + std::string(s) + "'");
    return v;
}

/// Shortest float formatting that is stable across runs (%.10g).
inline std::string fmt_g10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("missing input file: " + path);
    return in;
}

} // namespace gridflow
