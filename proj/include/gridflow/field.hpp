#pragma once

#include <cstddef>
#include <vector>

#include "gridflow/grid.hpp"

namespace gridflow {

/// Dense per-(cell, direction) storage, laid out row-major with the four
/// directions innermost.
template <typename T>
class DirectedField {
public:
    DirectedField() = default;
    DirectedField(int nx, int ny, T init = T{})
        : nx_(nx), ny_(ny),
          data_(static_cast<std::size_t>(nx) * ny * kNumDirections, init) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    std::size_t flat(CellIndex c, Direction d) const {
        return (static_cast<std::size_t>(c.row) * nx_ + c.col) * kNumDirections +
               static_cast<std::size_t>(d);
    }

    CellIndex cell_of_flat(std::size_t i) const {
        std::size_t cell = i / kNumDirections;
        return {static_cast<int>(cell % nx_), static_cast<int>(cell / nx_)};
    }

    Direction dir_of_flat(std::size_t i) const {
        return static_cast<Direction>(i % kNumDirections);
    }

    T& at(CellIndex c, Direction d) { return data_[flat(c, d)]; }
    const T& at(CellIndex c, Direction d) const { return data_[flat(c, d)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    void fill(T v) { data_.assign(data_.size(), v); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<T> data_;
};

} // namespace gridflow
