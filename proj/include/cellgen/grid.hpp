#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cellgen {

/// Dense row-major 2D grid. Rows index y, columns index x.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        assert(rows >= 0 && cols >= 0);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool contains(int r, int c) const { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }

    T& operator()(int r, int c) { return data_[index(r, c)]; }
    const T& operator()(int r, int c) const { return data_[index(r, c)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    std::size_t index(int r, int c) const {
        assert(contains(r, c));
        return static_cast<std::size_t>(r) * cols_ + c;
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Grid&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using BinaryGrid = Grid<std::uint8_t>;
using RealGrid = Grid<double>;

/// Integer-labelled instance mask; 0 is background.
using Label = std::uint32_t;
using InstanceMask = Grid<Label>;

struct PixelPos {
    int row = 0;
    int col = 0;
    bool operator==(const PixelPos&) const = default;
};

}  // namespace cellgen
