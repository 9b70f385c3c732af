#pragma once

#include <cstddef>
#include <vector>

#include "sbsim/core.hpp"

namespace sbsim {

// Dense row-major 2D array. Rows index vertically (row 0 at the top),
// columns horizontally.
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) fail<ValidationError>("Grid2D: negative shape");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool in_bounds(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Value at (r, c), or `fallback` when out of range.
  T at_or(int r, int c, T fallback) const { return in_bounds(r, c) ? (*this)(r, c) : fallback; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(T v) { data_.assign(data_.size(), v); }

  template <typename U>
  bool same_shape(const Grid2D<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell& a, const Cell& b) { return a.row == b.row && a.col == b.col; }
  friend bool operator<(const Cell& a, const Cell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  }
};

}  // namespace sbsim
