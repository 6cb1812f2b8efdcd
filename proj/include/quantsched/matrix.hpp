#pragma once

#include <cstddef>
#include <vector>

namespace quantsched {

// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), values(static_cast<size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {}

  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }

  std::vector<double> row(int r) const {
    return {values.begin() + static_cast<long>(r) * cols,
            values.begin() + static_cast<long>(r + 1) * cols};
  }
  std::vector<double> column(int c) const {
    std::vector<double> out(rows);
    for (int r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }
  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> out(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) out[r] += at(r, c) * x[c];
    }
    return out;
  }
};

}  // namespace quantsched
