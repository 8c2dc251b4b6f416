#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qfgan/errors.hpp"

namespace qfgan {

// Row-major dense matrix of doubles. Rows are samples throughout the library.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  void require_shape(std::size_t r, std::size_t c, const char* what) const {
    if (rows != r || cols != c) raise(Errc::shape_mismatch, what);
  }
};

}  // namespace qfgan
