// Copyright 2026 The tonemorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tonemorph {

/// Dense row-major matrix. Rows are time frames throughout this library.
template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(const Grid& other) const noexcept {
    return rows == other.rows && cols == other.cols;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace tonemorph
