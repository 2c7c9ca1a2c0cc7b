#pragma once

#include <random>

#include "comgrl/tensor.hpp"

namespace comgrl {

/// Uniform in [-1/sqrt(rows), 1/sqrt(rows)], treating rows as the fan-in.
/// Entries are drawn in row-major order.
inline Matrix uniform_fan_in(Index rows, Index cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace comgrl
