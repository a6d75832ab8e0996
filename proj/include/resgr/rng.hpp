#pragma once

// Seedable sampling used by the CLI and the test suites.
//
// The stream is std::mt19937_64 (fully specified by the standard).  A uniform
// draw in [-s, s) is s * (2 * (x >> 11) * 2^-53 - 1) for the next 64-bit output x;
// complex entries take the real part first, matrices are filled row by row.

#include <cstdint>
#include <random>

#include "resgr/polarized.hpp"

namespace resgr {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double scale = 1.0) {
    return scale * (2.0 * static_cast<double>(engine_() >> 11) * 0x1.0p-53 - 1.0);
  }

  Complex complex(double scale = 1.0) {
    const double re = uniform(scale);
    return {re, uniform(scale)};
  }

  Matrix matrix(int rows, int cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex(scale);
    return m;
  }

  BlockOperator op(const Dims& d, double scale = 1.0) {
    return {d, matrix(d.total(), d.total(), scale)};
  }

  BlockOperator skew(const Dims& d, double scale = 1.0) {
    const Matrix m = matrix(d.total(), d.total(), scale);
    return {d, 0.5 * (m - m.adjoint())};
  }

  ExtendedPoint point(const Dims& d, double scale = 1.0) {
    const Complex g = complex(scale);
    return {g, op(d, scale)};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace resgr
