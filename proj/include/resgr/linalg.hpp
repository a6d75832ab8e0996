#pragma once

// Small dense helpers shared by the modules: checked inversion and the
// matrix exponential.

#include <unsupported/Eigen/MatrixFunctions>

#include "resgr/polarized.hpp"

namespace resgr {

/// Smallest singular value below this fraction of the largest counts as singular.
inline constexpr double kSingularityThreshold = 1e-12;

/// Inverse via partial-pivot LU; throws SingularOperator when
/// sigma_min < kSingularityThreshold * sigma_max.
inline Matrix checked_inverse(const Matrix& m, const char* what = "matrix",
                              double threshold = kSingularityThreshold) {
  if (m.rows() != m.cols()) throw DimensionMismatch(std::string(what) + " is not square");
  const auto s = detail::singular_values(m);
  if (s.size() == 0 || !(s.minCoeff() >= threshold * s.maxCoeff()) || s.maxCoeff() == 0.0) {
    throw SingularOperator(std::string(what) + " is singular to working precision");
  }
  return Eigen::PartialPivLU<Matrix>(m).inverse();
}

inline BlockOperator checked_inverse(const BlockOperator& a, const char* what = "operator") {
  return {a.dims(), checked_inverse(a.full(), what)};
}

/// exp(m) by scaling and squaring with a Pade approximant.
inline Matrix expm(const Matrix& m) {
  Matrix out = m.exp();
  if (!out.allFinite()) throw NumericalFailure("matrix exponential overflowed");
  return out;
}

inline BlockOperator expm(const BlockOperator& a) { return {a.dims(), expm(a.full())}; }

}  // namespace resgr
