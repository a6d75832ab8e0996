#pragma once

// Block-operator arithmetic over a finite polarization H = H+ (+) H-.
//
// Every operator is stored as one dense (n+ + n-) x (n+ + n-) complex matrix;
// the four blocks ++, +-, -+, -- are views into it.  The ++ block occupies
// the leading n+ rows/columns.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resgr/error.hpp"

namespace resgr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

struct Dims {
  int n_plus = 1;
  int n_minus = 1;

  Dims() = default;
  Dims(int plus, int minus) : n_plus(plus), n_minus(minus) {
    if (plus < 1 || minus < 1) {
      throw InvalidArgument("Dims: n_plus and n_minus must be >= 1");
    }
  }

  [[nodiscard]] int total() const { return n_plus + n_minus; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return "(" + std::to_string(d.n_plus) + "," + std::to_string(d.n_minus) + ")";
}

class BlockOperator {
 public:
  BlockOperator() = default;

  /// Zero operator.
  explicit BlockOperator(const Dims& dims)
      : dims_(dims), m_(Matrix::Zero(dims.total(), dims.total())) {}

  BlockOperator(const Dims& dims, Matrix full) : dims_(dims), m_(std::move(full)) {
    if (m_.rows() != dims_.total() || m_.cols() != dims_.total()) {
      throw DimensionMismatch("BlockOperator: matrix is " + std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()) + ", dims " + to_string(dims_));
    }
  }

  /// Assemble from the four blocks.
  static BlockOperator from_blocks(const Dims& dims, const Matrix& pp, const Matrix& pm,
                                   const Matrix& mp, const Matrix& mm) {
    const int np = dims.n_plus;
    const int nm = dims.n_minus;
    if (pp.rows() != np || pp.cols() != np || pm.rows() != np || pm.cols() != nm ||
        mp.rows() != nm || mp.cols() != np || mm.rows() != nm || mm.cols() != nm) {
      throw DimensionMismatch("BlockOperator::from_blocks: block shapes do not match dims " +
                              to_string(dims));
    }
    Matrix full(dims.total(), dims.total());
    full << pp, pm, mp, mm;
    return {dims, std::move(full)};
  }

  static BlockOperator identity(const Dims& dims) {
    return {dims, Matrix::Identity(dims.total(), dims.total())};
  }

  [[nodiscard]] const Dims& dims() const { return dims_; }
  [[nodiscard]] const Matrix& full() const { return m_; }
  Matrix& full() { return m_; }

  [[nodiscard]] auto pp() const { return m_.topLeftCorner(dims_.n_plus, dims_.n_plus); }
  [[nodiscard]] auto pm() const { return m_.topRightCorner(dims_.n_plus, dims_.n_minus); }
  [[nodiscard]] auto mp() const { return m_.bottomLeftCorner(dims_.n_minus, dims_.n_plus); }
  [[nodiscard]] auto mm() const { return m_.bottomRightCorner(dims_.n_minus, dims_.n_minus); }
  auto pp() { return m_.topLeftCorner(dims_.n_plus, dims_.n_plus); }
  auto pm() { return m_.topRightCorner(dims_.n_plus, dims_.n_minus); }
  auto mp() { return m_.bottomLeftCorner(dims_.n_minus, dims_.n_plus); }
  auto mm() { return m_.bottomRightCorner(dims_.n_minus, dims_.n_minus); }

  [[nodiscard]] bool all_finite() const { return m_.allFinite(); }

  BlockOperator& operator+=(const BlockOperator& o) {
    check_same(o, "operator+=");
    m_ += o.m_;
    return *this;
  }
  BlockOperator& operator-=(const BlockOperator& o) {
    check_same(o, "operator-=");
    m_ -= o.m_;
    return *this;
  }
  BlockOperator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend BlockOperator operator+(BlockOperator a, const BlockOperator& b) { return a += b; }
  friend BlockOperator operator-(BlockOperator a, const BlockOperator& b) { return a -= b; }
  friend BlockOperator operator-(BlockOperator a) {
    a.m_ = -a.m_;
    return a;
  }
  friend BlockOperator operator*(Complex s, BlockOperator a) { return a *= s; }
  friend BlockOperator operator*(BlockOperator a, Complex s) { return a *= s; }
  friend BlockOperator operator*(double s, BlockOperator a) { return a *= Complex(s); }

  friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
    a.check_same(b, "operator*");
    return {a.dims_, a.m_ * b.m_};
  }

  void check_same(const BlockOperator& o, const char* where) const {
    if (!(dims_ == o.dims_)) {
      throw DimensionMismatch(std::string(where) + ": dims " + to_string(dims_) + " vs " +
                              to_string(o.dims_));
    }
  }

 private:
  Dims dims_;
  Matrix m_;
};

/// A point (gamma, mu) of C (+) L1_res.
struct ExtendedPoint {
  Complex gamma{0.0, 0.0};
  BlockOperator mu;

  [[nodiscard]] const Dims& dims() const { return mu.dims(); }
};

inline constexpr double kRealFormTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Elementary operations

inline BlockOperator projector_p_plus(const Dims& dims) {
  BlockOperator p(dims);
  p.pp().setIdentity();
  return p;
}

inline BlockOperator add(const BlockOperator& a, const BlockOperator& b) { return a + b; }
inline BlockOperator mul(const BlockOperator& a, const BlockOperator& b) { return a * b; }
inline BlockOperator scale(Complex s, const BlockOperator& a) { return s * a; }

inline BlockOperator adjoint(const BlockOperator& a) {
  return {a.dims(), a.full().adjoint()};
}

inline BlockOperator commutator(const BlockOperator& a, const BlockOperator& b) {
  a.check_same(b, "commutator");
  return {a.dims(), a.full() * b.full() - b.full() * a.full()};
}

/// [P+, a], built blockwise so that the diagonal blocks are exact zeros.
inline BlockOperator commutator_p_plus(const BlockOperator& a) {
  BlockOperator out(a.dims());
  out.pm() = a.pm();
  out.mp() = -a.mp();
  return out;
}

/// a P+ (only the leading n+ columns survive).
inline BlockOperator right_p_plus(const BlockOperator& a) {
  BlockOperator out(a.dims());
  out.full().leftCols(a.dims().n_plus) = a.full().leftCols(a.dims().n_plus);
  return out;
}

/// P+ a (only the leading n+ rows survive).
inline BlockOperator left_p_plus(const BlockOperator& a) {
  BlockOperator out(a.dims());
  out.full().topRows(a.dims().n_plus) = a.full().topRows(a.dims().n_plus);
  return out;
}

/// The block-diagonal part (a++ (+) a--).
inline BlockOperator diagonal_part(const BlockOperator& a) {
  BlockOperator out(a.dims());
  out.pp() = a.pp();
  out.mm() = a.mm();
  return out;
}

/// The off-diagonal part (a+- and a-+).
inline BlockOperator off_diagonal_part(const BlockOperator& a) {
  BlockOperator out(a.dims());
  out.pm() = a.pm();
  out.mp() = a.mp();
  return out;
}

inline Complex restricted_trace(const BlockOperator& a) {
  return a.pp().trace() + a.mm().trace();
}

namespace detail {

inline Eigen::VectorXd singular_values(const Matrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

}  // namespace detail

/// Sum of singular values.
inline double trace_norm(const Matrix& m) { return detail::singular_values(m).sum(); }

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
  const auto s = detail::singular_values(m);
  return s.size() == 0 ? 0.0 : s.maxCoeff();
}

/// ||a++||_1 + ||a--||_1 + ||a-+||_2 + ||a+-||_2 with trace norms on the diagonal.
inline double star_norm(const BlockOperator& a) {
  return trace_norm(a.pp()) + trace_norm(a.mm()) + a.mp().norm() + a.pm().norm();
}

/// Same as star_norm but with operator norms on the diagonal blocks.
inline double res_norm(const BlockOperator& x) {
  return operator_norm(x.pp()) + operator_norm(x.mm()) + x.mp().norm() + x.pm().norm();
}

/// <mu, x> = Tr_res(mu x).
inline Complex pairing(const BlockOperator& mu, const BlockOperator& x) {
  mu.check_same(x, "pairing");
  // Only the diagonal blocks of the product are needed.
  const Complex pp = (mu.pp() * x.pp()).trace() + (mu.pm() * x.mp()).trace();
  const Complex mm = (mu.mp() * x.pm()).trace() + (mu.mm() * x.mm()).trace();
  return pp + mm;
}

inline bool is_skew_hermitian(const BlockOperator& a, double tol = kRealFormTolerance) {
  return (a.full() + a.full().adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// conj(gamma) = -gamma and mu^+ = -mu.
inline bool is_real_form(const ExtendedPoint& p, double tol = kRealFormTolerance) {
  return std::abs(p.gamma.real()) <= tol && is_skew_hermitian(p.mu, tol);
}

// ---------------------------------------------------------------------------
// Spectra

inline constexpr double kSpectrumTieTolerance = 1e-12;

/// Lexicographic (real, imag) order; real parts within kSpectrumTieTolerance tie.
inline bool spectrum_less(const Complex& a, const Complex& b) {
  if (std::abs(a.real() - b.real()) > kSpectrumTieTolerance) return a.real() < b.real();
  return a.imag() < b.imag();
}

inline std::vector<Complex> sorted_eigenvalues(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eigenvalue solver did not converge");
  }
  std::vector<Complex> ev(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), spectrum_less);
  return ev;
}

/// Eigenvalues of mu - gamma P+, sorted.
inline std::vector<Complex> spectrum_shifted(const ExtendedPoint& p) {
  Matrix shifted = p.mu.full();
  shifted.topLeftCorner(p.dims().n_plus, p.dims().n_plus).diagonal().array() -= p.gamma;
  return sorted_eigenvalues(shifted);
}

/// Largest displacement between two spectra taken as multisets.  Each
/// eigenvalue of `a` is greedily matched to its nearest unused partner in `b`.
inline double spectrum_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("spectrum_distance: size mismatch");
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const auto& z : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(z - b[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace resgr
