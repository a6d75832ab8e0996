#pragma once

// Polynomial machinery of the hierarchy: W_n^k, H_n^l, the integer
// coefficients p_n^l(k), Casimirs, Hamiltonians, their gradients and the
// right-hand sides of the Hamilton equations in their equivalent forms.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "resgr/lie_poisson.hpp"
#include "resgr/linalg.hpp"
#include "resgr/polarized.hpp"

namespace resgr {

// ---------------------------------------------------------------------------
// Hamiltonian identifiers

/// h_n^k = gamma^n Tr_res W_n^{k+1}(mu), k >= 1, 0 <= n <= k.
struct Wbasis {
  int k = 1;
  int n = 0;
  friend bool operator==(const Wbasis&, const Wbasis&) = default;
};

/// Hamiltonian whose flow is d mu/d tau = [mu - gamma P+, H_n^l(mu)].
struct Hbasis {
  int l = 0;
  int n = 0;
  friend bool operator==(const Hbasis&, const Hbasis&) = default;
};

/// Generating Hamiltonian h_{kappa, lambda}.
struct Generating {
  Complex kappa{0.0, 0.0};
  Complex lambda{0.0, 0.0};
  friend bool operator==(const Generating&, const Generating&) = default;
};

using HamiltonianId = std::variant<Wbasis, Hbasis, Generating>;

inline void validate(const HamiltonianId& id) {
  if (const auto* w = std::get_if<Wbasis>(&id)) {
    if (w->k < 1 || w->n < 0 || w->n > w->k) {
      throw IndexOutOfRange("Wbasis(k=" + std::to_string(w->k) + ", n=" + std::to_string(w->n) +
                            ") requires k >= 1 and 0 <= n <= k");
    }
  } else if (const auto* h = std::get_if<Hbasis>(&id)) {
    if (h->l < 0 || h->n < 0 || h->n > h->l + 1) {
      throw IndexOutOfRange("Hbasis(l=" + std::to_string(h->l) + ", n=" + std::to_string(h->n) +
                            ") requires l >= 0 and 0 <= n <= l+1");
    }
  }
}

inline std::string to_string(const HamiltonianId& id) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Wbasis>) {
          return "W(k=" + std::to_string(v.k) + ",n=" + std::to_string(v.n) + ")";
        } else if constexpr (std::is_same_v<T, Hbasis>) {
          return "H(l=" + std::to_string(v.l) + ",n=" + std::to_string(v.n) + ")";
        } else {
          return "G(kappa=" + std::to_string(v.kappa.real()) + "+" +
                 std::to_string(v.kappa.imag()) + "i,lambda=" + std::to_string(v.lambda.real()) +
                 "+" + std::to_string(v.lambda.imag()) + "i)";
        }
      },
      id);
}

namespace detail {

inline Complex ipow(Complex z, int e) {
  Complex r(1.0, 0.0);
  for (int i = 0; i < e; ++i) r *= z;
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// W polynomials: (mu + lambda P+)^k = sum_n lambda^n W_n^k(mu)

namespace detail {

/// One step of W_n^{j+1} = W_n^j mu + W_{n-1}^j P+ applied to the whole table.
inline std::vector<BlockOperator> w_table_next(const std::vector<BlockOperator>& cur,
                                               const BlockOperator& mu) {
  const int j = static_cast<int>(cur.size()) - 1;
  std::vector<BlockOperator> next;
  next.reserve(cur.size() + 1);
  for (int n = 0; n <= j + 1; ++n) {
    BlockOperator term(mu.dims());
    if (n <= j) term = cur[n] * mu;
    if (n >= 1) term += right_p_plus(cur[n - 1]);
    next.push_back(std::move(term));
  }
  return next;
}

}  // namespace detail

/// All W_0^k .. W_k^k, built with W_n^{j+1} = W_n^j mu + W_{n-1}^j P+.
inline std::vector<BlockOperator> w_table(int k, const BlockOperator& mu) {
  if (k < 0) throw IndexOutOfRange("w_table: k must be >= 0");
  std::vector<BlockOperator> cur{BlockOperator::identity(mu.dims())};
  for (int j = 0; j < k; ++j) cur = detail::w_table_next(cur, mu);
  return cur;
}

/// Same table from the left recurrence W_n^{j+1} = mu W_n^j + P+ W_{n-1}^j.
inline std::vector<BlockOperator> w_table_left(int k, const BlockOperator& mu) {
  if (k < 0) throw IndexOutOfRange("w_table_left: k must be >= 0");
  std::vector<BlockOperator> cur{BlockOperator::identity(mu.dims())};
  for (int j = 0; j < k; ++j) {
    std::vector<BlockOperator> next;
    next.reserve(cur.size() + 1);
    for (int n = 0; n <= j + 1; ++n) {
      BlockOperator term(mu.dims());
      if (n <= j) term = mu * cur[n];
      if (n >= 1) term += left_p_plus(cur[n - 1]);
      next.push_back(std::move(term));
    }
    cur = std::move(next);
  }
  return cur;
}

/// W_n^k(mu); zero for n = -1 and n = k+1.
inline BlockOperator w_poly(int k, int n, const BlockOperator& mu) {
  if (k < 0 || n < -1 || n > k + 1) {
    throw IndexOutOfRange("w_poly(k=" + std::to_string(k) + ", n=" + std::to_string(n) +
                          ") requires 0 <= n <= k");
  }
  if (n == -1 || n == k + 1) return BlockOperator(mu.dims());
  return w_table(k, mu)[n];
}

// ---------------------------------------------------------------------------
// H polynomials: sum over binary tuples (i_0..i_l), sum = n, of
// P+^{i_0} mu P+^{i_1} mu ... mu P+^{i_l}

inline constexpr int kHEnumerationCap = 12;

/// H_n^l by direct enumeration of the binary tuples.
inline BlockOperator h_poly_enumerated(int l, int n, const BlockOperator& mu) {
  if (l < 0 || n < 0 || n > l + 1) {
    throw IndexOutOfRange("h_poly(l=" + std::to_string(l) + ", n=" + std::to_string(n) +
                          ") requires 0 <= n <= l+1");
  }
  BlockOperator sum(mu.dims());
  const std::uint32_t slots = static_cast<std::uint32_t>(l + 1);
  for (std::uint32_t mask = 0; mask < (1u << slots); ++mask) {
    if (std::popcount(mask) != n) continue;
    BlockOperator term = (mask & 1u) ? projector_p_plus(mu.dims()) : BlockOperator::identity(mu.dims());
    for (std::uint32_t s = 1; s < slots; ++s) {
      term = term * mu;
      if (mask & (1u << s)) term = right_p_plus(term);
    }
    sum += term;
  }
  return sum;
}

/// Table H^l_0 .. H^l_{l+1} from H^{j+1}_{m+1} = P+ mu H^j_m + mu H^j_{m+1}.
inline std::vector<BlockOperator> h_table(int l, const BlockOperator& mu) {
  if (l < 0) throw IndexOutOfRange("h_table: l must be >= 0");
  const Dims d = mu.dims();
  std::vector<BlockOperator> cur{BlockOperator::identity(d), projector_p_plus(d)};
  for (int j = 0; j < l; ++j) {
    std::vector<BlockOperator> next;
    next.reserve(cur.size() + 1);
    next.push_back(mu * cur[0]);
    for (int m = 0; m <= j + 1; ++m) {
      BlockOperator term = left_p_plus(mu * cur[m]);
      if (m + 1 <= j + 1) term += mu * cur[m + 1];
      next.push_back(std::move(term));
    }
    cur = std::move(next);
  }
  return cur;
}

inline BlockOperator h_poly_recurrence(int l, int n, const BlockOperator& mu) {
  if (l < 0 || n < 0 || n > l + 1) {
    throw IndexOutOfRange("h_poly(l=" + std::to_string(l) + ", n=" + std::to_string(n) +
                          ") requires 0 <= n <= l+1");
  }
  return h_table(l, mu)[n];
}

/// Enumeration up to kHEnumerationCap, recurrence beyond.
inline BlockOperator h_poly(int l, int n, const BlockOperator& mu) {
  return l <= kHEnumerationCap ? h_poly_enumerated(l, n, mu) : h_poly_recurrence(l, n, mu);
}

// ---------------------------------------------------------------------------
// p_n^l(k)

/// Memo table for p_n^l(k).  Concurrent readers, serialized writers.
class PCoeffTable {
 public:
  std::int64_t get(int l, int n, int k) {
    if (l < 0 || n < 1) {
      throw IndexOutOfRange("p_coeff(l=" + std::to_string(l) + ", n=" + std::to_string(n) +
                            ") requires l >= 0 and n >= 1");
    }
    if (n == 1) return 1;
    const Key key{l, n, k};
    {
      std::shared_lock lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    // p_{n}^l(k) = sum_{i=l+1}^{k-1} max(0, p_{n-1}^l(i))
    std::int64_t sum = 0;
    for (int i = l + 1; i <= k - 1; ++i) sum += std::max<std::int64_t>(0, get(l, n - 1, i));
    std::unique_lock lock(mutex_);
    memo_.emplace(key, sum);
    return sum;
  }

  [[nodiscard]] std::size_t size() const {
    std::shared_lock lock(mutex_);
    return memo_.size();
  }

 private:
  using Key = std::tuple<int, int, int>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::int64_t> memo_;
};

inline PCoeffTable& p_coeff_table() {
  static PCoeffTable table;
  return table;
}

inline std::int64_t p_coeff(int l, int n, int k) { return p_coeff_table().get(l, n, k); }

/// sum_{n=1}^{l+1} max(0, p_n^l(k)) H_n^l(mu), the right side of the W/H identity.
inline BlockOperator w_from_h(int k, int l, const BlockOperator& mu) {
  if (l < 0 || l >= k) throw IndexOutOfRange("w_from_h requires 0 <= l < k");
  const auto table = h_table(l, mu);
  BlockOperator sum(mu.dims());
  for (int n = 1; n <= l + 1; ++n) {
    const auto c = std::max<std::int64_t>(0, p_coeff(l, n, k));
    if (c != 0) sum += static_cast<double>(c) * table[n];
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Casimirs and Hamiltonians

/// I^k_eps = Tr_res((mu - eps gamma P+)^{k+1} - (-eps gamma)^k (mu - eps gamma P+)),
/// expanded in W so that the pure-P+ terms cancel before the trace.
inline Complex casimir(int k, const ExtendedPoint& p, double epsilon = 1.0) {
  if (k < 1) throw IndexOutOfRange("casimir: k must be >= 1");
  const Complex beta = -epsilon * p.gamma;
  const auto w = w_table(k + 1, p.mu);
  Complex sum(0.0);
  Complex bn(1.0);
  for (int n = 0; n < k; ++n) {
    sum += bn * restricted_trace(w[n]);
    bn *= beta;
  }
  sum += bn * (restricted_trace(w[k]) - restricted_trace(p.mu));
  return sum;
}

inline Complex hamiltonian_w(int k, int n, const ExtendedPoint& p) {
  validate(Wbasis{k, n});
  const BlockOperator w = w_poly(k + 1, n, p.mu);
  Complex tr = restricted_trace(w);
  if (n == k) tr -= restricted_trace(p.mu);
  return detail::ipow(p.gamma, n) * tr;
}

/// D2 h_n^k = (k+1) gamma^n W_n^k for n < k, gamma^k ((k+1) W_k^k - 1) for n = k.
inline BlockOperator grad_hamiltonian_w(int k, int n, const ExtendedPoint& p) {
  validate(Wbasis{k, n});
  BlockOperator g = static_cast<double>(k + 1) * w_poly(k, n, p.mu);
  if (n == k) g -= BlockOperator::identity(p.dims());
  return detail::ipow(p.gamma, n) * g;
}

/// -Tr_res(mu H_n^l(mu)) / (l+1); its D2 is -H_n^l(mu).
inline Complex hamiltonian_h(int l, int n, const ExtendedPoint& p) {
  validate(Hbasis{l, n});
  return -pairing(p.mu, h_poly(l, n, p.mu)) / static_cast<double>(l + 1);
}

// ---------------------------------------------------------------------------
// Generating Hamiltonian

namespace detail {

/// log(1 - z) / z, continuous at z = 0.
inline Complex log1m_over(Complex z) {
  if (std::abs(z) < 1e-8) return -1.0 - z / 2.0 - z * z / 3.0;
  return std::log(1.0 - z) / z;
}

inline void check_radius(Complex kappa, Complex lambda, const ExtendedPoint& p) {
  const double r = std::abs(kappa) * (star_norm(p.mu) + std::abs(lambda * p.gamma));
  if (!(r < 1.0)) {
    throw RadiusViolation("generating Hamiltonian: |kappa| (||mu||_* + |lambda gamma|) = " +
                          std::to_string(r) + " is not < 1");
  }
}

}  // namespace detail

/// Closed form of h_{kappa, lambda}: with Y = mu + lambda gamma P+ and beta = lambda gamma,
///   -1/kappa Tr log(1 - kappa Y) + Tr(Y) log(1 - kappa beta) / (kappa beta).
inline Complex generating_hamiltonian(Complex kappa, Complex lambda, const ExtendedPoint& p) {
  detail::check_radius(kappa, lambda, p);
  if (kappa == Complex(0.0)) return Complex(0.0);
  const Complex beta = lambda * p.gamma;
  Matrix y = p.mu.full();
  y.topLeftCorner(p.dims().n_plus, p.dims().n_plus).diagonal().array() += beta;
  const Matrix one_minus = Matrix::Identity(y.rows(), y.cols()) - kappa * y;
  const Complex tr_log = one_minus.log().trace();
  return -tr_log / kappa + y.trace() * detail::log1m_over(kappa * beta);
}

/// D2 h_{kappa, lambda} = (1 - kappa Y)^-1 + log(1 - kappa beta) / (kappa beta).
inline BlockOperator grad_generating(Complex kappa, Complex lambda, const ExtendedPoint& p) {
  detail::check_radius(kappa, lambda, p);
  const Complex beta = lambda * p.gamma;
  Matrix y = p.mu.full();
  y.topLeftCorner(p.dims().n_plus, p.dims().n_plus).diagonal().array() += beta;
  const Matrix one_minus = Matrix::Identity(y.rows(), y.cols()) - kappa * y;
  Matrix g = checked_inverse(one_minus, "1 - kappa Y");
  g.diagonal().array() += detail::log1m_over(kappa * beta);
  return {p.dims(), std::move(g)};
}

struct SeriesValue {
  Complex value{0.0, 0.0};
  double tail_bound = 0.0;  ///< bound on |h - value| from the norm estimate
  int terms = 0;
};

/// Partial sum sum_{k=1}^{terms} kappa^k/(k+1) sum_{n=0}^{k} lambda^n h_n^k.
inline SeriesValue generating_hamiltonian_series(Complex kappa, Complex lambda,
                                                 const ExtendedPoint& p, int terms) {
  detail::check_radius(kappa, lambda, p);
  SeriesValue out;
  out.terms = terms;
  const Complex tr_mu = restricted_trace(p.mu);
  std::vector<BlockOperator> w = w_table(1, p.mu);
  Complex kk(1.0);
  for (int k = 1; k <= terms; ++k) {
    kk *= kappa;
    w = detail::w_table_next(w, p.mu);  // W^{k+1}_n
    Complex inner(0.0);
    Complex lg(1.0);
    for (int n = 0; n <= k; ++n) {
      Complex tr = restricted_trace(w[n]);
      if (n == k) tr -= tr_mu;
      inner += lg * tr;
      lg *= lambda * p.gamma;
    }
    out.value += kk / static_cast<double>(k + 1) * inner;
  }
  // |Tr_res A| <= ||A||_*, and ||(mu + b P+)^{k+1} - b^k (mu + b P+)||_* <= (m + b)^{k+1}.
  const double mb = star_norm(p.mu) + std::abs(lambda * p.gamma);
  const double r = std::abs(kappa) * mb;
  out.tail_bound = mb * std::pow(r, terms + 1) / (static_cast<double>(terms + 2) * (1.0 - r));
  return out;
}

// ---------------------------------------------------------------------------
// Hamiltonian dispatch

inline Complex hamiltonian(const HamiltonianId& id, const ExtendedPoint& p) {
  validate(id);
  return std::visit(
      [&](const auto& v) -> Complex {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Wbasis>) {
          return hamiltonian_w(v.k, v.n, p);
        } else if constexpr (std::is_same_v<T, Hbasis>) {
          return hamiltonian_h(v.l, v.n, p);
        } else {
          return generating_hamiltonian(v.kappa, v.lambda, p);
        }
      },
      id);
}

inline BlockOperator grad_hamiltonian(const HamiltonianId& id, const ExtendedPoint& p) {
  validate(id);
  return std::visit(
      [&](const auto& v) -> BlockOperator {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Wbasis>) {
          return grad_hamiltonian_w(v.k, v.n, p);
        } else if constexpr (std::is_same_v<T, Hbasis>) {
          return -h_poly(v.l, v.n, p.mu);
        } else {
          return grad_generating(v.kappa, v.lambda, p);
        }
      },
      id);
}

/// Analytic gradient provider for the bracket; D1 is filled for the W basis only.
inline GradientProvider gradient_of(const HamiltonianId& id) {
  return [id](const ExtendedPoint& p) {
    Gradient g;
    g.d_mu = grad_hamiltonian(id, p);
    if (const auto* w = std::get_if<Wbasis>(&id); w && w->n > 0) {
      Complex tr = restricted_trace(w_poly(w->k + 1, w->n, p.mu));
      if (w->n == w->k) tr -= restricted_trace(p.mu);
      g.d_gamma = static_cast<double>(w->n) * detail::ipow(p.gamma, w->n - 1) * tr;
    }
    return g;
  };
}

// ---------------------------------------------------------------------------
// Flow right-hand sides

enum class RhsForm {
  W_form,      ///< -(k+1) gamma^n [mu - gamma P+, W_n^k]
  MU_form,     ///< -(k+1) gamma^n [mu, W_n^k + gamma W_{n+1}^k]
  PPLUS_form,  ///< (k+1) gamma^n [P+, gamma W_n^k + W_{n-1}^k]
  H_form,      ///< [mu - gamma P+, H_n^l]
  REAL_form,   ///< i^{l+1} [mu - gamma P+, H_n^l]
  GEN_Y_form,  ///< d y/dt for y = (1 - kappa(mu + lambda gamma P+))^-1
};

inline std::string to_string(RhsForm f) {
  switch (f) {
    case RhsForm::W_form: return "W";
    case RhsForm::MU_form: return "MU";
    case RhsForm::PPLUS_form: return "PPLUS";
    case RhsForm::H_form: return "H";
    case RhsForm::REAL_form: return "REAL";
    case RhsForm::GEN_Y_form: return "GEN_Y";
  }
  return "?";
}

inline BlockOperator shifted(const ExtendedPoint& p) {
  BlockOperator nu = p.mu;
  nu.pp().diagonal().array() -= p.gamma;
  return nu;
}

/// i^{l+1}
inline Complex real_form_factor(int l) { return detail::ipow(kI, l + 1); }

/// d y/dt = -alpha [y, y P+ y] with alpha = kappa (1 + lambda) gamma.
inline BlockOperator gen_y_rhs(Complex kappa, Complex lambda, Complex gamma,
                               const BlockOperator& y) {
  const Complex alpha = kappa * (1.0 + lambda) * gamma;
  const BlockOperator ypy = right_p_plus(y) * y;
  return -alpha * commutator(y, ypy);
}

/// y = (1 - kappa (mu + lambda gamma P+))^-1.
inline BlockOperator gen_y_from_mu(Complex kappa, Complex lambda, const ExtendedPoint& p) {
  BlockOperator x = p.mu;
  x.pp().diagonal().array() += lambda * p.gamma;
  x *= kappa;
  return checked_inverse(BlockOperator::identity(p.dims()) - x, "1 - x");
}

/// d mu/dt (d y/dt for GEN_Y_form, where p.mu holds y).  gamma never evolves.
inline BlockOperator flow_rhs(const HamiltonianId& id, RhsForm form, const ExtendedPoint& p) {
  validate(id);
  auto invalid = [&]() {
    return InvalidArgument("flow_rhs: form " + to_string(form) + " is not defined for " +
                           to_string(id));
  };
  if (const auto* w = std::get_if<Wbasis>(&id)) {
    const auto table = w_table(w->k, p.mu);
    auto wn = [&](int n) {
      return (n < 0 || n > w->k) ? BlockOperator(p.dims()) : table[n];
    };
    const Complex pref = static_cast<double>(w->k + 1) * detail::ipow(p.gamma, w->n);
    switch (form) {
      case RhsForm::W_form:
        return -pref * commutator(shifted(p), wn(w->n));
      case RhsForm::MU_form:
        return -pref * commutator(p.mu, wn(w->n) + p.gamma * wn(w->n + 1));
      case RhsForm::PPLUS_form:
        return pref * commutator_p_plus(p.gamma * wn(w->n) + wn(w->n - 1));
      default:
        throw invalid();
    }
  }
  if (const auto* h = std::get_if<Hbasis>(&id)) {
    const BlockOperator hp = h_poly(h->l, h->n, p.mu);
    switch (form) {
      case RhsForm::H_form:
        return commutator(shifted(p), hp);
      case RhsForm::REAL_form:
        if (!is_real_form(p, 1e-10)) {
          throw InvalidArgument("flow_rhs: REAL_form requires gamma imaginary and mu skew-hermitian");
        }
        return real_form_factor(h->l) * commutator(shifted(p), hp);
      default:
        throw invalid();
    }
  }
  const auto& g = std::get<Generating>(id);
  switch (form) {
    case RhsForm::W_form:
      return hamilton_rhs(grad_generating(g.kappa, g.lambda, p), p);
    case RhsForm::GEN_Y_form:
      return gen_y_rhs(g.kappa, g.lambda, p.gamma, p.mu);
    default:
      throw invalid();
  }
}

// ---------------------------------------------------------------------------
// Change of flow parameters between the W and H bases

struct TauCheck {
  double residual = 0.0;           ///< || lhs - prefactor * rhs ||
  double relative_residual = 0.0;  ///< residual / ||lhs||
  Complex prefactor{0.0, 0.0};     ///< least-squares scalar
  Complex expected{0.0, 0.0};      ///< -(k+1) gamma^{k-l}
};

/// Compares -(k+1) gamma^{k-l} [nu, W^k_{k-l}] with the p-weighted sum of [nu, H_n^l]
/// and fits the scalar relating them.
inline TauCheck tau_reparametrization_check(int l, int k, const ExtendedPoint& p) {
  if (l < 0 || k <= l) throw IndexOutOfRange("tau_reparametrization_check requires 0 <= l < k");
  const BlockOperator nu = shifted(p);
  const BlockOperator lhs = -static_cast<double>(k + 1) * detail::ipow(p.gamma, k - l) *
                            commutator(nu, w_poly(k, k - l, p.mu));
  const BlockOperator rhs = commutator(nu, w_from_h(k, l, p.mu));
  TauCheck out;
  out.expected = -static_cast<double>(k + 1) * detail::ipow(p.gamma, k - l);
  const double rr = rhs.full().squaredNorm();
  out.prefactor = rr > 0.0 ? rhs.full().cwiseProduct(lhs.full().conjugate()).sum() / rr
                           : out.expected;
  out.prefactor = std::conj(out.prefactor);
  out.residual = (lhs.full() - out.prefactor * rhs.full()).norm();
  const double ln = lhs.full().norm();
  out.relative_residual = ln > 0.0 ? out.residual / ln : out.residual;
  return out;
}

}  // namespace resgr
