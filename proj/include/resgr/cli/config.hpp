#pragma once

// Run configuration: INI-style text read with Boost.PropertyTree.
// Top-level keys, then [initial], [flow], [output] and, for sweeps, [sweep].
// Comments are whole lines starting with '#' or ';'.
//
//   seed = 7
//   dims = 2,2
//   gamma = 0+1i
//   [initial]
//   kind = random
//   scale = 0.5
//   [flow]
//   hamiltonian = H(3,0)
//   form = H
//   integrator = RK4
//   real_form = false
//   dt = 1e-3
//   t_end = 1
//   record_every = 10
//   [output]
//   path = out/run
//   casimirs = 1 2 3
//   observables = hamiltonian moduli
//
// initial.kind: random | grassmann | vector | four_dim | explicit.
// flow.hamiltonian: W(k,n) | H(l,n) | G(kappa,lambda).
// flow.form: W | MU | PPLUS | H | REAL | GEN_Y.  flow.integrator: RK4 | LIE_EULER_CONJ.
// output.path is a prefix: the run writes <path>.csv and <path>.json.
// Complex scalars are written "re+imi", e.g. 0.5-2i, 3i, -1.

#include <filesystem>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "resgr/integrators.hpp"
#include "resgr/oracles.hpp"
#include "resgr/rng.hpp"

namespace resgr::cli {

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

using Tree = boost::property_tree::ptree;

namespace detail {

inline double parse_real(const std::string& text, const std::string& whole) {
  if (text.empty() || text == "+") return 1.0;
  if (text == "-") return -1.0;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw ConfigError("not a complex number: '" + whole + "'");
  return v;
}

}  // namespace detail

/// "re", "imi", "re+imi" or "re-imi"; j is accepted for i.
inline Complex parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ' && ch != '\t') s.push_back(ch);
  if (s.empty()) throw ConfigError("not a complex number: '" + text + "'");
  if (s.back() != 'i' && s.back() != 'j') {
    if (s == "+" || s == "-") throw ConfigError("not a complex number: '" + text + "'");
    return {detail::parse_real(s, text), 0.0};
  }
  s.pop_back();
  std::size_t split_at = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  if (split_at == std::string::npos) return {0.0, detail::parse_real(s, text)};
  const std::string re = s.substr(0, split_at);
  if (re.empty() || re == "+" || re == "-") throw ConfigError("not a complex number: '" + text + "'");
  return {detail::parse_real(re, text), detail::parse_real(s.substr(split_at), text)};
}

inline std::vector<std::string> split(const std::string& text, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline HamiltonianId parse_hamiltonian(const std::string& text) {
  static const std::regex re(R"(^\s*([WHG])\s*\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw ConfigError("hamiltonian must look like W(k,n), H(l,n) or G(kappa,lambda): '" + text + "'");
  }
  const char kind = m[1].str()[0];
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ConfigError("expected an integer index in '" + text + "'");
    return v;
  };
  HamiltonianId id;
  if (kind == 'W') {
    id = Wbasis{to_int(m[2].str()), to_int(m[3].str())};
  } else if (kind == 'H') {
    id = Hbasis{to_int(m[2].str()), to_int(m[3].str())};
  } else {
    id = Generating{parse_complex(m[2].str()), parse_complex(m[3].str())};
  }
  try {
    validate(id);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return id;
}

inline RhsForm parse_form(const std::string& text) {
  for (RhsForm f : {RhsForm::W_form, RhsForm::MU_form, RhsForm::PPLUS_form, RhsForm::H_form,
                    RhsForm::REAL_form, RhsForm::GEN_Y_form}) {
    if (text == to_string(f) || text == to_string(f) + "_form") return f;
  }
  throw ConfigError("unknown form '" + text + "'");
}

inline Integrator parse_integrator(const std::string& text) {
  if (text == "RK4") return Integrator::RK4;
  if (text == "LIE_EULER_CONJ") return Integrator::LIE_EULER_CONJ;
  throw ConfigError("unknown integrator '" + text + "'");
}

/// Rows separated by ';', entries by spaces or ','.
inline Matrix parse_matrix(const std::string& text, int rows, int cols, const std::string& what) {
  const auto row_text = split(text, ";");
  if (static_cast<int>(row_text.size()) != rows) {
    throw ConfigError(what + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto entries = split(row_text[i], " ,\t");
    if (static_cast<int>(entries.size()) != cols) {
      throw ConfigError(what + ": row " + std::to_string(i) + " needs " + std::to_string(cols) +
                        " entries");
    }
    for (int j = 0; j < cols; ++j) m(i, j) = parse_complex(entries[j]);
  }
  return m;
}

enum class InitialKind { Random, Grassmann, Vector, FourDim, Explicit };

struct InitialSpec {
  InitialKind kind = InitialKind::Random;
  double scale = 0.5;
  std::optional<Matrix> z;   ///< Grassmann graph coordinate
  std::optional<Matrix> mu;  ///< explicit initial mu
  FourDimState four;         ///< four_dim parameters (chi taken from gamma)
};

struct RunConfig {
  Dims dims{2, 2};
  std::uint64_t seed = 0;
  Complex gamma{0.0, 1.0};
  InitialSpec initial;
  FlowSpec flow;
  std::vector<int> casimir_ks{1, 2, 3};
  std::vector<std::string> observables;
  std::string output_path = "run";
};

namespace detail {

template <class T>
T get(const Tree& t, const std::string& key, T fallback) {
  const auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  std::istringstream in(*v);
  T out{};
  in >> out;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("bad value for '" + key + "': '" + *v + "'");
  }
  return out;
}

inline bool get_bool(const Tree& t, const std::string& key, bool fallback) {
  const auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + *v + "'");
}

inline std::vector<int> get_ints(const Tree& t, const std::string& key, std::vector<int> fallback) {
  const auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  std::vector<int> out;
  for (const auto& s : split(*v, " ,\t")) {
    std::istringstream in(s);
    int k = 0;
    if (!(in >> k) || !in.eof()) throw ConfigError("bad integer list for '" + key + "'");
    out.push_back(k);
  }
  return out;
}

inline void check_known_keys(const Tree& t) {
  static const std::vector<std::string> known{
      "seed",          "dims",           "gamma",        "initial.kind",  "initial.scale",
      "initial.z",     "initial.mu",     "initial.a1",   "initial.a2",    "initial.d1",
      "initial.d2",    "initial.a",      "initial.b",    "initial.c",     "initial.d",
      "flow.hamiltonian", "flow.form",   "flow.integrator", "flow.real_form", "flow.dt",
      "flow.t_end",    "flow.record_every", "output.path", "output.casimirs",
      "output.observables"};
  for (const auto& [section, sub] : t) {
    if (sub.empty()) {
      if (std::find(known.begin(), known.end(), section) == known.end() && section != "sweep") {
        throw ConfigError("unknown key '" + section + "'");
      }
      continue;
    }
    if (section == "sweep") continue;
    for (const auto& [key, leaf] : sub) {
      const std::string full = section + "." + key;
      if (std::find(known.begin(), known.end(), full) == known.end()) {
        throw ConfigError("unknown key '" + full + "'");
      }
    }
  }
}

}  // namespace detail

inline Tree read_tree(const std::filesystem::path& file) {
  Tree t;
  try {
    boost::property_tree::ini_parser::read_ini(file.string(), t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return t;
}

inline Tree read_tree_text(const std::string& text) {
  Tree t;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return t;
}

inline RunConfig parse_config(const Tree& t) {
  detail::check_known_keys(t);
  RunConfig c;
  c.seed = detail::get<std::uint64_t>(t, "seed", 0);
  if (const auto d = t.get_optional<std::string>("dims")) {
    const auto parts = split(*d, " ,x\t");
    if (parts.size() != 2) throw ConfigError("dims must be 'n_plus,n_minus'");
    try {
      c.dims = Dims(std::stoi(parts[0]), std::stoi(parts[1]));
    } catch (const std::invalid_argument&) {
      throw ConfigError("dims must be 'n_plus,n_minus'");
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (const auto g = t.get_optional<std::string>("gamma")) c.gamma = parse_complex(*g);

  const std::string kind = t.get<std::string>("initial.kind", "random");
  auto& init = c.initial;
  init.scale = detail::get<double>(t, "initial.scale", 0.5);
  if (kind == "random") {
    init.kind = InitialKind::Random;
  } else if (kind == "grassmann") {
    init.kind = InitialKind::Grassmann;
    if (const auto z = t.get_optional<std::string>("initial.z")) {
      init.z = parse_matrix(*z, c.dims.n_minus, c.dims.n_plus, "initial.z");
    }
  } else if (kind == "vector") {
    init.kind = InitialKind::Vector;
    if (c.dims.n_plus != 1) throw ConfigError("vector initial condition needs n_plus = 1");
  } else if (kind == "four_dim") {
    init.kind = InitialKind::FourDim;
    if (c.dims.n_plus != 2 || c.dims.n_minus != 2) {
      throw ConfigError("four_dim initial condition needs dims 2,2");
    }
    if (std::abs(c.gamma.real()) > 0.0) throw ConfigError("four_dim needs an imaginary gamma");
    init.four.chi = c.gamma.imag();
    init.four.a1 = detail::get<double>(t, "initial.a1", 0.3);
    init.four.a2 = detail::get<double>(t, "initial.a2", -0.5);
    init.four.d1 = detail::get<double>(t, "initial.d1", 0.7);
    init.four.d2 = detail::get<double>(t, "initial.d2", -0.2);
    init.four.a = parse_complex(t.get<std::string>("initial.a", "0.5+0.15i"));
    init.four.b = parse_complex(t.get<std::string>("initial.b", "0.27-0.53i"));
    init.four.c = parse_complex(t.get<std::string>("initial.c", "-0.19+0.41i"));
    init.four.d = parse_complex(t.get<std::string>("initial.d", "0.42+0.35i"));
  } else if (kind == "explicit") {
    init.kind = InitialKind::Explicit;
    const auto mu = t.get_optional<std::string>("initial.mu");
    if (!mu) throw ConfigError("explicit initial condition needs initial.mu");
    init.mu = parse_matrix(*mu, c.dims.total(), c.dims.total(), "initial.mu");
  } else {
    throw ConfigError("unknown initial.kind '" + kind + "'");
  }

  auto& f = c.flow;
  f.id = parse_hamiltonian(t.get<std::string>("flow.hamiltonian", "W(1,0)"));
  f.form = parse_form(t.get<std::string>("flow.form", "W"));
  f.integrator = parse_integrator(t.get<std::string>("flow.integrator", "RK4"));
  f.real_form = detail::get_bool(t, "flow.real_form", false);
  f.dt = detail::get<double>(t, "flow.dt", 1e-3);
  f.t_end = detail::get<double>(t, "flow.t_end", 1.0);
  f.record_every = detail::get<int>(t, "flow.record_every", 1);
  try {
    validate(f);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (f.real_form && std::abs(c.gamma.real()) > 0.0) {
    throw ConfigError("real_form needs an imaginary gamma");
  }

  c.output_path = t.get<std::string>("output.path", "run");
  c.casimir_ks = detail::get_ints(t, "output.casimirs", {1, 2, 3});
  for (int k : c.casimir_ks) {
    if (k < 1) throw ConfigError("output.casimirs entries must be >= 1");
  }
  c.observables = split(t.get<std::string>("output.observables", ""), " ,\t");
  for (const auto& o : c.observables) {
    if (o != "hamiltonian" && o != "moduli" && o != "blocks") {
      throw ConfigError("unknown observable '" + o + "'");
    }
    if (o == "moduli" && (c.dims.n_plus != 2 || c.dims.n_minus != 2)) {
      throw ConfigError("moduli observable needs dims 2,2");
    }
  }
  return c;
}

/// Initial point from the configuration, drawn from the seeded stream where random.
inline ExtendedPoint initial_point(const RunConfig& c) {
  Rng rng(c.seed);
  const auto& init = c.initial;
  ExtendedPoint p;
  try {
    switch (init.kind) {
      case InitialKind::Random:
      case InitialKind::Vector:
        p = {c.gamma, c.flow.real_form ? rng.skew(c.dims, init.scale) : rng.op(c.dims, init.scale)};
        break;
      case InitialKind::Grassmann: {
        const Matrix z = init.z ? *init.z : rng.matrix(c.dims.n_minus, c.dims.n_plus, init.scale);
        p = grassmann_embed(c.gamma, graph_basis(z), c.dims);
        break;
      }
      case InitialKind::FourDim:
        p = four_dim_point(init.four);
        break;
      case InitialKind::Explicit:
        p = {c.gamma, BlockOperator(c.dims, *init.mu)};
        break;
    }
  } catch (const Error& e) {
    throw ConfigError(std::string("initial condition: ") + e.what());
  }
  if (c.flow.real_form && !is_real_form(p, 1e-10)) {
    throw ConfigError("real_form run needs gamma imaginary and a skew-hermitian initial mu");
  }
  return p;
}

}  // namespace resgr::cli
