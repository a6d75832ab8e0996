#pragma once

// simulate and sweep: trajectories to CSV, invariant reports to JSON.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "resgr/cli/config.hpp"
#include "resgr/verify.hpp"

namespace resgr::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalAbort = 3 };

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Column {
  std::string name;
  std::function<double(const ExtendedPoint&)> value;
};

inline std::vector<Column> columns(const RunConfig& c) {
  std::vector<Column> cols;
  auto add_complex = [&](const std::string& name, std::function<Complex(const ExtendedPoint&)> f) {
    cols.push_back({name + "_re", [f](const ExtendedPoint& p) { return f(p).real(); }});
    cols.push_back({name + "_im", [f](const ExtendedPoint& p) { return f(p).imag(); }});
  };
  for (const auto& o : c.observables) {
    if (o == "hamiltonian") {
      const HamiltonianId id = c.flow.id;
      add_complex("H", [id](const ExtendedPoint& p) { return hamiltonian(id, p); });
    } else if (o == "moduli") {
      auto inv = [](const ExtendedPoint& p) { return four_dim_invariants(four_dim_state(p, 1e-6)); };
      cols.push_back({"p2", [inv](const ExtendedPoint& p) { return inv(p).p2; }});
      cols.push_back({"q2", [inv](const ExtendedPoint& p) { return inv(p).q2; }});
      cols.push_back({"r2", [inv](const ExtendedPoint& p) { return inv(p).r2; }});
      cols.push_back({"s2", [inv](const ExtendedPoint& p) { return inv(p).s2; }});
      cols.push_back({"delta", [inv](const ExtendedPoint& p) { return inv(p).delta; }});
      cols.push_back({"x", [inv](const ExtendedPoint& p) { return inv(p).x; }});
    } else if (o == "blocks") {
      const int n = c.dims.total();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          add_complex("mu_" + std::to_string(i) + "_" + std::to_string(j),
                      [i, j](const ExtendedPoint& p) { return p.mu.full()(i, j); });
    }
  }
  for (int k : c.casimir_ks) {
    add_complex("I" + std::to_string(k), [k](const ExtendedPoint& p) { return casimir(k, p); });
  }
  return cols;
}

/// CSV text: header, then one row per recorded point, all numbers as %.17g.
inline std::string trajectory_csv(const RunConfig& c, const Trajectory& t) {
  const auto cols = columns(c);
  std::string out = "t";
  for (const auto& col : cols) out += "," + col.name;
  out += "\n";
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    out += format_double(t.times[i]);
    for (const auto& col : cols) out += "," + format_double(col.value(t.points[i]));
    out += "\n";
  }
  return out;
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json config_json(const RunConfig& c) {
  static const char* kinds[] = {"random", "grassmann", "vector", "four_dim", "explicit"};
  return Json{{"dims", Json::array({c.dims.n_plus, c.dims.n_minus})},
              {"seed", c.seed},
              {"gamma", complex_json(c.gamma)},
              {"initial", kinds[static_cast<int>(c.initial.kind)]},
              {"hamiltonian", to_string(c.flow.id)},
              {"form", to_string(c.flow.form)},
              {"integrator", to_string(c.flow.integrator)},
              {"real_form", c.flow.real_form},
              {"dt", c.flow.dt},
              {"t_end", c.flow.t_end},
              {"record_every", c.flow.record_every}};
}

struct SimulationResult {
  Trajectory trajectory;
  InvariantReport invariants;
  std::string csv;
  Json report;
  int exit_code = kOk;
};

inline SimulationResult simulate(const RunConfig& c) {
  SimulationResult r;
  const ExtendedPoint p0 = initial_point(c);
  r.trajectory = integrate(c.flow, p0);
  std::optional<HamiltonianId> id = c.flow.id;
  try {
    hamiltonian(c.flow.id, p0);
  } catch (const Error&) {
    id.reset();
  }
  r.invariants = monitor(r.trajectory, c.casimir_ks, id);
  r.csv = trajectory_csv(c, r.trajectory);
  Json drift = Json::object();
  for (const auto& [k, v] : r.invariants.casimir_drift) drift[std::to_string(k)] = v;
  r.report = Json{{"config", config_json(c)},
                  {"aborted", r.trajectory.aborted},
                  {"abort_reason", r.trajectory.abort_reason},
                  {"points", r.trajectory.points.size()},
                  {"final_time", r.trajectory.times.back()},
                  {"invariants",
                   {{"casimir_drift", drift},
                    {"diag_drift", r.invariants.diag_drift},
                    {"spectrum_drift", r.invariants.spectrum_drift},
                    {"hamiltonian_drift", r.invariants.hamiltonian_drift}}}};
  r.exit_code = r.trajectory.aborted ? kNumericalAbort : kOk;
  return r;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
}

inline void write_outputs(const RunConfig& c, const SimulationResult& r) {
  write_text(c.output_path + ".csv", r.csv);
  write_text(c.output_path + ".json", r.report.dump(2) + "\n");
}

inline int thread_count() {
  if (const char* env = std::getenv("RESGR_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Cartesian product of the [sweep] lists, first key varying slowest.
inline std::vector<SweepPoint> sweep_grid(const Tree& t) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  if (const auto s = t.get_child_optional("sweep")) {
    for (const auto& [key, leaf] : *s) {
      auto values = split(leaf.data(), " \t");
      if (values.empty()) throw ConfigError("sweep." + key + " has no values");
      axes.emplace_back(key, std::move(values));
    }
  }
  std::vector<SweepPoint> grid{SweepPoint{}};
  for (const auto& [key, values] : axes) {
    std::vector<SweepPoint> next;
    for (const auto& g : grid) {
      for (const auto& v : values) {
        SweepPoint q = g;
        q.overrides.emplace_back(key, v);
        next.push_back(std::move(q));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

/// Least-squares slope of log10(drift) against log10(dt); NaN with fewer than two positive points.
inline double log_slope(const std::vector<std::pair<double, double>>& dt_drift) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [dt, drift] : dt_drift) {
    if (!(drift > 0.0) || !(dt > 0.0)) continue;
    const double x = std::log10(dt), y = std::log10(drift);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nan("");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct SweepResult {
  Json summary;
  int failed = 0;
};

/// Runs every grid point into out_dir/run_NNN/run.{csv,json} and writes out_dir/summary.json.
inline SweepResult sweep(const Tree& base, const std::filesystem::path& out_dir, int threads) {
  const auto grid = sweep_grid(base);
  Tree stripped = base;
  stripped.erase("sweep");
  parse_config(stripped);

  std::vector<Json> entries(grid.size());
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> groups;
  std::vector<double> drifts(grid.size(), std::nan("")), dts(grid.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      Json e{{"index", i}};
      Json ov = Json::object();
      for (const auto& [k, v] : grid[i].overrides) ov[k] = v;
      e["overrides"] = ov;
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", i);
      e["path"] = std::string(name) + "/run";
      try {
        Tree t = stripped;
        for (const auto& [k, v] : grid[i].overrides) t.put(k, v);
        t.put("output.path", (out_dir / name / "run").string());
        const RunConfig c = parse_config(t);
        const auto r = simulate(c);
        write_outputs(c, r);
        double worst = 0.0;
        for (const auto& [k, v] : r.invariants.casimir_drift) worst = std::max(worst, v);
        drifts[i] = worst;
        dts[i] = c.flow.dt;
        e["status"] = r.trajectory.aborted ? "aborted" : "ok";
        e["exit_code"] = r.exit_code;
        e["max_casimir_drift"] = worst;
        e["invariants"] = r.report["invariants"];
        if (r.trajectory.aborted) e["abort_reason"] = r.trajectory.abort_reason;
      } catch (const Error& err) {
        e["status"] = "failed";
        e["exit_code"] = dynamic_cast<const InvalidArgument*>(&err) ? kConfigError : kNumericalAbort;
        e["error"] = err.what();
      }
      entries[i] = std::move(e);
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }

  SweepResult out;
  Json runs = Json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (entries[i]["status"] != "ok") ++out.failed;
    runs.push_back(entries[i]);
    std::string key;
    bool has_dt = false;
    for (const auto& [k, v] : grid[i].overrides) {
      if (k == "flow.dt") {
        has_dt = true;
        continue;
      }
      key += (key.empty() ? "" : ",") + k + "=" + v;
    }
    if (!has_dt || entries[i]["status"] != "ok") continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.emplace_back(key, std::vector<std::pair<double, double>>{});
      it = groups.end() - 1;
    }
    it->second.emplace_back(dts[i], drifts[i]);
  }
  Json slopes = Json::array();
  for (const auto& [key, pts] : groups) {
    const double s = log_slope(pts);
    slopes.push_back(Json{{"group", key}, {"points", pts.size()},
                          {"casimir_drift_slope", std::isnan(s) ? Json(nullptr) : Json(s)}});
  }
  out.summary = Json{{"runs", runs.size()}, {"failed", out.failed}, {"dt_slopes", slopes},
                     {"results", runs}};
  write_text(out_dir / "summary.json", out.summary.dump(2) + "\n");
  return out;
}

inline Json verify_json(const VerifyReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back(Json{{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance},
                          {"pass", c.pass()}});
  }
  return Json{{"suite", r.suite},
              {"pass", r.pass()},
              {"environment", {{"dims", Json::array({r.dims.n_plus, r.dims.n_minus})}, {"seed", r.seed}}},
              {"checks", checks}};
}

}  // namespace resgr::cli
