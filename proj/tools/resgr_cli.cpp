// resgr: simulate hierarchy flows, run verification suites, sweep parameter grids.

#include <iostream>

#include "CLI11.hpp"
#include "resgr/cli/run.hpp"

using namespace resgr;
using namespace resgr::cli;

namespace {

int cmd_simulate(const std::string& config_file) {
  const RunConfig c = parse_config(read_tree(config_file));
  const auto r = simulate(c);
  write_outputs(c, r);
  if (r.trajectory.aborted) {
    std::cerr << "simulate: aborted at t=" << r.trajectory.times.back() << ": "
              << r.trajectory.abort_reason << "\n";
  }
  std::cout << c.output_path << ".csv (" << r.trajectory.points.size() << " rows)\n";
  return r.exit_code;
}

int cmd_verify(const std::string& suite, const std::string& json_out, std::uint64_t seed) {
  const auto known = suite_names();
  if (suite != "all" && std::find(known.begin(), known.end(), suite) == known.end()) {
    std::cerr << "verify: unknown suite '" << suite << "'\n";
    return kConfigError;
  }
  std::vector<VerifyReport> reports;
  if (suite == "all") {
    for (const auto& s : known) reports.push_back(run_suite(s, seed));
  } else {
    reports.push_back(run_suite(suite, seed));
  }
  bool ok = true;
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      std::printf("[%s] %-10s %-50s %.3e <= %.1e\n", c.pass() ? "PASS" : "FAIL", r.suite.c_str(),
                  c.name.c_str(), c.residual, c.tolerance);
    }
    ok = ok && r.pass();
  }
  if (!json_out.empty()) {
    Json out = reports.size() == 1 ? verify_json(reports.front()) : Json::array();
    if (reports.size() > 1)
      for (const auto& r : reports) out.push_back(verify_json(r));
    write_text(json_out, out.dump(2) + "\n");
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_sweep(const std::string& config_file, const std::string& out_dir) {
  const auto r = sweep(read_tree(config_file), out_dir, thread_count());
  std::cout << out_dir << "/summary.json (" << r.summary["runs"].get<int>() << " runs, " << r.failed
            << " failed)\n";
  for (const auto& s : r.summary["dt_slopes"]) {
    std::cout << "  slope " << s["casimir_drift_slope"].dump() << "  "
              << s["group"].get<std::string>() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchy flows on the restricted Lie-Poisson space"};
  app.require_subcommand(1);

  std::string sim_config;
  auto* sim = app.add_subcommand("simulate", "integrate one flow and write CSV + JSON");
  sim->add_option("--config", sim_config, "configuration file")->required();

  std::string suite, json_out;
  std::uint64_t seed = 1;
  auto* ver = app.add_subcommand("verify", "run a property suite");
  ver->add_option("--suite", suite, "core|poisson|hierarchy|oracles|extension|magri|all")->required();
  ver->add_option("--json", json_out, "write the report here");
  ver->add_option("--seed", seed, "sampling seed");

  std::string sweep_config, out_dir;
  auto* swp = app.add_subcommand("sweep", "run a parameter grid (threads: RESGR_THREADS)");
  swp->add_option("--config", sweep_config, "configuration file with a [sweep] section")->required();
  swp->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(sim_config);
    if (*ver) return cmd_verify(suite, json_out, seed);
    return cmd_sweep(sweep_config, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalAbort;
  }
}
