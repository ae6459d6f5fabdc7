#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "photoncond.hpp"

namespace pc = photoncond;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2 };

pc::SweepConfig load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw pc::ConfigError({"config: cannot read '" + path + "'"});
  std::stringstream ss;
  ss << f.rdbuf();
  return pc::validate_config(ss.str());
}

void print_invariants(const pc::InvariantLog& log) {
  for (const auto& r : log.results()) {
    const bool ok = r.passed() && !std::isnan(r.value);
    std::printf("%s %-48s worst=%.3e tol=%.1e points=%d\n", ok ? "PASS" : "FAIL", r.name.c_str(), r.value, r.tolerance, r.checked);
  }
}

int do_sweep(const std::string& path, const std::string& out, int threads) {
  const pc::SweepConfig cfg = load(path);
  const std::string dir = out.empty() ? cfg.output.directory : out;
  if (dir.empty()) throw pc::ConfigError({"output.directory: missing and no --out given"});
  const pc::SweepOutcome o = pc::run_sweep(cfg, threads);
  pc::write_outputs(cfg, o, dir);
  for (const auto& t : o.summary["thresholds"]) {
    std::printf("%-8s q=%d tau=%d condensed_points=%d", t["gauge"].get<std::string>().c_str(), t["q_index"].get<int>(),
                t["tau"].get<int>(), t["condensed_points"].get<int>());
    if (!t["threshold_crossing"].is_null()) std::printf(" crossing %s=%.6g", cfg.sweep.parameter.c_str(), t["threshold_crossing"].get<double>());
    if (t.contains("analytic_threshold")) std::printf(" analytic=%.6g", t["analytic_threshold"].get<double>());
    std::printf("\n");
  }
  if (o.summary.contains("oracle_crossings"))
    for (const auto& c : o.summary["oracle_crossings"])
      if (!c["crossing"].is_null())
        std::printf("oracle %s finite-size crossing %s=%.6g\n", c["gauge"].get<std::string>().c_str(), cfg.sweep.parameter.c_str(),
                    c["crossing"].get<double>());
  std::printf("%d points written to %s (%.2f s)\n", cfg.sweep.steps, dir.c_str(), o.summary["timings"]["total_s"].get<double>());
  if (!o.invariants.all_passed()) {
    print_invariants(o.invariants);
    std::fprintf(stderr, "error: invariant check failed\n");
    return kRuntime;
  }
  return kOk;
}

int do_check(const std::string& path, int threads) {
  const pc::SweepConfig cfg = load(path);
  const pc::InvariantLog log = pc::run_check(cfg, threads);
  print_invariants(log);
  return log.all_passed() ? kOk : kRuntime;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"photoncond: photon condensation criteria for cavity QED models"};
  app.require_subcommand(1);
  std::string config, out;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* sweep = app.add_subcommand("sweep", "evaluate the condensation criterion over a parameter sweep");
  sweep->add_option("--config", config, "JSON configuration file")->required();
  sweep->add_option("--out", out, "output directory (overrides output.directory)");
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "run the invariant suites only");
  check->add_option("--config", config, "JSON configuration file")->required();
  check->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sweep) return do_sweep(config, out, threads);
    return do_check(config, threads);
  } catch (const pc::ConfigError& e) {
    for (const auto& issue : e.issues()) std::fprintf(stderr, "config error: %s\n", issue.c_str());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
