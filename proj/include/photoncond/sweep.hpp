#ifndef PHOTONCOND_SWEEP_HPP
#define PHOTONCOND_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bogoliubov.hpp"
#include "config.hpp"
#include "criterion.hpp"
#include "gauge.hpp"
#include "matter_models.hpp"
#include "oracle.hpp"
#include "response.hpp"

namespace photoncond {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCriterionHeader =
    "schema_version,point_index,param_name,param_value,gauge,alpha,q_index,tau,lhs,rhs,electric_part,magnetic_part,margin,"
    "condensed,beta_re,beta_im";
inline constexpr const char* kOracleHeader =
    "schema_version,point_index,param_name,param_value,gauge,alpha,N,cutoff,ground_energy,parity_gap,photons_per_N,abs_a,"
    "transverse_field";

struct ReportRow {
  int point = 0;
  double param_value = 0;
  std::string gauge;
  double alpha = 0;
  int gauge_entry = 0;
  int q_index = 0;
  CriterionReport report;
};

struct OracleRow {
  int point = 0;
  double param_value = 0;
  std::string gauge;
  double alpha = 0;
  int N = 0;
  int cutoff = 0;
  double ground_energy = 0, parity_gap = 0, photons_per_N = 0, abs_a = 0, field = 0;
};

/// Worst value of one invariant over the points where it was evaluated.
struct InvariantResult {
  std::string name;
  std::string module;
  double tolerance = 0;
  double value = 0;
  int checked = 0;
  bool passed() const { return checked == 0 || value <= tolerance; }
};

class InvariantLog {
public:
  void add(const std::string& name, const std::string& module, double tol, double value) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      index_[name] = results_.size();
      results_.push_back({name, module, tol, value, 1});
      return;
    }
    InvariantResult& r = results_[it->second];
    r.value = std::isnan(value) || std::isnan(r.value) ? NAN : std::max(r.value, value);
    ++r.checked;
  }
  void merge(const InvariantLog& o) {
    for (const auto& r : o.results_) {
      const auto it = index_.find(r.name);
      if (it == index_.end()) {
        index_[r.name] = results_.size();
        results_.push_back(r);
      } else {
        InvariantResult& s = results_[it->second];
        s.value = std::isnan(r.value) || std::isnan(s.value) ? NAN : std::max(s.value, r.value);
        s.checked += r.checked;
      }
    }
  }
  const std::vector<InvariantResult>& results() const { return results_; }
  bool all_passed() const {
    return std::all_of(results_.begin(), results_.end(), [](const InvariantResult& r) { return r.passed() && !std::isnan(r.value); });
  }

private:
  std::vector<InvariantResult> results_;
  std::map<std::string, size_t> index_;
};

struct PointResult {
  std::vector<ReportRow> rows;
  std::vector<OracleRow> oracle;
  InvariantLog invariants;
};

namespace detail {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

inline bool is_ring(const SweepConfig& cfg) { return cfg.model.kind == "ring_lattice"; }

inline GaugeSpec gauge_at(const SweepConfig& cfg, const GaugeEntry& e, double value) {
  const double alpha = (cfg.sweep.parameter == "alpha" && e.preset == GaugePreset::AlphaLWL) ? value : e.alpha;
  return make_gauge(e.preset, !is_ring(cfg), alpha);
}

inline double nu_at(const SweepConfig& cfg, double value) { return cfg.sweep.parameter == "nu" ? value : cfg.mode.nu; }

inline ModeSpec mode_at(const SweepConfig& cfg, const MatterModel& model, int q, double nu) {
  if (is_ring(cfg)) return make_ring_mode(model, q, nu);
  return make_mode(cfg.mode.direction, nu, model.params.V, 0);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

/// Invariants of one criterion evaluation in its gauge.
inline void check_evaluation(InvariantLog& log, const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode,
                             const BogoliubovBlock& block, const MatterSpectrum& sp,
                             const std::array<CriterionReport, 2>& reps) {
  log.add("bogoliubov.symplectic_deviation", "bogoliubov", 1e-11, verify_symplectic(block));
  // lhs / rhs must be an eigenvalue of the quadrature stability problem; without a partner mode
  // the ring presets carry a single coupling, so nothing is left over.
  double split = 0;
  for (const auto& r : reps) {
    if (r.self_conjugate) {
      const double mu = r.lhs / r.rhs, a = r.magnetic_part / r.rhs, b = r.interference / std::sqrt(r.rhs);
      split = std::max(split, std::abs((a - mu) * (r.electric_part - mu) - b * b) / std::max(1.0, mu * mu));
    } else {
      split = std::max(split, rel(r.lhs, r.electric_part + r.magnetic_part));
    }
  }
  log.add("criterion.lhs_decomposition", "criterion", 1e-12, split);
  if (g.preset == GaugePreset::Coulomb) {
    double el = 0;
    for (const auto& r : reps) el = std::max(el, std::abs(r.electric_part));
    log.add("criterion.electric_part_zero_in_coulomb", "criterion", 0.0, el);
    const auto cs = coulomb_specialized(model, mode, sp);
    double eq = 0;
    for (int t = 0; t < 2; ++t) eq = std::max(eq, cs[t].cross_check / std::max(1.0, std::abs(reps[t].lhs)));
    log.add("criterion.coulomb_specialized_equivalence", "criterion", 1e-10, eq);
  }
  if (g.preset == GaugePreset::Dipole) {
    double mg = 0;
    for (const auto& r : reps) mg = std::max(mg, std::abs(r.magnetic_part));
    log.add("criterion.magnetic_part_zero_in_dipole", "criterion", 0.0, mg);
    const auto ds = dipole_specialized(sp, mode);
    double eq = 0, pol = 0;
    const BogoliubovBlock ab = polarization_aligned(block);
    for (int t = 0; t < 2; ++t) {
      const int s = aligned_polarization(ab, t);
      eq = std::max(eq, rel(ds[s].lhs, reps[t].lhs));
      pol = std::max(pol, ds[t].cross_check / std::max(1.0, std::abs(ds[t].lhs) * sp.V));
    }
    log.add("criterion.dipole_specialized_equivalence", "criterion", 1e-10, eq);
    log.add("response.polarizability_identity", "response", 1e-10, pol);
  }
}

/// Invariants of the matter model itself (gauge independent).
inline void check_model(InvariantLog& log, const SweepConfig& cfg, const MatterModel& model) {
  if (model.kind == ModelKind::RingLattice) {
    const MatterSpectrum sp = matter_spectrum(model);
    double cross = 0;
    const auto& qs = cfg.mode.q_list;
    for (int q : qs)
      for (int q2 : qs)
        if (model.wrap(q) != model.wrap(q2)) cross = std::max(cross, check_translational_invariance(sp, q, q2));
    if (qs.size() > 1) log.add("response.cross_momentum_slrf", "response", 1e-10, cross);
    log.add("matter_models.uniform_ground_density", "matter_models", 1e-12, check_uniform_density(model, 0));
  } else if (model.kind == ModelKind::AnharmonicDipole && model.params.kappa == 0.0) {
    const MatterSpectrum sp = matter_spectrum(model);
    const double expect = model.params.mass * model.params.N / 2.0;
    log.add("matter_models.trk_sum_rule", "matter_models", 1e-8, std::abs(trk_sum(sp, 2, 0) - expect));
  }
}

inline int coupled_polarization(const MatterModel& model, const GaugeSpec& g, const ModeSpec& mode) {
  const double n0 = coupling_f(model, g, mode, 0).matrix().norm(), n1 = coupling_f(model, g, mode, 1).matrix().norm();
  return n1 > n0 ? 1 : 0;
}

inline std::vector<OracleRow> oracle_point(const SweepConfig& cfg, int i, double value, const ModelConfig& mcfg) {
  std::vector<OracleRow> out;
  std::vector<int> sizes = cfg.oracle.N_list;
  if (sizes.empty()) sizes.push_back(mcfg.N);
  if (mcfg.kind != "two_level") sizes = {1};
  for (size_t ge = 0; ge < cfg.gauges.size(); ++ge) {
    const GaugeSpec g = gauge_at(cfg, cfg.gauges[ge], value);
    for (int n : sizes) {
      ModelConfig mc = mcfg;
      if (mc.kind == "two_level") {
        mc.V = mcfg.V * n / mcfg.N; // fixed density N/V
        mc.N = n;
      }
      const MatterModel model = build_model(mc);
      const ModeSpec mode = mode_at(cfg, model, 0, nu_at(cfg, value));
      const int sigma = coupled_polarization(model, g, mode);
      auto build = [&](int c) { return full_hamiltonian(model, g, {{mode, sigma, c}}); };
      const CutoffResult cr = converge_cutoff(build, cfg.oracle.cutoff, 2, 10, cfg.oracle.max_cutoff);
      const FullSystem fs = build(cr.cutoff);
      const Statevector psi = Statevector::normalized(cr.states.vectors.col(0));
      const Coherence c = photon_coherence(psi, fs, 0);
      OracleRow r;
      r.point = i;
      r.param_value = value;
      r.gauge = g.name();
      r.alpha = g.alpha;
      r.N = static_cast<int>(model.params.N);
      r.cutoff = cr.cutoff;
      r.ground_energy = cr.states.values(0);
      r.parity_gap = cr.states.values(1) - cr.states.values(0);
      r.photons_per_N = c.n / model.params.N;
      r.abs_a = std::abs(c.a);
      r.field = transverse_field_expectation(psi, fs)[0];
      out.push_back(r);
    }
  }
  return out;
}

} // namespace detail

/// Criterion reports and invariant checks of one sweep point.
inline PointResult compute_point(const SweepConfig& cfg, int i, bool with_oracle) {
  PointResult res;
  const double value = cfg.sweep.value(i);
  const ModelConfig mcfg = with_parameter(cfg.model, cfg.sweep.parameter, value);
  const MatterModel model = build_model(mcfg);
  const double nu = detail::nu_at(cfg, value);
  detail::check_model(res.invariants, cfg, model);
  for (size_t ge = 0; ge < cfg.gauges.size(); ++ge) {
    const GaugeSpec g = detail::gauge_at(cfg, cfg.gauges[ge], value);
    const MatterSpectrum sp = matter_spectrum(model, gauge_matter_hamiltonian(model, g));
    for (int q : cfg.mode.q_list) {
      const ModeSpec mode = detail::mode_at(cfg, model, q, nu);
      const BogoliubovBlock block = diagonalize_block(diamagnetic_D(model, g, mode), mode.nu);
      const auto reps = evaluate(model, g, mode, block, sp);
      detail::check_evaluation(res.invariants, model, g, mode, block, sp, reps);
      for (const auto& r : reps) res.rows.push_back({i, value, g.name(), g.alpha, static_cast<int>(ge), mode.q_index, r});
    }
  }
  if (with_oracle) res.oracle = detail::oracle_point(cfg, i, value, mcfg);
  return res;
}

/// Runs every point on a pool of workers and returns the results in point order.
inline std::vector<PointResult> compute_points(const SweepConfig& cfg, bool with_oracle, int threads) {
  const int n = cfg.sweep.steps;
  std::vector<PointResult> out(n);
  std::vector<std::string> errors(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[i] = compute_point(cfg, i, with_oracle);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min(threads, n));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty())
      throw NumericError("sweep point " + std::to_string(i) + " (" + cfg.sweep.parameter + " = " + detail::fmt(cfg.sweep.value(i)) +
                         "): " + errors[i]);
  return out;
}

inline std::string criterion_csv(const SweepConfig& cfg, const std::vector<PointResult>& pts) {
  std::string s = std::string(kCriterionHeader) + "\n";
  for (const auto& p : pts)
    for (const auto& r : p.rows) {
      const CriterionReport& c = r.report;
      s += std::to_string(kSchemaVersion) + "," + std::to_string(r.point) + "," + cfg.sweep.parameter + "," + detail::fmt(r.param_value) +
           "," + r.gauge + "," + detail::fmt(r.alpha) + "," + std::to_string(r.q_index) + "," + std::to_string(c.tau) + "," +
           detail::fmt(c.lhs) + "," + detail::fmt(c.rhs) + "," + detail::fmt(c.electric_part) + "," + detail::fmt(c.magnetic_part) +
           "," + detail::fmt(c.margin) + "," + (c.condensed ? "true" : "false") + "," + detail::fmt(c.beta.real()) + "," +
           detail::fmt(c.beta.imag()) + "\n";
    }
  return s;
}

inline std::string oracle_csv(const SweepConfig& cfg, const std::vector<PointResult>& pts) {
  std::string s = std::string(kOracleHeader) + "\n";
  for (const auto& p : pts)
    for (const auto& r : p.oracle)
      s += std::to_string(kSchemaVersion) + "," + std::to_string(r.point) + "," + cfg.sweep.parameter + "," + detail::fmt(r.param_value) +
           "," + r.gauge + "," + detail::fmt(r.alpha) + "," + std::to_string(r.N) + "," + std::to_string(r.cutoff) + "," +
           detail::fmt(r.ground_energy) + "," + detail::fmt(r.parity_gap) + "," + detail::fmt(r.photons_per_N) + "," +
           detail::fmt(r.abs_a) + "," + detail::fmt(r.field) + "\n";
  return s;
}

/// Analytic condensation threshold of the two-level ensemble in the dipole gauge, 2 N d^2 / (V gap) = 1,
/// expressed in units of the swept parameter.
inline std::optional<double> analytic_threshold(const SweepConfig& cfg) {
  const ModelConfig& m = cfg.model;
  if (m.kind != "two_level") return std::nullopt;
  const double d = m.dipole.norm();
  const std::string& p = cfg.sweep.parameter;
  if (p == "dipole") return std::sqrt(m.V * m.gap / (2.0 * m.N));
  if (p == "gap" && d > 0) return 2.0 * m.N * d * d / m.V;
  if (p == "V" && d > 0) return 2.0 * m.N * d * d / m.gap;
  return std::nullopt;
}

inline double grid_step(const SweepConfig& cfg) {
  return cfg.sweep.steps > 1 ? std::abs(cfg.sweep.value(1) - cfg.sweep.value(0)) : 0.0;
}

inline json thresholds_json(const SweepConfig& cfg, const std::vector<PointResult>& pts) {
  json out = json::array();
  if (pts.empty()) return out;
  const auto analytic = analytic_threshold(cfg);
  const size_t per_point = pts[0].rows.size();
  for (size_t k = 0; k < per_point; ++k) {
    const ReportRow& first = pts[0].rows[k];
    json e;
    e["gauge"] = first.gauge;
    e["alpha"] = cfg.sweep.parameter == "alpha" ? json(nullptr) : json(first.alpha);
    e["q_index"] = first.q_index;
    e["tau"] = first.report.tau;
    int condensed = 0, marginal = 0;
    json crossings = json::array();
    for (size_t i = 0; i < pts.size(); ++i) {
      const CriterionReport& c = pts[i].rows[k].report;
      condensed += c.condensed;
      marginal += c.marginal;
      if (i == 0) continue;
      const CriterionReport& b = pts[i - 1].rows[k].report;
      if (b.condensed != c.condensed) {
        const double x0 = pts[i - 1].rows[k].param_value, x1 = pts[i].rows[k].param_value;
        const double t = b.margin == c.margin ? 0.0 : -b.margin / (c.margin - b.margin);
        crossings.push_back({{"index", i}, {"value", x0 + t * (x1 - x0)}, {"direction", c.condensed ? "onset" : "loss"}});
      }
    }
    e["condensed_points"] = condensed;
    e["marginal_points"] = marginal;
    e["condensed_anywhere"] = condensed > 0;
    e["crossings"] = crossings;
    e["threshold_crossing"] = crossings.empty() ? json(nullptr) : crossings[0]["value"];
    if (analytic && first.gauge == "dipole" && cfg.model.kind == "two_level") {
      e["analytic_threshold"] = *analytic;
      if (!crossings.empty())
        e["within_one_grid_step"] = std::abs(crossings[0]["value"].get<double>() - *analytic) <= grid_step(cfg);
    }
    out.push_back(e);
  }
  return out;
}

/// Finite-size crossing of the scaled parity gap between the two largest oracle sizes, per gauge.
inline json oracle_crossings_json(const SweepConfig& cfg, const std::vector<PointResult>& pts) {
  json out = json::array();
  if (!cfg.oracle.enabled || cfg.model.kind != "two_level" || cfg.oracle.N_list.size() < 2 || pts.empty()) return out;
  std::vector<int> sizes = cfg.oracle.N_list;
  std::sort(sizes.begin(), sizes.end());
  const int ns = sizes[sizes.size() - 2], nl = sizes.back();
  for (size_t ge = 0; ge < cfg.gauges.size(); ++ge) {
    std::vector<double> signal, xs;
    std::string name;
    for (const auto& p : pts) {
      double gs = NAN, gl = NAN;
      for (const auto& r : p.oracle) {
        if (r.gauge != detail::gauge_at(cfg, cfg.gauges[ge], r.param_value).name() ||
            r.alpha != detail::gauge_at(cfg, cfg.gauges[ge], r.param_value).alpha)
          continue;
        name = r.gauge;
        if (r.N == ns) gs = r.parity_gap;
        if (r.N == nl) gl = r.parity_gap;
      }
      signal.push_back(std::cbrt(double(ns)) * gs - std::cbrt(double(nl)) * gl);
      xs.push_back(p.rows.empty() ? 0.0 : p.rows[0].param_value);
    }
    json e{{"gauge", name}, {"N_small", ns}, {"N_large", nl}, {"crossing", nullptr}};
    for (size_t i = 1; i < signal.size(); ++i)
      if (signal[i - 1] < 0 && signal[i] >= 0) {
        e["crossing"] = xs[i - 1] + (xs[i] - xs[i - 1]) * (-signal[i - 1]) / (signal[i] - signal[i - 1]);
        e["index"] = i;
        break;
      }
    out.push_back(e);
  }
  return out;
}

inline json invariants_json(const InvariantLog& log) {
  json out = json::array();
  for (const auto& r : log.results())
    out.push_back({{"name", r.name},
                   {"module", r.module},
                   {"tolerance", r.tolerance},
                   {"worst_value", std::isnan(r.value) ? json(nullptr) : json(r.value)},
                   {"points_checked", r.checked},
                   {"passed", r.passed() && !std::isnan(r.value)}});
  return out;
}

/// Randomized Bogoliubov suite: closed-form frequencies against the numeric pseudo-eigenproblem.
inline void bogoliubov_suite(InvariantLog& log, std::uint64_t seed, int samples = 1000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), r(0.0, 2.0);
  for (int s = 0; s < samples; ++s) {
    Eigen::Matrix2d m;
    m << u(rng), u(rng), u(rng), u(rng);
    DiamagneticMatrix dm;
    dm.D = m * m.transpose();
    const double nu = 0.5 + r(rng);
    dm.Delta = 0.5 * r(rng) * nu;
    const BogoliubovBlock b = diagonalize_block(dm, nu);
    const NumericBlock nb = numeric_block_eigen(dm, nu);
    log.add("bogoliubov.closed_vs_numeric_lambda", "bogoliubov", 1e-10,
            std::max(std::abs(b.lambda[0] - nb.lambda[0]), std::abs(b.lambda[1] - nb.lambda[1])));
    log.add("bogoliubov.symplectic_deviation", "bogoliubov", 1e-11, verify_symplectic(b));
  }
}

struct SweepOutcome {
  std::vector<PointResult> points;
  InvariantLog invariants;
  json summary;
};

inline SweepOutcome run_sweep(const SweepConfig& cfg, int threads = 1) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  SweepOutcome out;
  out.points = compute_points(cfg, false, threads);
  const auto t1 = clock::now();
  if (cfg.oracle.enabled) {
    SweepConfig oc = cfg;
    const auto with_oracle = compute_points(oc, true, threads);
    for (size_t i = 0; i < out.points.size(); ++i) out.points[i].oracle = with_oracle[i].oracle;
  }
  const auto t2 = clock::now();
  for (const auto& p : out.points) out.invariants.merge(p.invariants);
  json& s = out.summary;
  s["resolved_config"] = cfg.resolved;
  s["thresholds"] = thresholds_json(cfg, out.points);
  if (cfg.oracle.enabled) s["oracle_crossings"] = oracle_crossings_json(cfg, out.points);
  s["invariant_results"] = invariants_json(out.invariants);
  s["all_invariants_passed"] = out.invariants.all_passed();
  const auto t3 = clock::now();
  auto sec = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
  s["timings"] = {{"criterion_s", sec(t0, t1)}, {"oracle_s", sec(t1, t2)}, {"total_s", sec(t0, t3)}, {"threads", threads}};
  return out;
}

inline void write_outputs(const SweepConfig& cfg, const SweepOutcome& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ResourceError("cannot write " + (dir / name).string());
    f << text;
  };
  if (cfg.output.csv) {
    write("criterion.csv", criterion_csv(cfg, o.points));
    if (cfg.oracle.enabled) write("oracle.csv", oracle_csv(cfg, o.points));
  }
  if (cfg.output.json) write("summary.json", o.summary.dump(2) + "\n");
}

/// Invariant suites only: every sweep point plus the seeded randomized Bogoliubov checks.
inline InvariantLog run_check(const SweepConfig& cfg, int threads = 1) {
  InvariantLog log;
  for (const auto& p : compute_points(cfg, false, threads)) log.merge(p.invariants);
  bogoliubov_suite(log, cfg.seed);
  return log;
}

} // namespace photoncond

#endif // PHOTONCOND_SWEEP_HPP
