#ifndef PHOTONCOND_CONFIG_HPP
#define PHOTONCOND_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "gauge.hpp"
#include "matter_models.hpp"

namespace photoncond {

using json = nlohmann::json;

/// All violations found in a configuration, each prefixed with its field path.
class ConfigError : public Error {
public:
  explicit ConfigError(std::vector<std::string> issues) : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> issues_;
};

struct ModelConfig {
  std::string kind; // two_level, anharmonic_dipole, ring_lattice
  int N = 1;
  double gap = 1.0;
  Eigen::Vector3d dipole = Eigen::Vector3d::Zero();
  double V = 1.0;
  int levels = 40;
  int axes = 1;
  double mass = 1.0, omega = 1.0, kappa = 0.0, charge = 1.0;
  int sites = 6;
  double hopping = 1.0;
  std::vector<double> bond_scale;
};

struct GaugeEntry {
  GaugePreset preset = GaugePreset::Coulomb;
  double alpha = 0.0;
};

struct ModeConfig {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  double nu = 1.0;
  std::vector<int> q_list{0};
};

struct SweepRange {
  std::string parameter;
  double start = 0, stop = 0;
  int steps = 1;
  bool log = false;

  double value(int i) const {
    if (steps == 1) return start;
    const double t = double(i) / (steps - 1);
    return log ? start * std::pow(stop / start, t) : start + (stop - start) * t;
  }
};

struct OracleConfig {
  bool enabled = false;
  int cutoff = 30;
  int max_cutoff = 200;
  std::vector<int> N_list;
};

struct OutputConfig {
  std::string directory;
  bool csv = true;
  bool json = true;
};

struct SweepConfig {
  ModelConfig model;
  std::vector<GaugeEntry> gauges;
  ModeConfig mode;
  SweepRange sweep;
  OracleConfig oracle;
  OutputConfig output;
  std::uint64_t seed = 0;
  json resolved;
};

inline const std::set<std::string>& sweepable(const std::string& kind) {
  static const std::set<std::string> two{"dipole", "gap", "V", "nu", "alpha"};
  static const std::set<std::string> anh{"charge", "kappa", "omega", "mass", "V", "nu", "alpha"};
  static const std::set<std::string> ring{"hopping", "charge", "nu"};
  static const std::set<std::string> none;
  if (kind == "two_level") return two;
  if (kind == "anharmonic_dipole") return anh;
  if (kind == "ring_lattice") return ring;
  return none;
}

namespace detail {

class Reader {
public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

  const json* child(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }

  double number(const json& j, const std::string& key, const std::string& path, double def) {
    const json* c = child(j, key);
    if (!c) return def;
    if (!c->is_number()) {
      fail(path, "expected a number");
      return def;
    }
    return c->get<double>();
  }
  int integer(const json& j, const std::string& key, const std::string& path, int def) {
    const json* c = child(j, key);
    if (!c) return def;
    if (!c->is_number_integer()) {
      fail(path, "expected an integer");
      return def;
    }
    return c->get<int>();
  }
  bool boolean(const json& j, const std::string& key, const std::string& path, bool def) {
    const json* c = child(j, key);
    if (!c) return def;
    if (!c->is_boolean()) {
      fail(path, "expected true or false");
      return def;
    }
    return c->get<bool>();
  }
  std::string string(const json& j, const std::string& key, const std::string& path, const std::string& def) {
    const json* c = child(j, key);
    if (!c) return def;
    if (!c->is_string()) {
      fail(path, "expected a string");
      return def;
    }
    return c->get<std::string>();
  }
  std::vector<double> numbers(const json& j, const std::string& key, const std::string& path) {
    std::vector<double> v;
    const json* c = child(j, key);
    if (!c) return v;
    if (!c->is_array()) {
      fail(path, "expected an array of numbers");
      return v;
    }
    for (size_t i = 0; i < c->size(); ++i) {
      if (!(*c)[i].is_number())
        fail(path + "[" + std::to_string(i) + "]", "expected a number");
      else
        v.push_back((*c)[i].get<double>());
    }
    return v;
  }
  std::vector<int> integers(const json& j, const std::string& key, const std::string& path) {
    std::vector<int> v;
    const json* c = child(j, key);
    if (!c) return v;
    if (!c->is_array()) {
      fail(path, "expected an array of integers");
      return v;
    }
    for (size_t i = 0; i < c->size(); ++i) {
      if (!(*c)[i].is_number_integer())
        fail(path + "[" + std::to_string(i) + "]", "expected an integer");
      else
        v.push_back((*c)[i].get<int>());
    }
    return v;
  }
  void unknown_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
};

inline bool parse_preset(const std::string& s, GaugePreset& p) {
  if (s == "coulomb") p = GaugePreset::Coulomb;
  else if (s == "dipole") p = GaugePreset::Dipole;
  else if (s == "alpha") p = GaugePreset::AlphaLWL;
  else if (s == "multipolar_ring") p = GaugePreset::MultipolarRing;
  else return false;
  return true;
}

} // namespace detail

inline SweepConfig validate_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: JSON parse error: ") + e.what()});
  }
  detail::Reader rd;
  SweepConfig cfg;
  if (!root.is_object()) throw ConfigError({"config: top level must be an object"});
  rd.unknown_keys(root, "", {"model", "gauge", "mode", "sweep", "oracle", "output", "seed"});

  // model
  const json empty = json::object();
  const json* jm = rd.child(root, "model");
  if (!jm || !jm->is_object()) {
    rd.fail("model", "required object is missing");
    jm = &empty;
  }
  ModelConfig& m = cfg.model;
  m.kind = rd.string(*jm, "kind", "model.kind", "");
  if (m.kind == "two_level") {
    rd.unknown_keys(*jm, "model", {"kind", "N", "gap", "dipole", "V"});
    m.N = rd.integer(*jm, "N", "model.N", 1);
    m.gap = rd.number(*jm, "gap", "model.gap", 1.0);
    const auto d = rd.numbers(*jm, "dipole", "model.dipole");
    if (rd.child(*jm, "dipole") && d.size() != 3) rd.fail("model.dipole", "expected three components");
    if (d.size() == 3) m.dipole = Eigen::Vector3d(d[0], d[1], d[2]);
    m.V = rd.number(*jm, "V", "model.V", 1.0);
    if (m.N < 1) rd.fail("model.N", "must be at least 1");
    if (m.N > kDefaultMaxTwoLevelCount) rd.fail("model.N", "exceeds " + std::to_string(kDefaultMaxTwoLevelCount));
    if (!(m.gap > 0)) rd.fail("model.gap", "must be positive");
  } else if (m.kind == "anharmonic_dipole") {
    rd.unknown_keys(*jm, "model", {"kind", "levels", "axes", "mass", "omega", "kappa", "charge", "V"});
    m.levels = rd.integer(*jm, "levels", "model.levels", 40);
    m.axes = rd.integer(*jm, "axes", "model.axes", 1);
    m.mass = rd.number(*jm, "mass", "model.mass", 1.0);
    m.omega = rd.number(*jm, "omega", "model.omega", 1.0);
    m.kappa = rd.number(*jm, "kappa", "model.kappa", 0.0);
    m.charge = rd.number(*jm, "charge", "model.charge", 1.0);
    m.V = rd.number(*jm, "V", "model.V", 1.0);
    if (m.levels < 4) rd.fail("model.levels", "must be at least 4");
    if (m.axes != 1 && m.axes != 3) rd.fail("model.axes", "must be 1 or 3");
    if (!(m.mass > 0)) rd.fail("model.mass", "must be positive");
    if (!(m.omega > 0)) rd.fail("model.omega", "must be positive");
    if (m.kappa < 0) rd.fail("model.kappa", "must be nonnegative");
  } else if (m.kind == "ring_lattice") {
    rd.unknown_keys(*jm, "model", {"kind", "sites", "hopping", "charge", "bond_scale"});
    m.sites = rd.integer(*jm, "sites", "model.sites", 6);
    m.hopping = rd.number(*jm, "hopping", "model.hopping", 1.0);
    m.charge = rd.number(*jm, "charge", "model.charge", 1.0);
    m.bond_scale = rd.numbers(*jm, "bond_scale", "model.bond_scale");
    m.V = m.sites;
    if (m.sites < 4) rd.fail("model.sites", "must be at least 4");
    if (!(m.hopping > 0)) rd.fail("model.hopping", "must be positive");
    if (!m.bond_scale.empty() && static_cast<int>(m.bond_scale.size()) != m.sites)
      rd.fail("model.bond_scale", "needs one entry per site");
  } else {
    rd.fail("model.kind", "must be one of two_level, anharmonic_dipole, ring_lattice");
  }
  if (!(m.V > 0)) rd.fail("model.V", "must be positive");
  const bool ring = m.kind == "ring_lattice";

  // gauge
  const json* jg = rd.child(root, "gauge");
  if (!jg || !jg->is_object()) {
    rd.fail("gauge", "required object is missing");
    jg = &empty;
  }
  rd.unknown_keys(*jg, "gauge", {"preset", "presets", "alpha", "alpha_grid"});
  std::vector<std::string> names;
  if (rd.child(*jg, "preset")) names.push_back(rd.string(*jg, "preset", "gauge.preset", ""));
  if (const json* ps = rd.child(*jg, "presets")) {
    if (!ps->is_array() || ps->empty()) rd.fail("gauge.presets", "expected a nonempty array of preset names");
    else
      for (size_t i = 0; i < ps->size(); ++i) {
        if ((*ps)[i].is_string()) names.push_back((*ps)[i].get<std::string>());
        else rd.fail("gauge.presets[" + std::to_string(i) + "]", "expected a string");
      }
  }
  if (names.empty() && (!rd.child(*jg, "preset") && !rd.child(*jg, "presets"))) rd.fail("gauge.preset", "required field is missing");
  std::vector<double> alphas;
  if (rd.child(*jg, "alpha")) alphas.push_back(rd.number(*jg, "alpha", "gauge.alpha", 0.0));
  for (double a : rd.numbers(*jg, "alpha_grid", "gauge.alpha_grid")) alphas.push_back(a);
  for (size_t i = 0; i < alphas.size(); ++i)
    if (!(alphas[i] >= 0.0 && alphas[i] <= 1.0))
      rd.fail(i == 0 && rd.child(*jg, "alpha") ? "gauge.alpha" : "gauge.alpha_grid", "must lie in [0, 1], got " + std::to_string(alphas[i]));
  for (const auto& name : names) {
    GaugePreset p;
    if (!detail::parse_preset(name, p)) {
      rd.fail("gauge.preset", "unknown preset '" + name + "' (coulomb, dipole, alpha, multipolar_ring)");
      continue;
    }
    if (ring && (p == GaugePreset::Dipole || p == GaugePreset::AlphaLWL))
      rd.fail("gauge.preset", "preset '" + name + "' is long-wavelength only; use coulomb or multipolar_ring on the ring");
    if (!ring && !m.kind.empty() && p == GaugePreset::MultipolarRing) rd.fail("gauge.preset", "multipolar_ring needs model.kind = ring_lattice");
    if (p == GaugePreset::AlphaLWL) {
      if (alphas.empty()) cfg.gauges.push_back({p, 0.0});
      for (double a : alphas) cfg.gauges.push_back({p, a});
    } else {
      cfg.gauges.push_back({p, p == GaugePreset::Coulomb ? 0.0 : 1.0});
    }
  }

  // mode
  const json* jmo = rd.child(root, "mode");
  if (!jmo) jmo = &empty;
  if (!jmo->is_object()) {
    rd.fail("mode", "expected an object");
    jmo = &empty;
  }
  rd.unknown_keys(*jmo, "mode", {"direction", "nu", "q_list"});
  const auto dir = rd.numbers(*jmo, "direction", "mode.direction");
  if (rd.child(*jmo, "direction") && dir.size() != 3) rd.fail("mode.direction", "expected three components");
  if (dir.size() == 3) cfg.mode.direction = Eigen::Vector3d(dir[0], dir[1], dir[2]);
  if (!(cfg.mode.direction.norm() > 0)) rd.fail("mode.direction", "must be nonzero");
  if (ring && rd.child(*jmo, "direction")) rd.fail("mode.direction", "ring modes propagate along z; remove this field");
  cfg.mode.nu = rd.number(*jmo, "nu", "mode.nu", 1.0);
  if (!(cfg.mode.nu > 0)) rd.fail("mode.nu", "must be positive");
  if (rd.child(*jmo, "q_list")) {
    cfg.mode.q_list = rd.integers(*jmo, "q_list", "mode.q_list");
    if (cfg.mode.q_list.empty()) rd.fail("mode.q_list", "must be nonempty");
    for (int q : cfg.mode.q_list)
      if (!ring && q != 0) rd.fail("mode.q_list", "long-wavelength models only have q index 0");
  }
  if (ring && m.sites > 0)
    for (int q : cfg.mode.q_list)
      if (((q % m.sites) + m.sites) % m.sites == 0 &&
          std::any_of(cfg.gauges.begin(), cfg.gauges.end(), [](const GaugeEntry& g) { return g.preset == GaugePreset::MultipolarRing; })) {
        rd.fail("mode.q_list", "multipolar_ring has no q = 0 mode; list nonzero q indices");
        break;
      }

  // sweep
  const json* js = rd.child(root, "sweep");
  if (!js || !js->is_object()) {
    rd.fail("sweep", "required object is missing");
    js = &empty;
  }
  rd.unknown_keys(*js, "sweep", {"parameter", "start", "stop", "steps", "scale"});
  SweepRange& sw = cfg.sweep;
  sw.parameter = rd.string(*js, "parameter", "sweep.parameter", "");
  if (!rd.child(*js, "parameter")) rd.fail("sweep.parameter", "required field is missing");
  else if (!m.kind.empty() && !sweepable(m.kind).count(sw.parameter)) {
    std::string allowed;
    for (const auto& p : sweepable(m.kind)) allowed += (allowed.empty() ? "" : ", ") + p;
    rd.fail("sweep.parameter", "'" + sw.parameter + "' is not a parameter of " + m.kind + " (" + allowed + ")");
  }
  if (!rd.child(*js, "start")) rd.fail("sweep.start", "required field is missing");
  if (!rd.child(*js, "stop")) rd.fail("sweep.stop", "required field is missing");
  sw.start = rd.number(*js, "start", "sweep.start", 0.0);
  sw.stop = rd.number(*js, "stop", "sweep.stop", sw.start);
  sw.steps = rd.integer(*js, "steps", "sweep.steps", 1);
  if (sw.steps < 1) rd.fail("sweep.steps", "must be at least 1, got " + std::to_string(sw.steps));
  const std::string scale = rd.string(*js, "scale", "sweep.scale", "linear");
  if (scale != "linear" && scale != "log") rd.fail("sweep.scale", "must be linear or log");
  sw.log = scale == "log";
  if (sw.log && !(sw.start > 0 && sw.stop > 0)) rd.fail("sweep.start", "log sweeps need positive start and stop");
  if (sw.steps > 1 && sw.start == sw.stop) rd.fail("sweep.stop", "range is empty (start equals stop)");
  if (sw.parameter == "alpha") {
    if (!(sw.start >= 0 && sw.start <= 1 && sw.stop >= 0 && sw.stop <= 1)) rd.fail("sweep.start", "alpha sweeps must stay within [0, 1]");
    bool has_alpha = false;
    for (const auto& g : cfg.gauges) has_alpha |= g.preset == GaugePreset::AlphaLWL;
    if (!has_alpha) rd.fail("sweep.parameter", "sweeping alpha needs the alpha gauge preset");
  }
  if (sw.parameter != "nu" && sw.parameter != "alpha" && sw.parameter != "charge" && sw.parameter != "kappa" &&
      sw.parameter != "dipole") {
    const double lo = std::min(sw.start, sw.stop);
    if (!(lo > 0)) rd.fail("sweep.start", "'" + sw.parameter + "' must stay positive");
  }
  if ((sw.parameter == "nu") && !(std::min(sw.start, sw.stop) > 0)) rd.fail("sweep.start", "'nu' must stay positive");
  if (sw.parameter == "kappa" && std::min(sw.start, sw.stop) < 0) rd.fail("sweep.start", "'kappa' must be nonnegative");

  // oracle
  if (const json* jo = rd.child(root, "oracle")) {
    if (!jo->is_object()) rd.fail("oracle", "expected an object");
    else {
      rd.unknown_keys(*jo, "oracle", {"enabled", "cutoff", "max_cutoff", "N_list"});
      cfg.oracle.enabled = rd.boolean(*jo, "enabled", "oracle.enabled", false);
      cfg.oracle.cutoff = rd.integer(*jo, "cutoff", "oracle.cutoff", 30);
      cfg.oracle.max_cutoff = rd.integer(*jo, "max_cutoff", "oracle.max_cutoff", 200);
      cfg.oracle.N_list = rd.integers(*jo, "N_list", "oracle.N_list");
      if (cfg.oracle.cutoff < 2) rd.fail("oracle.cutoff", "must be at least 2");
      if (cfg.oracle.max_cutoff < cfg.oracle.cutoff) rd.fail("oracle.max_cutoff", "must not be below oracle.cutoff");
      for (int n : cfg.oracle.N_list)
        if (n < 1) rd.fail("oracle.N_list", "entries must be at least 1");
      if (cfg.oracle.enabled && ring) rd.fail("oracle.enabled", "the oracle covers long-wavelength models only");
      if (!cfg.oracle.N_list.empty() && m.kind == "anharmonic_dipole") rd.fail("oracle.N_list", "the anharmonic dipole is a single-charge model");
    }
  }

  // output
  if (const json* jout = rd.child(root, "output")) {
    if (!jout->is_object()) rd.fail("output", "expected an object");
    else {
      rd.unknown_keys(*jout, "output", {"directory", "formats"});
      cfg.output.directory = rd.string(*jout, "directory", "output.directory", "");
      if (const json* f = rd.child(*jout, "formats")) {
        cfg.output.csv = cfg.output.json = false;
        if (!f->is_array() || f->empty()) rd.fail("output.formats", "expected a nonempty array");
        else
          for (const auto& x : *f) {
            const std::string s = x.is_string() ? x.get<std::string>() : "";
            if (s == "csv") cfg.output.csv = true;
            else if (s == "json") cfg.output.json = true;
            else rd.fail("output.formats", "entries must be csv or json");
          }
      }
    }
  }

  if (const json* jseed = rd.child(root, "seed")) {
    if (!jseed->is_number_unsigned()) rd.fail("seed", "expected a nonnegative integer");
    else cfg.seed = jseed->get<std::uint64_t>();
  }

  if (!rd.issues.empty()) throw ConfigError(rd.issues);

  // Fully resolved configuration, defaults included.
  json& r = cfg.resolved;
  r["model"]["kind"] = m.kind;
  if (m.kind == "two_level") {
    r["model"]["N"] = m.N;
    r["model"]["gap"] = m.gap;
    r["model"]["dipole"] = {m.dipole[0], m.dipole[1], m.dipole[2]};
    r["model"]["V"] = m.V;
  } else if (m.kind == "anharmonic_dipole") {
    r["model"]["levels"] = m.levels;
    r["model"]["axes"] = m.axes;
    r["model"]["mass"] = m.mass;
    r["model"]["omega"] = m.omega;
    r["model"]["kappa"] = m.kappa;
    r["model"]["charge"] = m.charge;
    r["model"]["V"] = m.V;
  } else {
    r["model"]["sites"] = m.sites;
    r["model"]["hopping"] = m.hopping;
    r["model"]["charge"] = m.charge;
    r["model"]["bond_scale"] = m.bond_scale.empty() ? std::vector<double>(m.sites, 1.0) : m.bond_scale;
  }
  r["gauge"] = json::array();
  for (const auto& g : cfg.gauges) r["gauge"].push_back({{"preset", make_gauge(g.preset, !ring, g.alpha).name()}, {"alpha", g.alpha}});
  r["mode"]["direction"] = {cfg.mode.direction[0], cfg.mode.direction[1], cfg.mode.direction[2]};
  if (ring) r["mode"]["direction"] = {0.0, 0.0, 1.0};
  r["mode"]["nu"] = cfg.mode.nu;
  r["mode"]["q_list"] = cfg.mode.q_list;
  r["sweep"] = {{"parameter", sw.parameter}, {"start", sw.start}, {"stop", sw.stop}, {"steps", sw.steps}, {"scale", sw.log ? "log" : "linear"}};
  r["oracle"] = {{"enabled", cfg.oracle.enabled}, {"cutoff", cfg.oracle.cutoff}, {"max_cutoff", cfg.oracle.max_cutoff}, {"N_list", cfg.oracle.N_list}};
  r["output"] = {{"directory", cfg.output.directory}, {"csv", cfg.output.csv}, {"json", cfg.output.json}};
  r["seed"] = cfg.seed;
  return cfg;
}

/// Model parameters with the swept parameter applied (nu and alpha are not model parameters).
inline ModelConfig with_parameter(ModelConfig m, const std::string& name, double value) {
  if (name == "dipole") {
    const double n = m.dipole.norm();
    m.dipole = (n > 0 ? Eigen::Vector3d(m.dipole / n) : Eigen::Vector3d::UnitZ()) * value;
  } else if (name == "gap") m.gap = value;
  else if (name == "V") m.V = value;
  else if (name == "charge") m.charge = value;
  else if (name == "kappa") m.kappa = value;
  else if (name == "omega") m.omega = value;
  else if (name == "mass") m.mass = value;
  else if (name == "hopping") m.hopping = value;
  return m;
}

inline MatterModel build_model(const ModelConfig& m) {
  if (m.kind == "two_level") return build_two_level_ensemble(m.N, m.gap, m.dipole, m.V);
  if (m.kind == "anharmonic_dipole") return build_anharmonic_dipole(m.levels, m.mass, m.omega, m.kappa, m.charge, m.V, m.axes);
  if (m.kind == "ring_lattice") return build_ring_lattice(m.sites, m.hopping, m.charge, m.bond_scale);
  throw ArgumentError("unknown model kind '" + m.kind + "'");
}

} // namespace photoncond

#endif // PHOTONCOND_CONFIG_HPP
