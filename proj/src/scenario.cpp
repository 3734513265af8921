// Copyright 2026 The lossypdc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lossypdc/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lossypdc/discrete_loss.hpp"
#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"

namespace lossypdc {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- parsing

class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw ConfigError(name_ + " must be an object");
    obj_ = doc;
    present_ = true;
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return present_ && obj_.contains(key) && !obj_[key].is_null();
  }

  const json& at(const std::string& key) const { return obj_[key]; }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where(key) + " must be finite");
    return x;
  }

  double positive(const std::string& key, double def) {
    const double x = number(key, def);
    if (!(x > 0.0)) throw ConfigError(where(key) + " must be positive");
    return x;
  }

  int integer(const std::string& key, int def, int min_value) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    const long long x = v.get<long long>();
    if (x < min_value || x > 1000000) throw ConfigError(where(key) + " out of range");
    return static_cast<int>(x);
  }

  std::string text(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::vector<int> integers(const std::string& key, std::vector<int> def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(where(key) + " must be a non-empty list");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 1 || e.get<long long>() > 1000000)
        throw ConfigError(where(key) + " must hold positive integers");
      out.push_back(static_cast<int>(e.get<long long>()));
    }
    return out;
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

  void done() const {
    if (!present_) return;
    for (const auto& item : obj_.items())
      if (!known_.count(item.key())) throw ConfigError("unknown key " + where(item.key()));
  }

 private:
  json obj_;  // sections are small, a copy keeps lifetimes simple
  bool present_ = false;
  std::string name_;
  std::set<std::string> known_;
};

SellmeierCoefficients read_sellmeier(Section& sec, const std::string& key,
                                     SellmeierCoefficients def) {
  if (!sec.has(key)) return def;
  const json& v = sec.at(key);
  if (!v.is_array() || v.size() != 4)
    throw ConfigError(sec.where(key) + " must be [A, B, C, D]");
  for (const auto& e : v)
    if (!e.is_number()) throw ConfigError(sec.where(key) + " must hold numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

json read_occupation(Section& sec, const std::string& key) {
  if (!sec.has(key)) return 0.0;
  const json& v = sec.at(key);
  if (v.is_number()) {
    if (!(v.get<double>() >= 0.0)) throw ConfigError(sec.where(key) + " must be >= 0");
    return v;
  }
  if (v.is_array()) {
    for (const auto& e : v)
      if (!e.is_number() || !(e.get<double>() >= 0.0))
        throw ConfigError(sec.where(key) + " must hold non-negative numbers");
    return v;
  }
  throw ConfigError(sec.where(key) + " must be a number or a list");
}

BasisKind basis_from_string(const std::string& name) {
  if (name == "schmidt") return BasisKind::schmidt;
  if (name == "mercer_wolf") return BasisKind::mercer_wolf;
  if (name == "williamson_euler") return BasisKind::williamson_euler;
  if (name == "msq") return BasisKind::msq;
  throw ConfigError("unknown basis '" + name + "'");
}

std::string solver_name(SolverModel m) {
  switch (m) {
    case SolverModel::lossless: return "lossless";
    case SolverModel::discrete: return "discrete";
    case SolverModel::continuous: return "continuous";
  }
  return "lossless";
}

std::string loss_name(LossKind k) {
  switch (k) {
    case LossKind::none: return "none";
    case LossKind::constant: return "constant";
    case LossKind::tabulated: return "tabulated";
  }
  return "none";
}

void apply_override(json& doc, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + item);
  const std::string key = item.substr(0, eq);
  const std::string raw = item.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("bad override key: " + key);
    parts.push_back(part);
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("override path is not an object: " + key);
    node = &(*node)[parts[i]];
  }
  if (node->is_null()) *node = json::object();
  if (!node->is_object()) throw ConfigError("override path is not an object: " + key);
  (*node)[parts.back()] = value;
}

}  // namespace

Scenario scenario_from_json(json doc, const std::vector<std::string>& overrides) {
  if (doc.is_null()) doc = json::object();
  if (!doc.is_object()) throw ConfigError("configuration must be an object");
  for (const auto& o : overrides) apply_override(doc, o);

  Scenario s;
  Section top(doc, "config");

  Section grid(top.has("grid") ? top.at("grid") : json(), "grid");
  s.count = grid.integer("count", s.count, 1);
  s.half_width = grid.positive("half_width", s.half_width);
  std::optional<double> center_wavelength;
  if (grid.has("center_wavelength_um")) center_wavelength = grid.positive("center_wavelength_um", 1.6);
  grid.done();

  Section medium(top.has("medium") ? top.at("medium") : json(), "medium");
  s.length_um = medium.positive("length_um", s.length_um);
  s.model.theta = medium.number("theta_over_pi", s.model.theta / kPi) * kPi;
  s.model.ordinary = read_sellmeier(medium, "sellmeier_ordinary", s.model.ordinary);
  s.model.eta = read_sellmeier(medium, "sellmeier_eta", s.model.eta);
  medium.done();

  Section pump(top.has("pump") ? top.at("pump") : json(), "pump");
  s.pump.wavelength_um = pump.positive("wavelength_um", s.pump.wavelength_um);
  s.pump.fwhm_fs = pump.positive("fwhm_fs", s.pump.fwhm_fs);
  pump.done();
  if (center_wavelength && std::abs(*center_wavelength - 2.0 * s.pump.wavelength_um) >
                               1e-9 * s.pump.wavelength_um)
    throw ConfigError("grid.center_wavelength_um must equal twice the pump wavelength");

  Section gain(top.has("gain") ? top.at("gain") : json(), "gain");
  const bool has_gamma = gain.has("gamma");
  const bool has_target = gain.has("target_n1");
  if (has_gamma && has_target) throw ConfigError("gain: give either gamma or target_n1, not both");
  if (has_gamma) {
    s.gamma = gain.number("gamma", 0.0);
    if (*s.gamma < 0.0) throw ConfigError("gain.gamma must be >= 0");
  } else {
    s.target_n1 = gain.positive("target_n1", 14.0);
  }
  s.calibration_tolerance = gain.positive("tolerance", s.calibration_tolerance);
  gain.done();

  Section loss(top.has("loss") ? top.at("loss") : json(), "loss");
  const std::string lk = loss.text("kind", "none");
  if (lk == "none") {
    s.loss_kind = LossKind::none;
  } else if (lk == "constant") {
    s.loss_kind = LossKind::constant;
    s.loss_db_per_cm = loss.number("db_per_cm", 0.0);
    if (s.loss_db_per_cm < 0.0) throw ConfigError("loss.db_per_cm must be >= 0");
  } else if (lk == "tabulated") {
    s.loss_kind = LossKind::tabulated;
    if (!loss.has("points")) throw ConfigError("loss.points is required for tabulated loss");
    const json& pts = loss.at("points");
    if (!pts.is_array() || pts.empty()) throw ConfigError("loss.points must be a non-empty list");
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw ConfigError("loss.points entries must be [omega, dB/cm]");
      if (p[1].get<double>() < 0.0) throw ConfigError("loss.points: negative loss");
      s.loss_points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  } else {
    throw ConfigError("loss.kind must be none, constant or tabulated");
  }
  if (s.loss_kind != LossKind::constant) (void)loss.has("db_per_cm");
  if (s.loss_kind != LossKind::tabulated) (void)loss.has("points");
  loss.done();

  Section input(top.has("input") ? top.at("input") : json(), "input");
  const std::string ik = input.text("kind", "vacuum");
  if (ik != "vacuum" && ik != "thermal") throw ConfigError("input.kind must be vacuum or thermal");
  s.input_thermal = ik == "thermal";
  s.input_nbar = read_occupation(input, "nbar");
  input.done();

  Section env(top.has("environment") ? top.at("environment") : json(), "environment");
  const std::string ek = env.text("kind", "vacuum");
  if (ek != "vacuum" && ek != "thermal")
    throw ConfigError("environment.kind must be vacuum or thermal");
  s.env_thermal = ek == "thermal";
  s.env_nbar = read_occupation(env, "nbar");
  env.done();

  Section solver(top.has("solver") ? top.at("solver") : json(), "solver");
  const std::string model = solver.text("model", "lossless");
  if (model == "lossless") s.solver = SolverModel::lossless;
  else if (model == "discrete") s.solver = SolverModel::discrete;
  else if (model == "continuous") s.solver = SolverModel::continuous;
  else throw ConfigError("solver.model must be lossless, discrete or continuous");
  s.steps = solver.integer("steps", s.steps, 1);
  s.segments = solver.integer("segments", s.segments, 1);
  s.steps_per_segment = solver.integer("steps_per_segment", 0, 0);
  solver.done();

  Section analysis(top.has("analysis") ? top.at("analysis") : json(), "analysis");
  // Lossy states have no Schmidt basis, so they default to the three others.
  if (s.solver != SolverModel::lossless)
    s.bases = {BasisKind::mercer_wolf, BasisKind::williamson_euler, BasisKind::msq};
  if (analysis.has("bases")) {
    const json& b = analysis.at("bases");
    if (!b.is_array() || b.empty()) throw ConfigError("analysis.bases must be a non-empty list");
    s.bases.clear();
    std::set<std::string> seen;
    for (const auto& e : b) {
      if (!e.is_string()) throw ConfigError("analysis.bases must hold names");
      if (!seen.insert(e.get<std::string>()).second)
        throw ConfigError("analysis.bases lists a basis twice");
      s.bases.push_back(basis_from_string(e.get<std::string>()));
    }
  }
  s.purity_depth = analysis.integer("purity_depth", s.purity_depth, 0);
  s.mode_shapes = analysis.integer("mode_shapes", s.mode_shapes, 0);
  s.covariance_modes = analysis.integer("covariance_modes", s.covariance_modes, 1);
  s.overlap_modes = analysis.integer("overlap_modes", s.overlap_modes, 1);
  analysis.done();

  Section conv(top.has("convergence") ? top.at("convergence") : json(), "convergence");
  s.convergence_segments = conv.integers("segments", s.convergence_segments);
  s.convergence_steps = conv.integers("steps", s.convergence_steps);
  conv.done();

  Section output(top.has("output") ? top.at("output") : json(), "output");
  s.output_directory = output.text("directory", s.output_directory);
  s.write_correlations = output.flag("correlations", s.write_correlations);
  output.done();

  top.done();

  // Cross-field rules.
  if (s.solver == SolverModel::lossless && s.loss_kind != LossKind::none)
    throw ConfigError("solver.model = lossless cannot carry loss; use discrete or continuous");
  for (BasisKind b : s.bases)
    if (b == BasisKind::schmidt && s.solver != SolverModel::lossless)
      throw ConfigError("the schmidt basis is defined only for solver.model = lossless");
  if (s.input_thermal &&
      std::find(s.bases.begin(), s.bases.end(), BasisKind::schmidt) != s.bases.end())
    throw ConfigError("the schmidt basis describes a pure state; thermal input is mixed");
  for (const json* occ : {&s.input_nbar, &s.env_nbar})
    if (occ->is_array() && static_cast<int>(occ->size()) != s.count)
      throw ConfigError("occupation lists must have grid.count entries");

  s.resolved = scenario_to_json(s);
  s.hash = config_hash(s.resolved);
  return s;
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return scenario_from_json(std::move(doc), overrides);
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["grid"] = {{"count", s.count},
               {"half_width", s.half_width},
               {"center_wavelength_um", 2.0 * s.pump.wavelength_um}};
  auto sell = [](const SellmeierCoefficients& c) { return json::array({c.a, c.b, c.c, c.d}); };
  j["medium"] = {{"length_um", s.length_um},
                 {"theta_over_pi", s.model.theta / kPi},
                 {"sellmeier_ordinary", sell(s.model.ordinary)},
                 {"sellmeier_eta", sell(s.model.eta)}};
  j["pump"] = {{"wavelength_um", s.pump.wavelength_um}, {"fwhm_fs", s.pump.fwhm_fs}};
  j["gain"] = {{"tolerance", s.calibration_tolerance}};
  if (s.gamma) j["gain"]["gamma"] = *s.gamma;
  if (s.target_n1) j["gain"]["target_n1"] = *s.target_n1;
  j["loss"] = {{"kind", loss_name(s.loss_kind)}};
  if (s.loss_kind == LossKind::constant) j["loss"]["db_per_cm"] = s.loss_db_per_cm;
  if (s.loss_kind == LossKind::tabulated) {
    json pts = json::array();
    for (const auto& [w, db] : s.loss_points) pts.push_back({w, db});
    j["loss"]["points"] = pts;
  }
  j["input"] = {{"kind", s.input_thermal ? "thermal" : "vacuum"}, {"nbar", s.input_nbar}};
  j["environment"] = {{"kind", s.env_thermal ? "thermal" : "vacuum"}, {"nbar", s.env_nbar}};
  j["solver"] = {{"model", solver_name(s.solver)},
                 {"steps", s.steps},
                 {"segments", s.segments},
                 {"steps_per_segment", s.steps_per_segment}};
  json bases = json::array();
  for (BasisKind b : s.bases) bases.push_back(to_string(b));
  j["analysis"] = {{"bases", bases},
                   {"purity_depth", s.purity_depth},
                   {"mode_shapes", s.mode_shapes},
                   {"covariance_modes", s.covariance_modes},
                   {"overlap_modes", s.overlap_modes}};
  j["convergence"] = {{"segments", s.convergence_segments}, {"steps", s.convergence_steps}};
  j["output"] = {{"directory", s.output_directory}, {"correlations", s.write_correlations}};
  return j;
}

std::string config_hash(const json& resolved) {
  // FNV-1a over the canonical dump; the output directory does not change
  // the physics and is left out.
  json copy = resolved;
  if (copy.contains("output")) copy["output"].erase("directory");
  const std::string text = copy.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- pipeline

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string prefix = std::string("[") + name + "] ";
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  }
}

RVector occupation(const json& v, int n) {
  if (v.is_number()) return RVector::Constant(n, v.get<double>());
  RVector out(n);
  for (int i = 0; i < n; ++i) out(i) = v[i].get<double>();
  return out;
}

LossProfile make_loss(const Scenario& s, const FrequencyGrid& grid) {
  switch (s.loss_kind) {
    case LossKind::none: return loss_profile_none(grid.count);
    case LossKind::constant: return loss_profile_constant(s.loss_db_per_cm, grid);
    case LossKind::tabulated: return loss_profile_tabulated(s.loss_points, grid);
  }
  return loss_profile_none(grid.count);
}

struct Setup {
  FrequencyGrid grid;
  PropagationTables tables;
  LossProfile loss;
  InputState input;
  EnvironmentSpec env;
};

Setup make_setup(const Scenario& s) {
  return stage("setup", [&] {
    Setup st;
    st.grid = FrequencyGrid::for_pump(s.pump, s.half_width, s.count);
    st.tables = PropagationTables::build(st.grid, s.pump, s.model);
    st.loss = make_loss(s, st.grid);
    st.input = s.input_thermal ? InputState::thermal(occupation(s.input_nbar, s.count))
                               : InputState::vacuum();
    st.env = s.env_thermal ? EnvironmentSpec::thermal(occupation(s.env_nbar, s.count))
                           : EnvironmentSpec::vacuum();
    return st;
  });
}

int segment_steps(const Scenario& s, int segments) {
  return s.steps_per_segment > 0 ? s.steps_per_segment : std::max(1, s.steps / segments);
}

CorrelationPair propagate(const Scenario& s, const Setup& st, double gamma, int segments,
                          int steps, const BogoliubovPair* lossless_pair,
                          std::optional<SchmidtDecomposition>* schmidt) {
  switch (s.solver) {
    case SolverModel::lossless: {
      BogoliubovPair pair;
      if (lossless_pair) {
        pair = *lossless_pair;
      } else {
        BogoliubovOptions opt;
        opt.steps = steps;
        pair = integrate_bogoliubov(gamma, st.tables, 0.0, s.length_um, opt);
      }
      if (schmidt) *schmidt = bloch_messiah(pair);
      if (st.input.kind == InputKind::thermal) {
        PartialBogoliubov partial{{pair.e}, {pair.f}};
        return correlations_from_partial(partial, EnvironmentSpec::vacuum(), st.input);
      }
      return vacuum_correlations(pair);
    }
    case SolverModel::continuous: {
      MasterOptions opt;
      opt.steps = steps;
      return integrate_master(gamma, st.tables, st.loss, st.input, st.env, s.length_um, opt);
    }
    case SolverModel::discrete: {
      const SegmentChain chain = build_chain(gamma, st.tables, st.loss, s.length_um, segments,
                                             segment_steps(s, segments));
      return correlations_from_partial(assemble_partial(chain), st.env, st.input);
    }
  }
  throw ConfigError("unknown solver");
}

}  // namespace

CalibrationResult calibrate_scenario(const Scenario& s) {
  const Setup st = make_setup(s);
  return stage("calibrate", [&] {
    if (!s.target_n1) throw ConfigError("calibration needs gain.target_n1");
    CalibrationOptions opt;
    opt.steps = s.steps;
    opt.tolerance = s.calibration_tolerance;
    return calibrate_gamma(*s.target_n1, st.tables, s.length_um, opt);
  });
}

RunReport run_scenario(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const Setup st = make_setup(s);
  RunReport rep;
  rep.grid = st.grid;

  std::optional<BogoliubovPair> cal_pair;
  if (s.gamma) {
    rep.gamma = *s.gamma;
  } else {
    CalibrationResult cal = stage("calibrate", [&] {
      CalibrationOptions opt;
      opt.steps = s.steps;
      opt.tolerance = s.calibration_tolerance;
      return calibrate_gamma(*s.target_n1, st.tables, s.length_um, opt);
    });
    rep.gamma = cal.gamma;
    rep.calibration = {true, *s.target_n1, cal.n1, cal.evaluations};
    cal_pair = std::move(cal.pair);
  }

  rep.correlations = stage("propagate", [&] {
    return propagate(s, st, rep.gamma, s.segments, s.steps, cal_pair ? &*cal_pair : nullptr,
                     &rep.schmidt);
  });
  rep.spectrum = rep.correlations.c1.diagonal().real();

  stage("bases", [&] {
    const CovarianceMatrix cov = covariance_from_correlations(rep.correlations);
    for (BasisKind kind : s.bases) {
      switch (kind) {
        case BasisKind::schmidt: rep.bases.push_back(rep.schmidt->basis()); break;
        case BasisKind::mercer_wolf: rep.bases.push_back(mercer_wolf(rep.correlations)); break;
        case BasisKind::williamson_euler: rep.bases.push_back(williamson_euler_basis(cov)); break;
        case BasisKind::msq: rep.bases.push_back(msq_basis(cov)); break;
        case BasisKind::custom: throw ConfigError("custom bases cannot be requested");
      }
    }
    return 0;
  });

  stage("report", [&] {
    for (const ModeBasis& b : rep.bases)
      rep.reports.push_back(basis_report(rep.correlations, b, s.purity_depth, s.mode_shapes));
    for (size_t i = 0; i < rep.bases.size(); ++i)
      for (size_t j = i + 1; j < rep.bases.size(); ++j)
        rep.overlaps.push_back({{static_cast<int>(i), static_cast<int>(j)},
                                overlap(rep.bases[i], rep.bases[j])});
    return 0;
  });

  rep.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

RunReport compare_bases(const Scenario& s) {
  if (s.bases.size() < 2) throw ConfigError("compare-bases needs at least two bases");
  return run_scenario(s);
}

ConvergenceTable convergence_study(const Scenario& s) {
  if (s.loss_kind == LossKind::none) throw ConfigError("convergence study needs loss");
  const Setup st = make_setup(s);
  double gamma = 0.0;
  if (s.gamma) {
    gamma = *s.gamma;
  } else {
    gamma = calibrate_scenario(s).gamma;
  }
  auto diff = [](const CorrelationPair& a, const CorrelationPair& b) {
    return std::max(linalg::max_abs(CMatrix(a.c1 - b.c1)), linalg::max_abs(CMatrix(a.c2 - b.c2)));
  };

  ConvergenceTable table;
  Scenario cont = s;
  cont.solver = SolverModel::continuous;
  Scenario disc = s;
  disc.solver = SolverModel::discrete;
  const CorrelationPair reference = stage("convergence", [&] {
    return propagate(cont, st, gamma, 1, s.steps, nullptr, nullptr);
  });
  for (int m : s.convergence_segments) {
    const CorrelationPair c = stage("convergence", [&] {
      return propagate(disc, st, gamma, m, s.steps, nullptr, nullptr);
    });
    table.segments.push_back(m);
    table.segment_error.push_back(diff(c, reference));
  }
  for (int n : s.convergence_steps) {
    const CorrelationPair a =
        stage("convergence", [&] { return propagate(cont, st, gamma, 1, n, nullptr, nullptr); });
    const CorrelationPair b = stage(
        "convergence", [&] { return propagate(cont, st, gamma, 1, 2 * n, nullptr, nullptr); });
    table.steps.push_back(n);
    table.step_change.push_back(diff(a, b));
  }
  return table;
}

// ---------------------------------------------------------------- output

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

class OutputSink {
 public:
  explicit OutputSink(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      throw IoError("cannot create output directory " + dir + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + tmp.string());
      out << content;
      out.flush();
      if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw IoError("cannot rename into " + target.string());
    }
    written_.push_back(target);
  }

  void rollback() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

std::string header(const Scenario& s, const std::string& verb, long seed,
                   const std::string& what) {
  std::ostringstream h;
  h << "# lossypdc " << verb << "\n";
  h << "# config_hash: " << s.hash << "\n";
  h << "# seed: " << seed << "\n";
  h << "# " << what << "\n";
  return h.str();
}

json complex_matrix(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ii.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

std::string json_text(const json& j) { return j.dump(1) + "\n"; }

json basis_summary(const BasisReport& r) {
  int best = 0;
  for (size_t m = 0; m < r.quadratures.size(); ++m)
    if (r.quadratures[m].dp2 < r.quadratures[best].dp2) best = static_cast<int>(m);
  json p = json::array();
  for (double v : r.purities) p.push_back(v);
  return {{"basis", to_string(r.kind)},
          {"K", r.k},
          {"total_photons", r.photons.sum()},
          {"mode1_dp2", r.quadratures.empty() ? 1.0 : r.quadratures[0].dp2},
          {"mode1_dp2_db", r.quadratures.empty() ? 0.0 : r.quadratures[0].dp2_db},
          {"best_mode", best + 1},
          {"best_dp2_db", r.quadratures.empty() ? 0.0 : r.quadratures[best].dp2_db},
          {"purities", p},
          {"full_purity", r.full_purity}};
}

}  // namespace

void write_run_outputs(const Scenario& s, const RunReport& rep, const std::string& verb,
                       const std::string& directory, long seed) {
  OutputSink sink(directory);
  try {
    const int n = rep.grid.count;
    {
      std::ostringstream o;
      o << header(s, verb, seed,
                  "spectrum: photons per frequency bin, monochromatic basis; omega and detuning "
                  "in rad/fs, wavelength in um");
      o << "index,omega,detuning,wavelength_um,photons\n";
      for (int i = 0; i < n; ++i) {
        const double w = rep.grid.omegas(i);
        o << i << "," << num(w) << "," << num(w - rep.grid.center_frequency) << ","
          << num(2.0 * kPi * kSpeedOfLight / w) << "," << num(rep.spectrum(i)) << "\n";
      }
      sink.write("spectrum.csv", o.str());
    }

    {
      std::ostringstream o;
      o << header(s, verb, seed,
                  "per-basis summary: K dimensionless, variances in dB relative to vacuum, "
                  "purities of the first 1..d modes");
      o << "basis,K,total_photons,mode1_dp2_db,best_mode,best_dp2_db";
      for (int k = 1; k <= s.purity_depth; ++k) o << ",purity_first_" << k;
      o << ",full_purity\n";
      for (const BasisReport& r : rep.reports) {
        const json j = basis_summary(r);
        o << to_string(r.kind) << "," << num(r.k) << "," << num(j["total_photons"].get<double>())
          << "," << num(j["mode1_dp2_db"].get<double>()) << "," << j["best_mode"].get<int>()
          << "," << num(j["best_dp2_db"].get<double>());
        for (double p : r.purities) o << "," << num(p);
        o << "," << num(r.full_purity) << "\n";
      }
      sink.write("summary.csv", o.str());
    }

    for (const BasisReport& r : rep.reports) {
      const std::string tag = to_string(r.kind);
      std::ostringstream o;
      o << header(s, verb, seed,
                  "basis " + tag +
                      ": photons per mode, quadrature variances (vacuum = 1) and in dB");
      o << "mode,photons,dq2,dp2,dq2_db,dp2_db,pq_cross\n";
      for (int m = 0; m < n; ++m) {
        const auto& q = r.quadratures[m];
        o << m + 1 << "," << num(r.photons(m)) << "," << num(q.dq2) << "," << num(q.dp2) << ","
          << num(q.dq2_db) << "," << num(q.dp2_db) << "," << num(r.pq_cross(m)) << "\n";
      }
      sink.write("variances_" + tag + ".csv", o.str());

      std::ostringstream ms;
      ms << header(s, verb, seed,
                   "basis " + tag +
                       ": mode shapes, |U_k(omega)| and unwrapped phase in rad anchored at the "
                       "grid centre");
      ms << "index,detuning";
      for (size_t k = 0; k < r.shapes.size(); ++k) ms << ",abs_" << k + 1 << ",phase_" << k + 1;
      ms << "\n";
      for (int i = 0; i < n; ++i) {
        ms << i << "," << num(rep.grid.omegas(i) - rep.grid.center_frequency);
        for (const auto& sh : r.shapes) ms << "," << num(sh.magnitude(i)) << "," << num(sh.phase(i));
        ms << "\n";
      }
      sink.write("modes_" + tag + ".csv", ms.str());

      const int k = std::min(s.covariance_modes, n);
      std::ostringstream cs;
      cs << header(s, verb, seed,
                   "basis " + tag + ": leading covariance block, order (Q_1..Q_" +
                       std::to_string(k) + ", P_1..P_" + std::to_string(k) +
                       "), vacuum = identity");
      std::vector<int> idx;
      for (int m = 0; m < k; ++m) idx.push_back(m);
      const RMatrix block = reduced_covariance(r.covariance, idx).sigma;
      for (Eigen::Index a = 0; a < block.rows(); ++a) {
        for (Eigen::Index b = 0; b < block.cols(); ++b) cs << (b ? "," : "") << num(block(a, b));
        cs << "\n";
      }
      sink.write("covariance_" + tag + ".csv", cs.str());
    }

    for (const auto& [ij, chi] : rep.overlaps) {
      const std::string a = to_string(rep.bases[ij.first].kind);
      const std::string b = to_string(rep.bases[ij.second].kind);
      const int k = std::min(s.overlap_modes, n);
      std::ostringstream o;
      o << header(s, verb, seed,
                  "|chi| = |U_" + a + " U_" + b + "^H|, rows: " + a + " modes, columns: " + b +
                      " modes, leading " + std::to_string(k) + "x" + std::to_string(k) + " block");
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) o << (c ? "," : "") << num(std::abs(chi(r, c)));
        o << "\n";
      }
      sink.write("overlap_" + a + "__" + b + ".csv", o.str());
      json j = {{"config_hash", s.hash},
                {"rows", a},
                {"columns", b},
                {"chi", complex_matrix(chi.topLeftCorner(k, k))}};
      sink.write("overlap_" + a + "__" + b + ".json", json_text(j));
    }

    json report;
    report["config_hash"] = s.hash;
    report["verb"] = verb;
    report["gamma_rad_per_um"] = rep.gamma;
    report["calibration"] = {{"calibrated", rep.calibration.calibrated},
                             {"target_n1", rep.calibration.target},
                             {"achieved_n1", rep.calibration.achieved}};
    report["grid"] = {{"count", n},
                      {"center_rad_per_fs", rep.grid.center_frequency},
                      {"half_width_rad_per_fs", rep.grid.half_width},
                      {"spacing_rad_per_fs", rep.grid.spacing}};
    report["total_photons"] = rep.spectrum.sum();
    json bases = json::array();
    for (const BasisReport& r : rep.reports) bases.push_back(basis_summary(r));
    report["bases"] = bases;
    if (rep.schmidt) {
      json lf = json::array();
      const int k = std::min<int>(10, static_cast<int>(rep.schmidt->lambda_f.size()));
      for (int i = 0; i < k; ++i) lf.push_back(std::pow(rep.schmidt->lambda_f(i), 2));
      report["schmidt_photons_leading"] = lf;
    }
    json ov = json::array();
    for (const auto& [ij, chi] : rep.overlaps) {
      const double dist =
          (chi.cwiseAbs() - RMatrix::Identity(chi.rows(), chi.cols())).norm();
      ov.push_back({{"rows", to_string(rep.bases[ij.first].kind)},
                    {"columns", to_string(rep.bases[ij.second].kind)},
                    {"frobenius_distance_from_identity", dist}});
    }
    report["overlaps"] = ov;
    sink.write("report.json", json_text(report));

    json prov = {{"config_hash", s.hash},
                 {"config", s.resolved},
                 {"seed", seed},
                 {"runtime_s", rep.runtime_s},
                 {"calibration_evaluations", rep.calibration.evaluations}};
    sink.write("provenance.json", json_text(prov));

    if (s.write_correlations) {
      json c = {{"config_hash", s.hash},
                {"basis", "monochromatic"},
                {"c1", complex_matrix(rep.correlations.c1)},
                {"c2", complex_matrix(rep.correlations.c2)}};
      sink.write("correlations.json", json_text(c));
    }
  } catch (...) {
    sink.rollback();
    throw;
  }
}

void write_convergence_outputs(const Scenario& s, const ConvergenceTable& t,
                               const std::string& directory, long seed) {
  OutputSink sink(directory);
  try {
    std::ostringstream o;
    o << header(s, "convergence", seed,
                "discrete (M segments) vs continuous: max-abs difference of <a^dag a> and <a a>; "
                "ratio = previous error / this error");
    o << "segments,max_abs_difference,ratio\n";
    for (size_t i = 0; i < t.segments.size(); ++i) {
      o << t.segments[i] << "," << num(t.segment_error[i]) << ",";
      if (i) o << num(t.segment_error[i - 1] / t.segment_error[i]);
      o << "\n";
    }
    sink.write("convergence_segments.csv", o.str());

    std::ostringstream p;
    p << header(s, "convergence", seed,
                "continuous model: max-abs change between steps and 2*steps; "
                "ratio = previous change / this change");
    p << "steps,max_abs_change,ratio\n";
    for (size_t i = 0; i < t.steps.size(); ++i) {
      p << t.steps[i] << "," << num(t.step_change[i]) << ",";
      if (i) p << num(t.step_change[i - 1] / t.step_change[i]);
      p << "\n";
    }
    sink.write("convergence_steps.csv", p.str());
  } catch (...) {
    sink.rollback();
    throw;
  }
}

void write_calibration_outputs(const Scenario& s, const CalibrationResult& cal,
                               const std::string& directory, long seed) {
  OutputSink sink(directory);
  try {
    const double lf = std::sqrt(cal.n1);
    const double le = std::sqrt(1.0 + cal.n1);
    json j = {{"config_hash", s.hash},
              {"seed", seed},
              {"gamma_rad_per_um", cal.gamma},
              {"target_n1", s.target_n1.value_or(0.0)},
              {"achieved_n1", cal.n1},
              {"evaluations", cal.evaluations},
              {"mode1_dp2_db", to_db((le - lf) * (le - lf))}};
    sink.write("calibration.json", json_text(j));
  } catch (...) {
    sink.rollback();
    throw;
  }
}

}  // namespace lossypdc
