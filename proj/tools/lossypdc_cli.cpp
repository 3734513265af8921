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


// Command-line front end.
//
//   lossypdc simulate      --config run.json [--out DIR] [--override k=v]... [--seed N]
//   lossypdc compare-bases ...
//   lossypdc convergence   ...
//   lossypdc calibrate     ...
//
// Exit codes: 0 ok, 2 configuration, 3 numerical tolerance, 4 I/O.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lossypdc/errors.hpp"
#include "lossypdc/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  long seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->required();
  cmd->add_option("--out", c.out, "output directory (default: output.directory)");
  cmd->add_option("--override", c.overrides, "dotted.key=value, applied before validation")
      ->take_all();
  cmd->add_option("--seed", c.seed, "recorded in provenance; the solvers are deterministic");
}

void print_report(const lossypdc::RunReport& rep) {
  std::printf("gamma = %.10g rad/um", rep.gamma);
  if (rep.calibration.calibrated)
    std::printf("  (N1 = %.6g, target %.6g)", rep.calibration.achieved, rep.calibration.target);
  std::printf("\ntotal photons = %.6g\n", rep.spectrum.sum());
  for (const auto& r : rep.reports) {
    std::printf("%-17s K = %-9.5g dP1^2 = %+.3f dB  N1 = %.5g\n",
                lossypdc::to_string(r.kind).c_str(), r.k,
                r.quadratures.empty() ? 0.0 : r.quadratures[0].dp2_db,
                r.photons.size() ? r.photons(0) : 0.0);
  }
  std::printf("runtime %.1f s\n", rep.runtime_s);
}

int run(const std::string& verb, const Common& c) {
  const lossypdc::Scenario s = lossypdc::load_scenario(c.config, c.overrides);
  const std::string dir = c.out.empty() ? s.output_directory : c.out;
  if (verb == "simulate" || verb == "compare-bases") {
    const auto rep = verb == "simulate" ? lossypdc::run_scenario(s) : lossypdc::compare_bases(s);
    lossypdc::write_run_outputs(s, rep, verb, dir, c.seed);
    print_report(rep);
  } else if (verb == "convergence") {
    const auto table = lossypdc::convergence_study(s);
    lossypdc::write_convergence_outputs(s, table, dir, c.seed);
    for (size_t i = 0; i < table.segments.size(); ++i)
      std::printf("M = %-4d  max|C_M - C_cont| = %.3e\n", table.segments[i],
                  table.segment_error[i]);
    for (size_t i = 0; i < table.steps.size(); ++i)
      std::printf("steps = %-5d  max|C(n) - C(2n)| = %.3e\n", table.steps[i],
                  table.step_change[i]);
  } else {
    const auto cal = lossypdc::calibrate_scenario(s);
    lossypdc::write_calibration_outputs(s, cal, dir, c.seed);
    std::printf("gamma = %.12g rad/um  N1 = %.8g  (%d evaluations)\n", cal.gamma, cal.n1,
                cal.evaluations);
  }
  std::printf("config_hash %s, outputs in %s\n", s.hash.c_str(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimode squeezed light from lossy PDC waveguides"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"simulate", "propagate one scenario and analyse the requested bases"},
      {"compare-bases", "as simulate, with at least two bases and their overlaps"},
      {"convergence", "discrete-vs-continuous and step-halving tables"},
      {"calibrate", "find the gain giving the target leading-mode photon number"}};
  Common common;
  std::vector<CLI::App*> cmds;
  for (const auto& [name, help] : verbs) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::string verb;
  for (auto* cmd : cmds)
    if (cmd->parsed()) verb = cmd->get_name();

  try {
    return run(verb, common);
  } catch (const lossypdc::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const lossypdc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lossypdc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
