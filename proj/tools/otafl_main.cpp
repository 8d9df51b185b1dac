// Copyright 2026 The otafl Authors
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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otafl/config.hpp"
#include "otafl/harness.hpp"
#include "otafl/output.hpp"

namespace {

namespace fs = std::filesystem;
using namespace otafl;

enum Exit { kOk = 0, kFailed = 1, kBadConfig = 2, kError = 3 };

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
};

ExperimentSpec load(const Options& o, const char* mode) {
  std::vector<std::string> overrides;
  overrides.push_back(std::string("mode=\"") + mode + "\"");
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  if (o.reps) overrides.push_back("repetitions=" + std::to_string(*o.reps));
  overrides.insert(overrides.end(), o.sets.begin(), o.sets.end());
  ExperimentSpec spec = o.config.empty() ? parse_spec("", overrides)
                                         : load_spec(o.config, overrides);
  if (!o.out.empty()) spec.output_dir = o.out;
  return spec;
}

void dump_topology(const ExperimentSpec& spec, const NetworkConfig& network,
                   const fs::path& dir) {
  if (!spec.dump_topology) return;
  const BuiltNetwork net = build_network(network, spec.csi);
  fs::create_directories(dir);
  std::ofstream out(dir / "topology.txt");
  write_topology(out, net.topology, net.association);
}

void print_bundle(const ResultBundle& b) {
  std::printf("%s: %zu repetition(s)", b.label.c_str(), b.repetitions.size());
  if (!b.mean.empty()) {
    const auto& last = b.mean.back();
    std::printf(", terminal loss %.6g", last.loss);
    if (!std::isnan(last.dist_sq)) std::printf(", dist_sq %.6g", last.dist_sq);
    if (!std::isnan(last.bound)) std::printf(", bound %.6g", last.bound);
  }
  if (b.a1) std::printf(", A1 %.6g", *b.a1);
  std::printf("\n");
  for (const auto& c : b.checks) {
    std::printf("  %s %s (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
  }
}

int cmd_simulate(const Options& o, const char* mode) {
  const ExperimentSpec spec = load(o, mode);
  const ResultBundle b = run_experiment(spec);
  write_bundle(spec.output_dir, spec, b);
  dump_topology(spec, spec.network, spec.output_dir);
  print_bundle(b);
  return b.passed() ? kOk : kFailed;
}

int cmd_compare(const Options& o) {
  const ExperimentSpec spec = load(o, "compare_cellular");
  const CellularComparison cmp = compare_cellular(spec);
  const fs::path dir(spec.output_dir);
  write_bundle((dir / "cell_free").string(), spec, cmp.cell_free);
  write_bundle((dir / "cellular").string(), spec, cmp.cellular);
  write_text((dir / "summary.json").string(), comparison_json(spec, cmp));
  dump_topology(spec, spec.network, dir / "cell_free");
  dump_topology(spec, cellular_counterpart(spec), dir / "cellular");
  print_bundle(cmp.cell_free);
  print_bundle(cmp.cellular);
  int wins = 0;
  for (bool w : cmp.cell_free_wins) wins += w ? 1 : 0;
  std::printf("cell-free terminal loss lower in %d of %zu repetition(s)\n",
              wins, cmp.cell_free_wins.size());
  return cmp.cell_free.passed() && cmp.cellular.passed() ? kOk : kFailed;
}

int cmd_moments(const Options& o) {
  const ExperimentSpec spec = load(o, "verify_moments");
  const MomentsReport report = verify_moments(spec);
  fs::create_directories(spec.output_dir);
  write_text((fs::path(spec.output_dir) / "summary.json").string(),
             moments_json(spec, report));
  std::printf("%-28s %14s %14s %10s %8s\n", "check", "measured", "expected",
              "error", "tol");
  for (const auto& c : report.checks) {
    std::printf("%-28s %14.6g %14.6g %10.3g %8.3g %s\n", c.name.c_str(),
                c.measured, c.expected, c.rel_error, c.tolerance,
                c.passed ? "PASS" : "FAIL");
  }
  return report.passed() ? kOk : kFailed;
}

int cmd_sweep(const Options& o) {
  const ExperimentSpec spec = load(o, "sweep");
  const auto points = sweep(spec);
  const fs::path dir(spec.output_dir);
  fs::create_directories(dir);
  bool ok = true;
  for (const auto& p : points) {
    write_bundle((dir / p.label).string(), sweep_point(spec, *p.sweep_value), p);
    print_bundle(p);
    ok = ok && p.passed();
  }
  {
    std::ofstream out(dir / "sweep.csv");
    write_sweep_csv(out, points);
  }
  write_text((dir / "summary.json").string(), sweep_json(spec, points));
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air federated learning on cell-free massive MIMO"};
  app.require_subcommand(1);
  Options o;
  auto add = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "Override a key, e.g. fl.rounds=50")
        ->allow_extra_args(false);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--reps", o.reps, "Repetitions")
        ->check(CLI::PositiveNumber);
    return sub;
  };
  auto* simulate = add(app.add_subcommand("simulate", "Run FL training"));
  auto* bound = add(app.add_subcommand("bound", "Analytical bound only"));
  auto* compare =
      add(app.add_subcommand("compare-cellular", "Cell-free vs cellular"));
  auto* moments =
      add(app.add_subcommand("verify-moments", "Monte Carlo moment checks"));
  auto* sweep_cmd = add(app.add_subcommand("sweep", "Parameter sweep"));

  CLI11_PARSE(app, argc, argv);
  try {
    if (simulate->parsed()) return cmd_simulate(o, "simulate");
    if (bound->parsed()) return cmd_simulate(o, "bound");
    if (compare->parsed()) return cmd_compare(o);
    if (moments->parsed()) return cmd_moments(o);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}
