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

#include "otafl/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <Eigen/Core>

#include "json.hpp"

namespace otafl {

using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Shortest text that reads back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

void write_record(std::ostream& out, const RoundRecord& r) {
  out << r.round << ',' << num(r.loss) << ',' << num(r.dist_sq) << ','
      << num(r.test_acc) << ',' << num(r.power_dbm) << ',' << num(r.bound)
      << '\n';
}

json metadata(const ExperimentSpec& spec) {
  json m;
  m["seed"] = spec.seed;
  m["config_hash"] = config_hash(spec);
  m["mode"] = to_string(spec.mode);
  m["version"] = kVersion;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  return m;
}

json bundle_json(const ResultBundle& b) {
  json j;
  j["label"] = b.label;
  j["repetitions"] = b.repetitions.size();
  if (!b.mean.empty()) {
    const auto& last = b.mean.back();
    j["terminal"] = {{"round", last.round},
                     {"loss", num_json(last.loss)},
                     {"dist_sq", num_json(last.dist_sq)},
                     {"test_acc", num_json(last.test_acc)},
                     {"bound", num_json(last.bound)}};
  }
  j["power"] = {{"max_average_mw", b.power_mw},
                {"max_average_dbm",
                 num_json(b.power_mw > 0 ? 10.0 * std::log10(b.power_mw)
                                         : -INFINITY)}};
  j["noise"] = {{"sigma_z_dbm", num_json(b.noise_dbm)},
                {"sigma_z", b.noise_std}};
  j["slots_drawn"] = b.slots_drawn;
  j["diverged"] = b.diverged;
  json task;
  task["mu"] = b.task_constants.mu;
  task["smoothness"] = b.task_constants.smoothness;
  if (b.task_constants.heterogeneity) {
    task["heterogeneity"] = *b.task_constants.heterogeneity;
  }
  if (b.gradient_bound) task["gradient_bound"] = *b.gradient_bound;
  double g2 = 0.0;
  for (const auto& r : b.repetitions) g2 = std::max(g2, r.max_gradient_sq);
  if (!b.repetitions.empty()) task["max_observed_gradient"] = std::sqrt(g2);
  j["task"] = task;
  if (b.constants) {
    j["bound_constants"] = {{"gamma", b.constants->gamma},
                            {"gamma_tilde", b.constants->gamma_tilde},
                            {"kappa", b.constants->kappa},
                            {"kappa_tilde", b.constants->kappa_tilde}};
  }
  if (b.a1) j["a1"] = *b.a1;
  if (b.sweep_value) j["sweep_value"] = *b.sweep_value;
  json checks = json::array();
  for (const auto& c : b.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["checks"] = checks;
  j["passed"] = b.passed();
  return j;
}

std::ofstream open_file(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_rounds_csv(std::ostream& out, const std::vector<RoundRecord>& rows) {
  out << "round,loss,dist_sq,test_acc,power_dbm,bound\n";
  for (const auto& r : rows) write_record(out, r);
}

void write_repetitions_csv(std::ostream& out, const ResultBundle& bundle) {
  out << "rep,seed,round,loss,dist_sq,test_acc,power_dbm,bound\n";
  for (size_t i = 0; i < bundle.repetitions.size(); ++i) {
    for (const auto& r : bundle.repetitions[i].rounds) {
      out << i << ',' << bundle.repetitions[i].seed << ',';
      write_record(out, r);
    }
  }
}

void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
  out << "t,A,B,e,loss_gap\n";
  for (const auto& r : rows) {
    out << r.t << ',' << num(r.a) << ',' << num(r.b) << ',' << num(r.e) << ','
        << num(r.loss_gap) << '\n';
  }
}

void write_terms_csv(std::ostream& out, const std::vector<TermStats>& stats) {
  static const char* names[4] = {"signal", "interf1", "interf2", "noise"};
  out << "round,term,mean_re,mean_im,var\n";
  for (const auto& s : stats) {
    for (int p = 0; p < 4; ++p) {
      out << s.round << ',' << names[p] << ',' << num(s.mean[p].real()) << ','
          << num(s.mean[p].imag()) << ',' << num(s.var[p]) << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<ResultBundle>& points) {
  out << "value,round,loss,dist_sq,test_acc,power_dbm,bound\n";
  for (const auto& p : points) {
    for (const auto& r : p.mean) {
      out << num(p.sweep_value.value_or(NAN)) << ',';
      write_record(out, r);
    }
  }
}

std::string summary_json(const ExperimentSpec& spec, const ResultBundle& bundle) {
  json j = metadata(spec);
  j["result"] = bundle_json(bundle);
  j["passed"] = bundle.passed();
  return j.dump(2) + "\n";
}

std::string comparison_json(const ExperimentSpec& spec,
                            const CellularComparison& cmp) {
  json j = metadata(spec);
  j["cell_free"] = bundle_json(cmp.cell_free);
  j["cellular"] = bundle_json(cmp.cellular);
  int wins = 0;
  for (bool w : cmp.cell_free_wins) wins += w ? 1 : 0;
  j["cell_free_wins"] = wins;
  j["repetitions"] = cmp.cell_free_wins.size();
  j["passed"] = cmp.cell_free.passed() && cmp.cellular.passed();
  return j.dump(2) + "\n";
}

std::string moments_json(const ExperimentSpec& spec,
                         const MomentsReport& report) {
  json j = metadata(spec);
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", num_json(c.measured)},
                      {"expected", num_json(c.expected)},
                      {"error", num_json(c.rel_error)},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed}});
  }
  j["checks"] = checks;
  j["frames"] = spec.moments.frames;
  j["passed"] = report.passed();
  return j.dump(2) + "\n";
}

std::string sweep_json(const ExperimentSpec& spec,
                       const std::vector<ResultBundle>& points) {
  json j = metadata(spec);
  j["axis"] = to_string(spec.sweep_axis);
  json arr = json::array();
  bool ok = true;
  for (const auto& p : points) {
    arr.push_back(bundle_json(p));
    ok = ok && p.passed();
  }
  j["points"] = arr;
  j["passed"] = ok;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_file(path);
  out << text;
}

void write_bundle(const std::string& dir, const ExperimentSpec& spec,
                  const ResultBundle& bundle) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  {
    auto out = open_file((base / "rounds.csv").string());
    write_rounds_csv(out, bundle.mean);
  }
  if (!bundle.repetitions.empty()) {
    auto out = open_file((base / "rounds_std.csv").string());
    write_rounds_csv(out, bundle.stddev);
    auto reps = open_file((base / "repetitions.csv").string());
    write_repetitions_csv(reps, bundle);
  }
  if (!bundle.bound.empty()) {
    auto out = open_file((base / "bound.csv").string());
    write_bound_csv(out, bundle.bound);
  }
  if (!bundle.repetitions.empty() && !bundle.repetitions.front().term_stats.empty()) {
    auto out = open_file((base / "terms.csv").string());
    write_terms_csv(out, bundle.repetitions.front().term_stats);
  }
  write_text((base / "summary.json").string(), summary_json(spec, bundle));
}

}  // namespace otafl
