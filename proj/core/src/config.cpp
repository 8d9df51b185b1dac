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

#include "otafl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "otafl/aircomp.hpp"

namespace otafl {

using json = nlohmann::json;

double NoiseConfig::power_dbm() const {
  if (sigma_z) {
    return *sigma_z == 0.0 ? -std::numeric_limits<double>::infinity()
                           : mw_to_dbm(*sigma_z * *sigma_z);
  }
  if (sigma_z_dbm) return *sigma_z_dbm;
  return thermal_noise_dbm(bandwidth_hz, noise_figure_db);
}

double NoiseConfig::std_dev() const {
  if (sigma_z) return *sigma_z;
  return std::sqrt(dbm_to_mw(power_dbm()));
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported.
class Node {
 public:
  Node(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) {
      throw ConfigError("expected an object", path_);
    }
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const {
    return j_ != nullptr && j_->contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    used_.insert(key);
    try {
      out = (*j_)[key].get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value (") + e.what() + ")", at(key));
    }
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    used_.insert(key);
    if ((*j_)[key].is_null()) {
      out.reset();
      return;
    }
    T v{};
    try {
      v = (*j_)[key].get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value (") + e.what() + ")", at(key));
    }
    out = v;
  }

  template <typename E>
  void get_enum(const std::string& key, E& out,
                const std::map<std::string, E>& names) {
    std::string s;
    if (!has(key)) return;
    get(key, s);
    auto it = names.find(s);
    if (it == names.end()) {
      std::string allowed;
      for (const auto& [name, value] : names) {
        allowed += (allowed.empty() ? "" : ", ") + name;
      }
      throw ConfigError("unknown value '" + s + "' (allowed: " + allowed + ")",
                        at(key));
    }
    out = it->second;
  }

  Node child(const std::string& key) {
    if (!has(key)) return Node(nullptr, at(key));
    used_.insert(key);
    return Node(&(*j_)[key], at(key));
  }

  void finish() const {
    if (j_ == nullptr) return;
    for (const auto& item : j_->items()) {
      if (!used_.count(item.key())) {
        throw ConfigError("unknown key", at(item.key()));
      }
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_schedule(Node node, Schedule& s) {
  node.get("initial", s.initial);
  node.get("decay", s.decay);
  node.finish();
}

void read_network(Node node, NetworkConfig& net, int& cellular_antennas) {
  node.get_enum("layout", net.layout,
                {{"cell_free", Layout::kCellFree},
                 {"cellular", Layout::kCellular}});
  node.get("num_uts", net.num_uts);
  node.get("num_aps", net.num_aps);
  node.get("antennas_per_ap", net.antennas_per_ap);
  node.get("area_side", net.area_side);
  node.get("pathloss_exponent", net.pathloss_exponent);
  node.get("shadowing_std_db", net.shadowing_std_db);
  node.get("pathloss_offset_db", net.pathloss_offset_db);
  node.get("min_distance", net.min_distance);
  node.get("cellular_antennas", cellular_antennas);
  {
    Node c = node.child("correlation");
    c.get_enum("kind", net.correlation.kind,
               {{"identity", CorrelationKind::kIdentity},
                {"exponential", CorrelationKind::kExponential}});
    c.get("rho", net.correlation.rho);
    c.finish();
  }
  {
    Node a = node.child("association");
    std::string policy = "top_q";
    a.get("policy", policy);
    if (policy == "top_q") {
      TopQ t;
      a.get("q", t.q);
      net.association = t;
    } else if (policy == "threshold") {
      Threshold t;
      a.get("delta_db", t.delta_db);
      a.get("q_max", t.q_max);
      net.association = t;
    } else {
      throw ConfigError("unknown policy '" + policy +
                            "' (allowed: top_q, threshold)",
                        a.at("policy"));
    }
    a.finish();
  }
  node.finish();
}

void read_channel(Node node, ExperimentSpec& spec) {
  node.get("subcarriers", spec.subcarriers);
  {
    Node csi = node.child("csi");
    csi.get_enum("mode", spec.csi.mode,
                 {{"perfect", CsiMode::kPerfect},
                  {"mmse", CsiMode::kMmse},
                  {"explicit_cov", CsiMode::kExplicitCov}});
    csi.get("pilot_snr", spec.csi.pilot_snr);
    csi.get("scale", spec.csi.scale);
    csi.finish();
  }
  {
    Node noise = node.child("noise");
    noise.get("bandwidth_hz", spec.noise.bandwidth_hz);
    noise.get("noise_figure_db", spec.noise.noise_figure_db);
    noise.get("sigma_z_dbm", spec.noise.sigma_z_dbm);
    noise.get("sigma_z", spec.noise.sigma_z);
    noise.finish();
  }
  read_schedule(node.child("alpha"), spec.alpha);
  node.finish();
}

void read_task(Node node, ExperimentSpec& spec) {
  node.get_enum("kind", spec.task,
                {{"quadratic", TaskKind::kQuadratic},
                 {"logistic", TaskKind::kLogistic}});
  {
    Node q = node.child("quadratic");
    auto& s = spec.quadratic;
    q.get("dimension", s.dimension);
    q.get("mu", s.mu);
    q.get("smoothness", s.smoothness);
    q.get("heterogeneity", s.heterogeneity);
    q.get("sample_noise", s.sample_noise);
    q.get("samples_per_client", s.samples_per_client);
    q.get("initial_distance", s.initial_distance);
    q.get("region_factor", s.region_factor);
    q.finish();
  }
  {
    Node l = node.child("logistic");
    auto& s = spec.logistic;
    l.get("features", s.features);
    l.get("classes", s.classes);
    l.get("train_samples", s.train_samples);
    l.get("test_samples", s.test_samples);
    l.get("separation", s.separation);
    l.get("lambda", s.lambda);
    l.get_enum("split", s.split,
               {{"iid", SplitMode::kIid}, {"noniid", SplitMode::kNonIid}});
    l.get("dataset_path", s.dataset_path);
    l.finish();
  }
  node.finish();
}

void read_fl(Node node, FlConfig& fl) {
  node.get("rounds", fl.rounds);
  node.get("local_steps", fl.local_steps);
  node.get("batch_size", fl.batch_size);
  node.get("compare_bound", fl.compare_bound);
  node.get_enum("aggregation", fl.aggregation,
                {{"ideal", Aggregation::kIdeal}, {"ota", Aggregation::kOta}});
  read_schedule(node.child("eta"), fl.eta);
  {
    Node p = node.child("participation");
    p.get_enum("mode", fl.participation,
               {{"full", Participation::kFull},
                {"partial", Participation::kPartial}});
    p.get("r", fl.selected);
    p.get_enum("policy", fl.policy,
               {{"rs", SchedulingPolicy::kRandom},
                {"us", SchedulingPolicy::kSignificance}});
    p.finish();
  }
  node.finish();
}

void read_moments(Node node, MomentsConfig& m) {
  auto& in = m.instance;
  node.get("num_uts", in.num_uts);
  node.get("num_aps", in.num_aps);
  node.get("antennas", in.antennas);
  node.get("cluster_size", in.cluster_size);
  node.get("dimension", in.dimension);
  node.get("alpha", in.alpha);
  node.get("noise_std", in.noise_std);
  node.get("frames", m.frames);
  node.get("quadratic_samples", m.quadratic_samples);
  node.get("tolerance", m.tolerance);
  node.get("z_limit", m.z_limit);
  {
    Node csi = node.child("csi");
    csi.get_enum("mode", in.csi.mode,
                 {{"perfect", CsiMode::kPerfect},
                  {"mmse", CsiMode::kMmse},
                  {"explicit_cov", CsiMode::kExplicitCov}});
    csi.get("pilot_snr", in.csi.pilot_snr);
    csi.get("scale", in.csi.scale);
    csi.finish();
  }
  node.finish();
}

void read_sweep(Node node, ExperimentSpec& spec) {
  node.get_enum("axis", spec.sweep_axis,
                {{"alpha", SweepAxis::kAlpha},
                 {"N", SweepAxis::kNumUts},
                 {"eta", SweepAxis::kEta},
                 {"cluster_size", SweepAxis::kClusterSize}});
  node.get("values", spec.sweep_values);
  node.finish();
}

// Parses a --set value as JSON, falling back to a bare string.
json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key.path=value: '" +
                          assignment + "'",
                      "--set");
  }
  const std::string key = assignment.substr(0, eq);
  json* node = &root;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("empty path component", key);
    parts.push_back(part);
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("not an object", key);
    node = &next;
  }
  (*node)[parts.back()] = parse_value(assignment.substr(eq + 1));
}

}  // namespace

void ExperimentSpec::validate() const {
  if (repetitions < 1) throw ConfigError("must be >= 1", "repetitions");
  network.validate();
  csi.validate();
  if (subcarriers < 1) throw ConfigError("must be >= 1", "channel.subcarriers");
  if (noise.sigma_z && *noise.sigma_z < 0.0) {
    throw ConfigError("must be >= 0", "channel.noise.sigma_z");
  }
  if (!(noise.bandwidth_hz > 0.0)) {
    throw ConfigError("must be > 0", "channel.noise.bandwidth_hz");
  }
  if (!(alpha.initial > 0.0) || alpha.decay < 0.0) {
    throw ConfigError("need initial > 0 and decay >= 0", "channel.alpha");
  }
  if (cellular_antennas < 0) {
    throw ConfigError("must be >= 0", "network.cellular_antennas");
  }
  if (mode == Mode::kCompareCellular) {
    if (network.layout != Layout::kCellFree) {
      throw ConfigError("compare_cellular starts from a cell-free layout",
                        "network.layout");
    }
    const int total = network.num_aps * network.antennas_per_ap;
    if (cellular_antennas != 0 && cellular_antennas != total) {
      throw ConfigError("total antennas differ: L*M = " +
                            std::to_string(total) + " vs cellular " +
                            std::to_string(cellular_antennas),
                        "network.cellular_antennas");
    }
  }
  if (mode == Mode::kSweep && sweep_values.empty()) {
    throw ConfigError("needs at least one value", "sweep.values");
  }
  if (moments.frames < 2) throw ConfigError("must be >= 2", "moments.frames");
  if (!(moments.tolerance > 0.0)) {
    throw ConfigError("must be > 0", "moments.tolerance");
  }
  if (fl.participation == Participation::kPartial &&
      (fl.selected < 1 || fl.selected > network.num_uts)) {
    throw ConfigError("r must satisfy 1 <= r <= N", "fl.participation.r");
  }
}

ExperimentSpec parse_spec(const std::string& text,
                          const std::vector<std::string>& overrides) {
  json root = json::object();
  if (!text.empty()) {
    try {
      root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what(), "config");
    }
  }
  if (!root.is_object()) throw ConfigError("expected an object", "config");
  for (const auto& o : overrides) apply_override(root, o);

  ExperimentSpec spec;
  Node top(&root, "");
  top.get_enum("mode", spec.mode,
               {{"simulate", Mode::kSimulate},
                {"bound", Mode::kBound},
                {"compare_cellular", Mode::kCompareCellular},
                {"verify_moments", Mode::kVerifyMoments},
                {"sweep", Mode::kSweep}});
  top.get("seed", spec.seed);
  top.get("repetitions", spec.repetitions);
  top.get("output", spec.output_dir);
  top.get("term_stats", spec.term_stats);
  top.get("dump_topology", spec.dump_topology);
  read_network(top.child("network"), spec.network, spec.cellular_antennas);
  read_channel(top.child("channel"), spec);
  read_task(top.child("task"), spec);
  read_fl(top.child("fl"), spec.fl);
  read_moments(top.child("moments"), spec.moments);
  read_sweep(top.child("sweep"), spec);
  top.finish();

  // One master seed feeds every substream.
  spec.network.seed = spec.seed;
  spec.quadratic.seed = spec.seed;
  spec.logistic.seed = spec.seed;
  spec.fl.seed = spec.seed;
  spec.moments.instance.seed = spec.seed;
  spec.quadratic.num_clients = spec.network.num_uts;
  spec.logistic.num_clients = spec.network.num_uts;

  spec.canonical = root.dump();
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path,
                         const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'", "--config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), overrides);
}

std::string config_hash(const ExperimentSpec& spec) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : spec.canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kSimulate: return "simulate";
    case Mode::kBound: return "bound";
    case Mode::kCompareCellular: return "compare_cellular";
    case Mode::kVerifyMoments: return "verify_moments";
    case Mode::kSweep: return "sweep";
  }
  return "?";
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kAlpha: return "alpha";
    case SweepAxis::kNumUts: return "N";
    case SweepAxis::kEta: return "eta";
    case SweepAxis::kClusterSize: return "cluster_size";
  }
  return "?";
}

}  // namespace otafl
