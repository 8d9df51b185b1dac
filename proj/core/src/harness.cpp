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

#include "otafl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "otafl/aircomp.hpp"
#include "otafl/channel.hpp"

namespace otafl {

bool ResultBundle::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.passed; });
}

bool MomentsReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const MomentCheck& c) { return c.passed; });
}

BuiltNetwork build_network(const NetworkConfig& network, const CsiConfig& csi) {
  network.validate();
  csi.validate();
  BuiltNetwork b;
  b.topology = place_network(network);
  b.correlations = build_correlations(b.topology, network);
  fill_error_covariances(b.correlations, csi);
  b.association = associate(b.topology, b.correlations, network.association);
  return b;
}

std::unique_ptr<Task> build_task(const ExperimentSpec& spec) {
  if (spec.task == TaskKind::kQuadratic) {
    QuadraticSpec q = spec.quadratic;
    q.num_clients = spec.network.num_uts;
    return make_quadratic_task(q, spec.fl.batch_size);
  }
  LogisticSpec l = spec.logistic;
  l.num_clients = spec.network.num_uts;
  return make_logistic_task(l);
}

NetworkConfig cellular_counterpart(const ExperimentSpec& spec) {
  NetworkConfig c = spec.network;
  c.layout = Layout::kCellular;
  c.num_aps = 1;
  c.antennas_per_ap = spec.cellular_antennas > 0
                          ? spec.cellular_antennas
                          : spec.network.num_aps * spec.network.antennas_per_ap;
  c.association = TopQ{1};
  return c;
}

namespace {

// Runs body(i) for i in [0, count) on up to hardware_concurrency threads.
// Each index writes only its own output, so the result is order-free.
template <typename F>
void parallel_for(int count, F&& body) {
  const int workers = std::max(
      1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void aggregate(ResultBundle& b) {
  const auto& reps = b.repetitions;
  if (reps.empty()) return;
  const size_t rounds = reps.front().rounds.size();
  const double r = static_cast<double>(reps.size());
  b.mean.assign(rounds, RoundRecord{});
  b.stddev.assign(rounds, RoundRecord{});
  for (size_t t = 0; t < rounds; ++t) {
    auto stat = [&](auto field, double& mean, double& sd) {
      double s = 0.0;
      for (const auto& rep : reps) s += rep.rounds[t].*field;
      mean = s / r;
      double v = 0.0;
      for (const auto& rep : reps) {
        const double dv = rep.rounds[t].*field - mean;
        v += dv * dv;
      }
      sd = reps.size() > 1 ? std::sqrt(v / (r - 1.0)) : 0.0;
    };
    RoundRecord& m = b.mean[t];
    RoundRecord& s = b.stddev[t];
    m.round = s.round = reps.front().rounds[t].round;
    stat(&RoundRecord::loss, m.loss, s.loss);
    stat(&RoundRecord::dist_sq, m.dist_sq, s.dist_sq);
    stat(&RoundRecord::test_acc, m.test_acc, s.test_acc);
    if (!std::isnan(reps.front().rounds[t].power_dbm)) {
      double mw = 0.0;
      for (const auto& rep : reps) mw += dbm_to_mw(rep.rounds[t].power_dbm);
      m.power_dbm = mw_to_dbm(mw / r);
    }
  }
  for (const auto& rep : reps) {
    b.power_mw += rep.max_power_mw / r;
    b.slots_drawn += rep.slots_drawn;
    if (rep.diverged_at > 0) ++b.diverged;
  }
}

void attach_bound(ResultBundle& b, const ExperimentSpec& spec, const Task& task,
                  const BoundConstants& k) {
  const auto optimum = task.optimum();
  if (!optimum || !b.gradient_bound || !b.task_constants.heterogeneity) return;
  BoundInputs in;
  in.mu = b.task_constants.mu;
  in.smoothness = b.task_constants.smoothness;
  in.gradient_bound = *b.gradient_bound;
  in.heterogeneity = *b.task_constants.heterogeneity;
  in.local_steps = spec.fl.local_steps;
  in.dimension = task.dimension();
  in.num_clients = task.num_clients();
  in.noise_std = b.noise_std;
  in.eta = spec.fl.eta;
  in.alpha = spec.alpha;
  in.initial_dist_sq = (task.initial_point() - *optimum).squaredNorm();
  in.validate(spec.fl.rounds);

  const auto e = bound_trajectory(in, k, spec.fl.rounds);
  const auto gap = loss_gap_bound(e, in.smoothness);
  b.bound.clear();
  for (int t = 0; t <= spec.fl.rounds; ++t) {
    BoundRow row;
    row.t = t;
    row.e = e[t];
    row.loss_gap = gap[t];
    if (t < spec.fl.rounds) {
      row.a = a_coeff(in.eta.at(t), in.mu, in.local_steps);
      row.b = b_coeff(in, k, t);
    } else {
      row.a = row.b = std::numeric_limits<double>::quiet_NaN();
    }
    b.bound.push_back(row);
  }
  b.constants = k;
  if (in.local_steps == 1 && in.eta.is_constant() && in.alpha.is_constant()) {
    b.a1 = corollary_a1(in, k);
  }
  for (size_t t = 0; t < b.mean.size() && t < e.size(); ++t) {
    b.mean[t].bound = e[t];
  }
  for (auto& rep : b.repetitions) {
    for (size_t t = 0; t < rep.rounds.size() && t < e.size(); ++t) {
      rep.rounds[t].bound = e[t];
    }
  }
  if (b.mean.empty()) {
    for (int t = 0; t <= spec.fl.rounds; ++t) {
      RoundRecord rec;
      rec.round = t;
      rec.bound = e[t];
      b.mean.push_back(rec);
    }
    return;
  }

  // Mean distance within three standard errors of the bound at every round;
  // the 1e-12 term absorbs summation rounding where every repetition agrees.
  const double reps = static_cast<double>(b.repetitions.size());
  int worst = -1;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < b.mean.size(); ++t) {
    const double allowance =
        3.0 * b.stddev[t].dist_sq / std::sqrt(reps) + 1e-12 * std::abs(e[t]);
    const double excess = b.mean[t].dist_sq - allowance - e[t];
    if (excess > worst_excess) {
      worst_excess = excess;
      worst = static_cast<int>(t);
    }
  }
  Check c;
  c.name = "bound_dominates";
  c.passed = worst_excess <= 0.0;
  char buf[96];
  std::snprintf(buf, sizeof buf, "largest excess %.6g at round %d",
                worst_excess, worst);
  c.detail = buf;
  b.checks.push_back(c);
}

}  // namespace

ResultBundle run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultBundle b;
  b.label = to_string(spec.mode);
  b.seed = spec.seed;
  b.config_hash = config_hash(spec);
  b.noise_std = spec.noise.std_dev();
  b.noise_dbm = spec.noise.power_dbm();

  auto task = build_task(spec);
  b.task_constants = task->constants();
  const BuiltNetwork net = build_network(spec.network, spec.csi);
  if (net.association.num_uts() != task->num_clients()) {
    throw ConfigError("number of UTs must equal number of clients",
                      "network.num_uts");
  }
  const bool want_bound = spec.mode == Mode::kBound || spec.fl.compare_bound;
  const bool ota = spec.fl.aggregation == Aggregation::kOta;

  if (spec.mode == Mode::kBound) {
    if (!b.task_constants.gradient_bound) {
      throw ConfigError(
          "bound mode needs an analytical gradient bound (quadratic task)",
          "task.kind");
    }
    b.gradient_bound = b.task_constants.gradient_bound;
    attach_bound(b, spec, *task,
                 compute_constants(net.correlations, net.association));
    return b;
  }

  b.repetitions.resize(spec.repetitions);
  parallel_for(spec.repetitions, [&](int i) {
    RepetitionResult& rep = b.repetitions[i];
    rep.seed = derive_seed(spec.seed, Purpose::kRepetition, i);
    FlConfig fl = spec.fl;
    fl.seed = rep.seed;
    RunOptions opts;
    opts.collect_term_stats = spec.term_stats && i == 0;
    RunResult rr;
    try {
      if (ota) {
        RayleighChannel channel(net.correlations, net.association, rep.seed);
        NetworkBundle nb;
        nb.link = OtaLink{&channel, &net.association, b.noise_std,
                          derive_seed(rep.seed, Purpose::kNoise)};
        nb.alpha = spec.alpha;
        nb.subcarriers = spec.subcarriers;
        rr = run(fl, *task, &nb, opts);
      } else {
        rr = run(fl, *task, nullptr, opts);
      }
    } catch (const DivergenceError& e) {
      rr = e.partial();
      rep.diverged_at = e.round();
      const double inf = std::numeric_limits<double>::infinity();
      for (int t = e.round() + 1; t <= spec.fl.rounds; ++t) {
        RoundRecord rec;
        rec.round = t;
        rec.loss = rec.dist_sq = inf;
        rec.power_dbm = rr.rounds.back().power_dbm;
        rr.rounds.push_back(rec);
      }
    }
    rep.rounds = std::move(rr.rounds);
    rep.max_power_mw = rr.ledger.max_average();
    rep.max_gradient_sq = rr.max_gradient_sq;
    rep.slots_drawn = rr.slots_drawn;
    rep.term_stats = std::move(rr.term_stats);
  });
  aggregate(b);

  if (b.task_constants.gradient_bound) {
    b.gradient_bound = b.task_constants.gradient_bound;
  } else {
    // No analytical G: 1.5 times the largest stochastic gradient seen.
    double g2 = 0.0;
    for (const auto& rep : b.repetitions) g2 = std::max(g2, rep.max_gradient_sq);
    b.gradient_bound = 1.5 * std::sqrt(g2);
  }
  if (want_bound) {
    attach_bound(b, spec, *task,
                 compute_constants(net.correlations, net.association));
  }
  return b;
}

CellularComparison compare_cellular(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.network.layout != Layout::kCellFree) {
    throw ConfigError("compare_cellular starts from a cell-free layout",
                      "network.layout");
  }
  const int total = spec.network.num_aps * spec.network.antennas_per_ap;
  if (spec.cellular_antennas != 0 && spec.cellular_antennas != total) {
    throw ConfigError("total antennas differ: L*M = " + std::to_string(total) +
                          " vs cellular " +
                          std::to_string(spec.cellular_antennas),
                      "network.cellular_antennas");
  }
  ExperimentSpec free_spec = spec;
  free_spec.mode = Mode::kSimulate;
  ExperimentSpec cell_spec = free_spec;
  cell_spec.network = cellular_counterpart(spec);

  CellularComparison out;
  out.cell_free = run_experiment(free_spec);
  out.cell_free.label = "cell_free";
  out.cellular = run_experiment(cell_spec);
  out.cellular.label = "cellular";
  for (size_t i = 0; i < out.cell_free.repetitions.size(); ++i) {
    out.cell_free_wins.push_back(
        out.cell_free.repetitions[i].rounds.back().loss <
        out.cellular.repetitions[i].rounds.back().loss);
  }
  return out;
}

MomentsReport verify_moments(const ExperimentSpec& spec) {
  const auto& mc = spec.moments;
  const double tol = mc.tolerance;
  MomentsReport report;
  const MomentInstance inst = make_random_instance(mc.instance);
  const ClosedForms cf = closed_form_moments(inst);
  const MeasuredMoments mm = measure_moments(inst, mc.frames);
  const int d = static_cast<int>(cf.signal_entry.size());

  for (int i = 0; i < d; ++i) {
    report.checks.push_back(make_check("signal_deviation[" + std::to_string(i) + "]",
                                       mm.signal_entry[i], cf.signal_entry[i], tol));
  }
  report.checks.push_back(
      make_check("interf1_sum", mm.interf1_sum, cf.interf1_sum, tol));
  report.checks.push_back(
      make_check("interf2_sum", mm.interf2_sum, cf.interf2_sum, tol));
  for (int i = 0; i < d; ++i) {
    report.checks.push_back(make_check("noise[" + std::to_string(i) + "]",
                                       mm.noise_entry[i], cf.noise_entry, tol));
  }
  const BoundConstants k =
      compute_constants(inst.correlations, inst.association);
  if (mc.instance.csi.mode == CsiMode::kPerfect) {
    report.checks.push_back(
        make_check("kappa_tilde", k.kappa_tilde, 0.0, tol));
  }

  Vec target = Vec::Zero(d);
  for (const auto& u : inst.updates) target += u;
  target /= static_cast<double>(inst.updates.size());
  for (int i = 0; i < d; ++i) {
    const double se = std::sqrt(mm.var_delta[i] / static_cast<double>(mm.frames));
    MomentCheck c;
    c.name = "unbiased[" + std::to_string(i) + "] (z)";
    c.measured = mm.mean_delta[i];
    c.expected = target[i];
    c.rel_error = se > 0.0 ? std::abs(c.measured - c.expected) / se
                           : (c.measured == c.expected ? 0.0 : INFINITY);
    c.tolerance = mc.z_limit;
    c.passed = c.rel_error <= c.tolerance;
    report.checks.push_back(c);
  }

  // Gaussian quadratic forms on a 2x2 diagonal and a 4x4 correlated case.
  {
    CMat r = CMat::Zero(2, 2);
    r(0, 0) = 2.0;
    r(1, 1) = 1.0;
    CMat r2 = CMat::Zero(2, 2);
    r2(0, 0) = 1.0;
    r2(1, 1) = 3.0;
    const CMat mask = CMat::Identity(2, 2);
    const auto q = quadratic_form_moments(r, r2, mask, mc.quadratic_samples,
                                          derive_seed(spec.seed, Purpose::kChannel, 2));
    report.checks.push_back(make_check("quadform_cross_2x2", q.cross_measured,
                                       q.cross_expected, tol));
    report.checks.push_back(make_check("quadform_self_2x2", q.self_measured,
                                       q.self_expected, tol));
  }
  {
    auto expcorr = [](double beta, double rho, double phi) {
      CMat r(4, 4);
      for (int j = 0; j < 4; ++j) {
        for (int k2 = 0; k2 < 4; ++k2) {
          r(j, k2) = beta * std::pow(rho, std::abs(j - k2)) *
                     std::polar(1.0, phi * (j - k2));
        }
      }
      return r;
    };
    const CMat r = expcorr(1.5, 0.7, 0.4);
    const CMat r2 = expcorr(0.8, 0.5, -1.1);
    CMat mask = CMat::Zero(4, 4);
    mask(0, 0) = mask(1, 1) = 1.0;
    const auto q = quadratic_form_moments(r, r2, mask, mc.quadratic_samples,
                                          derive_seed(spec.seed, Purpose::kChannel, 4));
    report.checks.push_back(make_check("quadform_cross_4x4", q.cross_measured,
                                       q.cross_expected, tol));
    report.checks.push_back(make_check("quadform_self_4x4", q.self_measured,
                                       q.self_expected, tol));
  }
  return report;
}

ExperimentSpec sweep_point(const ExperimentSpec& spec, double value) {
  ExperimentSpec s = spec;
  s.mode = Mode::kSimulate;
  const auto as_int = [&](const char* path) {
    if (value != std::floor(value) || value < 1.0) {
      throw ConfigError("value must be a positive integer", path);
    }
    return static_cast<int>(value);
  };
  switch (spec.sweep_axis) {
    case SweepAxis::kAlpha:
      s.alpha.initial = value;
      break;
    case SweepAxis::kEta:
      s.fl.eta.initial = value;
      break;
    case SweepAxis::kNumUts:
      s.network.num_uts = as_int("sweep.values");
      s.quadratic.num_clients = s.network.num_uts;
      s.logistic.num_clients = s.network.num_uts;
      break;
    case SweepAxis::kClusterSize:
      if (auto* q = std::get_if<TopQ>(&s.network.association)) {
        q->q = as_int("sweep.values");
      } else {
        std::get<Threshold>(s.network.association).q_max = as_int("sweep.values");
      }
      break;
  }
  s.canonical += "|" + std::string(to_string(spec.sweep_axis)) + "=" +
                 std::to_string(value);
  s.validate();
  return s;
}

std::vector<ResultBundle> sweep(const ExperimentSpec& spec) {
  std::vector<ResultBundle> out;
  for (double v : spec.sweep_values) {
    ResultBundle b = run_experiment(sweep_point(spec, v));
    b.label = std::string(to_string(spec.sweep_axis)) + "=" + std::to_string(v);
    b.sweep_value = v;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace otafl
