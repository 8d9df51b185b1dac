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

#include "otafl/fl_engine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace otafl {

void FlConfig::validate(int num_clients, double mu) const {
  if (rounds < 0) throw ConfigError("must be >= 0", "fl.rounds");
  if (local_steps < 1) throw ConfigError("must be >= 1", "fl.local_steps");
  if (!(eta.initial >= 0.0) || eta.decay < 0.0) {
    throw ConfigError("need initial >= 0 and decay >= 0", "fl.eta");
  }
  if (participation == Participation::kPartial &&
      (selected < 1 || selected > num_clients)) {
    throw ConfigError("r must satisfy 1 <= r <= N", "fl.participation.r");
  }
  if (compare_bound) {
    const double cap = std::min(1.0, 1.0 / (mu * local_steps));
    for (int t = 0; t < rounds; ++t) {
      const double e = eta.at(t);
      if (!(e > 0.0) || e > cap) {
        throw ConfigError("eta_t = " + std::to_string(e) +
                              " violates 0 < eta_t <= min(1, 1/(mu tau)) = " +
                              std::to_string(cap),
                          "fl.eta");
      }
    }
  }
}

DivergenceError::DivergenceError(int round, RunResult partial)
    : std::runtime_error("training diverged at round " +
                         std::to_string(round) + ": ||theta|| > 1e12"),
      round_(round),
      partial_(std::move(partial)) {}

Vec local_sgd(const Vec& theta, const Task& task, int client, double eta,
              int local_steps, int batch_size, Rng& rng,
              double* max_gradient_sq) {
  Vec x = theta;
  for (int i = 0; i < local_steps; ++i) {
    const Vec g = task.stochastic_gradient(client, x, batch_size, rng);
    if (max_gradient_sq != nullptr) {
      *max_gradient_sq = std::max(*max_gradient_sq, g.squaredNorm());
    }
    x -= eta * g;
  }
  return x - theta;
}

std::vector<int> schedule(SchedulingPolicy policy,
                          std::span<const Vec> candidate_updates, int r,
                          Rng& rng) {
  const int n = static_cast<int>(candidate_updates.size());
  if (r < 0 || r > n) throw std::invalid_argument("r must satisfy r <= N");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (policy == SchedulingPolicy::kRandom) {
    // Partial Fisher-Yates: the first r positions form a uniform sample.
    for (int i = 0; i < r; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
    }
  } else {
    std::vector<double> norms(n);
    for (int i = 0; i < n; ++i) norms[i] = candidate_updates[i].norm();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return norms[a] > norms[b]; });
  }
  order.resize(r);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

RoundRecord record_for(int t, const Task& task, const Vec& theta,
                       const std::optional<Vec>& optimum) {
  RoundRecord rec;
  rec.round = t;
  rec.loss = task.loss(theta);
  if (optimum) rec.dist_sq = (theta - *optimum).squaredNorm();
  if (auto acc = task.test_metric(theta)) rec.test_acc = *acc;
  return rec;
}

TermStats summarize_terms(int round, const std::vector<TermSet>& terms) {
  TermStats st;
  st.round = round;
  const double count = static_cast<double>(terms.size());
  auto pick = [](const TermSet& s, int p) {
    switch (p) {
      case 0: return s.signal;
      case 1: return s.interf1;
      case 2: return s.interf2;
      default: return s.noise;
    }
  };
  for (int p = 0; p < 4; ++p) {
    cd mean{};
    for (const auto& s : terms) mean += pick(s, p);
    mean /= count;
    double var = 0.0;
    for (const auto& s : terms) var += std::norm(pick(s, p) - mean);
    st.mean[p] = mean;
    st.var[p] = var / count;
  }
  return st;
}

}  // namespace

RunResult run(const FlConfig& config, const Task& task,
              const NetworkBundle* network, RunOptions options) {
  const int n_clients = task.num_clients();
  config.validate(n_clients, task.constants().mu);
  const bool ota = config.aggregation == Aggregation::kOta;
  if (ota) {
    if (network == nullptr || network->link.channel == nullptr ||
        network->link.association == nullptr) {
      throw ConfigError("OTA aggregation needs a network", "fl.aggregation");
    }
    if (network->link.association->num_uts() != n_clients) {
      throw ConfigError("number of UTs must equal number of clients",
                        "network.num_uts");
    }
    if (network->subcarriers < 1) {
      throw ConfigError("must be >= 1", "channel.subcarriers");
    }
  }

  RunResult result;
  result.ledger = PowerLedger(n_clients);
  const auto optimum = task.optimum();
  Vec theta = task.initial_point();
  result.rounds.push_back(record_for(0, task, theta, optimum));

  const int d = task.dimension();
  std::vector<Vec> updates(n_clients);
  std::vector<int> everyone(n_clients);
  std::iota(everyone.begin(), everyone.end(), 0);
  const std::uint64_t slots_per_round =
      ota ? static_cast<std::uint64_t>(transmissions_for(d, network->subcarriers)) *
                network->subcarriers
          : 0;

  for (int t = 0; t < config.rounds; ++t) {
    const double eta = config.eta.at(t);
    for (int n = 0; n < n_clients; ++n) {
      Rng rng = Rng::stream(config.seed, Purpose::kLocalSgd, t, n);
      updates[n] = local_sgd(theta, task, n, eta, config.local_steps,
                             config.batch_size, rng, &result.max_gradient_sq);
    }

    std::vector<int> active = everyone;
    if (config.participation == Participation::kPartial) {
      Rng rng = Rng::stream(config.seed, Purpose::kSchedule, t);
      active = schedule(config.policy, updates, config.selected, rng);
    }

    Vec delta_hat;
    double power_dbm = RoundRecord::kMissing;
    if (!ota) {
      delta_hat = Vec::Zero(d);
      for (int n : active) delta_hat += updates[n];
      delta_hat /= static_cast<double>(active.size());
    } else {
      // Unscheduled clients stay silent.
      std::vector<Vec> sent(n_clients);
      for (int n = 0; n < n_clients; ++n) sent[n] = Vec::Zero(d);
      for (int n : active) sent[n] = updates[n];
      const SymbolFrame frame = make_frame(sent, network->subcarriers);
      const double alpha = network->alpha.at(t);
      AggregateResult agg = transmit_and_combine(
          frame, alpha, network->link, static_cast<std::uint64_t>(t) * slots_per_round,
          active);
      result.slots_drawn += slots_per_round;
      result.ledger.account(frame, alpha);
      power_dbm = result.ledger.max_average_dbm();
      if (options.collect_term_stats) {
        result.term_stats.push_back(summarize_terms(t + 1, agg.terms));
      }
      delta_hat = std::move(agg.delta_hat);
    }

    theta += delta_hat;
    const bool diverged = !(theta.norm() <= 1e12);
    RoundRecord rec = record_for(t + 1, task, theta, optimum);
    rec.power_dbm = power_dbm;
    result.rounds.push_back(rec);
    if (diverged) throw DivergenceError(t + 1, std::move(result));
  }
  return result;
}

}  // namespace otafl
