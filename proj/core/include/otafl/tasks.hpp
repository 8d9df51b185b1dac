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

#ifndef OTAFL_TASKS_HPP_
#define OTAFL_TASKS_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otafl/random.hpp"
#include "otafl/types.hpp"

namespace otafl {

// Curvature and gradient constants of a task. `gradient_bound` (G) and
// `heterogeneity` (Gamma) are absent when not analytically known.
struct TaskConstants {
  double mu = 0.0;
  double smoothness = 0.0;
  std::optional<double> gradient_bound;
  std::optional<double> heterogeneity;
};

// A federated objective F = (1/N) sum_n F_n with per-client local losses.
class Task {
 public:
  virtual ~Task() = default;

  virtual int dimension() const = 0;
  virtual int num_clients() const = 0;

  virtual double client_loss(int client, const Vec& theta) const = 0;
  virtual Vec client_gradient(int client, const Vec& theta) const = 0;
  // Minibatch gradient, samples drawn with replacement. batch_size <= 0
  // means the full local dataset.
  virtual Vec stochastic_gradient(int client, const Vec& theta,
                                  int batch_size, Rng& rng) const = 0;

  virtual std::optional<Vec> optimum() const { return std::nullopt; }
  virtual TaskConstants constants() const = 0;
  // Classification accuracy on held-out data, when the task has any.
  virtual std::optional<double> test_metric(const Vec&) const {
    return std::nullopt;
  }
  virtual Vec initial_point() const { return Vec::Zero(dimension()); }

  double loss(const Vec& theta) const;
  Vec full_gradient(const Vec& theta) const;
};

// F_n(theta) = (1/m) sum_j 1/2 (theta - a_j)^T Q_n (theta - a_j) with
// diagonal Q_n. Minimiser b_n is the sample mean. Without samples the loss
// is exactly 1/2 (theta - b_n)^T Q_n (theta - b_n) and gradients are exact.
struct QuadraticClient {
  Vec q_diag;
  Vec center;
  Mat samples;  // rows are a_j; may be empty
};

class QuadraticTask final : public Task {
 public:
  // `region_radius` bounds ||theta - theta*|| for the gradient bound G.
  QuadraticTask(std::vector<QuadraticClient> clients, double region_radius);

  int dimension() const override { return dim_; }
  int num_clients() const override {
    return static_cast<int>(clients_.size());
  }
  double client_loss(int client, const Vec& theta) const override;
  Vec client_gradient(int client, const Vec& theta) const override;
  Vec stochastic_gradient(int client, const Vec& theta, int batch_size,
                          Rng& rng) const override;
  std::optional<Vec> optimum() const override { return optimum_; }
  TaskConstants constants() const override;

  // G^2 bound over the ball ||theta - theta*|| <= radius for minibatch
  // gradients of the given size.
  double gradient_bound_sq(double radius, int batch_size) const;
  void set_batch_size(int batch_size) { batch_size_ = batch_size; }
  void set_region_radius(double radius) { region_radius_ = radius; }
  double region_radius() const { return region_radius_; }
  void set_initial_point(Vec start) { start_ = std::move(start); }
  Vec initial_point() const override {
    return start_.size() == dim_ ? start_ : Vec::Zero(dim_);
  }
  const QuadraticClient& client(int n) const { return clients_[n]; }

 private:
  std::vector<QuadraticClient> clients_;
  std::vector<double> sample_var_;  // tr(Q Sigma Q) per client
  std::vector<double> local_min_;   // F_n(b_n)
  int dim_ = 0;
  Vec optimum_;
  Vec start_;
  double region_radius_ = 1.0;
  int batch_size_ = 0;
};

struct QuadraticSpec {
  int dimension = 20;
  int num_clients = 20;
  double mu = 0.5;            // smallest curvature
  double smoothness = 2.0;    // largest curvature
  double heterogeneity = 1.0;  // spread of the local minimisers b_n
  double sample_noise = 0.5;   // per-coordinate spread of the samples
  int samples_per_client = 50;  // 0 -> deterministic exact gradients
  double initial_distance = 0.0;  // 0 -> start at the origin
  double region_factor = 1.0;
  std::uint64_t seed = 1;
};

std::unique_ptr<QuadraticTask> make_quadratic_task(const QuadraticSpec& spec,
                                                   int batch_size);

// Labeled samples, features row-wise.
struct Dataset {
  Mat features;
  std::vector<int> labels;
  int num_classes = 0;

  int size() const { return static_cast<int>(labels.size()); }
  Dataset subset(const std::vector<int>& rows) const;
};

enum class SplitMode { kIid, kNonIid };

std::vector<Dataset> split_data(const Dataset& data, int num_clients,
                                SplitMode mode, Rng& rng);

// One sample per line: features then an integer label, separated by commas,
// whitespace or semicolons. Lines starting with '#' are skipped.
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);

// Gaussian class clusters, a small digits-style stand-in.
Dataset make_synthetic_classes(int samples, int features, int classes,
                               double separation, std::uint64_t seed);

// Multinomial logistic regression with l2 penalty lambda/2 ||theta||^2.
// theta packs a (classes x (features + 1)) weight matrix, bias last,
// column-major.
class LogisticTask final : public Task {
 public:
  LogisticTask(std::vector<Dataset> clients, Dataset test, double lambda);

  int dimension() const override { return dim_; }
  int num_clients() const override {
    return static_cast<int>(clients_.size());
  }
  double client_loss(int client, const Vec& theta) const override;
  Vec client_gradient(int client, const Vec& theta) const override;
  Vec stochastic_gradient(int client, const Vec& theta, int batch_size,
                          Rng& rng) const override;
  std::optional<Vec> optimum() const override { return optimum_; }
  TaskConstants constants() const override;
  std::optional<double> test_metric(const Vec& theta) const override;

  // Records an estimate of G; the engine fills it from observed gradients.
  void set_gradient_bound(double g) { gradient_bound_ = g; }

 private:
  double data_loss(const Dataset& data, const Vec& theta) const;
  Vec data_gradient(const Dataset& data, const std::vector<int>& rows,
                    const Vec& theta) const;
  Vec minimise(const std::vector<const Dataset*>& parts) const;

  std::vector<Dataset> clients_;
  Dataset test_;
  double lambda_;
  int features_ = 0;
  int classes_ = 0;
  int dim_ = 0;
  double smoothness_ = 0.0;
  Vec optimum_;
  double heterogeneity_ = 0.0;
  std::optional<double> gradient_bound_;
};

struct LogisticSpec {
  int num_clients = 10;
  int features = 16;
  int classes = 10;
  int train_samples = 1000;
  int test_samples = 500;
  double separation = 3.0;
  double lambda = 0.01;
  SplitMode split = SplitMode::kIid;
  std::string dataset_path;  // empty -> synthetic
  std::uint64_t seed = 1;
};

std::unique_ptr<LogisticTask> make_logistic_task(const LogisticSpec& spec);

}  // namespace otafl

#endif  // OTAFL_TASKS_HPP_
