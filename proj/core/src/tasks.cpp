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

#include "otafl/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace otafl {

double Task::loss(const Vec& theta) const {
  double sum = 0.0;
  for (int n = 0; n < num_clients(); ++n) sum += client_loss(n, theta);
  return sum / num_clients();
}

Vec Task::full_gradient(const Vec& theta) const {
  Vec sum = Vec::Zero(dimension());
  for (int n = 0; n < num_clients(); ++n) sum += client_gradient(n, theta);
  return sum / num_clients();
}

// ---------------------------------------------------------------- quadratic

QuadraticTask::QuadraticTask(std::vector<QuadraticClient> clients,
                             double region_radius)
    : clients_(std::move(clients)), region_radius_(region_radius) {
  if (clients_.empty()) throw std::invalid_argument("no clients");
  dim_ = static_cast<int>(clients_.front().q_diag.size());
  Vec weight_sum = Vec::Zero(dim_);
  Vec weighted = Vec::Zero(dim_);
  for (auto& c : clients_) {
    if (c.q_diag.size() != dim_) throw std::invalid_argument("ragged Q_n");
    if ((c.q_diag.array() <= 0.0).any()) {
      throw std::invalid_argument("Q_n must be positive definite");
    }
    double var = 0.0;
    double floor = 0.0;
    if (c.samples.rows() > 0) {
      if (c.samples.cols() != dim_) throw std::invalid_argument("sample dim");
      c.center = c.samples.colwise().mean().transpose();
      const Mat dev = c.samples.rowwise() - c.center.transpose();
      const double m = static_cast<double>(c.samples.rows());
      // tr(Q Sigma Q) and the irreducible part of F_n, Sigma the population
      // covariance of the samples.
      var = (dev.array().square().rowwise() *
             c.q_diag.array().square().transpose())
                .sum() /
            m;
      floor = 0.5 *
              (dev.array().square().rowwise() * c.q_diag.array().transpose())
                  .sum() /
              m;
    }
    if (c.center.size() != dim_) throw std::invalid_argument("center dim");
    sample_var_.push_back(var);
    local_min_.push_back(floor);
    weight_sum += c.q_diag;
    weighted += c.q_diag.cwiseProduct(c.center);
  }
  optimum_ = weighted.cwiseQuotient(weight_sum);
}

double QuadraticTask::client_loss(int client, const Vec& theta) const {
  const auto& c = clients_[client];
  const Vec diff = theta - c.center;
  return 0.5 * diff.dot(c.q_diag.cwiseProduct(diff)) + local_min_[client];
}

Vec QuadraticTask::client_gradient(int client, const Vec& theta) const {
  const auto& c = clients_[client];
  return c.q_diag.cwiseProduct(theta - c.center);
}

Vec QuadraticTask::stochastic_gradient(int client, const Vec& theta,
                                       int batch_size, Rng& rng) const {
  const auto& c = clients_[client];
  const int m = static_cast<int>(c.samples.rows());
  if (batch_size <= 0 || m == 0) return client_gradient(client, theta);
  Vec mean = Vec::Zero(dim_);
  std::uniform_int_distribution<int> pick(0, m - 1);
  for (int b = 0; b < batch_size; ++b) {
    mean += c.samples.row(pick(rng)).transpose();
  }
  mean /= batch_size;
  return c.q_diag.cwiseProduct(theta - mean);
}

double QuadraticTask::gradient_bound_sq(double radius, int batch_size) const {
  double best = 0.0;
  for (size_t n = 0; n < clients_.size(); ++n) {
    const auto& c = clients_[n];
    const double reach = radius + (optimum_ - c.center).norm();
    const double lmax = c.q_diag.maxCoeff();
    double g2 = lmax * lmax * reach * reach;
    if (batch_size > 0 && c.samples.rows() > 0) {
      g2 += sample_var_[n] / batch_size;
    }
    best = std::max(best, g2);
  }
  return best;
}

TaskConstants QuadraticTask::constants() const {
  TaskConstants k;
  k.mu = std::numeric_limits<double>::infinity();
  k.smoothness = 0.0;
  double floor = 0.0;
  for (size_t n = 0; n < clients_.size(); ++n) {
    k.mu = std::min(k.mu, clients_[n].q_diag.minCoeff());
    k.smoothness = std::max(k.smoothness, clients_[n].q_diag.maxCoeff());
    floor += local_min_[n];
  }
  k.gradient_bound = std::sqrt(gradient_bound_sq(region_radius_, batch_size_));
  k.heterogeneity = loss(optimum_) - floor / num_clients();
  return k;
}

std::unique_ptr<QuadraticTask> make_quadratic_task(const QuadraticSpec& spec,
                                                   int batch_size) {
  if (spec.dimension < 1 || spec.num_clients < 1) {
    throw ConfigError("dimension and num_clients must be >= 1", "task");
  }
  if (!(spec.mu > 0.0) || spec.smoothness < spec.mu) {
    throw ConfigError("need 0 < mu <= smoothness", "task.mu");
  }
  std::vector<QuadraticClient> clients;
  clients.reserve(spec.num_clients);
  for (int n = 0; n < spec.num_clients; ++n) {
    Rng rng = Rng::stream(spec.seed, Purpose::kTask, n);
    QuadraticClient c;
    c.q_diag.resize(spec.dimension);
    c.center.resize(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) {
      c.q_diag(i) = rng.uniform(spec.mu, spec.smoothness);
    }
    for (int i = 0; i < spec.dimension; ++i) {
      c.center(i) = spec.heterogeneity * rng.normal();
    }
    if (spec.samples_per_client > 0) {
      c.samples.resize(spec.samples_per_client, spec.dimension);
      for (int j = 0; j < spec.samples_per_client; ++j) {
        for (int i = 0; i < spec.dimension; ++i) {
          c.samples(j, i) = c.center(i) + spec.sample_noise * rng.normal();
        }
      }
    }
    clients.push_back(std::move(c));
  }
  auto task = std::make_unique<QuadraticTask>(std::move(clients), 1.0);
  task->set_batch_size(batch_size);
  const Vec opt = *task->optimum();
  Vec start = Vec::Zero(spec.dimension);
  if (spec.initial_distance > 0.0) {
    Rng rng = Rng::stream(spec.seed, Purpose::kTask, spec.num_clients);
    Vec dir(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) dir(i) = rng.normal();
    start = opt + spec.initial_distance * dir.normalized();
  }
  task->set_initial_point(start);
  task->set_region_radius(spec.region_factor * (start - opt).norm());
  return task;
}

// ---------------------------------------------------------------- datasets

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

std::vector<Dataset> split_data(const Dataset& data, int num_clients,
                                SplitMode mode, Rng& rng) {
  const int m = data.size();
  if (num_clients < 1) throw std::invalid_argument("num_clients must be >= 1");
  if (num_clients > m) {
    throw std::invalid_argument("more clients than samples");
  }
  std::vector<std::vector<int>> parts(num_clients);
  auto chunk = [](const std::vector<int>& rows, int groups,
                  std::vector<std::vector<int>>& out, int first) {
    const int total = static_cast<int>(rows.size());
    int pos = 0;
    for (int g = 0; g < groups; ++g) {
      const int len = total / groups + (g < total % groups ? 1 : 0);
      out[first + g].assign(rows.begin() + pos, rows.begin() + pos + len);
      pos += len;
    }
  };

  if (mode == SplitMode::kIid) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    chunk(order, num_clients, parts, 0);
  } else {
    const int classes = data.num_classes;
    if (classes < 1) throw std::invalid_argument("non-iid split needs labels");
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return data.labels[a] < data.labels[b];
    });
    if (num_clients % classes == 0) {
      // Each class divided into N/C disjoint groups: one class per client.
      const int groups = num_clients / classes;
      for (int c = 0; c < classes; ++c) {
        std::vector<int> rows;
        for (int i : order) {
          if (data.labels[i] == c) rows.push_back(i);
        }
        if (static_cast<int>(rows.size()) < groups) {
          throw std::invalid_argument("class " + std::to_string(c) +
                                      " has too few samples to shard");
        }
        chunk(rows, groups, parts, c * groups);
      }
    } else {
      chunk(order, num_clients, parts, 0);
    }
  }

  std::vector<Dataset> out;
  out.reserve(num_clients);
  for (auto& rows : parts) out.push_back(data.subset(rows));
  return out;
}

Dataset load_dataset(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace_if(
        line.begin(), line.end(), [](char ch) { return ch == ',' || ch == ';'; },
        ' ');
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      if (values.empty() && token[0] == '#') break;
      try {
        values.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(lineno) +
                                    ": not a number: " + token);
      }
    }
    if (values.empty()) continue;
    if (values.size() < 2) {
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": need features and a label");
    }
    const double label = values.back();
    if (label < 0 || label != std::floor(label)) {
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": label must be a non-negative integer");
    }
    values.pop_back();
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": inconsistent feature count");
    }
    rows.push_back(std::move(values));
    labels.push_back(static_cast<int>(label));
  }
  if (rows.empty()) throw std::invalid_argument("dataset is empty");
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  out.labels = std::move(labels);
  out.num_classes = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
  return out;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset: " + path);
  return load_dataset(in);
}

Dataset make_synthetic_classes(int samples, int features, int classes,
                               double separation, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, Purpose::kData, 0);
  Mat means(classes, features);
  for (int c = 0; c < classes; ++c) {
    for (int j = 0; j < features; ++j) {
      means(c, j) = separation * rng.normal() / std::sqrt(2.0);
    }
  }
  Dataset out;
  out.num_classes = classes;
  out.features.resize(samples, features);
  out.labels.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const int c = i % classes;
    out.labels[i] = c;
    for (int j = 0; j < features; ++j) {
      out.features(i, j) = means(c, j) + rng.normal();
    }
  }
  return out;
}

// ---------------------------------------------------------------- logistic

namespace {

Mat with_bias(const Mat& x) {
  Mat out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

// Row-wise softmax of the class scores, stabilised by the row max.
Mat softmax_rows(const Mat& scores) {
  Mat p = scores;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double top = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - top).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace

LogisticTask::LogisticTask(std::vector<Dataset> clients, Dataset test,
                           double lambda)
    : clients_(std::move(clients)), test_(std::move(test)), lambda_(lambda) {
  if (clients_.empty()) throw std::invalid_argument("no clients");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("lambda must be > 0");
  features_ = static_cast<int>(clients_.front().features.cols());
  classes_ = clients_.front().num_classes;
  dim_ = classes_ * (features_ + 1);
  double max_sq = 0.0;
  for (const auto& c : clients_) {
    if (c.size() == 0) throw std::invalid_argument("client without data");
    max_sq = std::max(max_sq, c.features.rowwise().squaredNorm().maxCoeff());
  }
  smoothness_ = lambda_ + 0.5 * (max_sq + 1.0);

  std::vector<const Dataset*> all;
  for (const auto& c : clients_) all.push_back(&c);
  optimum_ = minimise(all);
  double floor = 0.0;
  for (const auto& c : clients_) {
    floor += data_loss(c, minimise({&c}));
  }
  heterogeneity_ = loss(optimum_) - floor / num_clients();
}

double LogisticTask::data_loss(const Dataset& data, const Vec& theta) const {
  const Eigen::Map<const Mat> w(theta.data(), classes_, features_ + 1);
  const Mat scores = with_bias(data.features) * w.transpose();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    const double lse =
        top + std::log((scores.row(i).array() - top).exp().sum());
    sum += lse - scores(i, data.labels[i]);
  }
  return sum / data.size() + 0.5 * lambda_ * theta.squaredNorm();
}

Vec LogisticTask::data_gradient(const Dataset& data,
                                const std::vector<int>& rows,
                                const Vec& theta) const {
  const Eigen::Map<const Mat> w(theta.data(), classes_, features_ + 1);
  Mat x(static_cast<Eigen::Index>(rows.size()), features_ + 1);
  for (size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)).head(features_) =
        data.features.row(rows[i]);
    x(static_cast<Eigen::Index>(i), features_) = 1.0;
  }
  Mat p = softmax_rows(x * w.transpose());
  for (size_t i = 0; i < rows.size(); ++i) {
    p(static_cast<Eigen::Index>(i), data.labels[rows[i]]) -= 1.0;
  }
  Mat g = p.transpose() * x / static_cast<double>(rows.size());
  Vec out = Eigen::Map<const Vec>(g.data(), dim_);
  return out + lambda_ * theta;
}

Vec LogisticTask::minimise(const std::vector<const Dataset*>& parts) const {
  // Newton with backtracking on the (1/|parts|) average of the part losses.
  const double weight = 1.0 / static_cast<double>(parts.size());
  auto objective = [&](const Vec& t) {
    double v = 0.0;
    for (const auto* d : parts) v += weight * data_loss(*d, t);
    return v;
  };
  Vec theta = Vec::Zero(dim_);
  for (int iter = 0; iter < 100; ++iter) {
    Vec grad = Vec::Zero(dim_);
    Mat hess = Mat::Identity(dim_, dim_) * lambda_;
    for (const auto* d : parts) {
      std::vector<int> rows(d->size());
      std::iota(rows.begin(), rows.end(), 0);
      grad += weight * data_gradient(*d, rows, theta);
      const Mat x = with_bias(d->features);
      const Eigen::Map<const Mat> w(theta.data(), classes_, features_ + 1);
      const Mat p = softmax_rows(x * w.transpose());
      const double scale = weight / d->size();
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Vec pi = p.row(i).transpose();
        const Mat curv = Mat(pi.asDiagonal()) - pi * pi.transpose();
        const Mat xx = x.row(i).transpose() * x.row(i);
        // Column-major vec(W): index c + C*j.
        for (int j = 0; j <= features_; ++j) {
          for (int jp = 0; jp <= features_; ++jp) {
            hess.block(j * classes_, jp * classes_, classes_, classes_) +=
                scale * xx(j, jp) * curv;
          }
        }
      }
    }
    if (grad.norm() < 1e-11) break;
    const Vec step = hess.ldlt().solve(grad);
    const double f0 = objective(theta);
    double t = 1.0;
    Vec next = theta - step;
    while (objective(next) > f0 - 0.25 * t * grad.dot(step) && t > 1e-12) {
      t *= 0.5;
      next = theta - t * step;
    }
    theta = next;
  }
  return theta;
}

double LogisticTask::client_loss(int client, const Vec& theta) const {
  return data_loss(clients_[client], theta);
}

Vec LogisticTask::client_gradient(int client, const Vec& theta) const {
  std::vector<int> rows(clients_[client].size());
  std::iota(rows.begin(), rows.end(), 0);
  return data_gradient(clients_[client], rows, theta);
}

Vec LogisticTask::stochastic_gradient(int client, const Vec& theta,
                                      int batch_size, Rng& rng) const {
  const Dataset& d = clients_[client];
  if (batch_size <= 0) return client_gradient(client, theta);
  std::uniform_int_distribution<int> pick(0, d.size() - 1);
  std::vector<int> rows(batch_size);
  for (int& r : rows) r = pick(rng);
  return data_gradient(d, rows, theta);
}

TaskConstants LogisticTask::constants() const {
  TaskConstants k;
  k.mu = lambda_;
  k.smoothness = smoothness_;
  k.gradient_bound = gradient_bound_;
  k.heterogeneity = heterogeneity_;
  return k;
}

std::optional<double> LogisticTask::test_metric(const Vec& theta) const {
  if (test_.size() == 0) return std::nullopt;
  const Eigen::Map<const Mat> w(theta.data(), classes_, features_ + 1);
  const Mat scores = with_bias(test_.features) * w.transpose();
  int correct = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    if (best == test_.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / test_.size();
}

std::unique_ptr<LogisticTask> make_logistic_task(const LogisticSpec& spec) {
  Dataset train;
  Dataset test;
  if (spec.dataset_path.empty()) {
    Dataset all = make_synthetic_classes(spec.train_samples + spec.test_samples,
                                         spec.features, spec.classes,
                                         spec.separation, spec.seed);
    std::vector<int> tr(spec.train_samples);
    std::vector<int> te(spec.test_samples);
    std::iota(tr.begin(), tr.end(), 0);
    std::iota(te.begin(), te.end(), spec.train_samples);
    train = all.subset(tr);
    test = all.subset(te);
  } else {
    Dataset all = load_dataset_file(spec.dataset_path);
    // Every fifth sample held out for testing.
    std::vector<int> tr;
    std::vector<int> te;
    for (int i = 0; i < all.size(); ++i) (i % 5 == 4 ? te : tr).push_back(i);
    train = all.subset(tr);
    test = all.subset(te);
  }
  Rng rng = Rng::stream(spec.seed, Purpose::kData, 1);
  auto parts = split_data(train, spec.num_clients, spec.split, rng);
  return std::make_unique<LogisticTask>(std::move(parts), std::move(test),
                                        spec.lambda);
}

}  // namespace otafl
