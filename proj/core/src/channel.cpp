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

#include "otafl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace otafl {

void CsiConfig::validate() const {
  if (mode == CsiMode::kMmse && !(pilot_snr > 0.0)) {
    throw ConfigError("must be > 0", "channel.csi.pilot_snr");
  }
  if (mode == CsiMode::kExplicitCov && !(scale >= 0.0 && scale <= 1.0)) {
    throw ConfigError("must lie in [0, 1]", "channel.csi.scale");
  }
}

namespace {

void require_hermitian(const CMat& r) {
  if (r.rows() != r.cols()) throw std::invalid_argument("matrix not square");
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("matrix not Hermitian");
  }
}

}  // namespace

CMat psd_sqrt(const CMat& r) {
  require_hermitian(r);
  const int m = static_cast<int>(r.rows());
  if (m == 0) return r;
  if (r.cwiseAbs().maxCoeff() == 0.0) return CMat::Zero(m, m);
  Eigen::SelfAdjointEigenSolver<CMat> eig(r);
  const double trace = r.trace().real();
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (int i = 0; i < m; ++i) {
    if (lambda(i) < -1e-10 * std::abs(trace)) {
      throw std::invalid_argument("matrix not positive semi-definite");
    }
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  const CMat& u = eig.eigenvectors();
  return u * lambda.asDiagonal() * u.adjoint();
}

CVec sample_gaussian(const CMat& r, Rng& rng) {
  const CMat root = psd_sqrt(r);
  CVec w(r.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.complex_normal();
  return root * w;
}

CMat mmse_error_covariance(const CMat& r, double pilot_snr) {
  require_hermitian(r);
  if (!(pilot_snr > 0.0)) throw std::invalid_argument("pilot_snr must be > 0");
  const Eigen::Index m = r.rows();
  const CMat reg = r + CMat::Identity(m, m) / pilot_snr;
  CMat c = r - r * reg.ldlt().solve(r);
  return (c + c.adjoint()) / 2.0;
}

void fill_error_covariances(CorrelationSet& correlations,
                            const CsiConfig& csi) {
  csi.validate();
  for (int n = 0; n < correlations.num_uts(); ++n) {
    for (int l = 0; l < correlations.num_aps(); ++l) {
      const CMat& r = correlations.r(n, l);
      CMat& c = correlations.c(n, l);
      switch (csi.mode) {
        case CsiMode::kPerfect:
          c = CMat::Zero(r.rows(), r.cols());
          break;
        case CsiMode::kMmse:
          c = mmse_error_covariance(r, csi.pilot_snr);
          break;
        case CsiMode::kExplicitCov:
          c = csi.scale * r;
          break;
      }
    }
  }
}

void ChannelDraw::resize(int uts, int aps, int m) {
  num_uts = uts;
  num_aps = aps;
  antennas = m;
  const Eigen::Index links = static_cast<Eigen::Index>(uts) * aps;
  if (h.rows() != m || h.cols() != links) {
    h.resize(m, links);
    h_err.resize(m, links);
    h_hat.resize(m, links);
  }
}

RayleighChannel::RayleighChannel(const CorrelationSet& correlations,
                                 const AssociationMap& association,
                                 std::uint64_t seed, bool estimate_all)
    : num_uts_(correlations.num_uts()),
      num_aps_(correlations.num_aps()),
      antennas_(correlations.antennas()),
      seed_(seed) {
  const size_t links = static_cast<size_t>(num_uts_) * num_aps_;
  r_sqrt_.reserve(links);
  c_sqrt_.reserve(links);
  has_error_.assign(links, 0);
  estimated_.assign(links, 0);
  for (int n = 0; n < num_uts_; ++n) {
    for (int l = 0; l < num_aps_; ++l) {
      r_sqrt_.push_back(psd_sqrt(correlations.r(n, l)));
      const CMat& c = correlations.c(n, l);
      const bool any_error = c.cwiseAbs().maxCoeff() > 0.0;
      c_sqrt_.push_back(any_error ? psd_sqrt(c) : CMat());
      const size_t idx = correlations.index(n, l);
      has_error_[idx] = any_error;
      estimated_[idx] = estimate_all || association.serves(l, n);
    }
  }
}

void RayleighChannel::draw_into(std::uint64_t slot_id,
                                ChannelDraw& draw) const {
  draw.resize(num_uts_, num_aps_, antennas_);
  draw.slot_id = slot_id;
  CVec w(antennas_);
  for (int n = 0; n < num_uts_; ++n) {
    for (int l = 0; l < num_aps_; ++l) {
      const int idx = n * num_aps_ + l;
      Rng rng = Rng::stream(seed_, Purpose::kChannel, slot_id, n, l);
      for (int i = 0; i < antennas_; ++i) w(i) = rng.complex_normal();
      draw.h.col(idx).noalias() = r_sqrt_[idx] * w;
      if (has_error_[idx] && estimated_[idx]) {
        Rng err = Rng::stream(seed_, Purpose::kError, slot_id, n, l);
        for (int i = 0; i < antennas_; ++i) w(i) = err.complex_normal();
        draw.h_err.col(idx).noalias() = c_sqrt_[idx] * w;
      } else {
        draw.h_err.col(idx).setZero();
      }
      if (estimated_[idx]) {
        draw.h_hat.col(idx) = draw.h.col(idx) + draw.h_err.col(idx);
      } else {
        draw.h_hat.col(idx).setZero();
      }
    }
  }
}

namespace {

class FixedChannel final : public ChannelSource {
 public:
  explicit FixedChannel(ChannelDraw draw) : draw_(std::move(draw)) {}

  void draw_into(std::uint64_t slot_id, ChannelDraw& draw) const override {
    draw = draw_;
    draw.slot_id = slot_id;
  }

 private:
  ChannelDraw draw_;
};

}  // namespace

UnitGainSurrogate make_unit_gain_surrogate(const AssociationMap& association,
                                           int num_aps, int antennas) {
  const int n_ut = association.num_uts();
  // Bipartite matching UT -> (ap, antenna) restricted to the UT's cluster.
  const int slots = num_aps * antennas;
  std::vector<int> owner(slots, -1);
  std::vector<int> assigned(n_ut, -1);
  std::function<bool(int, std::vector<char>&)> augment =
      [&](int n, std::vector<char>& seen) {
        for (int l : association.serving_aps[n]) {
          for (int m = 0; m < antennas; ++m) {
            const int s = l * antennas + m;
            if (seen[s]) continue;
            seen[s] = 1;
            if (owner[s] < 0 || augment(owner[s], seen)) {
              owner[s] = n;
              assigned[n] = s;
              return true;
            }
          }
        }
        return false;
      };
  for (int n = 0; n < n_ut; ++n) {
    std::vector<char> seen(slots, 0);
    if (!augment(n, seen)) {
      throw ConfigError("unit-gain surrogate needs a private antenna per UT "
                        "inside its cluster; none left for UT " +
                        std::to_string(n));
    }
  }

  UnitGainSurrogate out;
  out.correlations = CorrelationSet(n_ut, num_aps, antennas);
  ChannelDraw draw;
  draw.resize(n_ut, num_aps, antennas);
  draw.h.setZero();
  draw.h_err.setZero();
  for (int n = 0; n < n_ut; ++n) {
    const int l = assigned[n] / antennas;
    const int m = assigned[n] % antennas;
    out.correlations.r(n, l)(m, m) = 1.0;
    draw.h(m, draw.index(n, l)) = 1.0;
  }
  draw.h_hat = draw.h;
  out.association =
      make_association(association.serving_aps, out.correlations);
  out.channel = std::make_shared<FixedChannel>(std::move(draw));
  return out;
}

void write_draw(std::ostream& out, const ChannelDraw& draw) {
  out << "# slot " << draw.slot_id << ": ut ap antenna h_re h_im hhat_re "
         "hhat_im\n";
  for (int n = 0; n < draw.num_uts; ++n) {
    for (int l = 0; l < draw.num_aps; ++l) {
      for (int m = 0; m < draw.antennas; ++m) {
        const cd h = draw.h(m, draw.index(n, l));
        const cd e = draw.h_hat(m, draw.index(n, l));
        out << n << ' ' << l << ' ' << m << ' ' << h.real() << ' '
            << h.imag() << ' ' << e.real() << ' ' << e.imag() << '\n';
      }
    }
  }
}

}  // namespace otafl
