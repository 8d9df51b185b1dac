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

#include <vector>

#include <benchmark/benchmark.h>

#include "otafl/aircomp.hpp"
#include "otafl/bounds.hpp"
#include "otafl/channel.hpp"
#include "otafl/harness.hpp"

namespace {

using namespace otafl;

// N UTs, N/2 APs with four antennas, top-4 clusters, MMSE estimates.
BuiltNetwork network(int n) {
  NetworkConfig c;
  c.num_uts = n;
  c.num_aps = n / 2;
  c.antennas_per_ap = 4;
  c.area_side = 500.0;
  c.correlation = {CorrelationKind::kExponential, 0.5};
  return build_network(c, {CsiMode::kMmse, 1e13, 0.0});
}

void BM_ChannelDraw(benchmark::State& state) {
  const BuiltNetwork net = network(static_cast<int>(state.range(0)));
  const RayleighChannel ch(net.correlations, net.association, 1);
  ChannelDraw d;
  std::uint64_t slot = 0;
  for (auto _ : state) {
    ch.draw_into(slot++, d);
    benchmark::DoNotOptimize(d.h.data());
  }
}
BENCHMARK(BM_ChannelDraw)->Arg(20)->Arg(80);

void BM_CombineSymbol(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BuiltNetwork net = network(n);
  const RayleighChannel ch(net.correlations, net.association, 1);
  const ChannelDraw d = ch.draw(0);
  const CMat z = draw_noise(2, 0, 4, n / 2, 1e-3);
  std::vector<cd> x(n, cd(0.3, -0.1));
  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        combine_symbol(x, active, 0.5, d, net.association, z));
  }
}
BENCHMARK(BM_CombineSymbol)->Arg(20)->Arg(80);

void BM_TransmitAndCombine(benchmark::State& state) {
  const int n = 20;
  const int dim = static_cast<int>(state.range(0));
  const BuiltNetwork net = network(n);
  const RayleighChannel ch(net.correlations, net.association, 1);
  const std::vector<Vec> ups(n, Vec::Ones(dim));
  const SymbolFrame f = make_frame(ups, 1);
  const OtaLink link{&ch, &net.association, 1e-3, 5};
  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  std::uint64_t slot = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        transmit_and_combine(f, 0.5, link, slot, active).delta_hat.data());
    slot += f.transmissions;
  }
}
BENCHMARK(BM_TransmitAndCombine)->Arg(20)->Arg(200);

void BM_ComputeConstants(benchmark::State& state) {
  const BuiltNetwork net = network(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_constants(net.correlations, net.association));
  }
}
BENCHMARK(BM_ComputeConstants)->Arg(20)->Arg(80);

}  // namespace

BENCHMARK_MAIN();
