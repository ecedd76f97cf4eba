#include <benchmark/benchmark.h>

#include "csq/coherent.hpp"
#include "csq/pathint.hpp"
#include "csq/symbol_text.hpp"
#include "csq/symbols.hpp"

namespace {

void BM_CoherentState(benchmark::State& state) {
  csq::SpaceConfig cfg;
  cfg.dim = int(state.range(0));
  const csq::Fiducial fid = csq::gaussian_fiducial(cfg);
  double p = 0.3;
  for (auto _ : state) {
    const csq::StateVector psi =
        csq::coherent_state(csq::CoherentLabel{p, -0.4}, fid, csq::Gauge{}, cfg);
    benchmark::DoNotOptimize(psi.sum());
    p = -p;
  }
}
BENCHMARK(BM_CoherentState)->Arg(64)->Arg(128);

void BM_ToeplitzQuantize(benchmark::State& state) {
  csq::SpaceConfig cfg;
  cfg.dim = 32;
  const csq::Fiducial fid = csq::gaussian_fiducial(cfg);
  const csq::SymbolFn h{csq::parse_symbol("0.5*p^2 + 0.5*q^2")};
  csq::PhaseSpaceQuadrature quad = csq::default_toeplitz_quadrature(cfg, 2);
  csq::ToeplitzOptions opts;
  opts.skip_checks = true;
  for (auto _ : state) {
    const csq::Operator op = csq::toeplitz_quantize(h, fid, quad, cfg, opts);
    benchmark::DoNotOptimize(op.mat(0, 0));
  }
}
BENCHMARK(BM_ToeplitzQuantize);

void BM_BridgeSampling(benchmark::State& state) {
  const int steps = int(state.range(0));
  uint64_t stream = 0;
  for (auto _ : state) {
    const csq::BridgePath path =
        csq::sample_bridge(2.0, 1.0, csq::BridgeEndpoints{0, 0, 1, 0}, steps, 42, stream++);
    benchmark::DoNotOptimize(path.q(steps / 2));
  }
}
BENCHMARK(BM_BridgeSampling)->Arg(1024)->Arg(4096);

void BM_DkPropagatorSmall(benchmark::State& state) {
  csq::SpaceConfig cfg;
  csq::DkParams prm;
  prm.nu = 10.0;
  prm.T = 1.0;
  prm.labels = csq::DkLabels{0, 0, 1, 0};
  prm.samples = 2000;
  prm.steps = 256;
  prm.workers = 1;
  const csq::SymbolFn h{csq::PolySymbol{}};
  for (auto _ : state) {
    const csq::MCEstimate est = csq::dk_propagator(h, prm, csq::Gauge{}, cfg);
    benchmark::DoNotOptimize(est.mean);
    prm.seed += 1;
  }
}
BENCHMARK(BM_DkPropagatorSmall);

}  // namespace

BENCHMARK_MAIN();
