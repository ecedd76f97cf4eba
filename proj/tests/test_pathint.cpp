#include <cmath>

#include <doctest.h>

#include "csq/coherent.hpp"
#include "csq/pathint.hpp"
#include "csq/quadrature.hpp"
#include "csq/symbol_text.hpp"
#include "dk_exact.hpp"

using namespace csq;

namespace {

const SpaceConfig kCfg{64, 1.0, 1.0};

Complex free_kernel(double mass, double hbar, double T, double dq) {
  return std::sqrt(mass / (2.0 * M_PI * I * hbar * T)) *
         std::exp(I * mass * dq * dq / (2.0 * hbar * T));
}

Complex mehler_kernel(double mass, double omega, double hbar, double T, double q0, double q1) {
  const double sn = std::sin(omega * T), cs = std::cos(omega * T);
  return std::sqrt(mass * omega / (2.0 * M_PI * I * hbar * sn)) *
         std::exp(I * mass * omega * ((q0 * q0 + q1 * q1) * cs - 2.0 * q0 * q1) /
                  (2.0 * hbar * sn));
}

}  // namespace

TEST_CASE("fresnel toy: limit value, closed form vs quadrature, monotone approach") {
  const Complex target = std::sqrt(2.0 * M_PI * I);
  CHECK(std::abs(fresnel_toy(1e4) - target) < 1e-2);
  CHECK(std::abs(fresnel_toy(1e8) - target) < 1e-6);

  // nu = 1 cross-check by direct oscillatory quadrature.
  const QuadratureRule rule = gauss_legendre(2000, -14.0, 14.0);
  Complex quad = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    const double y = rule.nodes[i];
    quad += rule.weights[i] * std::exp(I * y * y / 2.0 - y * y / 2.0);
  }
  CHECK(std::abs(fresnel_toy(1.0) - quad) < 1e-8);

  double prev = 0.0;
  for (double nu : {0.5, 1.0, 2.0, 8.0, 64.0}) {
    const double mag = std::abs(fresnel_toy(nu));
    CHECK(mag > prev);
    prev = mag;
  }
  CHECK_THROWS(fresnel_toy(0.0));
  CHECK_THROWS(fresnel_toy(-2.0));
}

TEST_CASE("lattice free particle is exact at any slice count") {
  const SymbolFn h{parse_symbol("0.5*p^2")};
  for (int slices : {1, 4}) {
    LatticeConfig lat;
    lat.slices = slices;
    lat.T = 1.0;
    lat.q_from = 0.0;
    lat.q_to = 1.0;
    const Complex k = lattice_propagator(h, lat, kCfg);
    CHECK(std::abs(k - free_kernel(1.0, 1.0, 1.0, 1.0)) < 1e-6);
  }
}

TEST_CASE("lattice single short step reproduces the delta-family kernel") {
  const SymbolFn h{parse_symbol("0.5*p^2 + 0.5*q^2")};
  LatticeConfig lat;
  lat.slices = 1;
  lat.T = 0.02;
  lat.q_from = 0.7;
  lat.q_to = 0.7;
  const Complex k = lattice_propagator(h, lat, kCfg);
  const Complex exact = mehler_kernel(1.0, 1.0, 1.0, 0.02, 0.7, 0.7);
  CHECK(std::abs(k - exact) < 1e-4 * std::abs(exact));
  CHECK(std::abs(k) == doctest::Approx(std::sqrt(1.0 / (2.0 * M_PI * 0.02))).epsilon(1e-3));
}

TEST_CASE("lattice harmonic kernel converges at first order in epsilon") {
  const SymbolFn h{parse_symbol("0.5*p^2 + 0.5*q^2")};
  const Complex exact = mehler_kernel(1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
  auto error_at = [&](int slices) {
    LatticeConfig lat;
    lat.slices = slices;
    lat.T = 1.0;
    lat.q_from = 0.0;
    lat.q_to = 1.0;
    return std::abs(lattice_propagator(h, lat, kCfg) - exact);
  };
  const double e64 = error_at(64), e128 = error_at(128);
  const double ratio = e64 / e128;
  CHECK(ratio > 1.5);
  CHECK(ratio < 3.0);
}

TEST_CASE("lattice rejects unsupported symbols and starved grids") {
  LatticeConfig lat;
  lat.slices = 4;
  lat.T = 1.0;
  CHECK_THROWS(lattice_propagator(SymbolFn{parse_symbol("0.5*p^2 + p")}, lat, kCfg));
  CHECK_THROWS(lattice_propagator(SymbolFn{parse_symbol("p^4")}, lat, kCfg));
  CHECK_THROWS(lattice_propagator(SymbolFn{parse_symbol("0.5*p^2 + p*q")}, lat, kCfg));
  CHECK_THROWS(lattice_propagator(SymbolFn{parse_symbol("0.5*p^2 - q^4")}, lat, kCfg));
  CHECK_THROWS(lattice_propagator(
      SymbolFn::callable([](double p, double) { return p * p; }, 0.0), lat, kCfg));

  lat.grid_halfwidth = 0.4;  // far too narrow: tail mass check must fire
  lat.q_from = lat.q_to = 0.0;
  CHECK_THROWS(lattice_propagator(SymbolFn{parse_symbol("0.5*p^2")}, lat, kCfg));
}

TEST_CASE("discretized lattice kernel satisfies Chapman-Kolmogorov") {
  const SymbolFn h{parse_symbol("0.5*p^2 + 0.5*q^2")};
  LatticeConfig lat;
  lat.slices = 15;
  lat.T = 0.8;
  lat.q_from = lat.q_to = 0.3;
  CHECK(lattice_composition_defect(h, lat, kCfg) < 1e-6);
}

TEST_CASE("bridge endpoints are pinned exactly and seeds are reproducible") {
  const BridgeEndpoints ends{0.4, -0.7, 0.4, -0.7};
  const BridgePath a = sample_bridge(2.0, 1.0, ends, 64, 123);
  CHECK(a.p(0) == 0.4);
  CHECK(a.p(64) == 0.4);
  CHECK(a.q(0) == -0.7);
  CHECK(a.q(64) == -0.7);

  const BridgePath b = sample_bridge(2.0, 1.0, ends, 64, 123);
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.q - b.q).cwiseAbs().maxCoeff() == 0.0);
  const BridgePath c = sample_bridge(2.0, 1.0, ends, 64, 124);
  CHECK((a.q - c.q).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("bridge midpoint variance matches nu t (T - t) / T") {
  const int n = 100000;
  const double nu = 2.0, T = 1.0;
  double sum = 0.0, sumsq = 0.0, cross = 0.0;
  for (int k = 0; k < n; ++k) {
    const BridgePath path = sample_bridge(nu, T, BridgeEndpoints{}, 16, 2024, uint64_t(k));
    const double mid = path.q(8);
    sum += mid;
    sumsq += mid * mid;
    cross += path.q(4) * path.q(12);
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double target = nu * T / 4.0;  // nu t(T-t)/T at t = T/2
  const double se = target * std::sqrt(2.0 / n);
  CHECK(std::abs(var - target) < 3.0 * se);
  // Cov(q(T/4), q(3T/4)) = nu t1 (T - t2) / T = nu T / 16.
  const double cov = cross / n;
  CHECK(std::abs(cov - nu * T / 16.0) < 4.0 * (nu * T / 8.0) / std::sqrt(double(n)));
}

TEST_CASE("stratonovich action: constant momentum path") {
  BridgePath path;
  path.nu = 1.0;
  path.times = RealVec::LinSpaced(9, 0.0, 1.0);
  path.p = RealVec::Constant(9, 1.3);
  path.q = RealVec::LinSpaced(9, -0.2, 0.6);
  path.q(3) += 0.17;  // non-uniform interior makes the sum nontrivial
  const Complex expo = stratonovich_action(path, Gauge{}, SymbolFn(PolySymbol{}), 1.0);
  CHECK(std::abs(expo - I * 1.3 * 0.8) < 1e-14);
}

TEST_CASE("stratonovich loop integral recovers the enclosed area") {
  const int n = 10000;
  const double radius = 1.4;
  BridgePath circle;
  circle.nu = 1.0;
  circle.times = RealVec::LinSpaced(n + 1, 0.0, 1.0);
  circle.p.resize(n + 1);
  circle.q.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    circle.p(k) = radius * std::cos(t);
    circle.q(k) = radius * std::sin(t);
  }
  const Complex expo = stratonovich_action(circle, Gauge{}, SymbolFn(PolySymbol{}), 1.0);
  CHECK(std::abs(expo.imag() - M_PI * radius * radius) < 1e-4);
  CHECK(std::abs(expo.real()) < 1e-12);
}

TEST_CASE("canonical change of the stratonovich integral improves with refinement") {
  // Nonlinear (action-angle) map: ptil dqtil = p dq - d(pq/2). Under the
  // midpoint rule ordinary calculus holds only in the fine-step limit; the
  // mismatch on a rough bridge shrinks like 1/sqrt(steps).
  const int fine_steps = 1 << 14;
  auto mismatch = [](const BridgePath& path, int stride) {
    double straight = 0.0, polar = 0.0;
    double prev_angle = std::atan2(path.q(0), path.p(0));
    const int n = int(path.times.size()) - 1;
    for (int l = 0; l + stride <= n; l += stride) {
      const double p0 = path.p(l), q0 = path.q(l);
      const double p1 = path.p(l + stride), q1 = path.q(l + stride);
      straight += 0.5 * (p0 + p1) * (q1 - q0);
      const double pt0 = 0.5 * (p0 * p0 + q0 * q0), pt1 = 0.5 * (p1 * p1 + q1 * q1);
      double angle = std::atan2(q1, p1);
      double dq = angle - prev_angle;
      while (dq > M_PI) dq -= 2.0 * M_PI;
      while (dq < -M_PI) dq += 2.0 * M_PI;
      polar += 0.5 * (pt0 + pt1) * dq;
      prev_angle = angle;
    }
    const int last = (n / stride) * stride;
    const double boundary = 0.5 * (path.p(last) * path.q(last) - path.p(0) * path.q(0));
    return std::abs(polar - (straight - boundary));
  };

  double coarse_mean = 0.0, fine_mean = 0.0;
  const int n_bridges = 30;
  for (int k = 0; k < n_bridges; ++k) {
    const BridgePath path = sample_bridge(0.3, 1.0, BridgeEndpoints{2.0, 0.5, 1.5, -0.3},
                                          fine_steps, 909, uint64_t(k));
    coarse_mean += mismatch(path, 1 << 6);
    fine_mean += mismatch(path, 1);
  }
  coarse_mean /= n_bridges;
  fine_mean /= n_bridges;
  // Expected shrink factor sqrt(2^6) = 8; demand at least 3.
  CHECK(fine_mean * 3.0 < coarse_mean);
}

TEST_CASE("dk closed form: overlap limit and equal-label normalization") {
  DkParams prm;
  prm.T = 1.0;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.nu = 400.0;
  const Complex limit = dk_free_closed_form(prm, Gauge{}, kCfg);
  const Complex overlap = overlap_analytic(CoherentLabel{1.0, 0.0}, CoherentLabel{0.0, 0.0}, kCfg);
  CHECK(std::abs(limit - overlap) < 1e-10);

  prm.labels = DkLabels{0.3, -0.2, 0.3, -0.2};
  prm.nu = 40.0;
  prm.T = 0.2;
  const Complex diag = dk_free_closed_form(prm, Gauge{}, kCfg);
  CHECK(std::abs(diag - 1.0) < 1e-3);
}

TEST_CASE("naive sampler agrees with the closed form at small nu T") {
  DkParams prm;
  prm.nu = 2.0;
  prm.T = 0.5;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.samples = 40000;
  prm.steps = 512;
  prm.seed = 5;
  prm.method = DkParams::Method::naive;
  const MCEstimate est = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
  CHECK(est.method == "naive");
  const Complex exact = dk_free_closed_form(prm, Gauge{}, kCfg);
  CHECK(std::abs(est.mean - exact) < 4.0 * est.std_error + 2e-3);
  CHECK(est.std_error < 0.05);
}

TEST_CASE("both samplers match the discrete-exact oracle (free case)") {
  DkParams prm;
  prm.nu = 10.0;
  prm.T = 1.0;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.steps = 128;
  prm.seed = 11;

  const Complex oracle = testing::dk_exact_quadratic(0, 0, 0, 0, 0, prm, kCfg, prm.steps);

  prm.samples = 60000;
  prm.method = DkParams::Method::rao_blackwell;
  prm.extrapolate = false;
  const MCEstimate rb = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
  CHECK(std::abs(rb.mean - oracle) < 4.0 * rb.std_error + 1e-6);

  prm.nu = 2.0;  // naive variance explodes with nu T; stay mild
  const Complex oracle2 = testing::dk_exact_quadratic(0, 0, 0, 0, 0, prm, kCfg, prm.steps);
  prm.method = DkParams::Method::naive;
  prm.samples = 60000;
  const MCEstimate nv = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
  CHECK(std::abs(nv.mean - oracle2) < 4.0 * nv.std_error + 1e-6);
}

TEST_CASE("rao-blackwell sampler matches the discrete-exact oracle (harmonic)") {
  DkParams prm;
  prm.nu = 10.0;
  prm.T = 1.0;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.steps = 128;
  prm.samples = 60000;
  prm.seed = 13;
  prm.method = DkParams::Method::rao_blackwell;
  prm.extrapolate = false;
  const SymbolFn h{parse_symbol("0.5*p^2 + 0.5*q^2")};
  const MCEstimate est = dk_propagator(h, prm, Gauge{}, kCfg);
  const Complex oracle = testing::dk_exact_quadratic(0.5, 0, 0.5, 0, 0, prm, kCfg, prm.steps);
  CHECK(std::abs(est.mean - oracle) < 4.0 * est.std_error + 1e-6);
  CHECK(est.method == "rao-blackwell");
}

TEST_CASE("rao-blackwell estimate approaches the continuum closed form") {
  DkParams prm;
  prm.T = 1.0;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.samples = 100000;
  prm.steps = 256;  // extrapolated pair 256/512
  prm.seed = 21;
  prm.method = DkParams::Method::rao_blackwell;
  for (double nu : {5.0, 10.0}) {
    prm.nu = nu;
    const MCEstimate est = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
    CHECK(est.method == "rao-blackwell-extrapolated");
    const Complex exact = dk_free_closed_form(prm, Gauge{}, kCfg);
    CHECK(std::abs(est.mean - exact) < 4.0 * est.std_error + 1e-3);
  }
}

TEST_CASE("systematic drift shrinks toward the overlap as nu grows") {
  DkParams prm;
  prm.T = 1.0;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.samples = 150000;
  prm.steps = 256;  // extrapolated pair 256/512
  prm.seed = 31;
  prm.method = DkParams::Method::rao_blackwell;
  const Complex overlap = overlap_analytic(CoherentLabel{1.0, 0.0}, CoherentLabel{0.0, 0.0}, kCfg);

  double drift_prev = 1e9;
  double slack_prev = 0.0;
  for (double nu : {2.0, 5.0, 10.0}) {
    prm.nu = nu;
    const MCEstimate est = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
    const double drift = std::abs(est.mean - overlap);
    CHECK(drift <= drift_prev + slack_prev + 3.0 * est.std_error + 1e-3);
    drift_prev = drift;
    slack_prev = 3.0 * est.std_error;
  }
  // At nu = 2 the drift is analytically resolvable and the estimate sees it.
  prm.nu = 2.0;
  const Complex exact2 = dk_free_closed_form(prm, Gauge{}, kCfg);
  CHECK(std::abs(exact2 - overlap) > 0.03);
  const MCEstimate est2 = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
  CHECK(std::abs(est2.mean - overlap) > 0.03);
}

TEST_CASE("time reversal: momentum-flipped label exchange preserves the estimate") {
  // For h even in p, K(a -> b) = K(flip b -> flip a) with flip negating the
  // momenta; plain conjugate symmetry holds only for h = 0.
  DkParams fwd;
  fwd.nu = 5.0;
  fwd.T = 0.8;
  fwd.labels = DkLabels{0.2, -0.4, 0.9, 0.3};
  fwd.samples = 80000;
  fwd.steps = 128;
  fwd.seed = 41;
  DkParams rev = fwd;
  rev.labels = DkLabels{-0.9, 0.3, -0.2, -0.4};
  rev.seed = 42;
  const SymbolFn h{parse_symbol("0.5*p^2 + 0.5*q^2")};
  const MCEstimate a = dk_propagator(h, fwd, Gauge{}, kCfg);
  const MCEstimate b = dk_propagator(h, rev, Gauge{}, kCfg);
  CHECK(std::abs(a.mean - b.mean) < 4.0 * (a.std_error + b.std_error) + 1e-4);

  // Conjugate (hermitian) symmetry for the h = 0 kernel.
  DkParams kfwd = fwd, krev = fwd;
  krev.labels = DkLabels{0.9, 0.3, 0.2, -0.4};
  krev.seed = 43;
  const MCEstimate ka = dk_propagator(SymbolFn(PolySymbol{}), kfwd, Gauge{}, kCfg);
  const MCEstimate kb = dk_propagator(SymbolFn(PolySymbol{}), krev, Gauge{}, kCfg);
  CHECK(std::abs(ka.mean - std::conj(kb.mean)) < 4.0 * (ka.std_error + kb.std_error) + 1e-4);
}

TEST_CASE("gauge enters only through the boundary phase") {
  DkParams prm;
  prm.nu = 5.0;
  prm.T = 0.5;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.5};
  prm.samples = 20000;
  prm.steps = 128;
  prm.seed = 17;
  const Gauge g([](double p, double q) { return 0.7 * p * q; });
  const MCEstimate plain = dk_propagator(SymbolFn(PolySymbol{}), prm, Gauge{}, kCfg);
  const MCEstimate gauged = dk_propagator(SymbolFn(PolySymbol{}), prm, g, kCfg);
  const Complex phase = std::exp(I * 0.7 * (1.0 * 0.5 - 0.0));
  CHECK(std::abs(gauged.mean - phase * plain.mean) < 1e-12);
}

TEST_CASE("estimates are deterministic in seed and worker count") {
  DkParams prm;
  prm.nu = 5.0;
  prm.T = 1.0;
  prm.labels = DkLabels{0.0, 0.0, 1.0, 0.0};
  prm.samples = 20000;
  prm.steps = 128;
  prm.seed = 77;
  const SymbolFn h{parse_symbol("0.5*p^2 + 0.5*q^2")};
  prm.workers = 1;
  const MCEstimate a = dk_propagator(h, prm, Gauge{}, kCfg);
  prm.workers = 2;
  const MCEstimate b = dk_propagator(h, prm, Gauge{}, kCfg);
  CHECK(a.mean.real() == b.mean.real());
  CHECK(a.mean.imag() == b.mean.imag());
  CHECK(a.std_error == b.std_error);

  prm.seed = 78;
  const MCEstimate c = dk_propagator(h, prm, Gauge{}, kCfg);
  CHECK(a.mean != c.mean);
}

TEST_CASE("whitelist enforcement with override") {
  DkParams prm;
  prm.nu = 2.0;
  prm.T = 0.2;
  prm.samples = 1000;
  prm.steps = 64;
  const SymbolFn odd{parse_symbol("q^3")};
  CHECK_THROWS(dk_propagator(odd, prm, Gauge{}, kCfg));
  prm.allow_non_whitelisted = true;
  prm.method = DkParams::Method::naive;
  CHECK_NOTHROW(dk_propagator(odd, prm, Gauge{}, kCfg));
}
