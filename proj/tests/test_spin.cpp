#include <cmath>

#include <doctest.h>

#include "csq/spin.hpp"

using namespace csq;

namespace {

Mat casimir(const SpinTriple& ops) {
  return ops.s1.mat * ops.s1.mat + ops.s2.mat * ops.s2.mat + ops.s3.mat * ops.s3.mat;
}

StateVector binomial_coherent(const SpinLabel& label, const SpinConfig& cfg) {
  // d^s_{m,s}(theta) e^{-i m phi} on the m = s..-s basis.
  const int d = cfg.dim();
  StateVector v(d);
  for (int k = 0; k < d; ++k) {
    const double m = cfg.s - k;
    const double lc = 0.5 * (std::lgamma(2.0 * cfg.s + 1.0) - std::lgamma(cfg.s - m + 1.0) -
                             std::lgamma(cfg.s + m + 1.0));
    const double amp = std::exp(lc + (cfg.s + m) * std::log(std::cos(label.theta / 2.0)) +
                                (cfg.s - m) * std::log(std::max(1e-300, std::sin(label.theta / 2.0))));
    v(k) = amp * std::exp(-I * m * label.phi);
  }
  return v;
}

}  // namespace

TEST_CASE("spin-1/2 operators are the Pauli matrices over two") {
  SpinConfig cfg{0.5, 1.0};
  const SpinTriple ops = spin_ops(cfg);
  Mat sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  CHECK(max_abs(ops.s1.mat - 0.5 * sx) < 1e-15);
  CHECK(max_abs(ops.s2.mat - 0.5 * sy) < 1e-15);
  CHECK(max_abs(ops.s3.mat - 0.5 * sz) < 1e-15);
  CHECK(max_abs(casimir(ops) - 0.75 * Mat::Identity(2, 2)) < 1e-15);
}

TEST_CASE("Casimir equals s(s+1) hbar^2 exactly up to s = 20") {
  for (double s = 0.5; s <= 20.0; s += 0.5) {
    SpinConfig cfg{s, 1.0};
    const SpinTriple ops = spin_ops(cfg);
    const Mat c = casimir(ops) - s * (s + 1.0) * Mat::Identity(cfg.dim(), cfg.dim());
    CHECK(max_abs(c) <= 1e-12 * s * (s + 1.0));
  }
  SpinConfig one{1.0, 1.0};
  CHECK(max_abs(casimir(spin_ops(one)) - 2.0 * Mat::Identity(3, 3)) < 1e-14);
}

TEST_CASE("commutators close exactly: [S1, S2] = i hbar S3 and cyclic") {
  for (double s : {0.5, 1.0, 1.5, 5.0, 20.0}) {
    SpinConfig cfg{s, 1.0};
    const SpinTriple ops = spin_ops(cfg);
    auto comm = [](const Mat& a, const Mat& b) { return (a * b - b * a).eval(); };
    CHECK(max_abs(comm(ops.s1.mat, ops.s2.mat) - I * ops.s3.mat) < 1e-13 * (1.0 + s));
    CHECK(max_abs(comm(ops.s2.mat, ops.s3.mat) - I * ops.s1.mat) < 1e-13 * (1.0 + s));
    CHECK(max_abs(comm(ops.s3.mat, ops.s1.mat) - I * ops.s2.mat) < 1e-13 * (1.0 + s));
  }
  CHECK_THROWS(spin_ops(SpinConfig{0.7, 1.0}));
}

TEST_CASE("coherent states: poles and equator") {
  SpinConfig cfg{1.5, 1.0};
  const StateVector north = spin_coherent(SpinLabel{0.0, 0.0}, cfg);
  CHECK(std::abs(north(0) - 1.0) < 1e-14);
  CHECK(north.tail(3).norm() < 1e-14);

  const StateVector south = spin_coherent(SpinLabel{M_PI, 0.3}, cfg);
  CHECK(std::abs(std::abs(south(cfg.dim() - 1)) - 1.0) < 1e-12);

  SpinConfig half{0.5, 1.0};
  const SpinTriple ops = spin_ops(half);
  const StateVector equator = spin_coherent(SpinLabel{M_PI / 2.0, 0.0}, half);
  CHECK(expectation(equator, ops.s1).real() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mean spin direction follows the label") {
  SpinConfig cfg{2.5, 1.0};
  const SpinTriple ops = spin_ops(cfg);
  for (auto [theta, phi] : {std::pair{0.7, 1.9}, {2.4, 4.4}, {1.2, 0.0}}) {
    const StateVector psi = spin_coherent(SpinLabel{theta, phi}, cfg);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-13);
    CHECK(std::abs(expectation(psi, ops.s3).real() - cfg.s * std::cos(theta)) < 1e-12);
    CHECK(std::abs(expectation(psi, ops.s1).real() -
                   cfg.s * std::sin(theta) * std::cos(phi)) < 1e-12);
  }
}

TEST_CASE("rotation construction matches the binomial closed form") {
  SpinConfig cfg{1.5, 1.0};
  for (auto [theta, phi] : {std::pair{0.9, 2.2}, {2.7, 5.1}}) {
    const StateVector built = spin_coherent(SpinLabel{theta, phi}, cfg);
    const StateVector closed = binomial_coherent(SpinLabel{theta, phi}, cfg);
    // Allow a global phase between the two conventions.
    const Complex phase = closed.dot(built);
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
    CHECK((built - phase / std::abs(phase) * closed).norm() < 1e-12);
  }
}

TEST_CASE("spherical resolution of unity") {
  CHECK(spin_resolution_check(SpinConfig{0.5, 1.0}) <= 1e-10);
  CHECK(spin_resolution_check(SpinConfig{5.0, 1.0}) <= 1e-9);
  const double base = spin_resolution_check(SpinConfig{2.0, 1.0}, 64, 64);
  const double doubled = spin_resolution_check(SpinConfig{2.0, 1.0}, 128, 128);
  CHECK(doubled <= base + 1e-12);
}

TEST_CASE("spherical Toeplitz: unit symbol gives the identity") {
  SpinConfig cfg{1.5, 1.0};
  const Operator one = spin_toeplitz([](double, double) { return 1.0; }, cfg);
  CHECK(max_abs(one.mat - Mat::Identity(cfg.dim(), cfg.dim())) < 1e-10);
}

TEST_CASE("spherical Toeplitz of cos(theta) is proportional to S3") {
  for (double s : {0.5, 1.0, 2.0}) {
    SpinConfig cfg{s, 1.0};
    const SpinTriple ops = spin_ops(cfg);
    const Operator top = spin_toeplitz([](double t, double) { return std::cos(t); }, cfg);
    // Proportionality: remove the S3 projection and nothing is left.
    const double coeff = top.mat.cwiseProduct(ops.s3.mat.conjugate()).sum().real() /
                         ops.s3.mat.squaredNorm();
    CHECK(max_abs(top.mat - coeff * ops.s3.mat) < 1e-10);

    // Brute-force oracle: Simpson quadrature of the (0,0) entry over theta.
    // <s,s|t,f><t,f|s,s> = cos^{4s}(t/2), so
    // T_00 = (2s+1)/2 * Integral cos(t) cos^{4s}(t/2) sin(t) dt.
    const int n = 4000;
    double simpson = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double t = M_PI * k / n;
      const double f = std::cos(t) * std::pow(std::cos(t / 2.0), 4.0 * s) * std::sin(t);
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      simpson += w * f;
    }
    simpson *= (M_PI / n) / 3.0 * (2.0 * s + 1.0) / 2.0;
    CHECK(std::abs(coeff * ops.s3.mat(0, 0).real() - simpson) < 1e-8);
  }
}

TEST_CASE("spherical Toeplitz is rotationally covariant") {
  SpinConfig cfg{1.5, 1.0};
  const SpinTriple ops = spin_ops(cfg);
  const double alpha = 0.8;

  // U = e^{-i alpha S2 / hbar}; U T(h) U^dag = T(h o R^{-1}) with R = R_y(alpha).
  Eigen::SelfAdjointEigenSolver<Mat> es(ops.s2.mat);
  Vec phases(cfg.dim());
  for (int k = 0; k < cfg.dim(); ++k) phases(k) = std::exp(-I * es.eigenvalues()(k) * alpha);
  const Mat u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

  const Operator tz = spin_toeplitz([](double t, double) { return std::cos(t); }, cfg);
  const Operator rotated = spin_toeplitz(
      [alpha](double t, double f) {
        const double x = std::sin(t) * std::cos(f), z = std::cos(t);
        return x * std::sin(alpha) + z * std::cos(alpha);
      },
      cfg);
  CHECK(max_abs(rotated.mat - u * tz.mat * u.adjoint()) < 1e-8);
}
