#include "csq/spin.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "csq/quadrature.hpp"

namespace csq {

void SpinConfig::validate() const {
  const double twos = 2.0 * s;
  if (!(s > 0.0) || std::abs(twos - std::lround(twos)) > 1e-12)
    throw std::invalid_argument("SpinConfig: s must be a positive half-integer");
  if (!(hbar > 0.0)) throw std::invalid_argument("SpinConfig: hbar must be > 0");
}

SpinTriple spin_ops(const SpinConfig& cfg) {
  cfg.validate();
  const int d = cfg.dim();
  Mat sp = Mat::Zero(d, d);  // raising: S+ |s,m> = hbar sqrt(s(s+1)-m(m+1)) |s,m+1>
  for (int k = 1; k < d; ++k) {
    const double m = cfg.s - k;  // row k-1 holds m+1 = s-k+1
    sp(k - 1, k) = cfg.hbar * std::sqrt(cfg.s * (cfg.s + 1.0) - m * (m + 1.0));
  }
  const Mat sm = sp.adjoint();
  SpinTriple out;
  out.s1 = make_operator(0.5 * (sp + sm), true);
  out.s2 = make_operator(-0.5 * I * (sp - sm), true);
  Mat s3 = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) s3(k, k) = cfg.hbar * (cfg.s - k);
  out.s3 = make_operator(std::move(s3), true);
  return out;
}

namespace {

Mat rotation(const Operator& generator, double angle, double hbar) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(generator.mat);
  Vec phases(solver.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k)
    phases(k) = std::exp(-I * solver.eigenvalues()(k) * angle / hbar);
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace

StateVector spin_coherent(const SpinLabel& label, const SpinConfig& cfg) {
  cfg.validate();
  if (label.theta < -1e-12 || label.theta > M_PI + 1e-12)
    throw std::invalid_argument("spin_coherent: theta outside [0, pi]");
  const SpinTriple ops = spin_ops(cfg);
  StateVector v = StateVector::Zero(cfg.dim());
  v(0) = 1.0;  // highest weight |s, s>
  v = rotation(ops.s2, label.theta, cfg.hbar) * v;
  v = rotation(ops.s3, label.phi, cfg.hbar) * v;
  return v;
}

namespace {

Mat sphere_projector_integral(const std::function<double(double, double)>& h,
                              const SpinConfig& cfg, int ntheta, int nphi) {
  const int d = cfg.dim();
  // x = cos(theta) nodes; the integrand is polynomial in x and a finite
  // Fourier series in phi, so this quadrature is exact once the node counts
  // clear the bandwidth.
  const QuadratureRule xrule = gauss_legendre(ntheta, -1.0, 1.0);
  const QuadratureRule frule = periodic_trapezoid(nphi, 2.0 * M_PI);
  Mat acc = Mat::Zero(d, d);
  const double measure = (2.0 * cfg.s + 1.0) / (4.0 * M_PI);
  for (int i = 0; i < ntheta; ++i) {
    const double theta = std::acos(xrule.nodes[i]);
    for (int j = 0; j < nphi; ++j) {
      const double phi = frule.nodes[j];
      const double hv = h(theta, phi);
      if (hv == 0.0) continue;
      const StateVector psi = spin_coherent(SpinLabel{theta, phi}, cfg);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(
          psi, measure * xrule.weights[i] * frule.weights[j] * hv);
    }
  }
  return Mat(acc.selfadjointView<Eigen::Lower>());
}

}  // namespace

double spin_resolution_check(const SpinConfig& cfg, int ntheta, int nphi) {
  cfg.validate();
  const Mat m = sphere_projector_integral([](double, double) { return 1.0; }, cfg, ntheta, nphi);
  return max_abs(m - Mat::Identity(cfg.dim(), cfg.dim()));
}

Operator spin_toeplitz(const std::function<double(double, double)>& h, const SpinConfig& cfg,
                       int ntheta, int nphi) {
  cfg.validate();
  Mat result = sphere_projector_integral(h, cfg, ntheta, nphi);
  const Mat refined = sphere_projector_integral(h, cfg, 2 * ntheta, 2 * nphi);
  if (max_abs(result - refined) > 1e-8)
    throw std::runtime_error("spin_toeplitz: quadrature not converged; raise node counts");
  const bool herm = hermiticity_defect(result) <= 1e-10;
  if (herm) result = 0.5 * (result + result.adjoint().eval());
  return Operator{std::move(result), herm};
}

}  // namespace csq
