#include "csq/hilbert.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace csq {

Mat ladder_lowering(const SpaceConfig& cfg) {
  cfg.validate();
  Mat a = Mat::Zero(cfg.dim, cfg.dim);
  for (int n = 1; n < cfg.dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

CanonicalPair canonical_ops(const SpaceConfig& cfg) {
  cfg.validate();
  const Mat a = ladder_lowering(cfg);
  const Mat ad = a.adjoint();
  const double sq = std::sqrt(cfg.hbar / (2.0 * cfg.omega));
  const double sp = std::sqrt(cfg.hbar * cfg.omega / 2.0);
  CanonicalPair ops;
  ops.position = make_operator(sq * (a + ad), true);
  ops.momentum = make_operator(I * sp * (ad - a), true);
  return ops;
}

StateVector ground_state(const SpaceConfig& cfg) { return number_state(cfg, 0); }

StateVector number_state(const SpaceConfig& cfg, int n) {
  cfg.validate();
  if (n < 0 || n >= cfg.dim)
    throw std::invalid_argument("number_state: index outside truncated basis");
  StateVector v = StateVector::Zero(cfg.dim);
  v(n) = 1.0;
  return v;
}

EigenSystem eigensystem(const Operator& h) {
  if (!h.hermitian || hermiticity_defect(h.mat) > 1e-10)
    throw std::invalid_argument("eigensystem: operator must be hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> solver(h.mat);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensystem: eigensolver failed to converge");
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

Operator evolve(const Operator& h, double t, const SpaceConfig& cfg) {
  cfg.validate();
  const EigenSystem es = eigensystem(h);
  Vec phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    phases(k) = std::exp(-I * es.values(k) * t / cfg.hbar);
  Mat u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
  return Operator{std::move(u), false};
}

std::vector<double> spectrum(const Operator& h) {
  const EigenSystem es = eigensystem(h);
  return std::vector<double>(es.values.data(), es.values.data() + es.values.size());
}

}  // namespace csq
