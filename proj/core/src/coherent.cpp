#include "csq/coherent.hpp"

#include <cmath>
#include <stdexcept>

namespace csq {

namespace {

Complex displacement_parameter(const CoherentLabel& label, const SpaceConfig& cfg) {
  // alpha = (Omega q + i p) / sqrt(2 hbar Omega)
  return Complex(cfg.omega * label.q, label.p) / std::sqrt(2.0 * cfg.hbar * cfg.omega);
}

// Columns n = 0..ncols-1 of <m|D(alpha)|n> for m = 0..dim-1, from the exact
// untruncated matrix elements:
//   a D(alpha) = D(alpha) (a + alpha)
//   => sqrt(m+1) c[m+1][n] = sqrt(n) c[m][n-1] + alpha c[m][n],
// seeded by c[0][n] = e^{-|a|^2/2} (-conj(alpha))^n / sqrt(n!).
Mat displacement_columns(Complex alpha, int dim, int ncols) {
  const double x = std::norm(alpha);
  if (x > 1400.0)
    throw truncation_error("displacement_columns: |alpha|^2 too large, amplitudes underflow");
  Mat c(dim, ncols);
  c(0, 0) = std::exp(-0.5 * x);
  for (int n = 1; n < ncols; ++n)
    c(0, n) = c(0, n - 1) * (-std::conj(alpha)) / std::sqrt(double(n));
  for (int n = 0; n < ncols; ++n)
    for (int m = 0; m + 1 < dim; ++m) {
      Complex lower = (n > 0) ? std::sqrt(double(n)) * c(m, n - 1) : Complex(0.0);
      c(m + 1, n) = (lower + alpha * c(m, n)) / std::sqrt(double(m + 1));
    }
  return c;
}

StateVector displaced(const CoherentLabel& label, const Fiducial& fid, const Gauge& g,
                      const SpaceConfig& cfg) {
  const int dim = cfg.dim;
  const Complex alpha = displacement_parameter(label, cfg);
  int ncols = 0;
  for (int n = 0; n < dim; ++n)
    if (std::abs(fid.vec(n)) > 1e-15) ncols = n + 1;
  if (ncols == 0) throw std::invalid_argument("coherent_state: fiducial is the zero vector");

  const Mat c = displacement_columns(alpha, dim, ncols);
  StateVector amps = c * fid.vec.head(ncols);

  // Split-form phase: e^{-iqP/h} e^{ipQ/h} = e^{-ipq/2h} D(alpha).
  Complex phase = std::exp(-I * (label.p * label.q) / (2.0 * cfg.hbar));
  if (!g.is_zero()) phase *= std::exp(-I * g(label.p, label.q) / cfg.hbar);
  return phase * amps;
}

}  // namespace

Fiducial gaussian_fiducial(const SpaceConfig& cfg) {
  return Fiducial{ground_state(cfg), true};
}

Fiducial fock_fiducial(const SpaceConfig& cfg, int n) {
  return Fiducial{number_state(cfg, n), true};
}

Fiducial make_fiducial(StateVector v, const SpaceConfig& cfg) {
  cfg.validate();
  if (v.size() != cfg.dim)
    throw std::invalid_argument("make_fiducial: vector length does not match dim");
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw std::invalid_argument("make_fiducial: vector not normalizable");
  v /= norm;
  const CanonicalPair ops = canonical_ops(cfg);
  const bool centered = std::abs(expectation(v, ops.position)) <= 1e-10 &&
                        std::abs(expectation(v, ops.momentum)) <= 1e-10;
  return Fiducial{std::move(v), centered};
}

double label_occupancy(const CoherentLabel& label, const SpaceConfig& cfg) {
  return label.p * label.p / (2.0 * cfg.hbar * cfg.omega) +
         cfg.omega * label.q * label.q / (2.0 * cfg.hbar);
}

bool label_trusted(const CoherentLabel& label, const SpaceConfig& cfg) {
  return label_occupancy(label, cfg) <= cfg.dim / 8.0;
}

StateVector coherent_state(const CoherentLabel& label, const Fiducial& fid,
                           const Gauge& g, const SpaceConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(label.p) || !std::isfinite(label.q))
    throw std::invalid_argument("coherent_state: label must be finite");
  if (!label_trusted(label, cfg))
    throw truncation_error("coherent_state: label outside trusted radius |alpha|^2 <= dim/8; "
                           "increase dim or shrink the label");
  return displaced(label, fid, g, cfg);
}

StateVector coherent_state_unchecked(const CoherentLabel& label, const Fiducial& fid,
                                     const Gauge& g, const SpaceConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(label.p) || !std::isfinite(label.q))
    throw std::invalid_argument("coherent_state: label must be finite");
  return displaced(label, fid, g, cfg);
}

Complex overlap_analytic(const CoherentLabel& bra, const CoherentLabel& ket,
                         const SpaceConfig& cfg) {
  cfg.validate();
  const double dp = bra.p - ket.p, dq = bra.q - ket.q;
  const Complex expo =
      I * (bra.p + ket.p) * (bra.q - ket.q) / (2.0 * cfg.hbar) -
      (dp * dp / cfg.omega + cfg.omega * dq * dq) / (4.0 * cfg.hbar);
  return std::exp(expo);
}

double resolution_check(const Fiducial& fid, const Gauge& g,
                        const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg,
                        int block) {
  cfg.validate();
  quad.validate();
  if (block <= 0) block = cfg.dim / 2;
  if (block > cfg.dim) throw std::invalid_argument("resolution_check: block exceeds dim");

  const QuadratureRule rule = gauss_legendre(quad.nodes_per_axis, -quad.radius, quad.radius);
  Mat acc = Mat::Zero(block, block);
  const double measure = 1.0 / (2.0 * M_PI * cfg.hbar);
  for (int i = 0; i < quad.nodes_per_axis; ++i) {
    for (int j = 0; j < quad.nodes_per_axis; ++j) {
      const CoherentLabel label{rule.nodes[i], rule.nodes[j]};
      const StateVector psi = coherent_state_unchecked(label, fid, g, cfg);
      const double w = rule.weights[i] * rule.weights[j] * measure;
      acc.selfadjointView<Eigen::Lower>().rankUpdate(psi.head(block), w);
    }
  }
  Mat full = acc.selfadjointView<Eigen::Lower>();
  full -= Mat::Identity(block, block);
  return max_abs(full);
}

double reproducing_kernel_check(const std::vector<std::pair<CoherentLabel, CoherentLabel>>& pairs,
                                const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg) {
  cfg.validate();
  quad.validate();
  const QuadratureRule rule = gauss_legendre(quad.nodes_per_axis, -quad.radius, quad.radius);
  const double measure = 1.0 / (2.0 * M_PI * cfg.hbar);
  double worst = 0.0;
  for (const auto& [a, b] : pairs) {
    Complex integral = 0.0;
    for (int i = 0; i < quad.nodes_per_axis; ++i)
      for (int j = 0; j < quad.nodes_per_axis; ++j) {
        const CoherentLabel mid{rule.nodes[i], rule.nodes[j]};
        integral += rule.weights[i] * rule.weights[j] *
                    overlap_analytic(a, mid, cfg) * overlap_analytic(mid, b, cfg);
      }
    integral *= measure;
    worst = std::max(worst, std::abs(integral - overlap_analytic(a, b, cfg)));
  }
  return worst;
}

}  // namespace csq
