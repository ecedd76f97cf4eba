#ifndef CSQ_PATHINT_HPP
#define CSQ_PATHINT_HPP

#include <cstdint>
#include <random>
#include <string>

#include "csq/coherent.hpp"
#include "csq/symbols.hpp"
#include "csq/types.hpp"

namespace csq {

/// Deterministic stream of standard normals: mt19937_64 keyed by
/// (seed, stream index), Box-Muller transform. The distribution code is
/// in-project so identical seeds give identical draws everywhere.
class NormalStream {
public:
  NormalStream(uint64_t seed, uint64_t stream);

  double next();
  double uniform();  // in [0, 1)

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Regularized Fresnel integral: integral exp(i y^2/2 - y^2/(2 nu)) dy
/// = sqrt(2 pi / (1/nu - i)), principal branch; -> sqrt(2 pi i) as nu -> inf.
Complex fresnel_toy(double nu);

// ============================ lattice propagator ============================

struct LatticeConfig {
  int slices = 16;          // N interior position integrals; epsilon = T/(N+1)
  double T = 1.0;
  double q_from = 0.0;
  double q_to = 0.0;
  double grid_halfwidth = 0.0;  // 0: auto
  int grid_nodes = 0;           // 0: auto

  double epsilon() const { return T / (slices + 1); }
  void validate() const;
};

/// Midpoint/Weyl lattice phase-space path integral for H = p^2/(2m) + V(q).
/// The momentum integrals are Gaussian-Fresnel and done analytically; the
/// position chain is evaluated on a 45-degree rotated contour (Cauchy moves
/// the oscillatory Gaussians onto decaying ones) with per-slice drift toward
/// the endpoints. Rejects symbols with non-quadratic momentum dependence.
Complex lattice_propagator(const SymbolFn& h, const LatticeConfig& lat,
                           const SpaceConfig& cfg);

/// Composition self-check: |K(T) - sum_z K_half(q'', z) K_half(z, q')| where
/// the half-chains run on an independently refined grid. Small defect means
/// the discretized kernel satisfies Chapman-Kolmogorov at this resolution.
double lattice_composition_defect(const SymbolFn& h, const LatticeConfig& lat,
                                  const SpaceConfig& cfg);

// ============================ Brownian bridges ==============================

struct BridgeEndpoints {
  double p_from = 0.0, q_from = 0.0;
  double p_to = 0.0, q_to = 0.0;
};

/// Pinned two-component Brownian path: p and q are independent bridges with
/// diffusion nu (variance of a free increment = nu dt).
struct BridgePath {
  RealVec times;  // steps+1 uniform samples on [0, T]
  RealVec p;
  RealVec q;
  double nu = 1.0;
};

BridgePath sample_bridge(double nu, double T, const BridgeEndpoints& ends, int steps,
                         uint64_t seed, uint64_t stream = 0);

/// Phase exponent (i/hbar) [ sum 1/2 (p_{l+1}+p_l)(q_{l+1}-q_l)
///                           + G(end) - G(start) - trapezoid h dt ].
Complex stratonovich_action(const BridgePath& path, const Gauge& g, const SymbolFn& h,
                            double hbar);

// ======================= Daubechies-Klauder propagator ======================

struct MCEstimate {
  Complex mean{0.0, 0.0};
  double std_error = 0.0;   // sample std deviation of the estimator / sqrt(n)
  long n_samples = 0;       // raw path count (antithetic pairs count as two)
  uint64_t seed = 0;
  int steps = 0;
  std::string method;
};

struct DkLabels {
  double p_from = 0.0, q_from = 0.0;
  double p_to = 0.0, q_to = 0.0;
};

struct DkParams {
  double nu = 10.0;
  double T = 1.0;
  DkLabels labels;
  long samples = 100000;  // raw path count; rounded up to full antithetic pairs
  int steps = 0;          // 0: method default (4096 naive, 2048/4096 accelerated pair)
  uint64_t seed = 1;
  int workers = 0;        // 0: hardware concurrency
  enum class Method { automatic, naive, rao_blackwell } method = Method::automatic;
  double proposal_widening = 1.2;  // covariance head-room of the importance sampler
  bool allow_non_whitelisted = false;
  // The discretized Stratonovich functional carries an exp(+ (hbar nu T)^2 /
  // (8 N)) modulus bias; the accelerated estimator removes it by combining
  // runs at N and 2N (ratio extrapolation, exact for the exponential law).
  bool extrapolate = true;
};

/// Wiener-regularized coherent-state propagator at finite nu:
///   2 pi hbar e^{hbar nu T/2} * (pinned Wiener mass) * E_bridge[e^{iS/hbar}],
/// estimated by Monte Carlo over pinned paths.
///
/// The divergent prefactor and the pinned-measure mass are kept analytically;
/// sampling only ever sees bounded weights. For h with at most quadratic
/// momentum dependence the momentum bridge is integrated out in closed form
/// and the position bridge is importance-sampled from the exact h = 0
/// posterior Gaussian (widened by proposal_widening), which removes the
/// e^{-hbar nu T/2} interference deficit from the sample noise. The naive
/// two-bridge sampler remains available and is exact in expectation for any
/// admissible h, but its relative error grows like e^{hbar nu T/2}.
MCEstimate dk_propagator(const SymbolFn& h, const DkParams& params, const Gauge& g,
                         const SpaceConfig& cfg);

/// Exact finite-nu value for h = 0 (two-dimensional magnetic kernel):
///   [1/(1 - e^{-2z})] exp(-coth(z) R^2/(4 hbar)) e^{i Phi},  z = hbar nu T/2,
/// with R^2 the squared label separation and Phi the symplectic-area phase
/// plus gauge boundary terms. Tends to the coherent-state overlap as
/// nu -> infinity.
Complex dk_free_closed_form(const DkParams& params, const Gauge& g, const SpaceConfig& cfg);

}  // namespace csq

#endif
