#ifndef CSQ_SPIN_HPP
#define CSQ_SPIN_HPP

#include <cmath>
#include <functional>

#include "csq/types.hpp"

namespace csq {

/// SU(2) kinematics on the spherical phase space of radius R^2 = s.
struct SpinConfig {
  double s = 0.5;  // half-integer spin
  double hbar = 1.0;

  int dim() const { return int(std::lround(2.0 * s)) + 1; }
  void validate() const;
};

struct SpinLabel {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2 pi)
};

struct SpinTriple {
  Operator s1, s2, s3;
};

/// Irreducible (2s+1)-dimensional spin matrices with [S1,S2] = i hbar S3 and
/// cyclic, exact. Basis ordered m = s, s-1, ..., -s.
SpinTriple spin_ops(const SpinConfig& cfg);

/// |theta,phi> = e^{-i phi S3/hbar} e^{-i theta S2/hbar} |s,s>.
StateVector spin_coherent(const SpinLabel& label, const SpinConfig& cfg);

/// Max-abs deviation of (2s+1)/4pi * integral |t,f><t,f| sin(t) dt df from
/// the identity, with Gauss-Legendre in cos(theta) x trapezoid in phi.
double spin_resolution_check(const SpinConfig& cfg, int ntheta = 64, int nphi = 64);

/// Toeplitz quantization on the sphere:
///   H = (2s+1)/4pi * integral h(t,f) |t,f><t,f| sin(t) dt df.
/// Hermitian for real h; checked against a doubled-node refinement.
Operator spin_toeplitz(const std::function<double(double, double)>& h, const SpinConfig& cfg,
                       int ntheta = 64, int nphi = 64);

}  // namespace csq

#endif
