#ifndef CSQ_COHERENT_HPP
#define CSQ_COHERENT_HPP

#include <functional>
#include <utility>
#include <vector>

#include "csq/hilbert.hpp"
#include "csq/quadrature.hpp"
#include "csq/types.hpp"

namespace csq {

/// Phase-space label (p, q). Labels are expectation values, not eigenvalues.
struct CoherentLabel {
  double p = 0.0;
  double q = 0.0;
  std::string chart = "cartesian";
};

/// Scalar gauge G(p,q); enters the state only as the phase exp(-i G / hbar).
struct Gauge {
  std::function<double(double, double)> value;

  Gauge() = default;
  explicit Gauge(std::function<double(double, double)> g) : value(std::move(g)) {}

  bool is_zero() const { return !value; }
  double operator()(double p, double q) const { return value ? value(p, q) : 0.0; }
};

/// Normalized seed vector of the coherent-state family.
struct Fiducial {
  StateVector vec;
  bool centered = false;  // <P> = <Q> = 0 within 1e-10
};

Fiducial gaussian_fiducial(const SpaceConfig& cfg);
Fiducial fock_fiducial(const SpaceConfig& cfg, int n);
/// Normalizes and classifies an arbitrary seed vector.
Fiducial make_fiducial(StateVector v, const SpaceConfig& cfg);

/// Mean occupation |alpha|^2 = p^2/(2 hbar Omega) + Omega q^2 / (2 hbar).
double label_occupancy(const CoherentLabel& label, const SpaceConfig& cfg);

/// Labels are trusted while the Poissonian occupation sits well below the
/// truncation: |alpha|^2 <= dim / 8.
bool label_trusted(const CoherentLabel& label, const SpaceConfig& cfg);

/// |p,q> = e^{-iG/hbar} e^{-iqP/hbar} e^{ipQ/hbar} |eta>.
///
/// Amplitudes <m|p,q> are evaluated from the exact matrix elements of the
/// displacement on the untruncated basis (ladder recurrence), so every entry
/// with m < D is free of truncation error; only the m >= D tail is dropped.
/// Labels outside the trusted radius raise truncation_error because that
/// dropped tail is then no longer negligible for the state as a whole.
StateVector coherent_state(const CoherentLabel& label, const Fiducial& fid,
                           const Gauge& g, const SpaceConfig& cfg);

/// Same construction without the trusted-radius gate. Entries with m < D stay
/// exact at any label, which is what phase-space quadratures over large radii
/// need; the vector as a whole loses norm once the occupation nears D.
StateVector coherent_state_unchecked(const CoherentLabel& label, const Fiducial& fid,
                                     const Gauge& g, const SpaceConfig& cfg);

/// Closed-form overlap <p',q'|p,q> for the Gaussian fiducial and G = 0.
Complex overlap_analytic(const CoherentLabel& bra, const CoherentLabel& ket,
                         const SpaceConfig& cfg);

/// Max-abs deviation of the quadrature resolution of unity
///   integral |p,q><p,q| dp dq / (2 pi hbar)  vs  identity
/// measured on the leading block (default dim/2).
double resolution_check(const Fiducial& fid, const Gauge& g,
                        const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg,
                        int block = -1);

/// Max-abs deviation of the projection identity
///   K(a;b) = integral K(a;l) K(l;b) dmu(l)
/// over the supplied label pairs, using the analytic Gaussian kernel.
double reproducing_kernel_check(const std::vector<std::pair<CoherentLabel, CoherentLabel>>& pairs,
                                const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg);

}  // namespace csq

#endif
