#ifndef CSQ_HILBERT_HPP
#define CSQ_HILBERT_HPP

#include <vector>

#include "csq/types.hpp"

namespace csq {

/// Annihilation operator a with a|n> = sqrt(n)|n-1> on the truncated basis.
Mat ladder_lowering(const SpaceConfig& cfg);

struct CanonicalPair {
  Operator position;  // Q = sqrt(hbar/2 Omega) (a + a^dag)
  Operator momentum;  // P = i sqrt(hbar Omega / 2) (a^dag - a)
};

/// Position/momentum pair with [Q,P] = i hbar exact on the leading
/// (D-1) x (D-1) block; the truncation corrupts only the top edge.
CanonicalPair canonical_ops(const SpaceConfig& cfg);

/// Ground state of the frequency-Omega oscillator, i.e. the basis vector e_0
/// of the number basis built at that frequency.
StateVector ground_state(const SpaceConfig& cfg);

/// Number state |n> in the same basis.
StateVector number_state(const SpaceConfig& cfg, int n);

/// U = exp(-i H T / hbar) via hermitian eigendecomposition, so the result is
/// unitary to machine precision. Rejects non-hermitian H.
Operator evolve(const Operator& h, double t, const SpaceConfig& cfg);

/// Ascending eigenvalues of a hermitian operator.
std::vector<double> spectrum(const Operator& h);

struct EigenSystem {
  RealVec values;  // ascending
  Mat vectors;     // columns
};

EigenSystem eigensystem(const Operator& h);

}  // namespace csq

#endif
