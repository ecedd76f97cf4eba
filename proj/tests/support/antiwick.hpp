#ifndef CSQ_TESTS_ANTIWICK_HPP
#define CSQ_TESTS_ANTIWICK_HPP

#include "csq/symbols.hpp"
#include "csq/types.hpp"

namespace csq::testing {

// Independent oracle for the Toeplitz integral with the Gaussian fiducial:
// expands <m|p,q> analytically and integrates term by term with Gaussian
// moments, i.e.
//   <m| T(h) |n> = (1/pi) Integral h(p(a), q(a)) e^{-|a|^2} a^m conj(a)^n
//                  / sqrt(m! n!) d^2 a,
// reduced to factorial moments after expanding h in (a, conj a). No
// quadrature, no coherent-state code; pure combinatorics.
Mat antiwick_operator(const PolySymbol& h, const SpaceConfig& cfg);

}  // namespace csq::testing

#endif
