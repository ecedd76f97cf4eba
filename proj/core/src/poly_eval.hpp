#ifndef CSQ_SRC_POLY_EVAL_HPP
#define CSQ_SRC_POLY_EVAL_HPP

#include <vector>

#include "csq/symbols.hpp"
#include "csq/types.hpp"

namespace csq::detail {

/// Dense one-variable polynomial with Horner evaluation (real or complex
/// argument); used in hot loops where the sparse map is too slow.
struct QPoly {
  std::vector<double> coeffs;  // ascending powers; empty means 0

  bool zero() const { return coeffs.empty(); }

  template <typename T>
  T operator()(T x) const {
    if (coeffs.empty()) return T(0);
    T r = T(coeffs.back());
    for (int k = int(coeffs.size()) - 2; k >= 0; --k) r = r * x + T(coeffs[k]);
    return r;
  }
};

/// q-only part of a phase-space polynomial as a dense QPoly.
inline QPoly q_part(const PolySymbol& s) {
  QPoly out;
  for (const auto& [powers, c] : s.terms()) {
    if (powers.first != 0) continue;
    if (int(out.coeffs.size()) <= powers.second) out.coeffs.resize(powers.second + 1, 0.0);
    out.coeffs[powers.second] += c;
  }
  while (!out.coeffs.empty() && out.coeffs.back() == 0.0) out.coeffs.pop_back();
  return out;
}

/// Splits h = kp2 * p^2 + kp1 * p + V(q); throws if other momentum terms
/// appear.
struct MomentumSplit {
  double kp2 = 0.0;
  double kp1 = 0.0;
  QPoly v;
};

inline MomentumSplit split_momentum_quadratic(const PolySymbol& s, const char* who) {
  MomentumSplit out;
  PolySymbol qonly;
  for (const auto& [powers, c] : s.terms()) {
    const auto [a, b] = powers;
    if (a == 0) {
      qonly.add_term(0, b, c);
    } else if (a == 1 && b == 0) {
      out.kp1 = c;
    } else if (a == 2 && b == 0) {
      out.kp2 = c;
    } else {
      throw std::invalid_argument(std::string(who) +
                                  ": momentum dependence must be a pure quadratic "
                                  "(terms p^2, p, and functions of q only)");
    }
  }
  out.v = q_part(qonly);
  return out;
}

}  // namespace csq::detail

#endif
