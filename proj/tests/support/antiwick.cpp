#include "antiwick.hpp"

#include <cmath>
#include <map>

namespace csq::testing {

namespace {

double binom(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// Multiplies acc by the expansion of p^a q^b in powers (alpha^j conj^k).
std::map<std::pair<int, int>, Complex> monomial_in_alpha(int a, int b, const SpaceConfig& cfg) {
  // p = -i sqrt(hbar Omega / 2) (alpha - conj alpha)
  // q =    sqrt(hbar / (2 Omega)) (alpha + conj alpha)
  std::map<std::pair<int, int>, Complex> out;
  const Complex pc = -I * std::sqrt(cfg.hbar * cfg.omega / 2.0);
  const double qc = std::sqrt(cfg.hbar / (2.0 * cfg.omega));
  for (int r = 0; r <= a; ++r) {
    const Complex pterm = std::pow(pc, a) * binom(a, r) * (((a - r) % 2) ? -1.0 : 1.0);
    for (int s = 0; s <= b; ++s) {
      const Complex qterm = std::pow(qc, b) * binom(b, s);
      out[{r + s, (a - r) + (b - s)}] += pterm * qterm;
    }
  }
  return out;
}

}  // namespace

Mat antiwick_operator(const PolySymbol& h, const SpaceConfig& cfg) {
  cfg.validate();
  std::map<std::pair<int, int>, Complex> expansion;
  for (const auto& [powers, c] : h.terms())
    for (const auto& [jk, gamma] : monomial_in_alpha(powers.first, powers.second, cfg))
      expansion[jk] += c * gamma;

  Mat out = Mat::Zero(cfg.dim, cfg.dim);
  for (const auto& [jk, gamma] : expansion) {
    const auto [j, k] = jk;
    for (int m = 0; m < cfg.dim; ++m) {
      const int n = m + j - k;
      if (n < 0 || n >= cfg.dim) continue;
      const double moment =
          std::exp(std::lgamma(m + j + 1.0) - 0.5 * std::lgamma(m + 1.0) -
                   0.5 * std::lgamma(n + 1.0));
      out(m, n) += gamma * moment;
    }
  }
  return out;
}

}  // namespace csq::testing
