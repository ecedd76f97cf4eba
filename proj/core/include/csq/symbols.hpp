#ifndef CSQ_SYMBOLS_HPP
#define CSQ_SYMBOLS_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csq/coherent.hpp"
#include "csq/types.hpp"

namespace csq {

/// Real polynomial in the phase-space coordinates: sum of c * p^a q^b.
class PolySymbol {
public:
  PolySymbol() = default;

  static PolySymbol constant(double c) {
    PolySymbol s;
    s.set(0, 0, c);
    return s;
  }
  static PolySymbol monomial(int a, int b, double c = 1.0) {
    PolySymbol s;
    s.set(a, b, c);
    return s;
  }

  void set(int a, int b, double c);
  void add_term(int a, int b, double c);
  double coeff(int a, int b) const;

  double eval(double p, double q) const;
  int degree() const;
  bool empty() const { return terms_.empty(); }

  PolySymbol& operator+=(const PolySymbol& other);
  PolySymbol& operator*=(double s);
  friend PolySymbol operator+(PolySymbol a, const PolySymbol& b) { return a += b; }
  friend PolySymbol operator-(PolySymbol a, const PolySymbol& b);
  friend PolySymbol operator*(double s, PolySymbol a) { return a *= s; }

  PolySymbol d_dp() const;
  PolySymbol d_dq() const;

  /// Terms keyed by (p-power, q-power), ascending; zero coefficients pruned.
  const std::map<std::pair<int, int>, double>& terms() const { return terms_; }

private:
  std::map<std::pair<int, int>, double> terms_;
};

/// Heat smoothing exp[(vp/2) d^2/dp^2 + (vq/2) d^2/dq^2] h; finite series on
/// polynomials. This is what the coherent-state average does to a lower
/// symbol: upper = blur(lower) with vp = hbar*Omega, vq = hbar/Omega.
PolySymbol gaussian_blur(const PolySymbol& h, double var_p, double var_q);

/// Inverse of gaussian_blur on polynomials (alternating finite series).
PolySymbol gaussian_deblur(const PolySymbol& h, double var_p, double var_q);

/// A classical symbol: polynomial, or an arbitrary evaluator with a declared
/// exponential growth rate (|h| <= C exp[rate * (p^2+q^2)]) so the
/// admissibility integrals can be classified.
class SymbolFn {
public:
  SymbolFn() : SymbolFn(PolySymbol{}) {}
  SymbolFn(PolySymbol poly) : poly_(std::move(poly)) {}
  static SymbolFn callable(std::function<double(double, double)> fn,
                           std::optional<double> growth_rate = std::nullopt);

  bool is_poly() const { return poly_.has_value(); }
  const PolySymbol& poly() const;
  std::optional<double> growth_rate() const { return growth_; }

  double operator()(double p, double q) const;

private:
  std::optional<PolySymbol> poly_;
  std::function<double(double, double)> fn_;
  std::optional<double> growth_;
};

struct ConditionsReport {
  bool cond1 = false;  // integral h^2 exp(-A r^2) finite for every A > 0
  bool cond2 = false;  // integral h^4 exp(-B r^2) finite for some B < 1/2
  double witness_A = 0.0;  // a failing A when cond1 is false
};

/// Admissibility of a lower symbol for the regularized propagator.
/// Polynomials always pass; callables need a declared growth rate.
ConditionsReport conditions_check(const SymbolFn& h);

/// Rectangular evaluation grid for tabulated symbols.
struct SymbolGrid {
  double pmin = -2.0, pmax = 2.0;
  int np = 21;
  double qmin = -2.0, qmax = 2.0;
  int nq = 21;

  double p(int i) const { return np == 1 ? pmin : pmin + (pmax - pmin) * i / (np - 1); }
  double q(int j) const { return nq == 1 ? qmin : qmin + (qmax - qmin) * j / (nq - 1); }
};

struct TabulatedSymbol {
  SymbolGrid grid;
  RealMat values;       // values(i, j) = H(p_i, q_j)
  double imag_defect = 0.0;
};

/// Upper symbol H(p,q) = <p,q|H|p,q> tabulated on the grid. All grid points
/// must lie inside the trusted label radius.
TabulatedSymbol upper_symbol(const Operator& op, const Fiducial& fid,
                             const SymbolGrid& grid, const SpaceConfig& cfg);

struct ToeplitzOptions {
  int certified_block = -1;     // defaults to dim/2
  double refine_tol = 1e-6;     // max entry drift allowed between refinements
  double tail_tol = 1e-8;       // Gaussian tail bound outside the radius
  bool skip_checks = false;     // skip refinement + admissibility (internal use)
};

/// Radius/nodes adequate for entries up to `block` with a degree-`deg` symbol.
PhaseSpaceQuadrature default_toeplitz_quadrature(const SpaceConfig& cfg, int deg,
                                                 int block = -1);

/// Toeplitz quantization: H = integral h(p,q) |p,q><p,q| dp dq / (2 pi hbar)
/// by tensor Gauss-Legendre quadrature. Hermitian for real h; entries within
/// the certified block carry the stated tail bound.
Operator toeplitz_quantize(const SymbolFn& h, const Fiducial& fid,
                           const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg,
                           const ToeplitzOptions& opts = {});

/// Explicitly ordered polynomial in the canonical operators: each term is a
/// coefficient times a word over the letters 'P' and 'Q'.
struct OperatorPoly {
  std::vector<std::pair<Complex, std::string>> terms;

  OperatorPoly& add(Complex c, std::string word);
  Operator to_operator(const SpaceConfig& cfg) const;
};

/// Exact polynomial upper symbol of an ordered operator polynomial with the
/// Gaussian fiducial (shift P -> P+p, Q -> Q+q, then ground-state moments).
/// The result must come out real (hermitian target).
PolySymbol upper_symbol_poly(const OperatorPoly& op, const SpaceConfig& cfg);

/// Lower symbol h with toeplitz_quantize(h) reproducing the target:
/// finite-order inversion of the Gaussian smoothing. Gaussian fiducial only.
PolySymbol lower_symbol_poly(const OperatorPoly& target, const SpaceConfig& cfg);
PolySymbol lower_symbol_from_upper(const PolySymbol& upper, const SpaceConfig& cfg);

/// Whitelist stand-in for essential self-adjointness: real polynomial with
/// semibounded even leading form.
bool hamiltonian_whitelisted(const SymbolFn& h);

}  // namespace csq

#endif
