#ifndef CSQ_SYMBOL_TEXT_HPP
#define CSQ_SYMBOL_TEXT_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "csq/symbols.hpp"

namespace csq {

/// Parse failure with the 1-based column where scanning stopped.
class symbol_parse_error : public std::runtime_error {
public:
  symbol_parse_error(const std::string& what, int column)
      : std::runtime_error(what + " (column " + std::to_string(column) + ")"),
        column_(column) {}
  int column() const { return column_; }

private:
  int column_;
};

/// Grammar: term (('+'|'-') term)*, term = coeff and/or '*'-joined powers
/// p^a, q^b. Examples: "0.5*p^2 + 0.5*q^2", "q^4", "-2*p*q".
PolySymbol parse_symbol(const std::string& text);

/// Canonical text form; parse(print(s)) reproduces s exactly.
std::string print_symbol(const PolySymbol& s);

/// Polynomial on the sphere in the Cartesian direction components
/// x = sin(theta) cos(phi), y = sin(theta) sin(phi), z = cos(theta).
struct SpherePoly {
  std::map<std::tuple<int, int, int>, double> terms;  // (x^a y^b z^c) -> coeff

  void add_term(int a, int b, int c, double coeff);
  double eval(double theta, double phi) const;
  bool empty() const { return terms.empty(); }
};

/// Same grammar with variables x, y, z (z = cos(theta)).
SpherePoly parse_sphere_symbol(const std::string& text);
std::string print_sphere_symbol(const SpherePoly& s);

}  // namespace csq

#endif
