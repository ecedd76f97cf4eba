#include "csq/symbol_text.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace csq {

namespace {

struct Scanner {
  const std::string& text;
  size_t pos = 0;

  explicit Scanner(const std::string& t) : text(t) {}

  int column() const { return int(pos) + 1; }
  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  double number() {
    skip_ws();
    const char* start = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) throw symbol_parse_error("expected a number", column());
    pos += size_t(end - start);
    return v;
  }

  int power() {
    skip_ws();
    if (pos >= text.size() || text[pos] != '^') return 1;
    ++pos;
    skip_ws();
    size_t begin = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == begin) throw symbol_parse_error("expected an integer exponent after '^'", column());
    return std::stoi(text.substr(begin, pos - begin));
  }
};

// One '+'/'-'-delimited term over the given variable letters; returns the
// coefficient and accumulated powers per variable.
template <size_t NVars>
void parse_term(Scanner& sc, const std::array<char, NVars>& vars, double& coeff,
                std::array<int, NVars>& powers) {
  coeff = 1.0;
  powers.fill(0);
  bool first = true;
  while (true) {
    sc.skip_ws();
    if (sc.pos >= sc.text.size()) break;
    const char c = sc.text[sc.pos];
    bool matched = false;
    for (size_t v = 0; v < NVars; ++v) {
      if (c == vars[v]) {
        ++sc.pos;
        powers[v] += sc.power();
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        if (!first && c != '.' && !std::isdigit(static_cast<unsigned char>(c)))
          break;  // next term's sign
        coeff *= sc.number();
        matched = true;
      } else {
        throw symbol_parse_error(std::string("unexpected character '") + c + "'", sc.column());
      }
    }
    first = false;
    sc.skip_ws();
    if (sc.pos < sc.text.size() && sc.text[sc.pos] == '*') {
      ++sc.pos;
      continue;
    }
    // Without '*' the term ends unless a variable follows directly (e.g. "2p").
    if (sc.pos < sc.text.size()) {
      const char n = sc.text[sc.pos];
      bool is_var = false;
      for (char v : vars) is_var |= (n == v);
      if (is_var) continue;
    }
    break;
  }
}

template <size_t NVars, typename Sink>
void parse_sum(const std::string& text, const std::array<char, NVars>& vars, Sink&& sink) {
  Scanner sc(text);
  if (sc.done()) throw symbol_parse_error("empty symbol", sc.column());
  bool negate = false;
  if (sc.peek() == '+' || sc.peek() == '-') {
    negate = sc.peek() == '-';
    ++sc.pos;
  }
  while (true) {
    double coeff;
    std::array<int, NVars> powers;
    parse_term(sc, vars, coeff, powers);
    sink(negate ? -coeff : coeff, powers);
    if (sc.done()) break;
    const char c = sc.peek();
    if (c != '+' && c != '-')
      throw symbol_parse_error("expected '+' or '-' between terms", sc.column());
    negate = c == '-';
    ++sc.pos;
    if (sc.done()) throw symbol_parse_error("dangling sign", sc.column());
  }
}

std::string format_coeff(double c) {
  std::ostringstream os;
  os.precision(17);
  os << c;
  return os.str();
}

}  // namespace

PolySymbol parse_symbol(const std::string& text) {
  PolySymbol out;
  parse_sum<2>(text, {'p', 'q'}, [&](double c, const std::array<int, 2>& pw) {
    out.add_term(pw[0], pw[1], c);
  });
  return out;
}

std::string print_symbol(const PolySymbol& s) {
  if (s.terms().empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [powers, c] : s.terms()) {
    const double mag = std::abs(c);
    if (!first)
      os << (c < 0 ? " - " : " + ");
    else if (c < 0)
      os << "-";
    first = false;
    const auto [a, b] = powers;
    bool wrote = false;
    if (mag != 1.0 || (a == 0 && b == 0)) {
      os << format_coeff(mag);
      wrote = true;
    }
    if (a > 0) {
      if (wrote) os << "*";
      os << "p";
      if (a > 1) os << "^" << a;
      wrote = true;
    }
    if (b > 0) {
      if (wrote) os << "*";
      os << "q";
      if (b > 1) os << "^" << b;
    }
  }
  return os.str();
}

void SpherePoly::add_term(int a, int b, int c, double coeff) {
  if (coeff == 0.0) return;
  auto key = std::make_tuple(a, b, c);
  terms[key] += coeff;
  if (terms[key] == 0.0) terms.erase(key);
}

double SpherePoly::eval(double theta, double phi) const {
  const double x = std::sin(theta) * std::cos(phi);
  const double y = std::sin(theta) * std::sin(phi);
  const double z = std::cos(theta);
  double sum = 0.0;
  for (const auto& [powers, c] : terms)
    sum += c * std::pow(x, std::get<0>(powers)) * std::pow(y, std::get<1>(powers)) *
           std::pow(z, std::get<2>(powers));
  return sum;
}

SpherePoly parse_sphere_symbol(const std::string& text) {
  SpherePoly out;
  parse_sum<3>(text, {'x', 'y', 'z'}, [&](double c, const std::array<int, 3>& pw) {
    out.add_term(pw[0], pw[1], pw[2], c);
  });
  return out;
}

std::string print_sphere_symbol(const SpherePoly& s) {
  if (s.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [powers, c] : s.terms) {
    const double mag = std::abs(c);
    if (!first)
      os << (c < 0 ? " - " : " + ");
    else if (c < 0)
      os << "-";
    first = false;
    const auto& [a, b, d] = powers;
    bool wrote = false;
    if (mag != 1.0 || (a == 0 && b == 0 && d == 0)) {
      os << format_coeff(mag);
      wrote = true;
    }
    const std::array<std::pair<char, int>, 3> vars{{{'x', a}, {'y', b}, {'z', d}}};
    for (const auto& [name, pw] : vars) {
      if (pw == 0) continue;
      if (wrote) os << "*";
      os << name;
      if (pw > 1) os << "^" << pw;
      wrote = true;
    }
  }
  return os.str();
}

}  // namespace csq
