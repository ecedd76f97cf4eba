#include "csq/symbols.hpp"

#include <cmath>
#include <stdexcept>

namespace csq {

// ============================== PolySymbol ==================================

void PolySymbol::set(int a, int b, double c) {
  if (a < 0 || b < 0) throw std::invalid_argument("PolySymbol: negative power");
  if (c == 0.0)
    terms_.erase({a, b});
  else
    terms_[{a, b}] = c;
}

void PolySymbol::add_term(int a, int b, double c) { set(a, b, coeff(a, b) + c); }

double PolySymbol::coeff(int a, int b) const {
  auto it = terms_.find({a, b});
  return it == terms_.end() ? 0.0 : it->second;
}

double PolySymbol::eval(double p, double q) const {
  double sum = 0.0;
  for (const auto& [powers, c] : terms_)
    sum += c * std::pow(p, powers.first) * std::pow(q, powers.second);
  return sum;
}

int PolySymbol::degree() const {
  int deg = 0;
  for (const auto& [powers, c] : terms_) deg = std::max(deg, powers.first + powers.second);
  return deg;
}

PolySymbol& PolySymbol::operator+=(const PolySymbol& other) {
  for (const auto& [powers, c] : other.terms_) add_term(powers.first, powers.second, c);
  return *this;
}

PolySymbol& PolySymbol::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [powers, c] : terms_) c *= s;
  return *this;
}

PolySymbol operator-(PolySymbol a, const PolySymbol& b) {
  PolySymbol nb = b;
  nb *= -1.0;
  return a += nb;
}

PolySymbol PolySymbol::d_dp() const {
  PolySymbol out;
  for (const auto& [powers, c] : terms_)
    if (powers.first > 0) out.add_term(powers.first - 1, powers.second, c * powers.first);
  return out;
}

PolySymbol PolySymbol::d_dq() const {
  PolySymbol out;
  for (const auto& [powers, c] : terms_)
    if (powers.second > 0) out.add_term(powers.first, powers.second - 1, c * powers.second);
  return out;
}

namespace {

PolySymbol laplacian_weighted(const PolySymbol& h, double var_p, double var_q) {
  PolySymbol out = 0.5 * var_p * h.d_dp().d_dp();
  out += 0.5 * var_q * h.d_dq().d_dq();
  return out;
}

PolySymbol heat_series(const PolySymbol& h, double var_p, double var_q, double sign) {
  PolySymbol sum = h;
  PolySymbol term = h;
  double factor = 1.0;
  for (int k = 1; !term.empty(); ++k) {
    term = laplacian_weighted(term, var_p, var_q);
    factor *= sign / k;
    sum += factor * term;
  }
  return sum;
}

}  // namespace

PolySymbol gaussian_blur(const PolySymbol& h, double var_p, double var_q) {
  return heat_series(h, var_p, var_q, +1.0);
}

PolySymbol gaussian_deblur(const PolySymbol& h, double var_p, double var_q) {
  return heat_series(h, var_p, var_q, -1.0);
}

// ================================ SymbolFn ==================================

SymbolFn SymbolFn::callable(std::function<double(double, double)> fn,
                            std::optional<double> growth_rate) {
  SymbolFn s{PolySymbol{}};
  s.poly_.reset();
  s.fn_ = std::move(fn);
  s.growth_ = growth_rate;
  return s;
}

const PolySymbol& SymbolFn::poly() const {
  if (!poly_) throw std::invalid_argument("SymbolFn: not a polynomial");
  return *poly_;
}

double SymbolFn::operator()(double p, double q) const {
  return poly_ ? poly_->eval(p, q) : fn_(p, q);
}

ConditionsReport conditions_check(const SymbolFn& h) {
  ConditionsReport rep;
  if (h.is_poly()) {
    // Gaussian integrals of polynomials converge for every positive damping.
    rep.cond1 = rep.cond2 = true;
    return rep;
  }
  if (!h.growth_rate())
    throw std::invalid_argument(
        "conditions_check: tabulated/callable symbol needs a declared growth rate");
  const double c = *h.growth_rate();
  // |h|^2 ~ e^{2c r^2}: finite against e^{-A r^2} only when A > 2c.
  rep.cond1 = c <= 0.0;
  if (!rep.cond1) rep.witness_A = std::min(1.0, c);
  // |h|^4 ~ e^{4c r^2}: need some B < 1/2 with B > 4c.
  rep.cond2 = 4.0 * c < 0.5;
  return rep;
}

// ============================ upper / Toeplitz ==============================

TabulatedSymbol upper_symbol(const Operator& op, const Fiducial& fid,
                             const SymbolGrid& grid, const SpaceConfig& cfg) {
  cfg.validate();
  TabulatedSymbol out;
  out.grid = grid;
  out.values.resize(grid.np, grid.nq);
  for (int i = 0; i < grid.np; ++i)
    for (int j = 0; j < grid.nq; ++j) {
      const CoherentLabel label{grid.p(i), grid.q(j)};
      const StateVector psi = coherent_state(label, fid, Gauge{}, cfg);
      const Complex val = expectation(psi, op);
      out.values(i, j) = val.real();
      out.imag_defect = std::max(out.imag_defect, std::abs(val.imag()));
    }
  if (op.hermitian && out.imag_defect > 1e-10)
    throw std::runtime_error("upper_symbol: hermitian operator produced complex symbol");
  return out;
}

namespace {

// Regularized upper incomplete gamma Q(a, x) for the Gaussian tail bounds.
double gammq(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammq: bad arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a,x)
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // continued fraction for Q(a,x)
  double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - lg);
}

Mat toeplitz_accumulate(const SymbolFn& h, const Fiducial& fid,
                        const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg) {
  const QuadratureRule rule = gauss_legendre(quad.nodes_per_axis, -quad.radius, quad.radius);
  const double measure = 1.0 / (2.0 * M_PI * cfg.hbar);
  Mat acc = Mat::Zero(cfg.dim, cfg.dim);
  for (int i = 0; i < quad.nodes_per_axis; ++i)
    for (int j = 0; j < quad.nodes_per_axis; ++j) {
      const CoherentLabel label{rule.nodes[i], rule.nodes[j]};
      const double hv = h(label.p, label.q);
      if (hv == 0.0) continue;
      const StateVector psi = coherent_state_unchecked(label, fid, Gauge{}, cfg);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(psi, rule.weights[i] * rule.weights[j] *
                                                              measure * hv);
    }
  return Mat(acc.selfadjointView<Eigen::Lower>());
}

}  // namespace

PhaseSpaceQuadrature default_toeplitz_quadrature(const SpaceConfig& cfg, int deg, int block) {
  if (block <= 0) block = cfg.dim / 2;
  // Occupation that buries the tail of every certified entry: the entry
  // (m, n) integrand decays like a Poisson density of mean |alpha|^2 around
  // m, so push the cutoff well past block + degree.
  const double a = block + deg + 1.0;
  const double x = a + 12.0 * std::sqrt(a) + 40.0;
  const double stretch = std::max(cfg.omega, 1.0 / cfg.omega);
  PhaseSpaceQuadrature quad;
  quad.radius = std::sqrt(2.0 * cfg.hbar * stretch * x);
  quad.nodes_per_axis = std::max(160, int(10.0 * quad.radius));
  return quad;
}

Operator toeplitz_quantize(const SymbolFn& h, const Fiducial& fid,
                           const PhaseSpaceQuadrature& quad, const SpaceConfig& cfg,
                           const ToeplitzOptions& opts) {
  cfg.validate();
  quad.validate();
  const int block = opts.certified_block > 0 ? opts.certified_block : cfg.dim / 2;

  if (!opts.skip_checks) {
    const ConditionsReport rep = conditions_check(h);
    if (!rep.cond1 || !rep.cond2)
      throw std::invalid_argument("toeplitz_quantize: symbol fails admissibility conditions");

    // Gaussian tail estimate for the certified block: the slowest-decaying
    // certified entry behaves like a Poisson tail of order block + degree.
    const int deg = h.is_poly() ? h.poly().degree() : 2;
    const double stretch = std::max(cfg.omega, 1.0 / cfg.omega);
    const double x_edge = quad.radius * quad.radius / (2.0 * cfg.hbar * stretch);
    double scale = 1.0;
    if (h.is_poly())
      for (const auto& [powers, c] : h.poly().terms())
        scale += std::abs(c) * std::pow(quad.radius, powers.first + powers.second);
    const double tail = scale * gammq(double(block + deg + 1), x_edge);
    if (!(tail < opts.tail_tol))
      throw std::invalid_argument(
          "toeplitz_quantize: quadrature radius too small for the certified block "
          "(Gaussian tail bound exceeds tolerance)");
  }

  Mat result = toeplitz_accumulate(h, fid, quad, cfg);

  if (!opts.skip_checks) {
    PhaseSpaceQuadrature coarse = quad;
    coarse.nodes_per_axis = std::max(2, (3 * quad.nodes_per_axis) / 4);
    const Mat check = toeplitz_accumulate(h, fid, coarse, cfg);
    if (max_abs((result - check).topLeftCorner(block, block)) > opts.refine_tol)
      throw std::runtime_error("toeplitz_quantize: quadrature not converged on the "
                               "certified block; raise nodes_per_axis");
  }

  const bool herm = hermiticity_defect(result) <= 1e-10;
  if (herm) result = 0.5 * (result + result.adjoint().eval());
  return Operator{std::move(result), herm};
}

// ============================ operator algebra ==============================

OperatorPoly& OperatorPoly::add(Complex c, std::string word) {
  for (char ch : word)
    if (ch != 'P' && ch != 'Q')
      throw std::invalid_argument("OperatorPoly: word letters must be P or Q");
  terms.emplace_back(c, std::move(word));
  return *this;
}

Operator OperatorPoly::to_operator(const SpaceConfig& cfg) const {
  const CanonicalPair ops = canonical_ops(cfg);
  Mat sum = Mat::Zero(cfg.dim, cfg.dim);
  for (const auto& [c, word] : terms) {
    Mat prod = Mat::Identity(cfg.dim, cfg.dim);
    for (char ch : word) prod = prod * (ch == 'P' ? ops.momentum.mat : ops.position.mat);
    sum += c * prod;
  }
  const bool herm = hermiticity_defect(sum) <= 1e-12;
  return Operator{std::move(sum), herm};
}

namespace {

// Ground-state moment <eta| S_1 ... S_k |eta| for a word over {P, Q}; exact on
// the truncated basis because the word only reaches n <= k.
Complex ground_moment(const std::string& word, const SpaceConfig& cfg) {
  SpaceConfig local = cfg;
  local.dim = std::max<int>(8, int(word.size()) + 4);
  const CanonicalPair ops = canonical_ops(local);
  StateVector v = ground_state(local);
  for (auto it = word.rbegin(); it != word.rend(); ++it)
    v = (*it == 'P' ? ops.momentum.mat : ops.position.mat) * v;
  return ground_state(local).dot(v);
}

}  // namespace

PolySymbol upper_symbol_poly(const OperatorPoly& op, const SpaceConfig& cfg) {
  cfg.validate();
  std::map<std::pair<int, int>, Complex> acc;
  for (const auto& [c, word] : op.terms) {
    const int k = int(word.size());
    // <eta| prod_i (S_i + s_i) |eta>: expand over subsets keeping order.
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      int pp = 0, qq = 0;
      std::string kept;
      for (int i = 0; i < k; ++i) {
        if (mask & (1u << i))
          kept.push_back(word[i]);
        else
          (word[i] == 'P' ? pp : qq) += 1;
      }
      acc[{pp, qq}] += c * ground_moment(kept, cfg);
    }
  }
  PolySymbol out;
  for (const auto& [powers, c] : acc) {
    if (std::abs(c.imag()) > 1e-10)
      throw std::invalid_argument("upper_symbol_poly: target is not hermitian "
                                  "(complex upper symbol)");
    if (std::abs(c.real()) > 1e-14) out.add_term(powers.first, powers.second, c.real());
  }
  return out;
}

PolySymbol lower_symbol_from_upper(const PolySymbol& upper, const SpaceConfig& cfg) {
  cfg.validate();
  return gaussian_deblur(upper, cfg.hbar * cfg.omega, cfg.hbar / cfg.omega);
}

PolySymbol lower_symbol_poly(const OperatorPoly& target, const SpaceConfig& cfg) {
  return lower_symbol_from_upper(upper_symbol_poly(target, cfg), cfg);
}

bool hamiltonian_whitelisted(const SymbolFn& h) {
  if (!h.is_poly()) return false;
  const PolySymbol& poly = h.poly();
  const int deg = poly.degree();
  if (deg == 0) return true;
  if (deg % 2 != 0) return false;
  // Leading homogeneous form must be nonnegative on the circle.
  for (int k = 0; k < 64; ++k) {
    const double t = 2.0 * M_PI * k / 64.0;
    double form = 0.0;
    for (const auto& [powers, c] : poly.terms())
      if (powers.first + powers.second == deg)
        form += c * std::pow(std::cos(t), powers.first) * std::pow(std::sin(t), powers.second);
    if (form < -1e-12) return false;
  }
  return true;
}

}  // namespace csq
