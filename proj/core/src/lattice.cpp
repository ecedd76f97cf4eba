#include <cmath>
#include <stdexcept>
#include <vector>

#include "csq/pathint.hpp"
#include "poly_eval.hpp"

namespace csq {

void LatticeConfig::validate() const {
  if (slices < 1) throw std::invalid_argument("LatticeConfig: need at least one slice");
  if (!(T > 0.0)) throw std::invalid_argument("LatticeConfig: T must be > 0");
  if (grid_nodes != 0 && grid_nodes < 32)
    throw std::invalid_argument("LatticeConfig: grid_nodes too small");
}

namespace {

using detail::QPoly;

// Position chain on a 45-degree contour. Slice l sits on the line
// c_l + e^{i pi/4} s, s in [-L, L]; the centers drift linearly between the
// pinned real endpoints, so the per-step kinetic phase depends only on
// (s_a - s_b) and one fixed drift delta (a Toeplitz kernel), while the
// midpoint potential factor depends on (s_a + s_b) (a Hankel factor).
struct ChainEngine {
  double m, eps, hbar, L, ds;
  int n;
  Complex w;            // e^{i pi/4}
  Complex pref;         // sqrt(m / (2 pi i hbar eps)), principal branch
  QPoly v;
  std::vector<double> s;

  ChainEngine(double mass, double epsilon, double hb, const QPoly& pot, double halfwidth,
              int nodes, double total_T) {
    m = mass;
    eps = epsilon;
    hbar = hb;
    v = pot;
    w = std::exp(I * (M_PI / 4.0));
    pref = std::sqrt(m / (2.0 * M_PI * hbar * eps)) * std::exp(-I * (M_PI / 4.0));
    const double kin_width = std::sqrt(hbar * eps / m);
    L = halfwidth > 0.0 ? halfwidth : 8.0 * std::max(1.0, std::sqrt(hbar * total_T / m));
    const double spacing = kin_width / 8.0;
    n = nodes > 0 ? nodes : int(std::ceil(2.0 * L / spacing)) + 1;
    if (n > 8000)
      throw std::invalid_argument("lattice_propagator: grid would exceed 8000 nodes; "
                                  "reduce slices or supply grid_nodes");
    ds = 2.0 * L / (n - 1);
    s.resize(n);
    for (int a = 0; a < n; ++a) s[a] = -L + a * ds;
  }

  Complex kinetic_phase(Complex dz) const { return I * m * dz * dz / (2.0 * hbar * eps); }
  Complex potential_phase(Complex zmid) const { return -I * eps * v(zmid) / hbar; }

  // One kernel factor between arbitrary contour points.
  Complex step_kernel(Complex z_to, Complex z_from) const {
    return pref * std::exp(kinetic_phase(z_to - z_from) +
                           potential_phase(0.5 * (z_to + z_from)));
  }

  // Start vector: from the real point z0 onto the slice with center c1.
  std::vector<Complex> start(Complex z0, Complex c1) const {
    std::vector<Complex> psi(n);
    for (int b = 0; b < n; ++b) psi[b] = step_kernel(c1 + w * s[b], z0);
    return psi;
  }

  // Propagate one step from slice centered at c_from to slice centered at
  // c_to, including the integration measure of the source slice.
  void advance(std::vector<Complex>& psi, Complex c_from, Complex c_to) const {
    const Complex delta = c_to - c_from;
    std::vector<Complex> kin(2 * n - 1);
    for (int d = -(n - 1); d <= n - 1; ++d)
      kin[d + n - 1] = std::exp(kinetic_phase(w * (ds * d) + delta));
    std::vector<Complex> pot(2 * n - 1);
    const Complex cmid = 0.5 * (c_from + c_to);
    for (int u = 0; u <= 2 * n - 2; ++u)
      pot[u] = std::exp(potential_phase(cmid + 0.5 * w * (s[0] + s[0] + ds * u)));

    std::vector<Complex> out(n);
    const Complex scale = pref * w * ds;
    for (int a = 0; a < n; ++a) {
      Complex acc = 0.0;
      const Complex* kin_row = kin.data() + (a + n - 1);
      const Complex* pot_row = pot.data() + a;
      for (int b = 0; b < n; ++b) acc += kin_row[-b] * pot_row[b] * psi[b];
      out[a] = scale * acc;
    }
    psi.swap(out);
  }

  // Contract the chain onto a final point.
  Complex finish(const std::vector<Complex>& psi, Complex c_from, Complex z_end) const {
    Complex acc = 0.0;
    for (int b = 0; b < n; ++b) acc += step_kernel(z_end, c_from + w * s[b]) * psi[b];
    return acc * w * ds;
  }

  double tail_fraction(const std::vector<Complex>& psi) const {
    double peak = 0.0, edge = 0.0;
    for (int b = 0; b < n; ++b) peak = std::max(peak, std::abs(psi[b]));
    for (int b = 0; b < 3; ++b) {
      edge = std::max(edge, std::abs(psi[b]));
      edge = std::max(edge, std::abs(psi[n - 1 - b]));
    }
    return peak > 0.0 ? edge / peak : 0.0;
  }
};

struct LatticeProblem {
  double mass;
  QPoly v;
};

LatticeProblem resolve_problem(const SymbolFn& h) {
  if (!h.is_poly())
    throw std::invalid_argument("lattice_propagator: symbol must be polynomial");
  const detail::MomentumSplit split =
      detail::split_momentum_quadratic(h.poly(), "lattice_propagator");
  if (!(split.kp2 > 0.0))
    throw std::invalid_argument("lattice_propagator: need a positive p^2 coefficient");
  if (split.kp1 != 0.0)
    throw std::invalid_argument("lattice_propagator: linear momentum term not supported");
  // V bounded below: even leading power with positive coefficient.
  if (!split.v.zero()) {
    const int deg = int(split.v.coeffs.size()) - 1;
    if (deg > 0 && (deg % 2 != 0 || split.v.coeffs.back() < 0.0))
      throw std::invalid_argument("lattice_propagator: potential must be bounded below");
  }
  return LatticeProblem{1.0 / (2.0 * split.kp2), split.v};
}

Complex run_chain(const ChainEngine& eng, int slices, Complex z_from, Complex z_to,
                  double tail_tol = 1e-7) {
  // Slice centers drift linearly from the start to the end point.
  auto center = [&](int l) {
    return z_from + (z_to - z_from) * (double(l) / (slices + 1));
  };
  std::vector<Complex> psi = eng.start(z_from, center(1));
  for (int l = 1; l < slices; ++l) eng.advance(psi, center(l), center(l + 1));
  const double tail = eng.tail_fraction(psi);
  if (tail > tail_tol)
    throw std::runtime_error("lattice_propagator: grid tail mass above threshold; "
                             "widen grid_halfwidth");
  return eng.finish(psi, center(slices), z_to);
}

}  // namespace

Complex lattice_propagator(const SymbolFn& h, const LatticeConfig& lat, const SpaceConfig& cfg) {
  cfg.validate();
  lat.validate();
  const LatticeProblem prob = resolve_problem(h);
  const ChainEngine eng(prob.mass, lat.epsilon(), cfg.hbar, prob.v, lat.grid_halfwidth,
                        lat.grid_nodes, lat.T);
  return run_chain(eng, lat.slices, Complex(lat.q_from), Complex(lat.q_to));
}

double lattice_composition_defect(const SymbolFn& h, const LatticeConfig& lat,
                                  const SpaceConfig& cfg) {
  cfg.validate();
  lat.validate();
  if (lat.q_from != lat.q_to)
    throw std::invalid_argument("lattice_composition_defect: equal endpoints only");
  if ((lat.slices + 1) % 2 != 0)
    throw std::invalid_argument("lattice_composition_defect: slices must be odd");
  const LatticeProblem prob = resolve_problem(h);

  const ChainEngine eng(prob.mass, lat.epsilon(), cfg.hbar, prob.v, lat.grid_halfwidth,
                        lat.grid_nodes, lat.T);
  const Complex direct = run_chain(eng, lat.slices, Complex(lat.q_from), Complex(lat.q_to));

  // Half chains on an independently refined grid, composed along the rotated
  // junction contour of the base resolution (legitimate by analyticity).
  ChainEngine fine(prob.mass, lat.epsilon(), cfg.hbar, prob.v,
                   eng.L * 1.15, int(std::lround(eng.n * 1.5)), lat.T);
  const int half = (lat.slices + 1) / 2 - 1;  // slices per half chain
  std::vector<Complex> left(eng.n), right(eng.n);
  {
    std::vector<Complex> psi = fine.start(Complex(lat.q_from), Complex(lat.q_from));
    for (int l = 1; l < half; ++l) fine.advance(psi, Complex(lat.q_from), Complex(lat.q_from));
    for (int b = 0; b < eng.n; ++b)
      left[b] = fine.finish(psi, Complex(lat.q_from), Complex(lat.q_from) + eng.w * eng.s[b]);
  }
  {
    std::vector<Complex> psi = fine.start(Complex(lat.q_to), Complex(lat.q_to));
    for (int l = 1; l < half; ++l) fine.advance(psi, Complex(lat.q_to), Complex(lat.q_to));
    for (int b = 0; b < eng.n; ++b)
      right[b] = fine.finish(psi, Complex(lat.q_to), Complex(lat.q_to) + eng.w * eng.s[b]);
  }
  Complex composed = 0.0;
  for (int b = 0; b < eng.n; ++b) composed += left[b] * right[b];
  composed *= eng.w * eng.ds;
  return std::abs(direct - composed);
}

}  // namespace csq
