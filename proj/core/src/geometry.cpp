#include "csq/geometry.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace csq {

namespace {

// Classic Brent root bracketing; f(a) and f(b) must straddle zero.
template <typename F>
double brent_root(F&& f, double a, double b, double fa, double fb, double xtol, int maxit = 128) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw std::runtime_error("brent_root: root not bracketed");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < maxit; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}

}  // namespace

// ================================ charts ====================================

Eigen::Matrix2d CoordinateMap::jacobian(double p, double q) const {
  if (jacobian_forward) return jacobian_forward(p, q);
  const double h = 1e-6 * std::max(1.0, std::max(std::abs(p), std::abs(q)));
  Eigen::Matrix2d j;
  const Point2 pp = forward(p + h, q), pm = forward(p - h, q);
  const Point2 qp = forward(p, q + h), qm = forward(p, q - h);
  j(0, 0) = (pp[0] - pm[0]) / (2 * h);
  j(1, 0) = (pp[1] - pm[1]) / (2 * h);
  j(0, 1) = (qp[0] - qm[0]) / (2 * h);
  j(1, 1) = (qp[1] - qm[1]) / (2 * h);
  return j;
}

namespace {

std::map<std::string, CoordinateMap> builtin_charts() {
  std::map<std::string, CoordinateMap> reg;

  CoordinateMap cart;
  cart.name = "cartesian";
  cart.forward = [](double p, double q) { return Point2{p, q}; };
  cart.inverse = cart.forward;
  cart.jacobian_forward = [](double, double) { return Eigen::Matrix2d::Identity().eval(); };
  cart.canonical = true;
  reg[cart.name] = cart;

  // ptil = (p^2+q^2)/2, qtil = atan2(q, p); singular at the origin.
  CoordinateMap aa;
  aa.name = "action-angle";
  aa.forward = [](double p, double q) { return Point2{0.5 * (p * p + q * q), std::atan2(q, p)}; };
  aa.inverse = [](double pt, double qt) {
    const double r = std::sqrt(2.0 * std::max(0.0, pt));
    return Point2{r * std::cos(qt), r * std::sin(qt)};
  };
  aa.jacobian_forward = [](double p, double q) {
    const double r2 = p * p + q * q;
    Eigen::Matrix2d j;
    j << p, q, -q / r2, p / r2;
    return j;
  };
  aa.canonical = true;
  aa.second_coord_angular = true;
  aa.excluded = [](double p, double q) { return 0.5 * (p * p + q * q) < 1e-3; };
  aa.generating_witness = [](double p, double q) { return -0.5 * p * q; };
  reg[aa.name] = aa;

  const double s = 1.0 / std::sqrt(2.0);
  CoordinateMap rot;
  rot.name = "rotation-45";
  rot.forward = [s](double p, double q) { return Point2{s * (p + q), s * (q - p)}; };
  rot.inverse = [s](double pb, double qb) { return Point2{s * (pb - qb), s * (pb + qb)}; };
  rot.jacobian_forward = [s](double, double) {
    Eigen::Matrix2d j;
    j << s, s, -s, s;
    return j;
  };
  rot.canonical = true;
  rot.generating_witness = [](double p, double q) {
    return -0.5 * p * q + 0.25 * (q * q - p * p);
  };
  reg[rot.name] = rot;

  return reg;
}

const std::map<std::string, CoordinateMap>& registry() {
  static const std::map<std::string, CoordinateMap> reg = builtin_charts();
  return reg;
}

}  // namespace

const CoordinateMap& chart(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw std::invalid_argument("chart: unknown chart '" + name + "'");
  return it->second;
}

std::vector<std::string> chart_names() {
  std::vector<std::string> names;
  for (const auto& [name, m] : registry()) names.push_back(name);
  return names;
}

double canonical_map_defect(const CoordinateMap& map, int npoints, double r, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-r, r);
  double worst = 0.0;
  int kept = 0;
  while (kept < npoints) {
    const double p = uni(rng), q = uni(rng);
    if (map.excluded && map.excluded(p, q)) continue;
    worst = std::max(worst, std::abs(map.jacobian(p, q).determinant() - 1.0));
    ++kept;
  }
  return worst;
}

// ======================= coherent-state differentials =======================

MetricTensor MetricTensor::constant(double a, double b, double c, std::string chart) {
  MetricTensor m;
  m.A = [a](double, double) { return a; };
  m.B = [b](double, double) { return b; };
  m.C = [c](double, double) { return c; };
  m.chart = std::move(chart);
  return m;
}

namespace {

struct StateDerivatives {
  StateVector psi;
  StateVector dp;  // Richardson-improved central difference along p
  StateVector dq;
};

StateDerivatives differentiate_state(const CoherentLabel& x, const Fiducial& fid,
                                     const Gauge& g, const SpaceConfig& cfg,
                                     const FiniteDifferenceOptions& fd) {
  const double scale = std::max(1.0, std::hypot(x.p, x.q));
  const double delta = fd.step_scale * scale;
  auto state = [&](double p, double q) {
    return coherent_state(CoherentLabel{p, q, x.chart}, fid, g, cfg);
  };
  auto central = [&](double h, bool along_p) {
    const StateVector plus = along_p ? state(x.p + h, x.q) : state(x.p, x.q + h);
    const StateVector minus = along_p ? state(x.p - h, x.q) : state(x.p, x.q - h);
    return StateVector(((plus - minus) / (2.0 * h)).eval());
  };
  StateDerivatives out;
  out.psi = state(x.p, x.q);
  for (bool along_p : {true, false}) {
    const StateVector coarse = central(delta, along_p);
    const StateVector fine = central(0.5 * delta, along_p);
    const double disagreement = (fine - coarse).norm();
    if (disagreement > fd.richardson_tol * std::max(1.0, fine.norm()))
      throw std::runtime_error("differentiate_state: Richardson check failed; "
                               "finite-difference step unreliable at this label");
    StateVector improved = (4.0 * fine - coarse) / 3.0;
    (along_p ? out.dp : out.dq) = std::move(improved);
  }
  return out;
}

}  // namespace

OneForm canonical_one_form(const Fiducial& fid, const Gauge& g, const SpaceConfig& cfg,
                           const FiniteDifferenceOptions& fd) {
  cfg.validate();
  OneForm theta;
  auto component = [fid, g, cfg, fd](double p, double q, bool along_p) {
    const StateDerivatives d = differentiate_state(CoherentLabel{p, q}, fid, g, cfg, fd);
    const Complex inner = d.psi.dot(along_p ? d.dp : d.dq);
    // i hbar <psi|d psi> is real because <psi|d psi> is purely imaginary.
    return -cfg.hbar * inner.imag();
  };
  theta.comp_p = [component](double p, double q) { return component(p, q, true); };
  theta.comp_q = [component](double p, double q) { return component(p, q, false); };
  return theta;
}

MetricTensor fubini_study_metric(const Fiducial& fid, const SpaceConfig& cfg,
                                 const FiniteDifferenceOptions& fd) {
  return fubini_study_metric_gauged(fid, Gauge{}, cfg, fd);
}

MetricTensor fubini_study_metric_gauged(const Fiducial& fid, const Gauge& g,
                                        const SpaceConfig& cfg,
                                        const FiniteDifferenceOptions& fd) {
  cfg.validate();
  const double pref = 2.0 * cfg.hbar * cfg.hbar;
  auto components = [fid, g, cfg, fd, pref](double p, double q) {
    const StateDerivatives d = differentiate_state(CoherentLabel{p, q}, fid, g, cfg, fd);
    const Complex sp = d.psi.dot(d.dp), sq = d.psi.dot(d.dq);
    const double a = pref * (d.dp.squaredNorm() - std::norm(sp));
    const double c = pref * (d.dq.squaredNorm() - std::norm(sq));
    const double b = pref * 2.0 * (d.dp.dot(d.dq) - std::conj(sp) * sq).real();
    return std::array<double, 3>{a, b, c};
  };
  MetricTensor m;
  m.A = [components](double p, double q) { return components(p, q)[0]; };
  m.B = [components](double p, double q) { return components(p, q)[1]; };
  m.C = [components](double p, double q) { return components(p, q)[2]; };
  return m;
}

MetricTensor variance_metric(const Fiducial& fid, const SpaceConfig& cfg) {
  cfg.validate();
  const CanonicalPair ops = canonical_ops(cfg);
  const StateVector& v = fid.vec;
  const double mq = expectation(v, ops.position).real();
  const double mp = expectation(v, ops.momentum).real();
  const Mat qm = ops.position.mat, pm = ops.momentum.mat;
  const double var_q = (v.dot(qm * qm * v)).real() - mq * mq;
  const double var_p = (v.dot(pm * pm * v)).real() - mp * mp;
  const double sym = (v.dot((qm * pm + pm * qm) * v)).real() - 2.0 * mq * mp;
  // Normalization fixed once: Omega = 1 Gaussian fiducial gives
  // hbar (dp^2 + dq^2). The cross-term sign follows the split-form
  // displacement convention used by coherent_state.
  return MetricTensor::constant(2.0 * var_q, -2.0 * sym, 2.0 * var_p);
}

// ============================== curvature ===================================

double gaussian_curvature(const MetricTensor& m, double u, double v, double step) {
  auto E = [&](double a, double b) { return m.A(a, b); };
  auto F = [&](double a, double b) { return 0.5 * m.B(a, b); };
  auto G = [&](double a, double b) { return m.C(a, b); };

  const double e = E(u, v), f = F(u, v), g = G(u, v);
  const double det = e * g - f * f;
  if (!(det > 0.0) || !(e > 0.0))
    throw std::invalid_argument("gaussian_curvature: metric not positive definite here");

  // Constant metrics are exactly flat; skip the differentiation noise.
  const double h = step * std::max(1.0, std::max(std::abs(u), std::abs(v)));
  double variation = 0.0;
  const std::function<double(double, double)> comps[3] = {E, F, G};
  for (const auto& fn : comps) {
    const double base = fn(u, v);
    for (auto [du, dv] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}})
      variation = std::max(variation, std::abs(fn(u + du, v + dv) - base));
  }
  if (variation < 1e-13 * std::max(1.0, std::abs(e) + std::abs(g))) return 0.0;

  auto d_u = [&](auto&& fn) { return (fn(u + h, v) - fn(u - h, v)) / (2 * h); };
  auto d_v = [&](auto&& fn) { return (fn(u, v + h) - fn(u, v - h)) / (2 * h); };
  auto d_uu = [&](auto&& fn) { return (fn(u + h, v) - 2 * fn(u, v) + fn(u - h, v)) / (h * h); };
  auto d_vv = [&](auto&& fn) { return (fn(u, v + h) - 2 * fn(u, v) + fn(u, v - h)) / (h * h); };
  auto d_uv = [&](auto&& fn) {
    return (fn(u + h, v + h) - fn(u + h, v - h) - fn(u - h, v + h) + fn(u - h, v - h)) /
           (4 * h * h);
  };

  const double Eu = d_u(E), Ev = d_v(E), Gu = d_u(G), Gv = d_v(G);
  const double Fu = d_u(F), Fv = d_v(F);
  const double Evv = d_vv(E), Guu = d_uu(G), Fuv = d_uv(F);

  Eigen::Matrix3d m1, m2;
  m1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
        Fv - 0.5 * Gu, e, f,
        0.5 * Gv, f, g;
  m2 << 0.0, 0.5 * Ev, 0.5 * Gu,
        0.5 * Ev, e, f,
        0.5 * Gu, f, g;
  return (m1.determinant() - m2.determinant()) / (det * det);
}

double symplectic_coefficient(const OneForm& theta, double p, double q, double step) {
  const double h = step * std::max(1.0, std::max(std::abs(p), std::abs(q)));
  const double dtq_dp = (theta.comp_q(p + h, q) - theta.comp_q(p - h, q)) / (2 * h);
  const double dtp_dq = (theta.comp_p(p, q + h) - theta.comp_p(p, q - h)) / (2 * h);
  return dtq_dp - dtp_dq;
}

// ============================== pushforward =================================

namespace {

Point2 source_point(const CoordinateMap& map, double ub, double vb) {
  const Point2 x = map.inverse(ub, vb);
  if (map.excluded && map.excluded(x[0], x[1]))
    throw std::domain_error("pushforward: evaluation at excluded (singular) point of chart '" +
                            map.name + "'");
  return x;
}

}  // namespace

SymbolFn pushforward(const CoordinateMap& map, const SymbolFn& h) {
  SymbolFn source = h;
  return SymbolFn::callable([source, map](double ub, double vb) {
    const Point2 x = source_point(map, ub, vb);
    return source(x[0], x[1]);
  });
}

OneForm pushforward(const CoordinateMap& map, const OneForm& theta) {
  OneForm out;
  out.chart = map.name;
  auto component = [map, theta](double ub, double vb, int idx) {
    const Point2 x = source_point(map, ub, vb);
    const Eigen::Matrix2d jg = map.jacobian(x[0], x[1]).inverse();
    // theta_bar_i = sum_j theta_j dx_j/dxbar_i
    const Eigen::Vector2d t(theta.comp_p(x[0], x[1]), theta.comp_q(x[0], x[1]));
    return (jg.transpose() * t)(idx);
  };
  out.comp_p = [component](double u, double v) { return component(u, v, 0); };
  out.comp_q = [component](double u, double v) { return component(u, v, 1); };
  return out;
}

MetricTensor pushforward(const CoordinateMap& map, const MetricTensor& m) {
  auto transformed = [map, m](double ub, double vb) {
    const Point2 x = source_point(map, ub, vb);
    const Eigen::Matrix2d jg = map.jacobian(x[0], x[1]).inverse();
    Eigen::Matrix2d gmat;
    const double a = m.A(x[0], x[1]), b = m.B(x[0], x[1]), c = m.C(x[0], x[1]);
    gmat << a, 0.5 * b, 0.5 * b, c;
    const Eigen::Matrix2d gbar = jg.transpose() * gmat * jg;
    return std::array<double, 3>{gbar(0, 0), 2.0 * gbar(0, 1), gbar(1, 1)};
  };
  MetricTensor out;
  out.chart = map.name;
  out.A = [transformed](double u, double v) { return transformed(u, v)[0]; };
  out.B = [transformed](double u, double v) { return transformed(u, v)[1]; };
  out.C = [transformed](double u, double v) { return transformed(u, v)[2]; };
  return out;
}

// ========================= loop action / Bohr rule ==========================

namespace {

// h expressed in the chart's coordinates, evaluated at a Cartesian point.
double level_function(const SymbolFn& h, const CoordinateMap& map, double p, double q) {
  const Point2 xb = map.forward(p, q);
  return h(xb[0], xb[1]);
}

// Same, tolerating the chart's excluded disk (tiny neighbourhood of the
// polar singularity). `ok` reports whether the point was evaluable.
double guarded_level(const SymbolFn& h, const CoordinateMap& map, double p, double q,
                     bool& ok) {
  try {
    ok = true;
    return level_function(h, map, p, q);
  } catch (const std::domain_error&) {
    ok = false;
    return 0.0;
  }
}

double chord_integral(const std::vector<Point2>& pts, bool angular, int stride) {
  const int n = int(pts.size());
  double sum = 0.0;
  for (int k = 0; k < n; k += stride) {
    const Point2& a = pts[k];
    const Point2& b = pts[(k + stride) % n];
    double dq = b[1] - a[1];
    if (angular) {
      while (dq > M_PI) dq -= 2.0 * M_PI;
      while (dq < -M_PI) dq += 2.0 * M_PI;
    }
    sum += 0.5 * (a[0] + b[0]) * dq;
  }
  return sum;
}

}  // namespace

double loop_action(const SymbolFn& h, double E, const CoordinateMap& map,
                   const LoopOptions& opts) {
  // Enclosing radius: the level set must stay inside some circle.
  double R = opts.trace_halfwidth;
  if (R <= 0.0) {
    R = 1.0;
    for (;; R *= 2.0) {
      double lo = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 128; ++k) {
        const double t = 2.0 * M_PI * k / 128.0;
        bool ok = false;
        const double val = guarded_level(h, map, R * std::cos(t), R * std::sin(t), ok);
        if (ok) lo = std::min(lo, val);
      }
      if (lo > E) break;
      if (R > 1e6)
        throw std::runtime_error("loop_action: level set appears open or unbounded");
    }
  }

  // Interior point: centroid of the sampled sublevel set.
  const int g = opts.trace_grid;
  double cx = 0.0, cy = 0.0;
  long inside = 0;
  double hmin = std::numeric_limits<double>::infinity();
  double pmin = 0.0, qmin = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double p = -R + 2.0 * R * (i + 0.5) / g;
      const double q = -R + 2.0 * R * (j + 0.5) / g;
      bool ok = false;
      const double val = guarded_level(h, map, p, q, ok);
      if (!ok) continue;
      if (val < hmin) {
        hmin = val;
        pmin = p;
        qmin = q;
      }
      if (val <= E) {
        cx += p;
        cy += q;
        ++inside;
      }
    }
  if (inside == 0) {
    // The sampled minimum overshoots the true one by at most the local
    // curvature times the cell size; within that slack the loop is a point.
    const double cell = 2.0 * R / g;
    bool ok1 = false, ok2 = false, ok3 = false, ok4 = false;
    const double hp = guarded_level(h, map, pmin + cell, qmin, ok1);
    const double hm = guarded_level(h, map, pmin - cell, qmin, ok2);
    const double hq = guarded_level(h, map, pmin, qmin + cell, ok3);
    const double hr = guarded_level(h, map, pmin, qmin - cell, ok4);
    double slack = 1e-12 * std::max(1.0, std::abs(E));
    if (ok1 && ok2 && ok3 && ok4)
      slack += std::abs(hp + hm - 2.0 * hmin) + std::abs(hq + hr - 2.0 * hmin);
    if (hmin > E + slack)
      throw std::runtime_error("loop_action: level set is empty (E below the minimum)");
    return 0.0;  // degenerate point loop
  }
  cx /= double(inside);
  cy /= double(inside);
  // Inside the excluded disk of a polar chart the well is treated as deep
  // interior; the crossing always happens far from it.
  auto hc = [&](double p, double q) {
    bool ok = false;
    const double val = guarded_level(h, map, p, q, ok);
    return ok ? val : -std::numeric_limits<double>::infinity();
  };
  const double h0 = hc(cx, cy);
  if (std::abs(h0 - E) < 1e-13 * std::max(1.0, std::abs(E))) return 0.0;
  if (h0 > E)
    throw std::runtime_error("loop_action: interior seed not below the level; "
                             "level set may be non-star-shaped");

  // Radial trace: for each angle, Brent-solve h(c + r e(phi)) = E.
  const int n = std::max(64, opts.samples - opts.samples % 4);
  std::vector<Point2> pts(n);
  const double rmax = 2.2 * R;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * M_PI * k / n;
    const double ex = std::cos(phi), ey = std::sin(phi);
    auto f = [&](double r) {
      const double val = hc(cx + r * ex, cy + r * ey);
      return std::isfinite(val) ? val - E : -std::abs(E) - 1.0;
    };
    double rhi = rmax;
    double fhi = f(rhi);
    if (fhi <= 0.0) throw std::runtime_error("loop_action: failed to bracket the level curve");
    const double r = brent_root(f, 0.0, rhi, f(0.0), fhi, 1e-14 * rmax);
    const Point2 xb = map.forward(cx + r * ex, cy + r * ey);
    pts[k] = xb;
  }

  // Chord sums converge O(n^-2); one Richardson level removes that term.
  const double fine = chord_integral(pts, map.second_coord_angular, 1);
  const double coarse = chord_integral(pts, map.second_coord_angular, 2);
  return (4.0 * fine - coarse) / 3.0;
}

std::vector<double> bohr_sommerfeld(const SymbolFn& h, int n_max, const SpaceConfig& cfg,
                                    const CoordinateMap& map, const LoopOptions& opts) {
  cfg.validate();
  if (n_max < 0) throw std::invalid_argument("bohr_sommerfeld: n_max must be >= 0");
  auto area = [&](double e) { return loop_action(h, e, map, opts); };

  // Minimum of h in the Cartesian chart near the origin region.
  double hmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j < 256; ++j) {
      const double p = -8.0 + 16.0 * i / 255.0, q = -8.0 + 16.0 * j / 255.0;
      bool ok = false;
      const double val = guarded_level(h, map, p, q, ok);
      if (ok) hmin = std::min(hmin, val);
    }

  std::vector<double> energies;
  double lo = hmin;
  for (int n = 0; n <= n_max; ++n) {
    const double target = (n + 0.5) * 2.0 * M_PI * cfg.hbar;
    double hi = std::max(lo + 1.0, 2.0 * std::abs(lo));
    double fhi = area(hi) - target;
    int guard = 0;
    while (fhi < 0.0) {
      hi = hmin + 2.0 * (hi - hmin);
      fhi = area(hi) - target;
      if (++guard > 60) throw std::runtime_error("bohr_sommerfeld: root not bracketed");
    }
    const double flo = area(std::max(lo, hmin + 1e-12)) - target;
    if (flo > 0.0) throw std::runtime_error("bohr_sommerfeld: bracketing failed from below");
    const double e = brent_root([&](double x) { return area(x) - target; },
                                std::max(lo, hmin + 1e-12), hi, flo, fhi, 1e-11);
    energies.push_back(e);
    lo = e;
  }
  return energies;
}

}  // namespace csq
