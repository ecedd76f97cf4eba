#include <cmath>
#include <stdexcept>

#include "csq/pathint.hpp"

namespace csq {

NormalStream::NormalStream(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{uint32_t(seed), uint32_t(seed >> 32), uint32_t(stream),
                    uint32_t(stream >> 32), 0x9e3779b9u};
  gen_.seed(seq);
}

double NormalStream::uniform() {
  return (gen_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

Complex fresnel_toy(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("fresnel_toy: nu must be > 0");
  return std::sqrt(2.0 * M_PI / Complex(1.0 / nu, -1.0));
}

BridgePath sample_bridge(double nu, double T, const BridgeEndpoints& ends, int steps,
                         uint64_t seed, uint64_t stream) {
  if (steps < 2) throw std::invalid_argument("sample_bridge: need steps >= 2");
  if (!(nu > 0.0) || !(T > 0.0))
    throw std::invalid_argument("sample_bridge: nu and T must be > 0");
  NormalStream rng(seed, stream);
  BridgePath path;
  path.nu = nu;
  const int n = steps;
  const double dt = T / n;
  path.times.resize(n + 1);
  for (int l = 0; l <= n; ++l) path.times(l) = T * l / n;

  // Free walk then bridge pinning: u_l = w_l - (t_l/T) w_n.
  auto component = [&](double from, double to) {
    RealVec w(n + 1);
    w(0) = 0.0;
    const double sigma = std::sqrt(nu * dt);
    for (int l = 1; l <= n; ++l) w(l) = w(l - 1) + sigma * rng.next();
    RealVec out(n + 1);
    for (int l = 0; l <= n; ++l) {
      const double frac = double(l) / n;
      out(l) = from + (to - from) * frac + (w(l) - frac * w(n));
    }
    return out;
  };
  path.p = component(ends.p_from, ends.p_to);
  path.q = component(ends.q_from, ends.q_to);
  return path;
}

Complex stratonovich_action(const BridgePath& path, const Gauge& g, const SymbolFn& h,
                            double hbar) {
  const int n = int(path.times.size()) - 1;
  if (n < 1) throw std::invalid_argument("stratonovich_action: path too short");
  const double T = path.times(n) - path.times(0);
  const double dt = T / n;

  double kinetic = 0.0;
  for (int l = 0; l < n; ++l)
    kinetic += 0.5 * (path.p(l + 1) + path.p(l)) * (path.q(l + 1) - path.q(l));

  double hamiltonian = 0.0;
  for (int l = 0; l <= n; ++l) {
    const double w = (l == 0 || l == n) ? 0.5 * dt : dt;
    hamiltonian += w * h(path.p(l), path.q(l));
  }

  const double boundary = g(path.p(n), path.q(n)) - g(path.p(0), path.q(0));
  return I * (kinetic + boundary - hamiltonian) / hbar;
}

}  // namespace csq
