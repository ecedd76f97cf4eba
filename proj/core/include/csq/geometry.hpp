#ifndef CSQ_GEOMETRY_HPP
#define CSQ_GEOMETRY_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "csq/coherent.hpp"
#include "csq/symbols.hpp"
#include "csq/types.hpp"

namespace csq {

using Point2 = std::array<double, 2>;
using ScalarField = std::function<double(double, double)>;
using Map2 = std::function<Point2(double, double)>;
using JacobianFn = std::function<Eigen::Matrix2d(double, double)>;

/// One-form theta = theta_p dp + theta_q dq on a chart.
struct OneForm {
  ScalarField comp_p;
  ScalarField comp_q;
  std::string chart = "cartesian";
};

/// Metric dsigma^2 = A dp^2 + B dp dq + C dq^2 (note B multiplies dp dq once).
struct MetricTensor {
  ScalarField A;
  ScalarField B;
  ScalarField C;
  std::string chart = "cartesian";

  static MetricTensor constant(double a, double b, double c, std::string chart = "cartesian");
};

/// Invertible chart change (p,q) -> (pbar,qbar). `canonical` means unit
/// Jacobian determinant (pbar dqbar - p dq closed).
struct CoordinateMap {
  std::string name;
  Map2 forward;
  Map2 inverse;
  JacobianFn jacobian_forward;                 // optional; finite differences otherwise
  bool canonical = false;
  bool second_coord_angular = false;           // second target coordinate lives on a circle
  std::function<bool(double, double)> excluded;  // singular source points
  ScalarField generating_witness;  // optional F with pbar dqbar = p dq + dF

  Point2 apply(double p, double q) const { return forward(p, q); }
  Eigen::Matrix2d jacobian(double p, double q) const;
};

/// Built-in charts: "cartesian", "action-angle", "rotation-45".
const CoordinateMap& chart(const std::string& name);
std::vector<std::string> chart_names();

/// Max |det J - 1| over random points in [-r, r]^2 (singular points skipped).
double canonical_map_defect(const CoordinateMap& map, int npoints, double r, uint64_t seed);

struct FiniteDifferenceOptions {
  double step_scale = 1e-4;       // delta = step_scale * max(1, |label|)
  double richardson_tol = 1e-4;   // allowed relative disagreement between steps
};

/// theta = i hbar <p,q| d |p,q> from central finite differences of the
/// coherent-state map, with a Richardson consistency check.
OneForm canonical_one_form(const Fiducial& fid, const Gauge& g, const SpaceConfig& cfg,
                           const FiniteDifferenceOptions& fd = {});

/// dsigma^2 = 2 hbar^2 [ ||d|pq>||^2 - |<pq|d|pq>|^2 ] by finite differences;
/// gauge-independent and flat for every fiducial.
MetricTensor fubini_study_metric(const Fiducial& fid, const SpaceConfig& cfg,
                                 const FiniteDifferenceOptions& fd = {});

/// Same with an explicit gauge, which must drop out of the metric.
MetricTensor fubini_study_metric_gauged(const Fiducial& fid, const Gauge& g,
                                        const SpaceConfig& cfg,
                                        const FiniteDifferenceOptions& fd = {});

/// Same metric from exact operator expectations:
///   A = 2<dQ^2>, B = -2<dQ dP + dP dQ>, C = 2<dP^2>,
/// normalized so the Omega=1 Gaussian fiducial gives hbar (dp^2 + dq^2).
MetricTensor variance_metric(const Fiducial& fid, const SpaceConfig& cfg);

/// Gaussian curvature of the metric at a point (Brioschi formula with finite
/// differences). Constant metrics short-circuit to exactly zero.
double gaussian_curvature(const MetricTensor& m, double u, double v, double step = 1e-3);

/// Coefficient of dp ^ dq in d(theta), by finite differences of the components.
double symplectic_coefficient(const OneForm& theta, double p, double q, double step = 1e-4);

SymbolFn pushforward(const CoordinateMap& map, const SymbolFn& h);
OneForm pushforward(const CoordinateMap& map, const OneForm& theta);
MetricTensor pushforward(const CoordinateMap& map, const MetricTensor& m);

struct LoopOptions {
  int trace_grid = 512;        // marching-squares seed grid resolution
  double trace_halfwidth = 0;  // 0: auto from the energy
  int samples = 4096;          // boundary samples for the area quadrature
};

/// Enclosed symplectic area of the closed level curve h = E, evaluated in the
/// given chart as the contour integral of pbar dqbar. The level set is traced
/// in the Cartesian chart and mapped; a marching-squares pass seeds a radial
/// refinement of the contour.
double loop_action(const SymbolFn& h, double E, const CoordinateMap& map,
                   const LoopOptions& opts = {});

/// Energies solving loop_action(E) = (n + 1/2) 2 pi hbar for n = 0..n_max.
std::vector<double> bohr_sommerfeld(const SymbolFn& h, int n_max, const SpaceConfig& cfg,
                                    const CoordinateMap& map, const LoopOptions& opts = {});

}  // namespace csq

#endif
