#include "csq/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "csq/coherent.hpp"
#include "csq/geometry.hpp"
#include "csq/hilbert.hpp"
#include "csq/pathint.hpp"
#include "csq/spin.hpp"
#include "csq/svg.hpp"
#include "csq/symbol_text.hpp"
#include "csq/symbols.hpp"

namespace csq {

namespace {

using nlohmann::json;

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Params {
  json j;
  std::string command;

  void require_keys(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok{"command", "seed", "dim", "hbar", "omega"};
    for (const char* k : allowed) ok.insert(k);
    for (const auto& [key, value] : j.items())
      if (!ok.count(key))
        throw std::invalid_argument("spec: unknown key '" + key + "' for command " + command);
  }
  bool has(const char* k) const { return j.contains(k); }
  double number(const char* k, double dflt) const {
    if (!j.contains(k)) return dflt;
    if (!j[k].is_number()) throw std::invalid_argument(std::string("spec: '") + k + "' must be a number");
    return j[k].get<double>();
  }
  long integer(const char* k, long dflt) const {
    if (!j.contains(k)) return dflt;
    if (!j[k].is_number_integer())
      throw std::invalid_argument(std::string("spec: '") + k + "' must be an integer");
    return j[k].get<long>();
  }
  std::string text(const char* k, const std::string& dflt) const {
    if (!j.contains(k)) return dflt;
    if (!j[k].is_string()) throw std::invalid_argument(std::string("spec: '") + k + "' must be a string");
    return j[k].get<std::string>();
  }
  std::vector<double> number_list(const char* k, std::vector<double> dflt) const {
    if (!j.contains(k)) return dflt;
    if (j[k].is_number()) return {j[k].get<double>()};
    if (j[k].is_array()) {
      std::vector<double> out;
      for (const auto& v : j[k]) {
        if (!v.is_number()) throw std::invalid_argument(std::string("spec: '") + k + "' must be numeric");
        out.push_back(v.get<double>());
      }
      return out;
    }
    throw std::invalid_argument(std::string("spec: '") + k + "' must be a number or list");
  }

  SpaceConfig space() const {
    SpaceConfig cfg;
    cfg.dim = int(integer("dim", 64));
    cfg.hbar = number("hbar", 1.0);
    cfg.omega = number("omega", 1.0);
    cfg.validate();
    return cfg;
  }
  uint64_t seed() const { return uint64_t(integer("seed", 1)); }

  Fiducial fiducial(const SpaceConfig& cfg) const {
    const std::string spec = text("fiducial", "gaussian");
    if (spec == "gaussian") return gaussian_fiducial(cfg);
    if (spec.rfind("fock:", 0) == 0) return fock_fiducial(cfg, std::stoi(spec.substr(5)));
    throw std::invalid_argument("spec: fiducial must be 'gaussian' or 'fock:<n>'");
  }
};

std::vector<std::string> param_tail(const SpaceConfig& cfg) {
  return {num(cfg.hbar), num(cfg.omega), std::to_string(cfg.dim)};
}

// Matrix-element oracle for the dk command: <p'',q''| e^{-iHT/hbar} |p',q'>
// with H the Toeplitz quantization of h; empty when not computable.
bool dk_oracle(const SymbolFn& h, const DkParams& prm, const SpaceConfig& cfg, Complex& out) {
  if (!h.is_poly()) return false;
  const CoherentLabel from{prm.labels.p_from, prm.labels.q_from};
  const CoherentLabel to{prm.labels.p_to, prm.labels.q_to};
  if (h.poly().empty()) {
    out = overlap_analytic(to, from, cfg);
    return true;
  }
  if (!label_trusted(from, cfg) || !label_trusted(to, cfg)) return false;
  const Fiducial fid = gaussian_fiducial(cfg);
  const PhaseSpaceQuadrature quad = default_toeplitz_quadrature(cfg, h.poly().degree());
  const Operator op = toeplitz_quantize(h, fid, quad, cfg);
  const Operator u = evolve(op, prm.T, cfg);
  const StateVector from_state = coherent_state(from, fid, Gauge{}, cfg);
  const StateVector to_state = coherent_state(to, fid, Gauge{}, cfg);
  out = to_state.dot(u.mat * from_state);
  return true;
}

struct CommandOutput {
  std::string csv;
  std::unique_ptr<SvgChart> chart;  // optional plot
};

CommandOutput run_quantize(const Params& prm, const RunOptions&) {
  prm.require_keys({"h", "radius", "nodes"});
  const SpaceConfig cfg = prm.space();
  const PolySymbol h = parse_symbol(prm.text("h", "0"));
  PhaseSpaceQuadrature quad = default_toeplitz_quadrature(cfg, h.degree());
  if (prm.has("radius")) quad.radius = prm.number("radius", quad.radius);
  if (prm.has("nodes")) quad.nodes_per_axis = int(prm.integer("nodes", quad.nodes_per_axis));
  const Operator op = toeplitz_quantize(SymbolFn(h), gaussian_fiducial(cfg), quad, cfg);

  std::ostringstream csv;
  csv << "row,col,re,im,hbar,omega,dim\r\n";
  for (int r = 0; r < cfg.dim; ++r)
    for (int c = 0; c < cfg.dim; ++c) {
      const Complex v = op.mat(r, c);
      if (std::abs(v) < 1e-14) continue;
      csv << r << "," << c << "," << num(v.real()) << "," << num(v.imag());
      for (auto& t : param_tail(cfg)) csv << "," << t;
      csv << "\r\n";
    }
  CommandOutput out;
  out.csv = csv.str();
  return out;
}

CommandOutput run_spectrum(const Params& prm, const RunOptions&) {
  prm.require_keys({"h", "count", "radius", "nodes"});
  const SpaceConfig cfg = prm.space();
  const PolySymbol h = parse_symbol(prm.text("h", "0.5*p^2 + 0.5*q^2"));
  PhaseSpaceQuadrature quad = default_toeplitz_quadrature(cfg, h.degree());
  if (prm.has("radius")) quad.radius = prm.number("radius", quad.radius);
  if (prm.has("nodes")) quad.nodes_per_axis = int(prm.integer("nodes", quad.nodes_per_axis));
  const Operator op = toeplitz_quantize(SymbolFn(h), gaussian_fiducial(cfg), quad, cfg);
  const std::vector<double> eig = spectrum(op);
  const long count = std::min<long>(prm.integer("count", 10), long(eig.size()));

  std::ostringstream csv;
  csv << "index,eigenvalue,hbar,omega,dim\r\n";
  std::vector<double> xs, ys;
  for (long k = 0; k < count; ++k) {
    csv << k << "," << num(eig[size_t(k)]);
    for (auto& t : param_tail(cfg)) csv << "," << t;
    csv << "\r\n";
    xs.push_back(double(k));
    ys.push_back(eig[size_t(k)]);
  }
  CommandOutput out;
  out.csv = csv.str();
  out.chart = std::make_unique<SvgChart>("Toeplitz spectrum", "index", "eigenvalue");
  out.chart->add_series("eigenvalue", xs, ys);
  return out;
}

CommandOutput run_symbols(const Params& prm, const RunOptions&) {
  prm.require_keys({"h", "extent", "points"});
  const SpaceConfig cfg = prm.space();
  const PolySymbol h = parse_symbol(prm.text("h", "0.5*p^2 + 0.5*q^2"));
  const double extent = prm.number("extent", 2.0);
  const int points = int(prm.integer("points", 21));
  const Fiducial fid = gaussian_fiducial(cfg);
  const Operator op =
      toeplitz_quantize(SymbolFn(h), fid, default_toeplitz_quadrature(cfg, h.degree()), cfg);
  SymbolGrid grid{-extent, extent, points, -extent, extent, points};
  const TabulatedSymbol upper = upper_symbol(op, fid, grid, cfg);

  std::ostringstream csv;
  csv << "p,q,h,upper_of_toeplitz,diff,hbar,omega,dim\r\n";
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double p = grid.p(i), q = grid.q(j);
      const double hv = h.eval(p, q), uv = upper.values(i, j);
      csv << num(p) << "," << num(q) << "," << num(hv) << "," << num(uv) << "," << num(uv - hv);
      for (auto& t : param_tail(cfg)) csv << "," << t;
      csv << "\r\n";
    }
  CommandOutput out;
  out.csv = csv.str();
  return out;
}

CommandOutput run_metric(const Params& prm, const RunOptions&) {
  prm.require_keys({"fiducial"});
  const SpaceConfig cfg = prm.space();
  const Fiducial fid = prm.fiducial(cfg);
  const MetricTensor var = variance_metric(fid, cfg);
  const MetricTensor fs = fubini_study_metric(fid, cfg);
  const MetricTensor aa = pushforward(chart("action-angle"), var);

  std::ostringstream csv;
  csv << "name,value,hbar,omega,dim\r\n";
  auto line = [&](const std::string& name, double v) {
    csv << name << "," << num(v);
    for (auto& t : param_tail(cfg)) csv << "," << t;
    csv << "\r\n";
  };
  line("A_variance", var.A(0, 0));
  line("B_variance", var.B(0, 0));
  line("C_variance", var.C(0, 0));
  line("A_finite_difference", fs.A(0.2, -0.1));
  line("B_finite_difference", fs.B(0.2, -0.1));
  line("C_finite_difference", fs.C(0.2, -0.1));
  line("curvature_cartesian", gaussian_curvature(var, 0.3, 0.2));
  line("curvature_action_angle", gaussian_curvature(aa, 1.0, 0.5));
  CommandOutput out;
  out.csv = csv.str();
  return out;
}

CommandOutput run_chart(const Params& prm, const RunOptions&) {
  prm.require_keys({"chart", "extent", "points"});
  const SpaceConfig cfg = prm.space();
  const CoordinateMap& map = chart(prm.text("chart", "action-angle"));
  const double extent = prm.number("extent", 2.0);
  const int points = int(prm.integer("points", 5));

  std::ostringstream csv;
  csv << "p,q,pbar,qbar,det_jacobian,hbar,omega,dim\r\n";
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double p = -extent + 2.0 * extent * i / std::max(1, points - 1);
      const double q = -extent + 2.0 * extent * j / std::max(1, points - 1);
      if (map.excluded && map.excluded(p, q)) continue;
      const Point2 xb = map.apply(p, q);
      csv << num(p) << "," << num(q) << "," << num(xb[0]) << "," << num(xb[1]) << ","
          << num(map.jacobian(p, q).determinant());
      for (auto& t : param_tail(cfg)) csv << "," << t;
      csv << "\r\n";
    }
  CommandOutput out;
  out.csv = csv.str();
  return out;
}

CommandOutput run_bohr(const Params& prm, const RunOptions&) {
  prm.require_keys({"h", "n_max", "chart"});
  const SpaceConfig cfg = prm.space();
  const PolySymbol h = parse_symbol(prm.text("h", "0.5*p^2 + 0.5*q^2"));
  const int n_max = int(prm.integer("n_max", 5));
  const CoordinateMap& map = chart(prm.text("chart", "cartesian"));
  const std::vector<double> energies = bohr_sommerfeld(SymbolFn(h), n_max, cfg, map);

  std::ostringstream csv;
  csv << "n,energy,action,hbar,omega,dim\r\n";
  std::vector<double> xs, ys;
  for (int n = 0; n <= n_max; ++n) {
    csv << n << "," << num(energies[size_t(n)]) << ","
        << num((n + 0.5) * 2.0 * M_PI * cfg.hbar);
    for (auto& t : param_tail(cfg)) csv << "," << t;
    csv << "\r\n";
    xs.push_back(n);
    ys.push_back(energies[size_t(n)]);
  }
  CommandOutput out;
  out.csv = csv.str();
  out.chart = std::make_unique<SvgChart>("Bohr-Sommerfeld energies", "n", "E_n");
  out.chart->add_series("E_n", xs, ys);
  return out;
}

// Closed-form kernels for the lattice command: free particle or pure
// harmonic potential.
struct LatticeOracle {
  bool available = false;
  double mass = 1.0;
  double omega = 0.0;  // 0 means free
};

LatticeOracle classify_lattice_oracle(const PolySymbol& h) {
  LatticeOracle o;
  double kp2 = 0.0, vq2 = 0.0;
  for (const auto& [powers, c] : h.terms()) {
    const auto [a, b] = powers;
    if (a == 2 && b == 0)
      kp2 = c;
    else if (a == 0 && b == 2)
      vq2 = c;
    else
      return o;
  }
  if (!(kp2 > 0.0)) return o;
  o.available = true;
  o.mass = 1.0 / (2.0 * kp2);
  o.omega = vq2 > 0.0 ? std::sqrt(2.0 * vq2 / o.mass) : 0.0;
  return o;
}

Complex lattice_oracle_value(const LatticeOracle& o, const LatticeConfig& lat,
                             const SpaceConfig& cfg) {
  const double dq = lat.q_to - lat.q_from;
  if (o.omega == 0.0)
    return std::sqrt(o.mass / (2.0 * M_PI * I * cfg.hbar * lat.T)) *
           std::exp(I * o.mass * dq * dq / (2.0 * cfg.hbar * lat.T));
  const double sn = std::sin(o.omega * lat.T), cs = std::cos(o.omega * lat.T);
  return std::sqrt(o.mass * o.omega / (2.0 * M_PI * I * cfg.hbar * sn)) *
         std::exp(I * o.mass * o.omega *
                  ((lat.q_to * lat.q_to + lat.q_from * lat.q_from) * cs -
                   2.0 * lat.q_to * lat.q_from) /
                  (2.0 * cfg.hbar * sn));
}

CommandOutput run_lattice(const Params& prm, const RunOptions&) {
  prm.require_keys({"h", "T", "q_from", "q_to", "slices", "grid_halfwidth", "grid_nodes"});
  const SpaceConfig cfg = prm.space();
  const PolySymbol h = parse_symbol(prm.text("h", "0.5*p^2"));
  LatticeConfig lat;
  lat.T = prm.number("T", 1.0);
  lat.q_from = prm.number("q_from", 0.0);
  lat.q_to = prm.number("q_to", 1.0);
  lat.grid_halfwidth = prm.number("grid_halfwidth", 0.0);
  lat.grid_nodes = int(prm.integer("grid_nodes", 0));
  const std::vector<double> slice_list = prm.number_list("slices", {16.0});

  const LatticeOracle oracle = classify_lattice_oracle(h);

  std::ostringstream csv;
  csv << "slices,re,im,oracle_re,oracle_im,hbar,omega,dim\r\n";
  std::vector<double> xs, ys;
  for (double sv : slice_list) {
    lat.slices = int(sv);
    const Complex k = lattice_propagator(SymbolFn(h), lat, cfg);
    std::string ore, oim;
    if (oracle.available) {
      const Complex ko = lattice_oracle_value(oracle, lat, cfg);
      ore = num(ko.real());
      oim = num(ko.imag());
      xs.push_back(sv);
      ys.push_back(std::abs(k - ko));
    }
    csv << lat.slices << "," << num(k.real()) << "," << num(k.imag()) << "," << ore << "," << oim;
    for (auto& t : param_tail(cfg)) csv << "," << t;
    csv << "\r\n";
  }
  CommandOutput out;
  out.csv = csv.str();
  if (!xs.empty()) {
    out.chart = std::make_unique<SvgChart>("Lattice propagator error", "slices", "|K - exact|");
    out.chart->add_series("error", xs, ys);
  }
  return out;
}

CommandOutput run_dk(const Params& prm, const RunOptions& opts) {
  prm.require_keys({"h", "nu", "T", "p_from", "q_from", "p_to", "q_to", "samples", "steps",
                    "method", "widening", "extrapolate"});
  const SpaceConfig cfg = prm.space();
  const PolySymbol h = parse_symbol(prm.text("h", "0"));
  DkParams base;
  base.T = prm.number("T", 1.0);
  base.labels = DkLabels{prm.number("p_from", 0.0), prm.number("q_from", 0.0),
                         prm.number("p_to", 1.0), prm.number("q_to", 0.0)};
  base.samples = prm.integer("samples", 100000);
  base.steps = int(prm.integer("steps", 0));
  base.seed = prm.seed();
  base.workers = opts.workers;
  base.proposal_widening = prm.number("widening", 1.2);
  if (prm.has("extrapolate")) {
    if (!prm.j["extrapolate"].is_boolean())
      throw std::invalid_argument("spec: 'extrapolate' must be a boolean");
    base.extrapolate = prm.j["extrapolate"].get<bool>();
  }
  const std::string method = prm.text("method", "auto");
  if (method == "auto")
    base.method = DkParams::Method::automatic;
  else if (method == "naive")
    base.method = DkParams::Method::naive;
  else if (method == "rao-blackwell")
    base.method = DkParams::Method::rao_blackwell;
  else
    throw std::invalid_argument("spec: method must be auto, naive, or rao-blackwell");

  std::ostringstream csv;
  csv << "nu,T,re,im,stderr,nSamples,oracle_re,oracle_im,hbar,omega,dim\r\n";
  std::vector<double> xs, ys, os_;
  for (double nu : prm.number_list("nu", {10.0})) {
    DkParams p = base;
    p.nu = nu;
    const MCEstimate est = dk_propagator(SymbolFn(h), p, Gauge{}, cfg);
    Complex oracle;
    std::string ore, oim;
    if (dk_oracle(SymbolFn(h), p, cfg, oracle)) {
      ore = num(oracle.real());
      oim = num(oracle.imag());
      os_.push_back(std::abs(oracle));
    }
    csv << num(nu) << "," << num(p.T) << "," << num(est.mean.real()) << ","
        << num(est.mean.imag()) << "," << num(est.std_error) << "," << est.n_samples << ","
        << ore << "," << oim;
    for (auto& t : param_tail(cfg)) csv << "," << t;
    csv << "\r\n";
    xs.push_back(nu);
    ys.push_back(std::abs(est.mean));
  }
  CommandOutput out;
  out.csv = csv.str();
  out.chart = std::make_unique<SvgChart>("Regularized propagator vs nu", "nu", "|K|");
  out.chart->add_series("|estimate|", xs, ys);
  if (os_.size() == xs.size()) out.chart->add_series("|oracle|", xs, os_);
  return out;
}

CommandOutput run_spin(const Params& prm, const RunOptions&) {
  prm.require_keys({"s", "h", "ntheta", "nphi"});
  SpinConfig scfg;
  scfg.s = prm.number("s", 0.5);
  scfg.hbar = prm.number("hbar", 1.0);
  scfg.validate();
  const int ntheta = int(prm.integer("ntheta", 64));
  const int nphi = int(prm.integer("nphi", 64));

  std::ostringstream csv;
  csv << "name,value,s,hbar\r\n";
  auto line = [&](const std::string& name, double v) {
    csv << name << "," << num(v) << "," << num(scfg.s) << "," << num(scfg.hbar) << "\r\n";
  };
  const SpinTriple ops = spin_ops(scfg);
  const Mat casimir = ops.s1.mat * ops.s1.mat + ops.s2.mat * ops.s2.mat + ops.s3.mat * ops.s3.mat;
  const double target = scfg.s * (scfg.s + 1.0) * scfg.hbar * scfg.hbar;
  line("casimir_defect", max_abs(casimir - target * Mat::Identity(scfg.dim(), scfg.dim())));
  line("resolution_deviation", spin_resolution_check(scfg, ntheta, nphi));
  if (prm.has("h")) {
    const SpherePoly h = parse_sphere_symbol(prm.text("h", "z"));
    const Operator top = spin_toeplitz(
        [&h](double theta, double phi) { return h.eval(theta, phi); }, scfg, ntheta, nphi);
    const double coeff = (top.mat.cwiseProduct(ops.s3.mat.conjugate()).sum().real()) /
                         ops.s3.mat.squaredNorm();
    line("s3_projection_coeff", coeff);
    line("s3_projection_residual", max_abs(top.mat - coeff * ops.s3.mat));
  }
  CommandOutput out;
  out.csv = csv.str();
  return out;
}

CommandOutput run_resolution(const Params& prm, const RunOptions&) {
  prm.require_keys({"fiducial", "radius", "nodes", "block"});
  const SpaceConfig cfg = prm.space();
  const Fiducial fid = prm.fiducial(cfg);
  PhaseSpaceQuadrature quad;
  quad.radius = prm.number("radius", 12.0);
  quad.nodes_per_axis = int(prm.integer("nodes", 200));
  const int block = int(prm.integer("block", cfg.dim / 2));
  const double dev = resolution_check(fid, Gauge{}, quad, cfg, block);

  std::ostringstream csv;
  csv << "radius,nodes,block,deviation,hbar,omega,dim\r\n";
  csv << num(quad.radius) << "," << quad.nodes_per_axis << "," << block << "," << num(dev);
  for (auto& t : param_tail(cfg)) csv << "," << t;
  csv << "\r\n";
  CommandOutput out;
  out.csv = csv.str();
  return out;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read spec file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

ExperimentSpec ExperimentSpec::from_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("spec: top level must be an object");
  if (!j.contains("command") || !j["command"].is_string())
    throw std::invalid_argument("spec: missing string key 'command'");
  ExperimentSpec spec;
  spec.command = j["command"].get<std::string>();
  spec.json = text;
  return spec;
}

RunResult run(const ExperimentSpec& spec, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  json j = json::parse(spec.json);
  if (opts.seed) j["seed"] = *opts.seed;
  Params prm{j, spec.command};

  CommandOutput output;
  if (spec.command == "quantize")
    output = run_quantize(prm, opts);
  else if (spec.command == "spectrum")
    output = run_spectrum(prm, opts);
  else if (spec.command == "symbols")
    output = run_symbols(prm, opts);
  else if (spec.command == "metric")
    output = run_metric(prm, opts);
  else if (spec.command == "chart")
    output = run_chart(prm, opts);
  else if (spec.command == "bohr")
    output = run_bohr(prm, opts);
  else if (spec.command == "lattice")
    output = run_lattice(prm, opts);
  else if (spec.command == "dk")
    output = run_dk(prm, opts);
  else if (spec.command == "spin")
    output = run_spin(prm, opts);
  else if (spec.command == "resolution")
    output = run_resolution(prm, opts);
  else
    throw std::invalid_argument("spec: unknown command '" + spec.command + "'");

  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  RunResult result;
  result.csv_path = (fs::path(opts.out_dir) / (spec.command + ".csv")).string();
  {
    std::ofstream out(result.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open CSV output " + result.csv_path);
    out << output.csv;
  }
  if (opts.svg && output.chart) {
    result.svg_path = (fs::path(opts.out_dir) / (spec.command + ".svg")).string();
    output.chart->write(result.svg_path);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.manifest_path = (fs::path(opts.out_dir) / "manifest.json").string();
  json manifest;
  manifest["command"] = spec.command;
  manifest["spec"] = j;
  manifest["seed"] = prm.seed();
  manifest["workers"] = opts.workers;
  manifest["version"] = "0.1.0";
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  manifest["wall_seconds"] = wall;
  manifest["outputs"] = {{"csv", result.csv_path}, {"svg", result.svg_path}};
  std::ofstream mout(result.manifest_path, std::ios::binary);
  mout << manifest.dump(2) << "\n";
  return result;
}

}  // namespace csq
