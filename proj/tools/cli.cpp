#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "CLI11.hpp"
#include "json.hpp"
#include "perihelion/angles.hpp"
#include "perihelion/chaos.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/euler_center.hpp"
#include "perihelion/flow.hpp"
#include "perihelion/io.hpp"
#include "perihelion/kernels/quadrature_kernels.hpp"
#include "perihelion/parallel.hpp"
#include "perihelion/secular.hpp"
#include "perihelion/verify.hpp"

namespace perihelion::cli {
namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Settings {
  // shared
  double C = kNaN;
  double beta = 80.0;
  double betabar = 80.0;
  double mu = kNaN;
  double kappa = kNaN;
  int nu_max = 0;  // 0: command default
  double tol = 1e-12;
  std::size_t nodes = 4096;
  std::string out = "out";
  std::uint64_t seed = 20240601;
  std::string experiment;
  std::string config;

  // portrait
  double r = kNaN;
  bool slow0 = false;
  std::size_t level_samples = 400;
  std::size_t grid = 201;

  // horseshoe
  std::vector<double> window{0.15, 0.33, 0.62, 0.76};
  std::size_t census_n = 6;
  std::vector<double> targets{0.203945459, 0.665706, 0.278077917, 0.714484};
  std::vector<double> A_grid{0.04, 0.05};
  std::vector<double> B_grid{0.007, 0.008};
  std::size_t manifold_iterations = 2;
  double manifold_spacing = 5e-3;
  std::size_t manifold_points = 400;
  std::size_t orbits = 20;

  // verify
  std::string suite = "all";
  bool inject_q2_fault = false;

  // integrate
  std::vector<double> state;  // R G r g
  double t_end = 1e4;
  std::size_t samples = 1000;
};

/// Resolves (beta, betabar) from --mu/--kappa when given.
MassParams mass_params(const Settings& s) {
  if (!std::isnan(s.kappa)) {
    const double mu = std::isnan(s.mu) ? 1.0 : s.mu;
    return derive_mass_params(mu, s.kappa);
  }
  return mass_params_from_betas(s.beta, s.betabar);
}

json mass_json(const MassParams& p) {
  return {{"beta", p.beta}, {"betabar", p.betabar}, {"mu", p.mu}, {"kappa", p.kappa}};
}

std::string fmt(double v) { return format_double(v); }

/// Compact form for header comments.
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// portrait

int cmd_portrait_r(const Settings& s) {
  const double r = s.r;
  const auto pc = classify_portrait(r);
  RunOutput out(s.out, {{"command", "portrait"}, {"r", r}, {"level-samples", s.level_samples}});

  CsvTable eq;
  eq.comments = {"E0 equilibria at r = " + label(r) + "; Lambda = 1, Theta = 0",
                 "units: g rad, G in units of Lambda, energy dimensionless"};
  eq.columns = {"g", "G", "type", "energy"};
  for (const auto& e : pc.equilibria) eq.add_cells({fmt(e.g), fmt(e.G), to_string(e.type), fmt(e.energy)});

  std::vector<double> levels;
  for (const auto& e : pc.equilibria) levels.push_back(e.energy);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const auto [emin, emax] = pc.admissible_energy;
  for (int k = 1; k <= 9; ++k) levels.push_back(emin + (emax - emin) * k / 10.0);

  CsvTable lv;
  lv.comments = {"E0 level curves at r = " + label(r), "columns: level index, level value, (g, G)"};
  lv.columns = {"level_index", "level", "g", "G"};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    try {
      pts = e0_level_points(r, levels[i], s.level_samples);
    } catch (const DomainError&) {
      continue;
    }
    for (const auto& [g, G] : pts) lv.add({static_cast<double>(i), levels[i], g, G});
  }

  std::vector<std::string> files{"equilibria.csv", "levels.csv"};
  out.write_csv("equilibria.csv", eq);
  out.write_csv("levels.csv", lv);

  if (pc.has_saddle) {
    CsvTable sx;
    sx.comments = {"closed-form motion on the separatrix through the saddle, r = " + label(r),
                   "units: t in the E0 time scale, g rad"};
    sx.columns = {"branch", "t", "g", "G"};
    for (int sign : {1, -1}) {
      SeparatrixOrbit so{r, 0.0, sign};
      for (int i = 0; i <= 800; ++i) {
        const double t = -10.0 + 20.0 * i / 800.0;
        const auto [G, g] = separatrix_orbit(so, t);
        sx.add({static_cast<double>(sign), t, g, G});
      }
    }
    out.write_csv("separatrix.csv", sx);
    files.push_back("separatrix.csv");
  }
  out.write_manifest(files);

  std::printf("r = %s\n", fmt(r).c_str());
  for (const auto& e : pc.equilibria) {
    std::printf("  %-6s g = %-22s G = %-22s E0 = %s\n", to_string(e.type), fmt(e.g).c_str(),
                fmt(e.G).c_str(), fmt(e.energy).c_str());
  }
  std::printf("  saddle %s\n", pc.has_saddle ? "present" : "absent");
  std::printf("wrote %s (manifest %s)\n", s.out.c_str(), out.hash().substr(0, 12).c_str());
  return kOk;
}

int cmd_portrait_slow0(const Settings& s) {
  const double C = std::isnan(s.C) ? 25.0 : s.C;
  const auto [R0, r0] = fast_equilibrium(C);
  const double beta = s.beta;
  RunOutput out(s.out, {{"command", "portrait"},
                        {"slow0", true},
                        {"C", C},
                        {"beta", beta},
                        {"betabar", s.betabar},
                        {"grid", s.grid}});
  if (s.grid < 2) throw DomainError("portrait: --grid must be at least 2");
  CsvTable t;
  t.comments = {"lowest-order slow Hamiltonian on a (g, G) grid",
                "C = " + label(C) + ", beta = betabar = " + label(beta) + ", r0 = C^2 = " + label(r0) +
                    ", R0 = " + label(R0)};
  t.columns = {"g", "G", "H"};
  for (std::size_t i = 0; i < s.grid; ++i) {
    const double g = kTwoPi * static_cast<double>(i) / static_cast<double>(s.grid - 1);
    for (std::size_t j = 0; j < s.grid; ++j) {
      const double G = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(s.grid - 1);
      t.add({g, G, h_slow0(G, g, C, beta, r0)});
    }
  }
  out.write_csv("slow0_grid.csv", t);
  out.write_manifest({"slow0_grid.csv"});
  std::printf("slow0 portrait: C = %s, beta = %s, r0 = %s\n", fmt(C).c_str(), fmt(beta).c_str(),
              fmt(r0).c_str());
  std::printf("wrote %s (manifest %s)\n", s.out.c_str(), out.hash().substr(0, 12).c_str());
  return kOk;
}

// ---------------------------------------------------------------------------
// horseshoe

int cmd_libration(const Settings& s) {
  if (!std::isnan(s.C) && s.C != 0.0) throw DomainError("libration experiment needs --C 0");
  LibrationConfig lc;
  const auto p = mass_params(s);
  lc.beta = p.beta;
  lc.betabar = p.betabar;
  if (s.nu_max > 0) lc.nu_max = s.nu_max;
  lc.n_orbits = s.orbits;
  lc.tol = std::max(s.tol, 1e-11);
  RunOutput out(s.out, {{"command", "horseshoe"},
                        {"experiment", "libration"},
                        {"C", 0.0},
                        {"beta", lc.beta},
                        {"betabar", lc.betabar},
                        {"nu-max", lc.nu_max},
                        {"orbits", lc.n_orbits},
                        {"tol", lc.tol}});
  const auto rep = libration_experiment(lc);
  CsvTable t;
  t.comments = {"perihelion libration ensemble around (g, G) = (pi, 0), C = 0",
                "winding in rad; neighbourhood half-widths g " + label(lc.nbhd_g) + ", G " +
                    label(lc.nbhd_G)};
  t.columns = {"g0", "G0", "winding", "stayed_in_neighbourhood", "left_trust_region", "t_end",
               "r_max"};
  for (const auto& o : rep.orbits) {
    t.add({o.g0, o.G0, o.winding, o.stayed_in_neighbourhood ? 1.0 : 0.0,
           o.left_trust_region ? 1.0 : 0.0, o.t_end, o.r_max});
  }
  out.write_csv("libration.csv", t);
  out.write_json("libration.json", {{"orbits", rep.orbits.size()},
                                    {"winding_2pi", rep.count_winding_2pi()},
                                    {"all_pass", rep.all_pass()}});
  out.write_manifest({"libration.csv", "libration.json"});
  std::printf("libration: %zu/%zu orbits wind >= 2 pi inside the neighbourhood\n",
              rep.count_winding_2pi(), rep.orbits.size());
  if (!rep.all_pass()) throw VerificationFailure("libration property does not hold");
  return kOk;
}

const FixedPointRecord* nearest_saddle(const FixedPointCensus& census, SectionPoint target) {
  const FixedPointRecord* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& p : census.points) {
    if (p.cls != FixedPointClass::hyperbolic) continue;
    const double d = chart_distance(p.z, target, kPi);
    if (d < best_d) {
      best_d = d;
      best = &p;
    }
  }
  return best;
}

int cmd_horseshoe(const Settings& s) {
  if (s.experiment == "libration") return cmd_libration(s);
  if (!s.experiment.empty()) throw DomainError("unknown experiment: " + s.experiment);
  if (s.window.size() != 4) throw DomainError("--window needs g0 g1 G0 G1");
  if (s.targets.size() != 4) throw DomainError("--targets needs g1 G1 g2 G2");

  const double C = std::isnan(s.C) ? 24.394 : s.C;
  const int nu_max = s.nu_max > 0 ? s.nu_max : 20;
  const auto params = mass_params(s);
  json config{{"command", "horseshoe"},
              {"C", C},
              {"nu-max", nu_max},
              {"tol", s.tol},
              {"window", s.window},
              {"census-n", s.census_n},
              {"targets", s.targets},
              {"A-grid", s.A_grid},
              {"B-grid", s.B_grid},
              {"manifold-iterations", s.manifold_iterations},
              {"manifold-spacing", s.manifold_spacing},
              {"manifold-points", s.manifold_points}};
  config.update(mass_json(params));
  RunOutput out(s.out, config);

  const auto table = CoeffTable::build(params, nu_max);
  SecularSystem sys(table, C);
  const auto plane = SectionPlane::from_pivot(sys, default_pivot());
  PoincareOptions po;
  po.integrator = {s.tol, s.tol};
  PoincareMap map(sys, plane, po);
  const auto f = map.view();
  const auto finv = map.inverse_view();

  std::fprintf(stderr, "census: %zux%zu seeds\n", s.census_n, s.census_n);
  const auto census = newton_fixed_points(
      f, seed_grid(s.window[0], s.window[1], s.census_n, s.window[2], s.window[3], s.census_n));

  CsvTable fpt;
  fpt.comments = {"fixed points of the section map, chart (g mod pi, G)",
                  "lambda columns: eigenvalue moduli for hyperbolic points"};
  fpt.columns = {"g", "G", "class", "residual", "lambda_u", "lambda_s"};
  for (const auto& p : census.points) {
    fpt.add_cells({fmt(p.z.g), fmt(p.z.G), to_string(p.cls), fmt(p.residual),
                   fmt(p.lambda_unstable), fmt(p.lambda_stable)});
  }
  out.write_csv("fixed_points.csv", fpt);

  const SectionPoint t1{s.targets[0], s.targets[1]}, t2{s.targets[2], s.targets[3]};
  const auto* p1 = nearest_saddle(census, t1);
  const auto* p2 = nearest_saddle(census, t2);
  if (!p1 || !p2 || p1 == p2) {
    throw ConvergenceError("census found fewer than two saddle fixed points in the window");
  }
  std::fprintf(stderr, "saddles: (%.6f, %.6f) and (%.6f, %.6f)\n", p1->z.g, p1->z.G, p2->z.g,
               p2->z.G);

  ManifoldOptions mo;
  mo.iterations = s.manifold_iterations;
  mo.max_spacing = s.manifold_spacing;
  mo.max_points = s.manifold_points;
  CsvTable mt;
  mt.comments = {"invariant manifolds of the two saddles, g unwrapped along each branch"};
  mt.columns = {"point", "kind", "branch", "level", "g", "G"};
  int idx = 0;
  for (const auto* p : {p1, p2}) {
    for (auto kind : {ManifoldKind::unstable, ManifoldKind::stable}) {
      std::fprintf(stderr, "manifold %d %s\n", idx + 1,
                   kind == ManifoldKind::unstable ? "unstable" : "stable");
      const auto m = grow_manifold(*p, kind, f, finv, mo);
      for (const auto& br : m.branches) {
        for (std::size_t k = 0; k < br.points.size(); ++k) {
          mt.add_cells({std::to_string(idx + 1), kind == ManifoldKind::unstable ? "u" : "s",
                        std::to_string(br.sign), std::to_string(br.level[k]),
                        fmt(br.points[k].g), fmt(br.points[k].G)});
        }
      }
    }
    ++idx;
  }
  out.write_csv("manifolds.csv", mt);

  std::fprintf(stderr, "horseshoe search\n");
  HorseshoeSearch search;
  search.A_grid = s.A_grid;
  search.B_grid = s.B_grid;
  const auto res = detect_horseshoe(*p1, *p2, f, search);

  CsvTable ht;
  ht.comments = {"h-set boundaries (closed loops) and their images at screen density"};
  ht.columns = {"set", "curve", "g", "G"};
  for (int i = 0; i < 2; ++i) {
    const auto& h = res.hsets[static_cast<std::size_t>(i)];
    if (h.A <= 0.0) continue;
    for (auto [u, v] : std::initializer_list<std::pair<double, double>>{
             {-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}}) {
      const auto z = h.point(u, v);
      ht.add_cells({std::to_string(i + 1), "set", fmt(z.g), fmt(z.G)});
    }
    const auto img = sample_images(h, f, search.screen, {0.0});
    for (const auto& z : img.boundary) ht.add_cells({std::to_string(i + 1), "image", fmt(z.g), fmt(z.G)});
  }
  out.write_csv("hsets.csv", ht);

  json cert = horseshoe_certificate(res, config);
  cert["census"] = {{"seeds", census.seeds},
                    {"converged", census.converged},
                    {"points", census.points.size()},
                    {"hyperbolic", census.count(FixedPointClass::hyperbolic)},
                    {"elliptic", census.count(FixedPointClass::elliptic)}};
  cert["target_distance"] = {chart_distance(p1->z, t1, kPi), chart_distance(p2->z, t2, kPi)};
  cert["section"] = plane.to_json();
  out.write_json("certificate.json", cert);
  out.write_manifest({"fixed_points.csv", "manifolds.csv", "hsets.csv", "certificate.json"});

  std::printf("fixed points: %zu (%zu hyperbolic)\n", census.points.size(),
              census.count(FixedPointClass::hyperbolic));
  for (const auto& r : res.relations) {
    std::printf("N%d => N%d: %s (doubled: %s)\n", r.from, r.to, to_string(r.at_default.verdict),
                to_string(r.at_doubled.verdict));
  }
  std::printf("horseshoe %s\n", res.found ? "found" : "not found");
  if (!res.found) throw VerificationFailure("no horseshoe in the declared search grid");
  return kOk;
}

// ---------------------------------------------------------------------------
// verify, integrate, coeffs

int cmd_verify(const Settings& s) {
  VerifyConfig vc;
  vc.seed = s.seed;
  vc.nodes = s.nodes;
  vc.nu_max = s.nu_max > 0 ? s.nu_max : 10;
  vc.inject_q2_sign_fault = s.inject_q2_fault;
  std::vector<std::string> suites;
  if (s.suite == "all") {
    suites = verify_suite_names();
  } else {
    suites = {s.suite};
  }
  VerifyReport rep;
  for (const auto& name : suites) run_suite(name, vc, rep);

  std::printf("quadrature nodes: %zu   nu_max: %d   seed: %llu   kernel: %s\n", vc.nodes,
              vc.nu_max, static_cast<unsigned long long>(vc.seed), std::string(kernels::to_string(kernels::active_kernels().level)).c_str());
  std::printf("%-18s %-36s %-12s %-9s %s\n", "suite", "check", "value", "tol", "status");
  for (const auto& c : rep.checks) {
    std::printf("%-18s %-36s %-12.3e %-9.1e %s\n", c.suite.c_str(), c.name.c_str(), c.value,
                c.tolerance, c.pass ? "PASS" : "FAIL");
  }
  if (s.out != "-") {
    RunOutput out(s.out, {{"command", "verify"},
                          {"suite", s.suite},
                          {"seed", s.seed},
                          {"nodes", s.nodes},
                          {"nu-max", vc.nu_max}});
    out.write_json("verify.json", {{"nodes", vc.nodes}, {"nu_max", vc.nu_max}, {"checks", rep.to_json()}});
    out.write_manifest({"verify.json"});
  }
  if (!rep.all_pass()) throw VerificationFailure("verification failed");
  return kOk;
}

int cmd_integrate(const Settings& s) {
  const double C = std::isnan(s.C) ? 24.394 : s.C;
  const int nu_max = s.nu_max > 0 ? s.nu_max : 20;
  const auto params = mass_params(s);
  State<4> x0 = default_pivot();
  if (!s.state.empty()) {
    if (s.state.size() != 4) throw DomainError("--state needs R G r g");
    x0 = {s.state[0], s.state[1], s.state[2], s.state[3]};
  }
  json config{{"command", "integrate"}, {"C", C},        {"nu-max", nu_max},
              {"tol", s.tol},           {"t", s.t_end}, {"samples", s.samples},
              {"state", std::vector<double>(x0.begin(), x0.end())}};
  config.update(mass_json(params));
  RunOutput out(s.out, config);
  const auto table = CoeffTable::build(params, nu_max);
  SecularSystem sys(table, C);
  const auto traj = integrate(sys, x0, 0.0, s.t_end, IntegratorOptions{s.tol, s.tol, 0.0, std::abs(s.t_end) / static_cast<double>(std::max<std::size_t>(s.samples, 1))});
  CsvTable t;
  t.comments = {"secular flow, C = " + label(C) + ", nu_max " + std::to_string(nu_max),
                "units: Lambda = 1, semi-major axis 1; energy is the series Hamiltonian"};
  t.columns = {"t", "R", "G", "r", "g", "energy"};
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const auto& x = traj.x[i];
    t.add({traj.t[i], x[0], x[1], x[2], x[3], traj.energy[i]});
  }
  out.write_csv("trajectory.csv", t);
  out.write_manifest({"trajectory.csv"});
  std::printf("steps: %zu   relative energy drift: %.3e\n", traj.t.size() - 1,
              traj.relative_energy_drift());
  return kOk;
}

int cmd_coeffs(const Settings& s) {
  const int nu_max = s.nu_max > 0 ? s.nu_max : 10;
  const auto params = mass_params(s);
  json config{{"command", "coeffs"}, {"nu-max", nu_max}};
  config.update(mass_json(params));
  RunOutput out(s.out, config);
  const auto table = CoeffTable::build(params, nu_max);
  std::vector<double> G_grid;
  for (int i = 0; i <= 20; ++i) G_grid.push_back(-1.0 + 0.1 * i);
  out.write_json("coeffs.json", table.to_json(G_grid));
  out.write_manifest({"coeffs.json"});
  std::printf("nu_max %d, beta %s, betabar %s\n", nu_max, fmt(params.beta).c_str(),
              fmt(params.betabar).c_str());
  return kOk;
}

// ---------------------------------------------------------------------------

void add_mass_flags(CLI::App* app, Settings& s) {
  app->add_option("--beta", s.beta, "mass ratio beta");
  app->add_option("--betabar", s.betabar, "mass ratio betabar");
  app->add_option("--mu", s.mu, "mass parameter mu (with --kappa)");
  app->add_option("--kappa", s.kappa, "mass parameter kappa; overrides --beta/--betabar");
}

void add_common_flags(CLI::App* app, Settings& s) {
  app->add_option("--out", s.out, "output directory");
  app->add_option("--config", s.config, "JSON run config or manifest; flags given explicitly win");
}

/// Appends the config entries that were not given on the command line.
std::vector<std::string> config_args(const CLI::App* sub, const json& cfg) {
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || key == "command") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back("--" + key);
      continue;
    }
    extra.push_back("--" + key);
    auto scalar = [](const json& v) {
      return v.is_string() ? v.get<std::string>()
             : v.is_number_float() ? format_double(v.get<double>())
                                   : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) extra.push_back(scalar(v));
    } else {
      extra.push_back(scalar(value));
    }
  }
  return extra;
}

int parse_and_run(std::vector<std::string> args) {
  Settings s;
  CLI::App app{"Secular dynamics of a hierarchical three-body problem: datasets and checks"};
  app.require_subcommand(1);

  auto* portrait = app.add_subcommand("portrait", "E0 or slow Hamiltonian phase portrait datasets");
  portrait->add_option("--r", s.r, "distance of the second centre (r > 0, r != 2)");
  portrait->add_flag("--slow0", s.slow0, "lowest-order slow Hamiltonian instead of E0");
  portrait->add_option("--C", s.C, "total angular momentum (slow0, default 25)");
  portrait->add_option("--level-samples", s.level_samples, "points per level curve");
  portrait->add_option("--grid", s.grid, "grid size per axis (slow0)");
  add_mass_flags(portrait, s);
  add_common_flags(portrait, s);

  auto* horseshoe = app.add_subcommand("horseshoe", "fixed points, manifolds, covering relations");
  horseshoe->add_option("--C", s.C, "total angular momentum (default 24.394)");
  horseshoe->add_option("--nu-max", s.nu_max, "series order (default 20)");
  horseshoe->add_option("--tol", s.tol, "integrator tolerance");
  horseshoe->add_option("--experiment", s.experiment, "libration: the C = 0 ensemble");
  horseshoe->add_option("--window", s.window, "census window g0 g1 G0 G1")->expected(4);
  horseshoe->add_option("--census-n", s.census_n, "seeds per axis");
  horseshoe->add_option("--targets", s.targets, "expected saddles g1 G1 g2 G2")->expected(4);
  horseshoe->add_option("--A-grid", s.A_grid, "h-set half-widths along v_s")->expected(1, 64);
  horseshoe->add_option("--B-grid", s.B_grid, "h-set half-widths along v_u")->expected(1, 64);
  horseshoe->add_option("--manifold-iterations", s.manifold_iterations);
  horseshoe->add_option("--manifold-spacing", s.manifold_spacing);
  horseshoe->add_option("--manifold-points", s.manifold_points);
  horseshoe->add_option("--orbits", s.orbits, "ensemble size (libration)");
  add_mass_flags(horseshoe, s);
  add_common_flags(horseshoe, s);

  auto* verify = app.add_subcommand("verify", "invariant suites");
  verify->add_option("--suite", s.suite, "all, brackets, renormalizability, parity, identities");
  verify->add_option("--seed", s.seed, "sampling seed");
  verify->add_option("--nodes", s.nodes, "quadrature nodes");
  verify->add_option("--nu-max", s.nu_max, "series order (default 10)");
  verify->add_flag("--inject-q2-sign-fault", s.inject_q2_fault)->group("");
  add_common_flags(verify, s);

  auto* integ = app.add_subcommand("integrate", "integrate the secular flow, write a trajectory");
  integ->add_option("--C", s.C, "total angular momentum (default 24.394)");
  integ->add_option("--state", s.state, "initial R G r g (default: section pivot)")->expected(4);
  integ->add_option("--t", s.t_end, "final time");
  integ->add_option("--tol", s.tol, "integrator tolerance");
  integ->add_option("--samples", s.samples, "minimum number of output rows");
  integ->add_option("--nu-max", s.nu_max, "series order (default 20)");
  add_mass_flags(integ, s);
  add_common_flags(integ, s);

  auto* coeffs = app.add_subcommand("coeffs", "tabulate the expansion coefficients");
  coeffs->add_option("--nu-max", s.nu_max, "series order (default 10)");
  add_mass_flags(coeffs, s);
  add_common_flags(coeffs, s);

  auto parse = [&](const std::vector<std::string>& a) {
    std::vector<const char*> argv;
    for (const auto& x : a) argv.push_back(x.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  };
  try {
    parse(args);
    if (!s.config.empty()) {
      std::ifstream in(s.config);
      if (!in) throw DomainError("cannot read config " + s.config);
      json cfg = json::parse(in);
      if (cfg.contains("config")) cfg = cfg["config"];
      const auto extra = config_args(app.get_subcommands().front(), cfg);
      args.insert(args.end(), extra.begin(), extra.end());
      app.clear();
      parse(args);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kDomain;
  }

  if (portrait->parsed()) {
    if (s.slow0) return cmd_portrait_slow0(s);
    if (std::isnan(s.r)) throw DomainError("portrait needs --r or --slow0");
    return cmd_portrait_r(s);
  }
  if (horseshoe->parsed()) return cmd_horseshoe(s);
  if (verify->parsed()) return cmd_verify(s);
  if (integ->parsed()) return cmd_integrate(s);
  return cmd_coeffs(s);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return parse_and_run(args);
  } catch (const VerificationFailure& e) {
    std::fprintf(stderr, "verification failure: %s\n", e.what());
    return kVerification;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kDomain;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    return kConvergence;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kDomain;
  }
}

}  // namespace perihelion::cli
