#include "conecalc/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "conecalc/calculus.hpp"
#include "conecalc/error.hpp"
#include "conecalc/linalg.hpp"
#include "conecalc/pde.hpp"
#include "conecalc/rng.hpp"

namespace conecalc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string label(double x) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << x;
  return out.str();
}

bool is_laplacian(const RunConfig& c) { return c.op.preset == "laplacian"; }

// (n-1)/2 ± ((n-1)²/4 - ν)^{1/2}
std::array<cplx, 2> laplacian_roots(int n, double nu) {
  const double c = 0.5 * (n - 1);
  const cplx d = std::sqrt(cplx(c * c - nu, 0.0));
  return {c - d, c + d};
}

double relative_error(const ModeMatrices& a, const ModeMatrices& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += (a[j] - b[j]).squaredNorm();
    den += b[j].squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

ModeMatrices product(const ModeMatrices& a, const ModeMatrices& b) {
  ModeMatrices out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

std::vector<cplx> z_grid(const ScanSection& s) {
  std::vector<cplx> zs;
  for (double x : s.z_re)
    for (double y : s.z_im) zs.emplace_back(x, y);
  return zs;
}

LogGrid verify_grid(const RunConfig& c) {
  return LogGrid(c.grid.rmin, c.grid.rmax, c.scan.verify_points,
                 c.grid.kind == "model_cone" ? GridKind::model_cone : GridKind::truncated_cone);
}

// ---------------------------------------------------------------- indicial

CalculusReport cmd_indicial(const RunConfig& c) {
  const auto start = Clock::now();
  const FuchsOperator op = build_operator(c);
  CalculusReport r;
  r.operation = "indicial";
  r.parameters = {{"mu", static_cast<std::int64_t>(op.mu)},
                  {"n", static_cast<std::int64_t>(op.dimension())},
                  {"modes", static_cast<std::int64_t>(op.cross_section.mode_count())}};
  const auto roots = all_indicial_roots(op);
  Table table{"roots", {"mode", "nu", "multiplicity", "re", "im", "order", "closed_form_error"}, {}};
  double worst = 0.0;
  bool counts_match = true;
  std::vector<int> order_sum(op.cross_section.mode_count(), 0);
  for (const auto& root : roots) {
    const auto& mode = op.cross_section.mode(root.mode);
    double err = std::numeric_limits<double>::quiet_NaN();
    if (is_laplacian(c)) {
      const auto exact = laplacian_roots(op.dimension(), mode.nu);
      err = std::min(std::abs(root.z - exact[0]), std::abs(root.z - exact[1]));
      worst = std::max(worst, err);
    }
    order_sum[root.mode] += root.order;
    table.rows.push_back({static_cast<double>(root.mode), mode.nu, static_cast<double>(mode.multiplicity),
                          root.z.real(), root.z.imag(), static_cast<double>(root.order), err});
  }
  for (std::size_t j = 0; j < order_sum.size(); ++j)
    counts_match = counts_match && order_sum[j] == static_cast<int>(conormal_polynomial(op, j).size()) - 1;
  r.tables.push_back(std::move(table));
  r.results.emplace_back("root_count", static_cast<std::int64_t>(roots.size()));
  r.check_flag("zero_orders_sum_to_degree", counts_match);
  if (is_laplacian(c)) {
    r.results.emplace_back("max_closed_form_error", worst);
    r.check_at_most("closed_form_roots", worst, 1e-10, "(n-1)/2 ± ((n-1)^2/4 - nu)^{1/2}");
  } else {
    r.notes.push_back("closed-form root comparison applies to the laplacian preset only");
  }
  const WeightLine line = weight_line_invertible(op, c.weight.gamma);
  r.results.emplace_back("weight_line", line.line);
  r.results.emplace_back("weight_line_invertible", line.invertible);
  r.results.emplace_back("weight_line_margin", line.margin);
  r.seconds = seconds_since(start);
  return r;
}

// ---------------------------------------------------------------- extensions

int oracle_gap(const FuchsOperator& op, const RunConfig& c, double lower, double upper) {
  int count = 0;
  if (is_laplacian(c)) {
    for (const auto& mode : op.cross_section.modes())
      for (const cplx z : laplacian_roots(op.dimension(), mode.nu))
        if (z.real() > lower && z.real() < upper) count += mode.multiplicity;
  } else {
    for (const auto& root : all_indicial_roots(op))
      if (root.z.real() > lower && root.z.real() < upper)
        count += root.order * op.cross_section.mode(root.mode).multiplicity;
  }
  return count;
}

CalculusReport cmd_extensions(const RunConfig& c) {
  const auto start = Clock::now();
  const FuchsOperator op = build_operator(c);
  const double gamma = c.weight.gamma;
  CalculusReport r;
  r.operation = "extensions";
  r.parameters = {{"gamma", gamma}, {"policy", std::string("open_strip")}};
  const DomainGap gap = domain_gap_dimension(op, gamma, BoundaryPolicy::open_strip);
  r.results.emplace_back("dimension", static_cast<std::int64_t>(gap.dimension));
  r.results.emplace_back("strip_lower", gap.lower);
  r.results.emplace_back("strip_upper", gap.upper);
  if (op.mu != 2)
    r.results.emplace_back("constant_strip_dimension", static_cast<std::int64_t>(gap.constant_strip_dimension));
  for (const auto& b : gap.boundary_roots)
    r.notes.push_back("root " + label(b.z.real()) + (b.z.imag() == 0.0 ? "" : "+" + label(b.z.imag()) + "i") +
                      " of mode " + std::to_string(b.mode) + " lies on the strip boundary and is not counted");

  const auto functions = singular_functions(op, gamma, BoundaryPolicy::open_strip);
  Table table{"singular_functions", {"mode", "component", "re", "im", "log_power"}, {}};
  for (const auto& f : functions)
    table.rows.push_back({static_cast<double>(f.mode), static_cast<double>(f.component), f.exponent.real(),
                          f.exponent.imag(), static_cast<double>(f.log_power)});
  r.tables.push_back(std::move(table));

  const int oracle = oracle_gap(op, c, gap.lower, gap.upper);
  r.results.emplace_back("root_oracle_dimension", static_cast<std::int64_t>(oracle));
  r.check_flag("gap_matches_root_oracle", oracle == gap.dimension);
  r.check_flag("basis_size_matches_gap", static_cast<int>(functions.size()) == gap.dimension);
  r.seconds = seconds_since(start);
  return r;
}

// ---------------------------------------------------------------- ellipticity, spectrum

CalculusReport cmd_ellipticity(const RunConfig& c) {
  EllipticityOptions options;
  options.resolution = c.scan.ellipticity_resolution;
  options.grid = build_grid(c);
  FuchsOperator op = build_operator(c);
  if (c.grid.kind != "model_cone") {
    options.grid = LogGrid(-std::max(c.grid.rmax, 1.0), std::max(c.grid.rmax, 1.0), c.grid.points, GridKind::model_cone);
  }
  return check_ellipticity(op, Sector(c.scan.sector_theta), c.weight.gamma, options);
}

CalculusReport cmd_spectrum(const RunConfig& c) {
  const auto start = Clock::now();
  const FuchsOperator op = build_operator(c);
  const DiscreteOperator target = assemble(op, build_grid(c));
  CalculusReport r;
  r.operation = "spectrum";
  r.parameters = {{"points", static_cast<std::int64_t>(target.size())},
                  {"modes", static_cast<std::int64_t>(target.modes.size())}};
  Table table{"spectrum", {"mode", "nu", "index", "re", "im"}, {}};
  double min_real = std::numeric_limits<double>::infinity();
  double max_imag = 0.0;
  double worst_symmetry = 0.0;
  const auto spectra = spectrum(target);
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    worst_symmetry = std::max(worst_symmetry, symmetry_defect(target.modes[j].matrix));
    for (std::size_t i = 0; i < spectra[j].size(); ++i) {
      const cplx v = spectra[j][i];
      min_real = std::min(min_real, v.real());
      max_imag = std::max(max_imag, std::abs(v.imag()));
      table.rows.push_back({static_cast<double>(j), target.modes[j].nu, static_cast<double>(i), v.real(), v.imag()});
    }
  }
  r.tables.push_back(std::move(table));
  r.results.emplace_back("min_real_eigenvalue", min_real);
  r.results.emplace_back("max_abs_imag", max_imag);
  r.results.emplace_back("symmetry_defect", worst_symmetry);
  if (is_laplacian(c)) {
    r.check_at_most("shifted_positivity", c.op.shift - min_real, 1e-6, "min Re eigenvalue >= shift");
    if (c.weight.gamma == 0.0) r.check_at_most("matrix_symmetry", worst_symmetry, 1e-12);
  }
  r.seconds = seconds_since(start);
  return r;
}

// ---------------------------------------------------------------- calculus commands

CalculusReport cmd_resolvent_scan(const RunConfig& c) {
  const DiscreteOperator target = assemble(build_operator(c), build_grid(c));
  CalculusReport out;
  out.operation = "resolvent_scan";
  for (const double p : c.scan.ps) {
    ResolventScanOptions options;
    options.radii = c.scan.radii.empty() ? default_radii() : c.scan.radii;
    options.p = p;
    options.seed = c.run.seed;
    const CalculusReport one = resolvent_norm_scan(target, c.scan.sector_theta, options);
    if (c.scan.ps.size() == 1) {
      out = one;
    } else {
      out.merge(one, "p" + label(p) + "_");
    }
  }
  return out;
}

CalculusReport cmd_power(const RunConfig& c) {
  const auto start = Clock::now();
  const DiscreteOperator target = assemble(build_operator(c), build_grid(c));
  const std::vector<cplx> zs = z_grid(c.scan);
  const ContourQuadrature contour = make_contour(target, zs, build_contour(c));
  const PowerResult power = dunford_power(target, zs, contour);
  const auto oracle = power_oracle(target, zs);
  CalculusReport r;
  r.operation = "power";
  r.parameters = {{"delta", contour.delta},
                  {"theta", contour.theta},
                  {"s_max", contour.s_max},
                  {"n_ray", static_cast<std::int64_t>(contour.n_ray)},
                  {"n_arc", static_cast<std::int64_t>(contour.n_arc)},
                  {"points", static_cast<std::int64_t>(target.size())}};
  Table table{"power", {"re_z", "im_z", "mode", "rel_error", "norm"}, {}};
  double worst = 0.0;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    for (std::size_t j = 0; j < target.modes.size(); ++j) {
      const double den = oracle[k][j].norm();
      const double err = (power.powers[k][j] - oracle[k][j]).norm() / (den > 0.0 ? den : 1.0);
      table.rows.push_back({zs[k].real(), zs[k].imag(), static_cast<double>(j), err, power.powers[k][j].norm()});
    }
    worst = std::max(worst, relative_error(power.powers[k], oracle[k]));
  }
  r.tables.push_back(std::move(table));
  r.results.emplace_back("contour_nodes", static_cast<std::int64_t>(power.node_count));
  r.results.emplace_back("tail_bound", power.tail_bound);
  r.results.emplace_back("max_relative_error", worst);
  r.check_at_most("dunford_matches_oracle", worst, 1e-6, "relative Frobenius error over all modes");
  r.check_flag("tail_bound_finite", std::isfinite(power.tail_bound));
  r.seconds = seconds_since(start);
  return r;
}

CalculusReport cmd_bip_scan(const RunConfig& c) {
  const DiscreteOperator target = assemble(build_operator(c), build_grid(c));
  BipOptions options;
  options.y_max = c.scan.y_max;
  options.steps = c.scan.y_steps;
  options.ps = c.scan.ps;
  options.contour = build_contour(c);
  options.contour.theta = c.contour.theta_imag;
  options.seed = c.run.seed;
  return bip_scan(target, Sector(c.scan.sector_theta), options);
}

// ---------------------------------------------------------------- heat

std::function<ModeVectors(double)> heat_forcing(const RunConfig& c, const DiscreteOperator& target) {
  const std::string& name = c.pde.forcing;
  const auto sizes = [&] {
    ModeVectors v;
    for (const auto& m : target.modes) v.push_back(CVector::Zero(m.matrix.rows()));
    return v;
  };
  if (name == "none") return {};
  if (name == "constant") {
    ModeVectors f = sizes();
    for (auto& v : f) v.setOnes();
    return [f](double) { return f; };
  }
  if (name == "random") {
    ModeVectors f = sizes();
    Rng rng(c.run.seed);
    for (auto& v : f)
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    return [f](double) { return f; };
  }
  // csv:PATH with header tau,mode,index,re,im; piecewise constant in time.
  const std::string path = name.substr(4);
  std::ifstream in(path);
  if (!in) throw ConfigError("pde.forcing: cannot read " + path, {"pde.forcing"});
  std::string line;
  std::getline(in, line);
  std::map<double, ModeVectors> frames;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double tau = 0.0, re = 0.0, im = 0.0;
    long mode = 0, index = 0;
    char sep = 0;
    if (!(row >> tau >> sep >> mode >> sep >> index >> sep >> re >> sep >> im))
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected tau,mode,index,re,im", {"pde.forcing"});
    if (mode < 0 || static_cast<std::size_t>(mode) >= target.modes.size() || index < 0 ||
        index >= target.modes[static_cast<std::size_t>(mode)].matrix.rows())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": mode or index out of range", {"pde.forcing"});
    auto it = frames.find(tau);
    if (it == frames.end()) it = frames.emplace(tau, sizes()).first;
    it->second[static_cast<std::size_t>(mode)](index) = cplx(re, im);
  }
  if (frames.empty()) throw ConfigError(path + ": no forcing rows", {"pde.forcing"});
  return [frames](double tau) {
    auto it = frames.upper_bound(tau);
    if (it != frames.begin()) --it;
    return it->second;
  };
}

CalculusReport cmd_heat(const RunConfig& c) {
  const auto start = Clock::now();
  CauchyProblem problem;
  problem.target = assemble(build_operator(c), build_grid(c));
  problem.T = c.pde.T;
  problem.steps = c.pde.steps;
  problem.stepper = parse_stepper(c.pde.stepper);
  problem.r_time = c.pde.r_time;
  problem.forcing = heat_forcing(c, problem.target);
  const HeatSolution solution = solve_heat(problem);

  CalculusReport r;
  r.operation = "heat";
  r.parameters = {{"T", problem.T},
                  {"steps", static_cast<std::int64_t>(problem.steps)},
                  {"stepper", to_string(problem.stepper)},
                  {"r_time", problem.r_time},
                  {"forcing", c.pde.forcing}};
  r.results.emplace_back("min_real_eigenvalue", solution.min_real_eigenvalue);
  r.results.emplace_back("final_norm", mode_norm(problem.target, solution.u.back()));
  r.results.emplace_back("du_norm", solution.du_norm);
  r.results.emplace_back("au_norm", solution.au_norm);
  r.results.emplace_back("f_norm", solution.f_norm);
  if (const auto ratio = max_reg_ratio(solution)) r.results.emplace_back("max_reg_ratio", *ratio);
  bool finite = true;
  for (const auto& u : solution.u)
    for (const auto& v : u) finite = finite && v.allFinite();
  r.check_flag("solution_finite", finite);

  Table final{"final_state", {"tau", "mode", "index", "re", "im"}, {}};
  for (std::size_t j = 0; j < solution.u.back().size(); ++j) {
    const CVector& v = solution.u.back()[j];
    for (Eigen::Index i = 0; i < v.size(); ++i)
      final.rows.push_back({solution.times.back(), static_cast<double>(j), static_cast<double>(i), v(i).real(),
                            v(i).imag()});
  }
  r.tables.push_back(std::move(final));
  r.seconds = seconds_since(start);

  if (!c.pde.frequencies.empty()) {
    CauchyProblem sweep = problem;
    sweep.forcing = {};
    r.merge(max_reg_diagnostic(sweep, c.pde.frequencies, c.run.seed), "");
  }
  return r;
}

// ---------------------------------------------------------------- quasilinear

std::vector<CalculusReport> cmd_quasilinear(const RunConfig& c) {
  const auto start = Clock::now();
  const QuasilinearProblem problem = build_quasilinear(c);
  QuasilinearSolution solution = solve_quasilinear(problem);
  solution.report.seconds = seconds_since(start);

  const auto eq_start = Clock::now();
  QuasilinearProblem linear = problem;
  linear.a = Diffusivity("1");
  linear.f = nonlinearity_preset("none");
  linear.f_name = "none";
  linear.g = 0.0;
  const std::vector<double> diff = heat_equivalence(linear);
  CalculusReport eq;
  eq.operation = "heat_equivalence";
  eq.parameters = {{"a", std::string("1")}, {"f", std::string("none")}, {"g", 0.0}};
  Table table{"heat_equivalence", {"step", "relative_difference"}, {}};
  double worst = 0.0;
  for (std::size_t m = 0; m < diff.size(); ++m) {
    table.rows.push_back({static_cast<double>(m + 1), diff[m]});
    worst = std::max(worst, diff[m]);
  }
  eq.tables.push_back(std::move(table));
  eq.results.emplace_back("max_relative_difference", worst);
  eq.check_at_most("matches_heat_solver", worst, 1e-8, "a = 1 reduction, per step, relative to max |u0|");
  eq.seconds = seconds_since(eq_start);
  return {std::move(solution.report), std::move(eq)};
}

// ---------------------------------------------------------------- verify

CalculusReport cmd_verify(const RunConfig& c) {
  const auto start = Clock::now();
  CalculusReport r;
  r.operation = "verify";
  const FuchsOperator op = build_operator(c);
  const int n = op.dimension();
  const bool laplacian = is_laplacian(c);
  r.parameters = {{"verify_points", static_cast<std::int64_t>(c.scan.verify_points)},
                  {"preset", c.op.preset}};
  auto skip = [&](const std::string& name) { r.notes.push_back(name + ": skipped for custom operators"); };

  // symbols
  const auto roots = all_indicial_roots(op);
  if (laplacian) {
    double worst = 0.0;
    for (const auto& root : roots) {
      const auto exact = laplacian_roots(n, op.cross_section.mode(root.mode).nu);
      worst = std::max(worst, std::min(std::abs(root.z - exact[0]), std::abs(root.z - exact[1])));
    }
    r.check_at_most("indicial_root_formula", worst, 1e-10);
  } else {
    skip("indicial_root_formula");
  }
  {
    double worst = 0.0;
    for (const auto& root : roots) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& other : roots)
        if (other.mode == root.mode) best = std::min(best, std::abs(other.z - std::conj(root.z)));
      worst = std::max(worst, best);
    }
    r.check_at_most("indicial_conjugate_symmetry", worst, 1e-10);
  }
  const DomainGap gap = domain_gap_dimension(op, c.weight.gamma, BoundaryPolicy::open_strip);
  {
    const int oracle = oracle_gap(op, c, gap.lower, gap.upper);
    r.check_at_most("domain_gap_root_oracle", std::abs(gap.dimension - oracle), 0.0,
                    "dim V = " + std::to_string(gap.dimension));
  }
  {
    RunConfig refined = c;
    refined.cross_section.mode_cutoff += 4;
    const DomainGap finer = domain_gap_dimension(build_operator(refined), c.weight.gamma, BoundaryPolicy::open_strip);
    r.check_at_most("domain_gap_mode_refinement", std::abs(finer.dimension - gap.dimension), 0.0);
  }
  {
    double worst = 0.0;
    const double t = 1e-7;
    for (int k = 0; k < 16; ++k) {
      const double phi = pi * (k + 0.5) / 16.0;
      const double tau = std::cos(phi);
      const double nu_hat = std::abs(std::sin(phi));
      const cplx rescaled = symbol_eval(op, SymbolKind::rescaled, 0.0, tau, nu_hat);
      const cplx limit = std::pow(t, op.mu) * symbol_eval(op, SymbolKind::principal, t, tau / t, nu_hat);
      worst = std::max(worst, std::abs(limit - rescaled) / std::max(1.0, std::abs(rescaled)));
    }
    r.check_at_most("rescaled_symbol_limit", worst, 1e-5, "t^mu principal(t, tau/t) at t = 1e-7");
  }

  // discretize
  const LogGrid grid = verify_grid(c);
  const DiscreteOperator target = assemble(op, grid);
  if (laplacian) {
    double worst_sym = 0.0;
    double worst_neg = 0.0;
    RunConfig bare = c;
    bare.op.shift = 0.0;
    const DiscreteOperator unshifted = assemble(build_operator(bare), grid);
    const auto spectra = spectrum(unshifted);
    for (std::size_t j = 0; j < unshifted.modes.size(); ++j) {
      const CMatrix& m = unshifted.modes[j].matrix;
      worst_sym = std::max(worst_sym, symmetry_defect(target.modes[j].matrix));
      const double scale = m.cwiseAbs().colwise().sum().maxCoeff();
      for (const cplx v : spectra[j]) worst_neg = std::max(worst_neg, -v.real() / scale);
    }
    if (c.weight.gamma == 0.0)
      r.check_at_most("assembly_symmetry", worst_sym, 1e-12);
    else
      r.notes.push_back("assembly_symmetry: skipped for gamma != 0");
    r.check_at_most("laplacian_spectrum_nonnegative", worst_neg, 1e-8, "min eigenvalue / |M|");
  } else {
    skip("assembly_symmetry");
  }
  {
    // Lowest eigenvalues at γ and γ + 1/4 agree up to truncation; the gap
    // shrinks with N. Taken from the inverse, whose dominant eigenvalues keep
    // their accuracy on graded matrices.
    auto lowest = [](const CMatrix& m) {
      const CMatrix inv = BandedLU(m, lower_bandwidth(m), upper_bandwidth(m)).inverse();
      Eigen::ComplexEigenSolver<CMatrix> solver(inv, false);
      std::vector<cplx> v(solver.eigenvalues().begin(), solver.eigenvalues().end());
      std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
      v.resize(std::min<std::size_t>(v.size(), 4));
      for (cplx& x : v) x = 1.0 / x;
      return v;
    };
    // On the truncated cone (t <= 1) the lowest eigenvalues are O(1); on the
    // model cone they collapse onto the shift.
    FuchsOperator base = op;
    base.shift = 0.0;
    const std::size_t mode = std::min<std::size_t>(1, op.cross_section.mode_count() - 1);
    auto defect = [&](int points) {
      const LogGrid g(0.0, 8.0, points, GridKind::truncated_cone);
      FuchsOperator shifted = base;
      shifted.weight.gamma += 0.25;
      const auto a = lowest(assemble(base, g).modes[mode].matrix);
      const auto b = lowest(assemble(shifted, g).modes[mode].matrix);
      double worst = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::abs(a[i]));
      return worst;
    };
    const double coarse = defect(c.scan.verify_points);
    const double fine = defect(2 * c.scan.verify_points);
    r.check_flag("weight_conjugation_spectra", fine < coarse || fine < 1e-10,
                 "lowest eigenvalues at gamma and gamma + 1/4: " + label(coarse) + " at N, " + label(fine) +
                     " at 2N");
  }
  {
    Rng rng(c.run.seed);
    std::vector<cplx> u(grid.size(), 0.0);
    for (std::size_t i = 16; i + 16 < u.size(); ++i) u[i] = cplx(rng.normal(), rng.normal());
    const double h = grid.h();
    const auto one = kappa_apply(u, std::exp(h), grid, n);
    const auto two = kappa_apply(one, std::exp(2 * h), grid, n);
    const auto three = kappa_apply(u, std::exp(3 * h), grid, n);
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      worst = std::max(worst, std::abs(two[i] - three[i]));
      scale = std::max(scale, std::abs(three[i]));
    }
    r.check_at_most("kappa_group_law", worst / scale, 1e-13);

    const WeightedNormSpec spec{0, gamma_p(n, 2.0), 2.0};
    const double before = weighted_norm(u, 0.0, spec, grid, n);
    const double after = weighted_norm(kappa_apply(u, std::exp(4 * h), grid, n), 0.0, spec, grid, n);
    r.check_at_most("kappa_isometry_gamma_p", std::abs(after - before) / before, 1e-12);
  }
  {
    const LogGrid fine(0.0, 10.0, 4096, GridKind::truncated_cone);
    const std::vector<cplx> one(fine.size(), 1.0);
    const double norm = weighted_norm(one, 0.0, WeightedNormSpec{0, 0.0, 2.0}, fine, 1);
    r.check_at_most("weighted_norm_closed_form", std::abs(norm - std::sqrt(0.5)), 1e-3, "u = 1, n = 1: 1/sqrt(2)");
  }
  if (grid.kind() == GridKind::model_cone) {
    double worst = 0.0;
    for (const double rho : {std::exp(grid.h()), std::exp(4 * grid.h())})
      for (std::size_t j = 0; j < target.modes.size(); ++j)
        worst = std::max(worst, twisted_homogeneity_defect(target, j, rho, cplx(-1.0, 2.0)));
    r.check_at_most("twisted_homogeneity", worst, 1e-10);
  } else {
    r.notes.push_back("twisted_homogeneity: needs a model_cone grid");
  }

  // geometry
  {
    const KeyholeRegion region(0.5, 3 * pi / 4);
    const ContourQuadrature q = contour_nodes(region, 30.0, 400, 40, -0.5);
    r.check_at_most("contour_arc_length", std::abs(q.arc_weight_sum() - 2 * region.theta() * region.delta()), 1e-12);
    const double t10 = tail_bound(1.0, 10.0, -0.5, pi / 4);
    const double t20 = tail_bound(1.0, 20.0, -0.5, pi / 4);
    const double t40 = tail_bound(1.0, 40.0, -0.5, pi / 4);
    r.check_flag("tail_bound_decreasing", t40 < t20 && t20 < t10);
  }

  // calculus
  {
    const std::vector<cplx> zs = z_grid(c.scan);
    const std::vector<std::pair<cplx, cplx>> pairs{
        {{-0.3, 0.0}, {-0.3, 0.0}}, {{-0.5, 0.0}, {-0.5, 0.0}}, {{-0.1, 1.0}, {-0.5, 0.0}}, {{-0.1, 5.0}, {-0.1, -5.0}}};
    const double eps = 1e-4;
    const cplx z0(-0.5, 1.0);
    std::vector<cplx> all = zs;
    for (const auto& [z, w] : pairs) {
      all.push_back(z);
      all.push_back(w);
      all.push_back(z + w);
    }
    for (const cplx d : {cplx(eps, 0), cplx(-eps, 0), cplx(0, eps), cplx(0, -eps)}) all.push_back(z0 + d);
    const ContourQuadrature contour = make_contour(target, all, build_contour(c));
    const PowerResult power = dunford_power(target, all, contour);
    const auto oracle = power_oracle(target, zs);
    double worst = 0.0;
    for (std::size_t k = 0; k < zs.size(); ++k) worst = std::max(worst, relative_error(power.powers[k], oracle[k]));
    r.check_at_most("dunford_oracle", worst, 1e-6);

    double semigroup = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const std::size_t base = zs.size() + 3 * k;
      semigroup = std::max(semigroup, relative_error(product(power.powers[base], power.powers[base + 1]),
                                                     power.powers[base + 2]));
    }
    r.check_at_most("semigroup", semigroup, 1e-6);

    const std::size_t cr = zs.size() + 3 * pairs.size();
    double dzbar = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < target.modes.size(); ++j) {
      const CMatrix dx = (power.powers[cr][j] - power.powers[cr + 1][j]) / (2 * eps);
      const CMatrix dy = (power.powers[cr + 2][j] - power.powers[cr + 3][j]) / (2 * eps);
      dzbar = std::max(dzbar, (0.5 * (dx + cplx(0, 1) * dy)).norm());
      scale = std::max(scale, power.powers[cr][j].norm());
    }
    r.check_at_most("holomorphy_cauchy_riemann", dzbar / scale, 1e-5, "central differences, eps = 1e-4");

    // Powers of E M E^{-1} against E M^z E^{-1} for mode 0.
    const cplx z(-0.5, 0.0);
    const double gamma_new = c.weight.gamma + 0.3;
    const CMatrix& m0 = target.modes.front().matrix;
    const DiscreteOperator similar =
        DiscreteOperator::from_matrices({reweight(m0, grid, c.weight.gamma, gamma_new)}, target.bandwidth);
    const DiscreteOperator single = DiscreteOperator::from_matrices({m0}, target.bandwidth);
    const ContourQuadrature q = make_contour(single, std::span<const cplx>(&z, 1), build_contour(c));
    const CMatrix lhs = dunford_power(similar, std::span<const cplx>(&z, 1), q).powers[0][0];
    const CMatrix rhs = reweight(dunford_power(single, std::span<const cplx>(&z, 1), q).powers[0][0], grid,
                                 c.weight.gamma, gamma_new);
    r.check_at_most("conjugation_covariance", (lhs - rhs).norm() / rhs.norm(), 1e-10);
  }
  {
    // Zero eigenvalue inside the δ-disk: A = V diag(0, 1, 4) V^{-1}.
    Rng rng(c.run.seed + 1);
    CMatrix v = CMatrix::Identity(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v(i, j) += 0.3 * rng.normal();
    const CMatrix d = CVector(Eigen::Vector3cd(0.0, 1.0, 4.0)).asDiagonal();
    const CMatrix a = v * d * v.inverse();
    const DiscreteOperator synthetic = DiscreteOperator::from_matrices({a});
    const Projection proj = spectral_projection_e0(synthetic, 0.5, 128);
    r.check_at_most("projection_idempotent", proj.idempotency_defect, 1e-8);
    const CMatrix expected = v * CVector(Eigen::Vector3cd(1.0, 0.0, 0.0)).asDiagonal() * v.inverse();
    r.check_at_most("projection_kernel", (proj.e0[0] - expected).norm() / expected.norm(), 1e-8);
    const cplx z(-1.0, 0.0);
    ContourOptions options = build_contour(c);
    options.delta = 0.5;
    const ContourQuadrature q = make_contour(synthetic, std::span<const cplx>(&z, 1), options);
    const CMatrix a0 = dunford_power(synthetic, std::span<const cplx>(&z, 1), q).powers[0][0] * a;
    const CMatrix complement = CMatrix::Identity(3, 3) - proj.e0[0];
    r.check_at_most("zero_power_complement", (a0 - complement).norm() / complement.norm(), 1e-6, "A^0 = 1 - E0");
  }
  {
    ResolventScanOptions options;
    options.radii = c.scan.radii.empty() ? default_radii() : c.scan.radii;
    options.seed = c.run.seed;
    const CalculusReport scan = resolvent_norm_scan(target, c.scan.sector_theta, options);
    for (const auto& check : scan.checks)
      if (check.name == "sup_finite") r.checks.push_back({"resolvent_sup_finite", check.value, check.tolerance, check.pass, ""});
  }
  {
    const CalculusReport hardy = hardy_suite();
    std::size_t failed = 0;
    for (const auto& check : hardy.checks) failed += check.pass ? 0 : 1;
    r.check_at_most("hardy_suite", static_cast<double>(failed), 0.0,
                    std::to_string(hardy.checks.size()) + " (g, p, r, tail) cases");
  }

  // pde
  {
    auto scalar = [](Stepper stepper, int steps) {
      CauchyProblem p;
      p.target = DiscreteOperator::from_matrices({CMatrix::Ones(1, 1)});
      p.T = 1.0;
      p.steps = steps;
      p.stepper = stepper;
      p.forcing = [](double) { return ModeVectors{CVector::Ones(1)}; };
      return std::abs(solve_heat(p).u.back()[0](0) - (1.0 - std::exp(-1.0)));
    };
    auto order = [&](Stepper s) {
      const double e1 = scalar(s, 250);
      const double e2 = scalar(s, 500);
      const double e3 = scalar(s, 1000);
      return 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
    };
    r.check_at_most("heat_scalar_benchmark", scalar(Stepper::bdf2, 1000), 1e-4, "u(1) = 1 - 1/e");
    const double be = order(Stepper::backward_euler);
    const double bdf = order(Stepper::bdf2);
    r.check_at_most("backward_euler_order", std::abs(be - 1.0), 0.2, "observed " + label(be));
    r.check_at_most("bdf2_order", std::abs(bdf - 2.0), 0.2, "observed " + label(bdf));
  }
  {
    QuasilinearProblem q;
    q.grid = Grid2d{LogGrid(0.0, 5.0, 32, GridKind::truncated_cone), 16};
    q.a = Diffusivity("1");
    q.f = nonlinearity_preset("gl");
    Rng rng(c.run.seed + 2);
    Field2d u(32, 16);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = cplx(rng.normal(), rng.normal());
    const Field2d ft = assemble_ftilde(u, 0.5, q);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(ft(i) - q.f(0.5, u(i))));
    r.check_at_most("ftilde_constant_reduction", worst, 0.0, "exact in floating point");
  }

  // cli
  r.check_flag("config_round_trip", parse_config(to_text(c)) == c);

  r.seconds = seconds_since(start);
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"indicial",   "extensions", "ellipticity", "spectrum",
                                              "resolvent-scan", "power", "bip-scan",    "hardy-check",
                                              "heat",       "quasilinear", "verify"};
  return names;
}

RunRecord run(const std::string& command, const RunConfig& config) {
  const auto start = Clock::now();
  RunRecord record;
  record.command = command;
  record.config_text = to_text(config);
  record.config_hash = config_hash(config);
  record.seed = config.run.seed;
  try {
    if (command == "indicial") {
      record.reports.push_back(cmd_indicial(config));
    } else if (command == "extensions") {
      record.reports.push_back(cmd_extensions(config));
    } else if (command == "ellipticity") {
      record.reports.push_back(cmd_ellipticity(config));
    } else if (command == "spectrum") {
      record.reports.push_back(cmd_spectrum(config));
    } else if (command == "resolvent-scan") {
      record.reports.push_back(cmd_resolvent_scan(config));
    } else if (command == "power") {
      record.reports.push_back(cmd_power(config));
    } else if (command == "bip-scan") {
      record.reports.push_back(cmd_bip_scan(config));
    } else if (command == "hardy-check") {
      record.reports.push_back(hardy_suite());
    } else if (command == "heat") {
      record.reports.push_back(cmd_heat(config));
    } else if (command == "quasilinear") {
      record.reports = cmd_quasilinear(config);
    } else if (command == "verify") {
      record.reports.push_back(cmd_verify(config));
    } else {
      record.errors.emplace_back("config", "unknown command '" + command + "'");
    }
  } catch (const ConfigError& e) {
    record.errors.emplace_back("config", e.what());
  } catch (const DomainError& e) {
    record.errors.emplace_back("domain", e.what());
  } catch (const NumericalError& e) {
    record.errors.emplace_back("numerical", e.what());
  } catch (const std::exception& e) {
    record.errors.emplace_back("internal", e.what());
  }
  record.seconds = seconds_since(start);
  return record;
}

std::vector<std::filesystem::path> dump_matrices(const RunConfig& config, const std::filesystem::path& dir) {
  const DiscreteOperator target = assemble(build_operator(config), build_grid(config));
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t j = 0; j < target.modes.size(); ++j) {
    const CMatrix& m = target.modes[j].matrix;
    const auto path = dir / ("matrix-" + config_hash(config) + ".mode" + std::to_string(j) + ".csv");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.imbue(std::locale::classic());
    out.precision(17);
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << "re_" << k << ",im_" << k;
    out << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << m(i, k).real() << "," << m(i, k).imag();
      out << "\n";
    }
    if (!out) throw Error("write failed for " + path.string());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace conecalc
