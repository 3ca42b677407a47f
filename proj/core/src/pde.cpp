#include "conecalc/pde.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "conecalc/error.hpp"
#include "conecalc/linalg.hpp"
#include "conecalc/rng.hpp"
#include "conecalc/symbols.hpp"

namespace conecalc {

namespace {

using Clock = std::chrono::steady_clock;
using SparseReal = Eigen::SparseMatrix<double>;
using SparseComplex = Eigen::SparseMatrix<cplx>;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool all_finite(const ModeVectors& v) {
  return std::all_of(v.begin(), v.end(), [](const CVector& x) { return x.allFinite(); });
}

ModeVectors zeros_like(const DiscreteOperator& target) {
  ModeVectors z;
  for (const auto& m : target.modes) z.push_back(CVector::Zero(m.matrix.rows()));
  return z;
}

void check_shape(const DiscreteOperator& target, const ModeVectors& v, const char* what) {
  bool ok = v.size() == target.modes.size();
  for (std::size_t j = 0; ok && j < v.size(); ++j) ok = v[j].size() == target.modes[j].matrix.rows();
  if (!ok) throw DomainError(std::string("heat: ") + what + " does not match the target modes");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(10);
  out << x;
  return out.str();
}

// v = e^{-βr} u with β = (n+1)/2 = 1 for the circle cross-section.
RVector line_factor(const Grid2d& grid) {
  RVector s(static_cast<Eigen::Index>(grid.radial.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::exp(-grid.radial.r(static_cast<std::size_t>(i)));
  return s;
}

double field_norm(const Field2d& v, const Grid2d& grid) {
  return std::sqrt(grid.radial.h() * grid.hx() * v.squaredNorm());
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  // index i * N_x + l
  const Eigen::MatrixXd t = m.transpose();
  return t.reshaped();
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return v.reshaped(cols, rows).transpose();
}

}  // namespace

std::string to_string(Stepper s) { return s == Stepper::bdf2 ? "bdf2" : "backward_euler"; }

Stepper parse_stepper(const std::string& name) {
  if (name == "bdf2") return Stepper::bdf2;
  if (name == "backward_euler" || name == "be") return Stepper::backward_euler;
  throw DomainError("unknown stepper \"" + name + "\" (backward_euler | bdf2)");
}

double mode_norm(const DiscreteOperator& target, const ModeVectors& v) {
  const double h = target.grid ? target.grid->h() : 1.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) sum += target.modes[j].multiplicity * h * v[j].squaredNorm();
  return std::sqrt(sum);
}

HeatSolution solve_heat(const CauchyProblem& problem) {
  const DiscreteOperator& target = problem.target;
  if (target.modes.empty()) throw DomainError("heat: target has no modes");
  if (!(problem.T > 0.0) || !std::isfinite(problem.T)) throw DomainError("heat: T must be positive");
  if (problem.steps < 2) throw DomainError("heat: steps must be >= 2");
  if (!(problem.r_time >= 1.0) || !std::isfinite(problem.r_time)) throw DomainError("heat: r_time must be >= 1");

  HeatSolution out;
  out.min_real_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  if (problem.check_spectrum) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& values : spectrum(target))
      for (const cplx& v : values) lowest = std::min(lowest, v.real());
    out.min_real_eigenvalue = lowest;
    if (!(lowest > 0.0))
      throw DomainError("heat: target spectrum must lie in the open right half-plane (min Re = " +
                        format_double(lowest) + ")");
  }

  const double k = problem.T / problem.steps;
  std::vector<BlockOperator> ops;
  std::vector<SparseComplex> sparse;
  for (const auto& m : target.modes) {
    ops.emplace_back(m.matrix);
    sparse.push_back(m.matrix.sparseView());
  }
  // I + kA = -k(λ - A) at λ = -1/k; 3I + 2kA = -2k(λ - A) at λ = -3/(2k).
  std::vector<ResolventFactor> euler;
  std::vector<ResolventFactor> bdf;
  for (const auto& op : ops) {
    euler.emplace_back(op, cplx(-1.0 / k));
    if (problem.stepper == Stepper::bdf2) bdf.emplace_back(op, cplx(-1.5 / k));
  }

  const auto force = [&](double tau) {
    if (!problem.forcing) return zeros_like(target);
    ModeVectors f = problem.forcing(tau);
    check_shape(target, f, "forcing");
    if (!all_finite(f)) throw NumericalError("heat: forcing is not finite at tau = " + format_double(tau));
    return f;
  };

  ModeVectors u0 = problem.initial.empty() ? zeros_like(target) : problem.initial;
  check_shape(target, u0, "initial value");
  out.times.push_back(0.0);
  out.u.push_back(std::move(u0));

  const double r = problem.r_time;
  double du_sum = 0.0;
  double au_sum = 0.0;
  double f_sum = 0.0;
  for (int m = 1; m <= problem.steps; ++m) {
    const double tau = k * m;
    const ModeVectors f = force(tau);
    const ModeVectors& prev = out.u.back();
    ModeVectors next(ops.size());
    ModeVectors du(ops.size());
    ModeVectors au(ops.size());
    const bool second_order = problem.stepper == Stepper::bdf2 && m >= 2;
    for (std::size_t j = 0; j < ops.size(); ++j) {
      if (!second_order) {
        CVector x = prev[j] + k * f[j];
        euler[j].solve(x);
        next[j] = (-1.0 / k) * x;
        du[j] = (next[j] - prev[j]) / k;
      } else {
        const CVector& older = out.u[out.u.size() - 2][j];
        CVector x = 4.0 * prev[j] - older + 2.0 * k * f[j];
        bdf[j].solve(x);
        next[j] = (-0.5 / k) * x;
        du[j] = (3.0 * next[j] - 4.0 * prev[j] + older) / (2.0 * k);
      }
      au[j] = sparse[j] * next[j];
    }
    if (!all_finite(next)) throw NumericalError("heat: non-finite solution at step " + std::to_string(m));
    du_sum += k * std::pow(mode_norm(target, du), r);
    au_sum += k * std::pow(mode_norm(target, au), r);
    f_sum += k * std::pow(mode_norm(target, f), r);
    out.times.push_back(tau);
    out.u.push_back(std::move(next));
  }
  out.du_norm = std::pow(du_sum, 1.0 / r);
  out.au_norm = std::pow(au_sum, 1.0 / r);
  out.f_norm = std::pow(f_sum, 1.0 / r);
  return out;
}

std::optional<double> max_reg_ratio(const HeatSolution& solution) {
  if (!(solution.f_norm > 0.0)) return std::nullopt;
  return (solution.du_norm + solution.au_norm) / solution.f_norm;
}

CalculusReport max_reg_diagnostic(const CauchyProblem& problem, const std::vector<double>& frequencies,
                                  std::uint64_t seed) {
  const auto start = Clock::now();
  CalculusReport report;
  report.operation = "max_reg_diagnostic";
  report.parameters = {{"T", problem.T},
                       {"steps", static_cast<std::int64_t>(problem.steps)},
                       {"stepper", to_string(problem.stepper)},
                       {"r_time", problem.r_time},
                       {"seed", static_cast<std::int64_t>(seed)}};

  Rng rng(seed);
  ModeVectors phi = zeros_like(problem.target);
  for (auto& v : phi)
    for (auto& x : v) x = rng.normal();

  Table table{"max_reg", {"omega", "ratio", "du_norm", "au_norm", "f_norm"}, {}};
  std::vector<double> ratios;
  bool first = true;
  for (const double omega : frequencies) {
    CauchyProblem run = problem;
    run.initial.clear();
    run.check_spectrum = problem.check_spectrum && first;
    run.forcing = [phi, omega](double tau) {
      ModeVectors f = phi;
      for (auto& v : f) v *= std::sin(omega * tau);
      return f;
    };
    const HeatSolution s = solve_heat(run);
    if (first && problem.check_spectrum) report.results.emplace_back("min_real_eigenvalue", s.min_real_eigenvalue);
    first = false;
    const auto ratio = max_reg_ratio(s);
    if (!ratio) {
      report.notes.push_back("omega = " + format_double(omega) + ": forcing vanishes at every step, ratio skipped");
      continue;
    }
    ratios.push_back(*ratio);
    table.rows.push_back({omega, *ratio, s.du_norm, s.au_norm, s.f_norm});
  }
  report.tables.push_back(std::move(table));
  if (ratios.empty()) {
    report.notes.push_back("no frequency produced a nonzero forcing");
    report.check_flag("max_over_median", false, "no ratios");
  } else {
    const double mx = *std::max_element(ratios.begin(), ratios.end());
    const double med = median(ratios);
    report.results.emplace_back("max_ratio", mx);
    report.results.emplace_back("median_ratio", med);
    report.check_at_most("max_over_median", mx / med, 10.0);
  }
  report.seconds = elapsed(start);
  return report;
}

Diffusivity::Diffusivity(const std::string& a, double scale, double range)
    : a_(Expression::parse(a, {"s"})), scale_(scale), range_(range) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw DomainError("pde.diffusion_scale must be >= 0");
  if (!(range > 0.0)) throw DomainError("pde.a_range must be positive");
  const double zero = 0.0;
  a0_ = a_(std::span<const double>(&zero, 1));
  if (!(a0_ > 0.0)) throw DomainError("diffusivity: a(0) must be positive");
  constant_ = std::none_of(a_.nodes().begin(), a_.nodes().end(),
                           [](const Expression::Node& n) { return n.kind == Expression::Node::Kind::variable; });
}

void Diffusivity::check_range(cplx s) const {
  if (!(std::abs(s.real()) <= range_) || !(std::abs(s.imag()) <= range_))
    throw DomainError("diffusivity evaluated at t^c u = " + format_double(s.real()) + " + " + format_double(s.imag()) +
                      "i, outside the configured range [-" + format_double(range_) + ", " + format_double(range_) +
                      "]");
}

double Diffusivity::value(cplx s) const {
  check_range(s);
  if (scale_ == 0.0) return 0.0;
  const double x = s.real();
  const double y = s.imag();
  return scale_ * a_(std::span<const double>(&x, 1)) * a_(std::span<const double>(&y, 1)) / a0_;
}

std::pair<double, double> Diffusivity::gradient(cplx s) const {
  check_range(s);
  if (scale_ == 0.0 || constant_) return {0.0, 0.0};
  const double x = s.real();
  const double y = s.imag();
  const auto [ax, dax] = a_.value_and_derivative(std::span<const double>(&x, 1), 0);
  const auto [ay, day] = a_.value_and_derivative(std::span<const double>(&y, 1), 0);
  if (!std::isfinite(dax) || !std::isfinite(day)) throw DomainError("diffusivity derivative is not finite");
  return {scale_ * dax * ay / a0_, scale_ * ax * day / a0_};
}

Nonlinearity nonlinearity_preset(const std::string& name, double alpha) {
  if (name == "none") return [](double, cplx) { return cplx(0.0); };
  if (name == "gl") return [](double, cplx u) { return u - u * u * u; };
  if (name == "power") {
    if (!(alpha >= 1.0)) throw DomainError("pde.f_power must be >= 1");
    return [alpha](double, cplx u) {
      const double m = std::abs(u);
      return m == 0.0 ? cplx(0.0) : u * std::pow(m, alpha - 1.0);
    };
  }
  throw DomainError("unknown nonlinearity \"" + name + "\" (none | gl | power)");
}

Field2d initial_preset(const Grid2d& grid, const std::string& name, double value) {
  const auto rows = static_cast<Eigen::Index>(grid.radial.size());
  Field2d u(rows, grid.angular);
  if (name == "uniform") {
    u.setConstant(value);
    return u;
  }
  if (name != "bump") throw DomainError("unknown initial value preset \"" + name + "\" (bump | uniform)");
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double rho = (grid.radial.t(static_cast<std::size_t>(i)) - 0.5) / 0.35;
    const double psi = std::abs(rho) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - rho * rho)) : 0.0;
    for (int l = 0; l < grid.angular; ++l) u(i, l) = value * psi * (1.0 + 0.5 * std::cos(grid.x(l)));
  }
  return u;
}

Field2d gradient_pairing(const Field2d& v, const Field2d& w, const Grid2d& grid) {
  const Eigen::Index nr = v.rows();
  const Eigen::Index nx = v.cols();
  if (nr != static_cast<Eigen::Index>(grid.radial.size()) || nx != grid.angular || w.rows() != nr ||
      w.cols() != nx)
    throw DomainError("gradient pairing: field does not match the grid");
  const double h = grid.radial.h();
  const double hx = grid.hx();
  const auto dr = [&](const Field2d& f) {
    Field2d d(nr, nx);
    d.row(0) = (-3.0 * f.row(0) + 4.0 * f.row(1) - f.row(2)) / (2.0 * h);
    for (Eigen::Index i = 1; i + 1 < nr; ++i) d.row(i) = (f.row(i + 1) - f.row(i - 1)) / (2.0 * h);
    d.row(nr - 1) = (3.0 * f.row(nr - 1) - 4.0 * f.row(nr - 2) + f.row(nr - 3)) / (2.0 * h);
    return d;
  };
  const auto dx = [&](const Field2d& f) {
    Field2d d(nr, nx);
    for (Eigen::Index l = 0; l < nx; ++l) d.col(l) = (f.col((l + 1) % nx) - f.col((l + nx - 1) % nx)) / (2.0 * hx);
    return d;
  };
  Field2d out = dr(v).cwiseProduct(dr(w)) + dx(v).cwiseProduct(dx(w));
  for (Eigen::Index i = 0; i < nr; ++i) out.row(i) *= std::exp(2.0 * grid.radial.r(static_cast<std::size_t>(i)));
  return out;
}

Field2d assemble_ftilde(const Field2d& u, double tau, const QuasilinearProblem& problem) {
  const Grid2d& grid = problem.grid;
  if (u.rows() != static_cast<Eigen::Index>(grid.radial.size()) || u.cols() != grid.angular)
    throw DomainError("f~: field does not match the grid");
  if (!u.allFinite()) throw DomainError("f~: field is not finite");
  Field2d out(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index l = 0; l < u.cols(); ++l) out(i, l) = problem.f(tau, u(i, l));
  if (problem.a.is_constant() || problem.a.scale() == 0.0) return out;

  RVector tc(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) tc(i) = std::pow(grid.radial.t(static_cast<std::size_t>(i)), problem.c);
  const Field2d re = (tc.asDiagonal() * u.real()).cast<cplx>();
  const Field2d im = (tc.asDiagonal() * u.imag()).cast<cplx>();
  const Field2d p_re = gradient_pairing(re, u, grid);
  const Field2d p_im = gradient_pairing(im, u, grid);
  const cplx i_unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index l = 0; l < u.cols(); ++l) {
      const auto [d1, d2] = problem.a.gradient(tc(i) * u(i, l));
      out(i, l) -= d1 * p_re(i, l) + i_unit * (d2 * p_im(i, l));
    }
  return out;
}

SparseReal cone_laplacian_2d(const Grid2d& grid) {
  const FuchsOperator op = make_cone_laplacian(CrossSectionSpectrum::circle(0), 0.0, WeightData{});
  const DiscreteOperator radial = assemble(op, grid.radial);
  const RMatrix m0 = radial.modes.front().matrix.real();
  const Eigen::Index nr = m0.rows();
  const Eigen::Index nx = grid.angular;
  const double hx2 = grid.hx() * grid.hx();
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < nr; ++i) {
    const double e2r = std::exp(2.0 * grid.radial.r(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < nr; ++j) {
      if (m0(i, j) == 0.0) continue;
      for (Eigen::Index l = 0; l < nx; ++l) entries.emplace_back(i * nx + l, j * nx + l, m0(i, j));
    }
    for (Eigen::Index l = 0; l < nx; ++l) {
      entries.emplace_back(i * nx + l, i * nx + l, 2.0 * e2r / hx2);
      entries.emplace_back(i * nx + l, i * nx + (l + 1) % nx, -e2r / hx2);
      entries.emplace_back(i * nx + l, i * nx + (l + nx - 1) % nx, -e2r / hx2);
    }
  }
  SparseReal l(nr * nx, nr * nx);
  l.setFromTriplets(entries.begin(), entries.end());
  return l;
}

QuasilinearSolution solve_quasilinear(const QuasilinearProblem& problem) {
  const auto start = Clock::now();
  const Grid2d& grid = problem.grid;
  const auto nr = static_cast<Eigen::Index>(grid.radial.size());
  const Eigen::Index nx = grid.angular;
  if (grid.radial.kind() != GridKind::truncated_cone) throw DomainError("quasilinear: needs a truncated_cone grid");
  if (nx < 8) throw DomainError("pde.angular_points must be >= 8");
  if (!(problem.T > 0.0) || !std::isfinite(problem.T)) throw DomainError("pde.T must be positive");
  if (problem.steps < 1) throw DomainError("pde.steps must be >= 1");
  if (!(problem.c > 0.0)) throw DomainError("pde.c must be positive");
  if (problem.initial.rows() != nr || problem.initial.cols() != nx)
    throw DomainError("quasilinear: initial value does not match the grid");
  if (!problem.initial.allFinite()) throw DomainError("quasilinear: initial value is not finite");

  QuasilinearSolution out;
  CalculusReport& report = out.report;
  report.operation = "solve_quasilinear";
  report.parameters = {{"a", problem.a.text()},
                       {"diffusion_scale", problem.a.scale()},
                       {"c", problem.c},
                       {"f", problem.f_name},
                       {"g_re", problem.g.real()},
                       {"g_im", problem.g.imag()},
                       {"T", problem.T},
                       {"steps", static_cast<std::int64_t>(problem.steps)},
                       {"radial_points", static_cast<std::int64_t>(nr)},
                       {"angular_points", static_cast<std::int64_t>(nx)},
                       {"r_max", grid.radial.r_max()},
                       {"a_min", problem.a_min},
                       {"q", problem.q},
                       {"growth_limit", problem.growth_limit}};
  const std::string banner = "desk-scale surrogate: hypothesis (dimension) violated";
  report.results.emplace_back("banner", banner);
  report.notes.push_back(banner + " (cross-section S^1, dim B = 2; the existence theorem assumes dim B > 4)");
  if (problem.q <= 2.0) report.notes.push_back("q <= (n+3)/2 = 2: point evaluation of u is not controlled");

  // (H3)
  const bool g_finite = std::isfinite(problem.g.real()) && std::isfinite(problem.g.imag());
  report.check_flag("h3_forcing_finite", g_finite);
  if (!g_finite) {
    out.diagnosis = "forcing g is not finite";
    report.seconds = elapsed(start);
    return out;
  }

  const RVector line = line_factor(grid);
  const auto to_v = [&](const Field2d& u) { return Field2d(line.asDiagonal() * u); };
  const auto to_u = [&](const Field2d& v) { return Field2d(line.cwiseInverse().asDiagonal() * v); };
  RVector tc(nr);
  for (Eigen::Index i = 0; i < nr; ++i) tc(i) = std::pow(grid.radial.t(static_cast<std::size_t>(i)), problem.c);

  // (H2) sampled Lipschitz quotient of f~ around u0.
  double lipschitz = 0.0;
  try {
    Rng rng(problem.seed);
    const Field2d base = assemble_ftilde(problem.initial, 0.0, problem);
    const double size = std::max(1.0, problem.initial.cwiseAbs().maxCoeff());
    for (int s = 0; s < problem.lipschitz_samples; ++s) {
      Field2d eta(nr, nx);
      for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index l = 0; l < nx; ++l) eta(i, l) = rng.normal();
      eta *= 1e-4 * size / eta.cwiseAbs().maxCoeff();
      const Field2d moved = assemble_ftilde(problem.initial + eta, 0.0, problem);
      lipschitz = std::max(lipschitz, field_norm(to_v(moved - base), grid) / field_norm(to_v(eta), grid));
    }
  } catch (const DomainError& e) {
    lipschitz = std::numeric_limits<double>::infinity();
    report.notes.push_back(std::string("Lipschitz probe failed: ") + e.what());
  }
  report.results.emplace_back("lipschitz_estimate", lipschitz);
  report.check_flag("h2_lipschitz_finite", std::isfinite(lipschitz));

  const SparseReal lap = cone_laplacian_2d(grid);
  SparseReal identity(lap.rows(), lap.cols());
  identity.setIdentity();
  Eigen::SparseLU<SparseReal> lu;
  lu.analyzePattern(lap + identity);

  const bool diffusion = problem.a.scale() > 0.0;
  const double dt0 = problem.T / problem.steps;
  double dt = dt0;
  double tau = 0.0;
  double min_a = std::numeric_limits<double>::infinity();
  std::optional<double> previous;
  Field2d u = problem.initial;
  Field2d v = to_v(u);
  out.times.push_back(0.0);
  out.u.push_back(u);
  out.energies.push_back(field_norm(v, grid));
  Table history{"residuals", {"tau", "dt", "residual", "energy", "min_a"}, {}};

  while (tau < problem.T * (1.0 - 1e-12)) {
    const double step = std::min(dt, problem.T - tau);
    Field2d rhs;
    RVector a(nr * nx);
    try {
      double step_min_a = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index l = 0; l < nx; ++l) {
          a(i * nx + l) = problem.a.value(tc(i) * u(i, l));
          step_min_a = std::min(step_min_a, a(i * nx + l));
        }
      if (diffusion) {
        min_a = std::min(min_a, step_min_a);
        if (!(step_min_a >= problem.a_min)) {
          out.diagnosis = "(H1) violated at tau = " + format_double(tau) + ": min a = " + format_double(step_min_a);
          break;
        }
      }
      rhs = u + step * (assemble_ftilde(u, tau, problem).array() + problem.g).matrix();
    } catch (const DomainError& e) {
      out.diagnosis = std::string("stopped at tau = ") + format_double(tau) + ": " + e.what();
      break;
    }

    Field2d next_v = to_v(rhs);
    if (diffusion) {
      SparseReal system = a.asDiagonal() * lap;
      system *= step;
      system += identity;
      lu.factorize(system);
      if (lu.info() != Eigen::Success) {
        out.diagnosis = "singular step matrix at tau = " + format_double(tau);
        break;
      }
      const Eigen::VectorXd re = lu.solve(flatten(next_v.real()));
      const Eigen::VectorXd im = lu.solve(flatten(next_v.imag()));
      next_v.real() = unflatten(re, nr, nx);
      next_v.imag() = unflatten(im, nr, nx);
    }
    const double residual = field_norm(next_v - v, grid) / step;
    const bool grew = previous && residual > problem.growth_limit * *previous;
    if (!next_v.allFinite() || !std::isfinite(residual) || grew) {
      if (out.halvings >= problem.max_halvings) {
        out.diagnosis = "step-size underflow at tau = " + format_double(tau) + " after " +
                        std::to_string(out.halvings) + " halvings: left the well-posedness neighborhood";
        break;
      }
      dt *= 0.5;
      ++out.halvings;
      continue;
    }
    previous = residual;
    tau += step;
    v = std::move(next_v);
    u = to_u(v);
    out.times.push_back(tau);
    out.u.push_back(u);
    out.residuals.push_back(residual);
    out.energies.push_back(field_norm(v, grid));
    history.rows.push_back({tau, step, residual, out.energies.back(), diffusion ? min_a : 0.0});
  }
  out.final_time = tau;
  out.completed = tau >= problem.T * (1.0 - 1e-12);

  report.results.emplace_back("final_time", out.final_time);
  report.results.emplace_back("completed", out.completed);
  report.results.emplace_back("accepted_steps", static_cast<std::int64_t>(out.residuals.size()));
  report.results.emplace_back("halvings", static_cast<std::int64_t>(out.halvings));
  if (!out.diagnosis.empty()) report.results.emplace_back("diagnosis", out.diagnosis);
  report.check_flag("completed", out.completed, out.diagnosis);
  if (diffusion) report.check_flag("h1_min_a", min_a >= problem.a_min, "min a = " + format_double(min_a));

  double growth = 0.0;
  for (std::size_t m = 1; m < out.residuals.size(); ++m)
    growth = std::max(growth, (out.residuals[m] - out.residuals[m - 1]) / out.residuals[m - 1]);
  report.results.emplace_back("max_residual_growth", growth);
  report.check_at_most("monotone_residuals", growth, 1e-9, "largest relative increase between accepted steps");

  const bool unforced = problem.f_name == "none" && problem.g == cplx(0.0) &&
                        problem.initial.imag().cwiseAbs().maxCoeff() == 0.0;
  if (unforced) {
    double increase = 0.0;
    for (std::size_t m = 1; m < out.energies.size(); ++m)
      increase = std::max(increase, (out.energies[m] - out.energies[m - 1]) / out.energies[0]);
    report.results.emplace_back("max_energy_increase", increase);
    report.check_at_most("energy_nonincreasing", increase, 1e-12);
  }

  report.tables.push_back(std::move(history));
  if (problem.snapshot_stride > 0) {
    Table snaps{"snapshots", {"tau", "radial_index", "angular_index", "re", "im"}, {}};
    for (std::size_t m = 0; m < out.u.size(); m += static_cast<std::size_t>(problem.snapshot_stride))
      for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index l = 0; l < nx; ++l)
          snaps.rows.push_back({out.times[m], static_cast<double>(i), static_cast<double>(l), out.u[m](i, l).real(),
                                out.u[m](i, l).imag()});
    report.tables.push_back(std::move(snaps));
  }
  report.seconds = elapsed(start);
  return out;
}

std::vector<double> heat_equivalence(const QuasilinearProblem& problem) {
  QuasilinearProblem linear = problem;
  linear.a = Diffusivity("1");
  linear.f = nonlinearity_preset("none");
  linear.f_name = "none";
  linear.g = 0.0;
  linear.growth_limit = std::numeric_limits<double>::infinity();
  linear.lipschitz_samples = 0;
  linear.snapshot_stride = 0;
  const QuasilinearSolution q = solve_quasilinear(linear);
  if (!q.completed) throw NumericalError("heat equivalence: quasilinear run stopped: " + q.diagnosis);

  const Grid2d& grid = problem.grid;
  const auto nr = static_cast<Eigen::Index>(grid.radial.size());
  const int nx = grid.angular;
  const int half = nx / 2;
  std::vector<ModeEigenvalue> table;
  for (int k = 0; k <= half; ++k) {
    const double s = std::sin(pi * k / nx);
    table.push_back({-4.0 * s * s / (grid.hx() * grid.hx()), (k == 0 || 2 * k == nx) ? 1 : 2});
  }
  table.front().nu = 0.0;
  const FuchsOperator op = make_cone_laplacian(CrossSectionSpectrum(1, table), 0.0, WeightData{});
  const DiscreteOperator target = assemble(op, grid.radial);

  // v̂_k(i) = N^{-1} Σ_l v(i,l) e^{-2πikl/N}; run A carries k = 0..N/2, run B k = N-1..N/2+1.
  const RVector line = line_factor(grid);
  const Field2d v0 = line.asDiagonal() * problem.initial;
  CMatrix dft(nx, nx);
  for (int l = 0; l < nx; ++l)
    for (int k = 0; k < nx; ++k) dft(l, k) = std::polar(1.0 / nx, -2.0 * pi * k * l / nx);
  const CMatrix coeffs = v0 * dft;  // (i, k)
  ModeVectors first(target.modes.size(), CVector::Zero(nr));
  ModeVectors second(target.modes.size(), CVector::Zero(nr));
  for (int k = 0; k <= half; ++k) first[static_cast<std::size_t>(k)] = coeffs.col(k);
  for (int k = 1; k < nx - half; ++k) second[static_cast<std::size_t>(k)] = coeffs.col(nx - k);

  CauchyProblem heat;
  heat.target = target;
  heat.T = problem.T;
  heat.steps = problem.steps;
  heat.stepper = Stepper::backward_euler;
  heat.initial = first;
  const HeatSolution a = solve_heat(heat);
  heat.initial = second;
  heat.check_spectrum = false;
  const HeatSolution b = solve_heat(heat);

  const double scale = problem.initial.cwiseAbs().maxCoeff();
  std::vector<double> diffs;
  for (std::size_t m = 1; m < q.u.size(); ++m) {
    CMatrix hat = CMatrix::Zero(nr, nx);
    for (int k = 0; k <= half; ++k) hat.col(k) = a.u[m][static_cast<std::size_t>(k)];
    for (int k = 1; k < nx - half; ++k) hat.col(nx - k) = b.u[m][static_cast<std::size_t>(k)];
    CMatrix v(nr, nx);
    for (int l = 0; l < nx; ++l) {
      v.col(l).setZero();
      for (int k = 0; k < nx; ++k) v.col(l) += hat.col(k) * std::polar(1.0, 2.0 * pi * k * l / nx);
    }
    const Field2d u = line.cwiseInverse().asDiagonal() * v;
    diffs.push_back((u - q.u[m]).cwiseAbs().maxCoeff() / scale);
  }
  return diffs;
}

}  // namespace conecalc
