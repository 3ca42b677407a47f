#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "conecalc/error.hpp"
#include "conecalc/pde.hpp"

using namespace conecalc;

namespace {

CauchyProblem scalar_problem(Stepper stepper, int steps) {
  CauchyProblem p;
  p.target = DiscreteOperator::from_matrices({CMatrix::Identity(1, 1)});
  p.T = 1.0;
  p.stepper = stepper;
  p.steps = steps;
  p.forcing = [](double) { return ModeVectors{CVector::Ones(1)}; };
  return p;
}

double scalar_error(Stepper stepper, int steps) {
  const HeatSolution s = solve_heat(scalar_problem(stepper, steps));
  return std::abs(s.u.back()[0](0) - (1.0 - std::exp(-1.0)));
}

Grid2d small_grid(int radial = 32, int angular = 16) {
  return Grid2d{LogGrid(0.0, 5.0, radial, GridKind::truncated_cone), angular};
}

double max_abs(const Field2d& f) { return f.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("scalar heat benchmark") {
  CHECK(scalar_error(Stepper::bdf2, 1000) <= 1e-4);
  CHECK(scalar_error(Stepper::backward_euler, 1000) <= 1e-3);
}

TEST_CASE("observed orders") {
  for (const auto& [stepper, order] : {std::pair{Stepper::backward_euler, 1.0}, std::pair{Stepper::bdf2, 2.0}}) {
    const double e250 = scalar_error(stepper, 250);
    const double e500 = scalar_error(stepper, 500);
    const double e1000 = scalar_error(stepper, 1000);
    CHECK(std::abs(std::log2(e250 / e500) - order) <= 0.2);
    CHECK(std::abs(std::log2(e500 / e1000) - order) <= 0.2);
  }
}

TEST_CASE("zero data gives the zero solution") {
  CauchyProblem p = scalar_problem(Stepper::bdf2, 20);
  p.forcing = nullptr;
  const HeatSolution s = solve_heat(p);
  for (const auto& u : s.u) CHECK(u[0].norm() == 0.0);
  CHECK_FALSE(max_reg_ratio(s).has_value());
}

TEST_CASE("heat rejects bad problems") {
  CauchyProblem p = scalar_problem(Stepper::bdf2, 1);
  CHECK_THROWS_AS(solve_heat(p), DomainError);
  p.steps = 10;
  p.target = DiscreteOperator::from_matrices({-CMatrix::Identity(1, 1)});
  CHECK_THROWS_AS(solve_heat(p), DomainError);
  CHECK_THROWS_AS(parse_stepper("rk4"), Error);
}

TEST_CASE("maximal-regularity ratio against the closed form") {
  // u = 1 - e^{-τ}, u' = e^{-τ}, Au = u, f = 1 on [0, 1], r = 2.
  const double du = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
  const double au = std::sqrt(1.0 - 2.0 * (1.0 - std::exp(-1.0)) + (1.0 - std::exp(-2.0)) / 2.0);
  const double exact = du + au;
  const HeatSolution s = solve_heat(scalar_problem(Stepper::bdf2, 1000));
  const auto ratio = max_reg_ratio(s);
  REQUIRE(ratio.has_value());
  CHECK(std::abs(*ratio - exact) <= 0.05 * exact);
}

TEST_CASE("max-reg diagnostic skips a vanishing forcing") {
  CauchyProblem p = scalar_problem(Stepper::bdf2, 100);
  const CalculusReport r = max_reg_diagnostic(p, {0.0, 1.0, 10.0}, 1);
  CHECK(r.notes.size() == 1);
  CHECK(r.tables.at(0).rows.size() == 2);
  CHECK(r.pass());
}

TEST_CASE("ftilde reduces to f for constant diffusivity") {
  QuasilinearProblem p;
  p.grid = small_grid();
  p.a = Diffusivity("2");
  p.f = nonlinearity_preset("gl");
  const Field2d u = initial_preset(p.grid, "bump", 1.0);
  const Field2d ft = assemble_ftilde(u, 0.0, p);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) CHECK(ft(i, j) == u(i, j) - u(i, j) * u(i, j) * u(i, j));
}

TEST_CASE("ftilde reduces to f when t^c u is constant") {
  QuasilinearProblem p;
  p.grid = small_grid();
  p.a = Diffusivity("1+s^2");
  p.c = 1.0;
  p.f = nonlinearity_preset("gl");
  Field2d u(static_cast<Eigen::Index>(p.grid.radial.size()), p.grid.angular);
  Field2d f = u;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      u(i, j) = 1.0 / p.grid.radial.t(static_cast<std::size_t>(i));
      f(i, j) = u(i, j) - u(i, j) * u(i, j) * u(i, j);
    }
  const Field2d ft = assemble_ftilde(u, 0.0, p);
  CHECK(max_abs(ft - f) <= 1e-12 * max_abs(f));
}

TEST_CASE("gradient pairing converges at second order") {
  // v = sin r cos x, w = cos r + sin x.
  auto error = [](int radial, int angular) {
    const Grid2d g = small_grid(radial, angular);
    const auto rows = static_cast<Eigen::Index>(g.radial.size());
    Field2d v(rows, angular), w(rows, angular), exact(rows, angular);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (int l = 0; l < angular; ++l) {
        const double r = g.radial.r(static_cast<std::size_t>(i));
        const double x = g.x(l);
        v(i, l) = std::sin(r) * std::cos(x);
        w(i, l) = std::cos(r) + std::sin(x);
        exact(i, l) = std::exp(2 * r) * (-std::cos(r) * std::sin(r) * std::cos(x) - std::sin(r) * std::sin(x) * std::cos(x));
      }
    return max_abs(gradient_pairing(v, w, g) - exact) / max_abs(exact);
  };
  const double coarse = error(65, 32);
  const double fine = error(129, 64);
  CHECK(fine < coarse);
  CHECK(std::log2(coarse / fine) >= 1.8);
}

TEST_CASE("Ginzburg-Landau without diffusion approaches 1") {
  QuasilinearProblem p;
  p.grid = small_grid(16, 8);
  p.a = Diffusivity("1", 0.0);
  p.f = nonlinearity_preset("gl");
  p.f_name = "gl";
  p.initial = initial_preset(p.grid, "uniform", 0.1);
  p.T = 10.0;
  p.steps = 2000;
  const QuasilinearSolution s = solve_quasilinear(p);
  REQUIRE(s.completed);
  const Field2d ones = Field2d::Ones(s.u.back().rows(), s.u.back().cols());
  CHECK(max_abs(s.u.back() - ones) < 1e-3);
}

TEST_CASE("energy decays with f = g = 0") {
  QuasilinearProblem p;
  p.grid = small_grid();
  p.a = Diffusivity("1+s^2");
  p.initial = initial_preset(p.grid, "bump", 1.0);
  p.T = 0.05;
  p.steps = 25;
  const QuasilinearSolution s = solve_quasilinear(p);
  REQUIRE(s.completed);
  for (std::size_t m = 1; m < s.energies.size(); ++m) CHECK(s.energies[m] <= s.energies[m - 1]);
}

TEST_CASE("a = 1 reduction matches the heat solver") {
  QuasilinearProblem p;
  p.grid = small_grid();
  p.initial = initial_preset(p.grid, "bump", 1.0);
  p.T = 0.05;
  p.steps = 20;
  const auto diffs = heat_equivalence(p);
  REQUIRE(diffs.size() == 20);
  CHECK(*std::max_element(diffs.begin(), diffs.end()) <= 1e-8);
}

TEST_CASE("blow-up ends in a partial result with a diagnosis") {
  QuasilinearProblem p;
  p.grid = small_grid(16, 8);
  p.a = Diffusivity("1", 0.0);
  p.f = nonlinearity_preset("power", 3.0);
  p.f_name = "power";
  p.initial = initial_preset(p.grid, "uniform", 10.0);
  p.T = 1.0;
  p.steps = 10;
  QuasilinearSolution s;
  CHECK_NOTHROW(s = solve_quasilinear(p));
  CHECK_FALSE(s.completed);
  CHECK(s.final_time < p.T);
  CHECK_FALSE(s.diagnosis.empty());
}
