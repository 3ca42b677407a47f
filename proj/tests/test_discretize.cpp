#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "conecalc/calculus.hpp"
#include "conecalc/discretize.hpp"
#include "conecalc/error.hpp"
#include "conecalc/linalg.hpp"
#include "conecalc/rng.hpp"

using namespace conecalc;

namespace {

FuchsOperator laplacian(const CrossSectionSpectrum& s, double shift = 0.0, double gamma = 0.0) {
  return make_cone_laplacian(s, shift, WeightData{gamma, 2.0});
}

std::vector<cplx> interior_random(std::size_t n, std::size_t margin, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> u(n, 0.0);
  for (std::size_t i = margin; i + margin < n; ++i) u[i] = cplx(rng.normal(), rng.normal());
  return u;
}

}  // namespace

TEST_CASE("assembly matches the exact 8x8 fixture") {
  std::ifstream in(std::string(CONECALC_FIXTURES) + "/assembly_n8.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  struct Case {
    int n = 1;
    double nu = 0.0, gamma = 0.0, shift = 0.0;
    RMatrix m = RMatrix::Zero(8, 8);
  };
  std::map<int, Case> cases;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    REQUIRE(f.size() == 8);
    Case& c = cases[std::stoi(f[0])];
    c.n = std::stoi(f[1]);
    c.nu = std::stod(f[2]);
    c.gamma = std::stod(f[3]);
    c.shift = std::stod(f[4]);
    c.m(std::stoi(f[5]), std::stoi(f[6])) = std::stod(f[7]);
  }
  REQUIRE(cases.size() == 3);
  const LogGrid grid(-3.5, 3.5, 8, GridKind::model_cone);
  for (const auto& [id, c] : cases) {
    CAPTURE(id);
    const CrossSectionSpectrum spec(c.n, c.nu == 0.0 ? std::vector<ModeEigenvalue>{{0.0, 1}}
                                                     : std::vector<ModeEigenvalue>{{0.0, 1}, {c.nu, 1}});
    const DiscreteOperator op = assemble(laplacian(spec, c.shift, c.gamma), grid);
    const CMatrix& m = op.modes.back().matrix;
    const double scale = c.m.cwiseAbs().maxCoeff();
    CHECK((m.real() - c.m).cwiseAbs().maxCoeff() <= 1e-13 * scale);
    CHECK(m.imag().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero operator assembles to zero matrices") {
  FuchsOperator zero = laplacian(CrossSectionSpectrum::circle(2));
  for (auto& c : zero.coeff) c = Polynomial2();
  zero.symbol = {Polynomial2(), Polynomial2(), Polynomial2::constant(1.0)};
  const DiscreteOperator op = assemble(zero, LogGrid(-2.0, 2.0, 16, GridKind::model_cone));
  for (const auto& m : op.modes) CHECK(m.matrix.norm() == 0.0);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(LogGrid(-1.0, 1.0, 7, GridKind::model_cone), DomainError);
  CHECK_THROWS_AS(LogGrid(1.0, -1.0, 16, GridKind::model_cone), DomainError);
  CHECK_THROWS_AS(LogGrid(0.5, 2.0, 16, GridKind::truncated_cone), DomainError);
}

TEST_CASE("symmetry of the Laplacian at gamma = 0") {
  const DiscreteOperator op = assemble(laplacian(CrossSectionSpectrum::circle(4), 1.0),
                                       LogGrid(-12.0, 12.0, 256, GridKind::model_cone));
  for (const auto& m : op.modes) CHECK(symmetry_defect(m.matrix) <= 1e-12);
}

TEST_CASE("model-cone spectrum of -Delta is real and nonnegative") {
  const DiscreteOperator op = assemble(laplacian(CrossSectionSpectrum::circle(3)),
                                       LogGrid(-8.0, 8.0, 128, GridKind::model_cone));
  const auto spectra = spectrum(op);
  for (std::size_t j = 0; j < op.modes.size(); ++j) {
    const double scale = op.modes[j].matrix.cwiseAbs().colwise().sum().maxCoeff();
    for (const cplx v : spectra[j]) {
      CHECK(v.real() >= -1e-8 * scale);
      CHECK(std::abs(v.imag()) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("weight conjugation: lowest truncated-cone eigenvalues agree better as N grows") {
  // Lowest eigenvalues from the inverse, which keeps them accurate on graded matrices.
  auto lowest = [](double gamma, int points) {
    const DiscreteOperator op = assemble(laplacian(CrossSectionSpectrum::circle(1), 0.0, gamma),
                                         LogGrid(0.0, 8.0, points, GridKind::truncated_cone));
    const CMatrix& m = op.modes[1].matrix;
    const CMatrix inv = BandedLU(m, lower_bandwidth(m), upper_bandwidth(m)).inverse();
    Eigen::ComplexEigenSolver<CMatrix> solver(inv, false);
    cplx top = 0.0;
    for (const cplx v : solver.eigenvalues())
      if (std::abs(v) > std::abs(top)) top = v;
    return 1.0 / top;
  };
  const double d256 = std::abs(lowest(0.0, 256) - lowest(0.25, 256));
  const double d512 = std::abs(lowest(0.0, 512) - lowest(0.25, 512));
  CHECK(d512 < d256);
}

TEST_CASE("weighted norms") {
  const LogGrid grid(0.0, 10.0, 4096, GridKind::truncated_cone);
  const std::vector<cplx> zero(grid.size(), 0.0);
  CHECK(weighted_norm(zero, 0.0, {0, 0.0, 2.0}, grid, 1) == 0.0);

  SUBCASE("u = t^a closed form (1/(2a + 2))^{1/2}") {
    for (const double a : {0.0, 1.0}) {
      std::vector<cplx> u(grid.size());
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::pow(grid.t(i), a);
      CHECK(std::abs(weighted_norm(u, 0.0, {0, 0.0, 2.0}, grid, 1) - std::sqrt(1.0 / (2 * a + 2))) < grid.h());
    }
  }
  SUBCASE("homogeneity") {
    const auto u = interior_random(grid.size(), 4, 3);
    std::vector<cplx> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = 3.0 * u[i];
    for (const int s : {0, 1, 2})
      CHECK(weighted_norm(v, -1.0, {s, 0.3, 3.0}, grid, 1) ==
            doctest::Approx(3.0 * weighted_norm(u, -1.0, {s, 0.3, 3.0}, grid, 1)).epsilon(1e-13));
  }
  SUBCASE("s = 0 at gamma_p is the h^{1/p}-scaled plain p-norm of the line image") {
    const LogGrid g(-5.0, 5.0, 201, GridKind::model_cone);
    const auto u = interior_random(g.size(), 0, 5);
    for (const double p : {1.5, 2.0, 4.0}) {
      const double gp = gamma_p(1, p);
      const auto v = to_line(u, gp, g, 1);
      double plain = 0.0;
      for (const cplx x : v) plain += std::pow(std::abs(x), p);
      CHECK(weighted_norm(u, 0.0, {0, gp, p}, g, 1) ==
            doctest::Approx(std::pow(g.h(), 1.0 / p) * std::pow(plain, 1.0 / p)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(weighted_norm(zero, 0.0, {0, 0.0, 1.0}, grid, 1), DomainError);
  CHECK_THROWS_AS(weighted_norm(zero, 0.0, {3, 0.0, 2.0}, grid, 1), DomainError);
}

TEST_CASE("kappa") {
  const LogGrid grid(-6.0, 6.0, 121, GridKind::model_cone);
  const double h = grid.h();
  const auto u = interior_random(grid.size(), 12, 11);

  SUBCASE("rho = 1 is the identity") {
    const auto v = kappa_apply(u, 1.0, grid, 1);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(v[i] == u[i]);
  }
  SUBCASE("isometry at gamma_2 = 0") {
    for (const int k : {1, 4, -3}) {
      const auto v = kappa_apply(u, std::exp(k * h), grid, 1);
      CHECK(weighted_norm(v, 0.0, {0, 0.0, 2.0}, grid, 1) ==
            doctest::Approx(weighted_norm(u, 0.0, {0, 0.0, 2.0}, grid, 1)).epsilon(1e-13));
    }
  }
  SUBCASE("group law") {
    const auto ab = kappa_apply(kappa_apply(u, std::exp(2 * h), grid, 1), std::exp(3 * h), grid, 1);
    const auto c = kappa_apply(u, std::exp(5 * h), grid, 1);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(ab[i] - c[i]) <= 1e-13 * std::abs(c[i]) + 1e-300);
  }
  SUBCASE("non-aligned rho is rejected") {
    CHECK_THROWS_AS(kappa_apply(u, std::exp(0.37 * h), grid, 1), DomainError);
  }
}

TEST_CASE("twisted homogeneity on interior nodes") {
  const DiscreteOperator op = assemble(laplacian(CrossSectionSpectrum::circle(3)),
                                       LogGrid(-10.0, 10.0, 201, GridKind::model_cone));
  const double h = op.grid->h();
  for (const double rho : {std::exp(h), std::exp(4 * h)})
    for (std::size_t j = 0; j < op.modes.size(); ++j)
      for (const cplx lambda : {cplx(-1.0, 0.0), cplx(2.0, 3.0)})
        CHECK(twisted_homogeneity_defect(op, j, rho, lambda) <= 1e-10);
}

TEST_CASE("line picture round trip") {
  const LogGrid grid(-3.0, 3.0, 61, GridKind::model_cone);
  const auto u = interior_random(grid.size(), 0, 2);
  const auto back = from_line(to_line(u, 0.4, grid, 2), 0.4, grid, 2);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(back[i] - u[i]) <= 1e-14 * std::abs(u[i]));
}

TEST_CASE("difference matrix is antisymmetric") {
  const CMatrix d = difference_matrix(10, 0.25);
  CHECK((d + d.transpose()).norm() == 0.0);
  CHECK(d(0, 1) == cplx(2.0, 0.0));
}
