#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "conecalc/calculus.hpp"
#include "conecalc/error.hpp"
#include "conecalc/symbols.hpp"

using namespace conecalc;

namespace {

FuchsOperator laplacian(const CrossSectionSpectrum& s, double shift = 0.0, double gamma = 0.0) {
  return make_cone_laplacian(s, shift, WeightData{gamma, 2.0});
}

CrossSectionSpectrum four_dim() { return CrossSectionSpectrum(4, {{0.0, 1}, {-4.0, 5}, {-10.0, 14}}); }

bool has_root(const std::vector<IndicialRoot>& roots, cplx z, std::size_t mode, int order) {
  return std::any_of(roots.begin(), roots.end(), [&](const IndicialRoot& r) {
    return std::abs(r.z - z) < 1e-10 && r.mode == mode && r.order == order;
  });
}

}  // namespace

TEST_CASE("conormal polynomial of the cone Laplacian") {
  const FuchsOperator circle = laplacian(CrossSectionSpectrum::circle(4));
  for (std::size_t k = 0; k <= 4; ++k) {
    const auto c = conormal_polynomial(circle, k);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == doctest::Approx(static_cast<double>(k * k)));
    CHECK(c[1] == 0.0);
    CHECK(c[2] == -1.0);
  }
  const auto c4 = conormal_polynomial(laplacian(four_dim()), 0);
  CHECK(c4[0] == 0.0);
  CHECK(c4[1] == 3.0);
  CHECK(c4[2] == -1.0);
}

TEST_CASE("conormal symbol values") {
  const FuchsOperator circle = laplacian(CrossSectionSpectrum::circle(4));
  CHECK(std::abs(conormal_symbol(circle, 2, 1.0) - 3.0) < 1e-14);
  CHECK(std::abs(conormal_symbol(circle, 0, 0.0)) == 0.0);
  CHECK(std::abs(conormal_symbol(laplacian(four_dim()), 0, 3.0)) < 1e-14);
  // the shift does not enter the conormal symbol
  CHECK(std::abs(conormal_symbol(laplacian(CrossSectionSpectrum::circle(4), 5.0), 2, 1.0) - 3.0) < 1e-14);
}

TEST_CASE("indicial roots in a strip") {
  SUBCASE("circle, strip (-2.5, 2.5)") {
    const auto roots = indicial_roots(laplacian(CrossSectionSpectrum::circle(4)), -2.5, 2.5);
    CHECK(roots.size() == 5);
    CHECK(has_root(roots, 0.0, 0, 2));
    CHECK(has_root(roots, -1.0, 1, 1));
    CHECK(has_root(roots, 1.0, 1, 1));
    CHECK(has_root(roots, -2.0, 2, 1));
    CHECK(has_root(roots, 2.0, 2, 1));
    // ordered by mode, then real part
    for (std::size_t i = 1; i < roots.size(); ++i)
      CHECK((roots[i - 1].mode < roots[i].mode ||
             (roots[i - 1].mode == roots[i].mode && roots[i - 1].z.real() <= roots[i].z.real())));
  }
  SUBCASE("n = 4 with nu_1 = -4, strip (0.5, 4.5)") {
    const auto roots = indicial_roots(laplacian(four_dim()), 0.5, 4.5);
    CHECK(has_root(roots, 3.0, 0, 1));
    CHECK(has_root(roots, 4.0, 1, 1));
    CHECK(roots.size() == 2);
  }
  SUBCASE("nothing inside (0.1, 2.9)") {
    CHECK(indicial_roots(laplacian(four_dim()), 0.1, 2.9).empty());
  }
  SUBCASE("degenerate polynomial is an error") {
    FuchsOperator zero = laplacian(CrossSectionSpectrum::circle(1));
    for (auto& c : zero.coeff) c = Polynomial2();
    zero.symbol = derived_symbols(2, zero.coeff);
    CHECK_THROWS_AS(indicial_roots(zero, -1.0, 1.0), DomainError);
  }
}

TEST_CASE("root formula for every mode") {
  for (const auto& spec : {CrossSectionSpectrum::circle(16), four_dim()}) {
    const FuchsOperator op = laplacian(spec);
    const int n = spec.dimension();
    for (const auto& root : all_indicial_roots(op)) {
      const double nu = spec.mode(root.mode).nu;
      const double c = 0.5 * (n - 1);
      const cplx d = std::sqrt(cplx(c * c - nu));
      CHECK(std::min(std::abs(root.z - (c + d)), std::abs(root.z - (c - d))) < 1e-10);
    }
  }
}

TEST_CASE("roots of real operators are closed under conjugation") {
  FuchsOperator op = laplacian(CrossSectionSpectrum::circle(2));
  // -z² + z - 5 + k²: complex pairs for small k
  op.coeff[1] = Polynomial2::constant(1.0);
  op.coeff[0] = Polynomial2::monomial(-1.0, 0, 1) + Polynomial2::constant(-5.0);
  op.symbol = derived_symbols(2, op.coeff);
  const auto roots = all_indicial_roots(op);
  CHECK(std::any_of(roots.begin(), roots.end(), [](const IndicialRoot& r) { return r.z.imag() != 0.0; }));
  for (const auto& r : roots) {
    const bool found = std::any_of(roots.begin(), roots.end(), [&](const IndicialRoot& o) {
      return o.mode == r.mode && std::abs(o.z - std::conj(r.z)) < 1e-10;
    });
    CHECK(found);
  }
}

TEST_CASE("weight line invertibility") {
  const WeightLine four = weight_line_invertible(laplacian(four_dim()), 0.0);
  CHECK(four.invertible);
  CHECK(four.line == doctest::Approx(0.5));
  CHECK(four.margin == doctest::Approx(0.5));
  CHECK_FALSE(weight_line_invertible(laplacian(CrossSectionSpectrum::circle(2)), -1.0).invertible);

  FuchsOperator one = laplacian(CrossSectionSpectrum::circle(1));
  one.coeff = {Polynomial2::constant(1.0), Polynomial2(), Polynomial2()};
  one.symbol = {Polynomial2(), Polynomial2(), Polynomial2::constant(1.0)};
  const WeightLine trivial = weight_line_invertible(one, 0.0);
  CHECK(trivial.invertible);
  CHECK(std::isinf(trivial.margin));
}

TEST_CASE("principal and rescaled symbols") {
  const FuchsOperator op = laplacian(CrossSectionSpectrum::circle(2));
  for (const double tau : {0.3, -1.0, 2.0})
    for (const double nu_hat : {0.0, 0.5, 1.5})
      CHECK(std::abs(symbol_eval(op, SymbolKind::rescaled, 0.0, tau, nu_hat) - (tau * tau + nu_hat * nu_hat)) < 1e-13);
  CHECK(std::abs(symbol_eval(op, SymbolKind::principal, 1.0, 1.0, 0.0) - 1.0) < 1e-14);
  const cplx base = symbol_eval(op, SymbolKind::rescaled, 0.0, 0.6, 0.8);
  CHECK(std::abs(symbol_eval(op, SymbolKind::rescaled, 0.0, 1.2, 1.6) - 4.0 * base) < 1e-13);
  CHECK_THROWS_AS(symbol_eval(op, SymbolKind::rescaled, 0.0, 0.0, 0.0), DomainError);
  // rescaled = lim t^μ principal(t, τ/t)
  const double t = 1e-6;
  CHECK(std::abs(t * t * symbol_eval(op, SymbolKind::principal, t, 0.6 / t, 0.8) - base) < 1e-10);
}

TEST_CASE("ellipticity") {
  SUBCASE("-Delta in the left half plane sector") {
    const auto scan = scan_symbols(laplacian(CrossSectionSpectrum::circle(2)), Sector(pi / 2), 32);
    CHECK(scan.pass);
  }
  SUBCASE("+Delta fails at (1, 0) with value -1") {
    FuchsOperator flipped = laplacian(CrossSectionSpectrum::circle(2));
    for (auto& c : flipped.coeff) c = -1.0 * c;
    flipped.symbol = derived_symbols(2, flipped.coeff);
    CHECK(std::abs(symbol_eval(flipped, SymbolKind::rescaled, 0.0, 1.0, 0.0) + 1.0) < 1e-14);
    const auto scan = scan_symbols(flipped, Sector(pi / 2), 32);
    CHECK_FALSE(scan.pass);
    REQUIRE(scan.failure);
  }
  SUBCASE("1 - Delta with theta = 3 pi / 4") {
    EllipticityOptions options;
    options.resolution = 32;
    options.grid = LogGrid(-8.0, 8.0, 96, GridKind::model_cone);
    const CalculusReport r =
        check_ellipticity(laplacian(CrossSectionSpectrum::circle(2), 1.0), Sector(3 * pi / 4), 0.5, options);
    for (const auto& c : r.checks) CHECK_MESSAGE(c.pass, c.name);
  }
}

TEST_CASE("domain gap dimension") {
  SUBCASE("circle, gamma = 0: double root at 0") {
    const DomainGap gap = domain_gap_dimension(laplacian(CrossSectionSpectrum::circle(4)), 0.0, BoundaryPolicy::open_strip);
    CHECK(gap.dimension == 2);
    CHECK(gap.lower == -1.0);
    CHECK(gap.upper == 1.0);
    CHECK(gap.boundary_roots.size() == 2);
  }
  SUBCASE("strict policy rejects boundary roots") {
    CHECK_THROWS_AS(domain_gap_dimension(laplacian(CrossSectionSpectrum::circle(4)), 0.0, BoundaryPolicy::strict),
                    DomainError);
  }
  SUBCASE("n = 4, gamma = 0: empty strip") {
    CHECK(domain_gap_dimension(laplacian(four_dim()), 0.0).dimension == 0);
  }
  SUBCASE("invariant under mode refinement") {
    const int coarse = domain_gap_dimension(laplacian(CrossSectionSpectrum::circle(2)), 0.2).dimension;
    const int fine = domain_gap_dimension(laplacian(CrossSectionSpectrum::circle(12)), 0.2).dimension;
    CHECK(coarse == fine);
  }
  SUBCASE("trivial conormal symbol has no gap") {
    FuchsOperator one = laplacian(CrossSectionSpectrum::circle(1));
    one.coeff = {Polynomial2::constant(1.0), Polynomial2(), Polynomial2()};
    one.symbol = {Polynomial2(), Polynomial2(), Polynomial2::constant(1.0)};
    CHECK(domain_gap_dimension(one, 0.0).dimension == 0);
  }
  SUBCASE("multiplicities count") {
    // n = 1, gamma = 0.5: strip (-1.5, 0.5) holds 0 (order 2) and -1 (mode 1, multiplicity 2)
    const DomainGap gap = domain_gap_dimension(laplacian(CrossSectionSpectrum::circle(3)), 0.5);
    CHECK(gap.dimension == 4);
  }
}

TEST_CASE("singular functions") {
  const auto fs = singular_functions(laplacian(CrossSectionSpectrum::circle(3)), 0.0, BoundaryPolicy::open_strip);
  REQUIRE(fs.size() == 2);
  CHECK(fs[0].mode == 0);
  CHECK(std::abs(fs[0].exponent) < 1e-12);
  CHECK(fs[0].log_power == 0);
  CHECK(fs[1].log_power == 1);
  CHECK(singular_functions(laplacian(four_dim()), 0.0).empty());

  // -z² + 0.25: simple roots ±1/2
  FuchsOperator simple = laplacian(CrossSectionSpectrum(1, {{-0.25, 1}, {0.0, 1}}));
  const auto one = singular_functions(simple, 0.6);  // strip (-1.6, 0.4)
  int from_mode = 0;
  for (const auto& f : one)
    if (f.mode == 1) {
      ++from_mode;
      CHECK(f.log_power == 0);
      CHECK(std::abs(f.exponent + 0.5) < 1e-12);
    }
  CHECK(from_mode == 1);
}

TEST_CASE("pq condition") {
  CHECK(check_pq_condition(4, 2.0));
  CHECK_FALSE(check_pq_condition(3, 2.0));
  CHECK(check_pq_condition(10, 3.0));
  CHECK_FALSE(check_pq_condition(4, 1.2));  // p' = 6
}

TEST_CASE("cross-section spectrum") {
  const CrossSectionSpectrum s(2, {{-6.0, 5}, {0.0, 1}, {-2.0, 3}, {-2.0, 1}});
  REQUIRE(s.mode_count() == 3);
  CHECK(s.mode(0).nu == 0.0);
  CHECK(s.mode(1).nu == -2.0);
  CHECK(s.mode(1).multiplicity == 4);
  CHECK_THROWS_AS(CrossSectionSpectrum(1, {{-1.0, 1}}), DomainError);
  CHECK_THROWS_AS(CrossSectionSpectrum(1, {{0.0, 1}, {0.5, 1}}), DomainError);
  CHECK(gamma_p(4, 2.0) == 0.0);
  CHECK(gamma_p(1, 4.0) == doctest::Approx(0.5));
}

TEST_CASE("make_cone_laplacian rejects a negative shift") {
  CHECK_THROWS_AS(laplacian(CrossSectionSpectrum::circle(1), -1.0), DomainError);
}
