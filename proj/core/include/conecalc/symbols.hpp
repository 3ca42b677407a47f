#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "conecalc/expression.hpp"
#include "conecalc/geometry.hpp"
#include "conecalc/types.hpp"

namespace conecalc {

struct ModeEigenvalue {
  double nu = 0.0;  // eigenvalue of the cross-section Laplacian, <= 0
  int multiplicity = 1;
  friend bool operator==(const ModeEigenvalue&, const ModeEigenvalue&) = default;
};

// Spectral data of the cross-section: distinct eigenvalues 0 = ν_0 > ν_1 > ...
class CrossSectionSpectrum {
 public:
  CrossSectionSpectrum(int n, std::vector<ModeEigenvalue> modes);

  // Unit circle (n = 1): ν_k = -k² for k = 0..cutoff, multiplicity 2 for k > 0.
  static CrossSectionSpectrum circle(int cutoff);

  int dimension() const { return n_; }
  const std::vector<ModeEigenvalue>& modes() const { return modes_; }
  std::size_t mode_count() const { return modes_.size(); }
  const ModeEigenvalue& mode(std::size_t j) const { return modes_.at(j); }

 private:
  int n_;
  std::vector<ModeEigenvalue> modes_;
};

struct WeightData {
  double gamma = 0.0;
  double p = 2.0;
};

// (n+1)(1/2 - 1/p): the weight identifying H^{0,γ_p}_p with L_p of the cone.
double gamma_p(int n, double p);

// t^{-μ} Σ_j α_j(t; ν)(-t∂_t)^j in mode-diagonal form, plus shift·I.
struct FuchsOperator {
  int mu = 2;
  WeightData weight;
  CrossSectionSpectrum cross_section = CrossSectionSpectrum::circle(0);
  std::vector<Polynomial2> coeff;   // α_j(t, ν), j = 0..μ
  std::vector<Polynomial2> symbol;  // s_j(t, ν̂), j = 0..μ
  double shift = 0.0;

  int dimension() const { return cross_section.dimension(); }
};

// Principal-symbol polynomials induced by α: the ν^l terms with 2l = μ - j,
// with ν replaced by -ν̂².
std::vector<Polynomial2> derived_symbols(int mu, const std::vector<Polynomial2>& coeff);

// Checks table sizes and evaluability; throws DomainError.
void validate(const FuchsOperator& op);

// c0 - Δ on the cone over the given cross-section.
FuchsOperator make_cone_laplacian(const CrossSectionSpectrum& spectrum, double shift,
                                  WeightData weight);

// Coefficients c_k of Σ α_k(0; ν_j) z^k, low order first.
std::vector<double> conormal_polynomial(const FuchsOperator& op, std::size_t mode);
cplx conormal_symbol(const FuchsOperator& op, std::size_t mode, cplx z);

struct IndicialRoot {
  cplx z;
  std::size_t mode = 0;
  int order = 1;
};

// Roots of a real polynomial with zero orders (derivative test, tol 1e-8).
std::vector<IndicialRoot> polynomial_roots(const std::vector<double>& coeffs, std::size_t mode);

// All roots of every mode polynomial (no strip filter), ordered by mode, Re, Im.
std::vector<IndicialRoot> all_indicial_roots(const FuchsOperator& op);
// Roots with lower < Re z < upper.
std::vector<IndicialRoot> indicial_roots(const FuchsOperator& op, double lower, double upper);

struct WeightLine {
  bool invertible = true;
  double line = 0.0;  // Re z = (n+1)/2 - γ - μ
  double margin = std::numeric_limits<double>::infinity();
};
WeightLine weight_line_invertible(const FuchsOperator& op, double gamma);

enum class SymbolKind { principal, rescaled };
cplx symbol_eval(const FuchsOperator& op, SymbolKind kind, double t, double tau, double nu_hat);

struct SymbolScan {
  bool pass = true;
  std::size_t samples = 0;
  std::optional<std::string> failure;  // first offending sample, human readable
  double angular_margin = std::numeric_limits<double>::infinity();  // min of θ - |arg value|
};
// Samples both symbols on τ² + ν̂² = 1 (and a t-grid for the principal symbol)
// and fails if any value lies in the sector.
SymbolScan scan_symbols(const FuchsOperator& op, const Sector& sector, int resolution);

enum class BoundaryPolicy { strict, open_strip };

struct DomainGap {
  int dimension = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<IndicialRoot> roots;           // strictly inside, with orders
  std::vector<IndicialRoot> boundary_roots;  // on Re z = lower or upper
  int constant_strip_dimension = 0;          // count over -2 < Re z - (n+1)/2 + γ < 0
};
DomainGap domain_gap_dimension(const FuchsOperator& op, double gamma,
                               BoundaryPolicy policy = BoundaryPolicy::strict);

struct SingularFunction {
  std::size_t mode = 0;
  int component = 0;  // copy index within the mode multiplicity
  cplx exponent;      // p_j in t^{-p_j} (log t)^k
  int log_power = 0;
};
std::vector<SingularFunction> singular_functions(const FuchsOperator& op, double gamma,
                                                 BoundaryPolicy policy = BoundaryPolicy::strict);

// 2 max(p, p') - 1 < n.
bool check_pq_condition(int n, double p);

}  // namespace conecalc
