#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "conecalc/discretize.hpp"
#include "conecalc/geometry.hpp"
#include "conecalc/report.hpp"
#include "conecalc/symbols.hpp"
#include "conecalc/types.hpp"

namespace conecalc {

// Per-mode vectors or matrices, indexed like DiscreteOperator::modes.
using ModeVectors = std::vector<CVector>;
using ModeMatrices = std::vector<CMatrix>;

// (λ - M_j)^{-1} f_j for every mode.
ModeVectors resolvent_apply(const DiscreteOperator& target, cplx lambda, const ModeVectors& f);

// Eigenvalues sorted by real part, then imaginary part. Real symmetric
// positive definite blocks use the relatively accurate path of spd_eigen.
std::vector<cplx> spectrum(const DiscreteOperator& target, std::size_t mode);
std::vector<std::vector<cplx>> spectrum(const DiscreteOperator& target);

// min(0.5, half the smallest nonzero |eigenvalue|).
double default_delta(const DiscreteOperator& target);

struct ContourOptions {
  std::optional<double> delta;
  double theta = pi / 4;
  // All three set: the equispaced rule of contour_nodes. Otherwise planned.
  std::optional<double> s_max;
  std::optional<int> n_ray;
  std::optional<int> n_arc;
  double tol = 1e-9;
};

ContourQuadrature make_contour(const DiscreteOperator& target, std::span<const cplx> zs,
                               const ContourOptions& options);

struct PowerResult {
  std::vector<cplx> zs;
  std::vector<ModeMatrices> powers;  // [z][mode]
  double tail_bound = 0.0;           // contour tail bound times sup |λ|‖R(λ)‖ at the truncation radius
  double truncation_resolvent = 0.0;
  std::size_t node_count = 0;
};

// A^z = (2πi)^{-1} Σ w λ^z (λ - A)^{-1} over the contour nodes, for every z
// (Re z < 0). Real targets use the conjugate symmetry of the node set.
PowerResult dunford_power(const DiscreteOperator& target, std::span<const cplx> zs,
                          const ContourQuadrature& contour);

// V diag(λ^z) V^{-1} from an eigendecomposition.
std::vector<ModeMatrices> power_oracle(const DiscreteOperator& target, std::span<const cplx> zs);

struct Projection {
  ModeMatrices e0;
  double idempotency_defect = 0.0;  // max over modes of ‖E₀² - E₀‖_F
};
// (2πi)^{-1} ∮_{|λ|=δ} (λ - A)^{-1} dλ by the periodic trapezoid rule.
Projection spectral_projection_e0(const DiscreteOperator& target, double delta, int n_arc = 128);

// A^{iy} = A^{-1+iy} A for every y.
std::vector<ModeMatrices> imaginary_powers(const DiscreteOperator& target, std::span<const double> ys,
                                           const ContourQuadrature& contour);

// Diagonal similarity taking line-picture matrices at weight γ to weight γ':
// M' = E M E^{-1}, E = diag(e^{(γ' - γ) r}).
CMatrix reweight(const CMatrix& m, const LogGrid& grid, double gamma, double gamma_new);

// Norm of a per-mode operator: max over modes. p = 2 is exact (SVD or
// Lanczos); other p give the dual power lower bound.
double operator_norm(const DiscreteOperator& target, const ModeMatrices& m, double p, std::uint64_t seed);

struct ResolventScanOptions {
  std::vector<double> radii;
  double p = 2.0;
  std::uint64_t seed = 0;
  double trend_tolerance = 1e-9;
};
// Default radii 10^{k/2}, k = -2..16.
std::vector<double> default_radii();

// |λ|·‖(λ - A)^{-1}‖ on arg λ = ±theta and on the negative axis; theta ∈ (0, π].
// The trend check uses the sup over the rays at each radius.
CalculusReport resolvent_norm_scan(const DiscreteOperator& target, double theta, const ResolventScanOptions& options);

struct BipOptions {
  double y_max = 10.0;
  int steps = 21;
  std::vector<double> ps{2.0};
  ContourOptions contour = [] {
    ContourOptions c;
    c.theta = pi / 8;
    return c;
  }();
  std::uint64_t seed = 0;
  bool refine = true;  // rerun at N/2 when the target carries its source operator
  double unimodularity_tol = 1e-6;
};
// Table "bip_scan": y, norm, e_theta_bound = e^{-θ|y|}‖A^{iy}‖, ratio = value
// at N over value at N/2. Table "rectangle": Re z = -0.1 samples of A^z.
CalculusReport bip_scan(const DiscreteOperator& target, const Sector& sector, const BipOptions& options);

enum class HardyTail { lower, upper };

struct LogSamples {
  double x_min = 0.0;  // x = log t
  double h = 0.0;
  std::vector<double> g;
};
LogSamples sample_log_grid(const std::function<double(double)>& g, double x_min, double x_max, int points);

struct HardyValue {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;  // (p/r)^p
  double bound = 0.0;     // constant · rhs
  bool pass = false;
};
// Trapezoid in log coordinates of (hardy1) for the lower tail ∫_0^t g and
// (hardy2) for the upper tail ∫_t^∞ g.
HardyValue hardy_check(const LogSamples& g, double p, double r, HardyTail tail);

// The documented families: 1_{(0,1]}, t^{1/2}, t, t² on (0,1] and e^{-t} for
// p ∈ {1.5, 2, 3}, r ∈ {0.5, 1, 2}, both tails, skipping infinite right sides.
CalculusReport hardy_suite(int points_per_unit = 128);

struct EllipticityOptions {
  int resolution = 64;
  std::optional<LogGrid> grid;  // model-cone grid for (E2); defaults to [-12, 12], 256 points
  double zero_radius = 1e-8;    // eigenvalues below this modulus are ignored by (E2)
};
CalculusReport check_ellipticity(const FuchsOperator& op, const Sector& sector, double gamma,
                                 const EllipticityOptions& options);

}  // namespace conecalc
