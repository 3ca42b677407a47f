#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "conecalc/calculus.hpp"
#include "conecalc/discretize.hpp"
#include "conecalc/expression.hpp"
#include "conecalc/report.hpp"
#include "conecalc/types.hpp"

namespace conecalc {

enum class Stepper { backward_euler, bdf2 };

std::string to_string(Stepper s);
Stepper parse_stepper(const std::string& name);

// u' + Au = f, u(0) = u0 on [0, T] with A the target's mode matrices.
struct CauchyProblem {
  DiscreteOperator target;
  double T = 1.0;
  std::function<ModeVectors(double)> forcing;  // empty: f ≡ 0
  ModeVectors initial;                         // empty: u0 = 0
  double r_time = 2.0;
  Stepper stepper = Stepper::bdf2;
  int steps = 100;
  bool check_spectrum = true;
};

struct HeatSolution {
  std::vector<double> times;     // steps + 1 entries, times[0] = 0
  std::vector<ModeVectors> u;    // u[m] at times[m]
  double du_norm = 0.0;          // discrete L_r(0,T; ℓ2) norm of u'
  double au_norm = 0.0;          // same for Au
  double f_norm = 0.0;           // same for f
  double min_real_eigenvalue = 0.0;
};

// Spatial norm used by the heat solver: ℓ2 over nodes and modes, weighted by
// the grid spacing and the mode multiplicity.
double mode_norm(const DiscreteOperator& target, const ModeVectors& v);

// Backward Euler or BDF2 (started by one backward Euler step) with one
// factorization per mode.
HeatSolution solve_heat(const CauchyProblem& problem);

// (‖u'‖ + ‖Au‖) / ‖f‖ in L_r(0,T; ℓ2); nullopt when f ≡ 0.
std::optional<double> max_reg_ratio(const HeatSolution& solution);

// Sweeps f(τ) = sin(ωτ)φ with a seeded random profile φ over the frequencies.
// Passes iff max R < 10 median R.
CalculusReport max_reg_diagnostic(const CauchyProblem& problem, const std::vector<double>& frequencies,
                                  std::uint64_t seed);

// a(x)a(y)/a(0) on ℝ² ≅ ℂ, times a scale factor (0 switches diffusion off).
class Diffusivity {
 public:
  Diffusivity(const std::string& a, double scale = 1.0, double range = 1e6);

  double value(cplx s) const;
  // (∂₁a, ∂₂a) at s.
  std::pair<double, double> gradient(cplx s) const;
  double scale() const { return scale_; }
  const std::string& text() const { return a_.text(); }
  bool is_constant() const { return constant_; }

 private:
  void check_range(cplx s) const;
  Expression a_;
  double scale_;
  double range_;
  double a0_;
  bool constant_;
};

using Nonlinearity = std::function<cplx(double tau, cplx u)>;
// "none", "gl" (u - u³) or "power" (u|u|^{α-1}).
Nonlinearity nonlinearity_preset(const std::string& name, double alpha = 2.0);

// Log-radial × angular grid on the truncated cone t ∈ [e^{-r_max}, 1] over S¹.
struct Grid2d {
  LogGrid radial;
  int angular = 64;

  double hx() const { return 2.0 * pi / angular; }
  double x(int l) const { return hx() * l; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(radial.size()) * angular; }
};

// Rows are radial nodes, columns angular nodes.
using Field2d = CMatrix;

struct QuasilinearProblem {
  Grid2d grid{LogGrid(0.0, 5.0, 128, GridKind::truncated_cone), 64};
  Diffusivity a{"1"};
  double c = 1.0;
  Nonlinearity f = nonlinearity_preset("none");
  std::string f_name = "none";
  cplx g = 0.0;
  Field2d initial;
  double T = 0.1;
  int steps = 100;
  double a_min = 1e-8;
  double q = 4.0;  // time integrability exponent of the abstract theorem
  double growth_limit = 10.0;
  int max_halvings = 20;
  int lipschitz_samples = 8;
  std::uint64_t seed = 0;
  int snapshot_stride = 0;  // 0: no snapshots
};

// "bump": value·ψ((t - 1/2)/0.35)(1 + cos(x)/2) with ψ(ρ) = e^{1 - 1/(1-ρ²)};
// "uniform": the constant value.
Field2d initial_preset(const Grid2d& grid, const std::string& name, double value);

// f(τ,u) - ∂₁a(t^c u)⟨grad(t^c Re u), grad u⟩ - i ∂₂a(t^c u)⟨grad(t^c Im u), grad u⟩
// with ⟨grad v, grad w⟩ = ∂_t v ∂_t w + t^{-2} ∂_x v ∂_x w = e^{2r}(∂_r v ∂_r w + ∂_x v ∂_x w).
Field2d assemble_ftilde(const Field2d& u, double tau, const QuasilinearProblem& problem);

// The gradient pairing alone: central differences in r (second-order one-sided
// at the ends) and periodic central differences in x.
Field2d gradient_pairing(const Field2d& v, const Field2d& w, const Grid2d& grid);

// −Δ on the grid in the line picture v = e^{-r}u (n = 1, γ = 0), real and
// symmetric.
Eigen::SparseMatrix<double> cone_laplacian_2d(const Grid2d& grid);

struct QuasilinearSolution {
  std::vector<double> times;
  std::vector<Field2d> u;           // accepted steps, u[0] = initial
  std::vector<double> residuals;    // ‖(u^{m+1} - u^m)/Δτ‖ per accepted step
  std::vector<double> energies;     // ‖u^m‖ in L2 of the cone
  double final_time = 0.0;          // attained T₁ ≤ T
  bool completed = false;
  int halvings = 0;
  std::string diagnosis;
  CalculusReport report;
};

// u^{m+1} = u^m + Δτ[a(t^c u^m) Δ_h u^{m+1} + f̃(τ_m, u^m) + g] with step
// halving when the step residual grows by more than growth_limit.
QuasilinearSolution solve_quasilinear(const QuasilinearProblem& problem);

// a ≡ 1, f = g = 0 against solve_heat (backward Euler) with the discrete
// angular modes as cross-section spectrum. Returns the per-step max difference
// relative to max |u0|.
std::vector<double> heat_equivalence(const QuasilinearProblem& problem);

}  // namespace conecalc
