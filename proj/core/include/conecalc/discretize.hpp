#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "conecalc/symbols.hpp"
#include "conecalc/types.hpp"

namespace conecalc {

enum class GridKind { model_cone, truncated_cone };

// Equispaced nodes in r = -log t.
class LogGrid {
 public:
  LogGrid(double r_min, double r_max, int points, GridKind kind);

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  std::size_t size() const { return static_cast<std::size_t>(points_); }
  double h() const { return (r_max_ - r_min_) / (points_ - 1); }
  GridKind kind() const { return kind_; }
  double r(std::size_t i) const { return r_min_ + h() * static_cast<double>(i); }
  double t(std::size_t i) const;

 private:
  double r_min_;
  double r_max_;
  int points_;
  GridKind kind_;
};

struct ModeMatrix {
  std::size_t mode = 0;
  double nu = 0.0;
  int multiplicity = 1;
  CMatrix matrix;
};

// Per-mode matrices of a Fuchs-type operator in the unweighted line picture
// v(r) = e^{-βr} u(e^{-r}).
struct DiscreteOperator {
  std::optional<LogGrid> grid;  // empty for synthetic targets
  WeightData weight;
  int dimension = 1;  // n = dim of the cross-section
  double beta = 0.0;
  int mu = 0;
  int bandwidth = -1;  // half bandwidth; -1 for dense
  double shift = 0.0;
  std::vector<ModeMatrix> modes;
  std::optional<FuchsOperator> source;  // set by assemble

  // Single-purpose targets built from explicit matrices (one mode each).
  static DiscreteOperator from_matrices(std::vector<CMatrix> matrices, int bandwidth = -1);

  std::size_t size() const { return modes.empty() ? 0 : static_cast<std::size_t>(modes.front().matrix.rows()); }
  // max over modes of the induced 1-norm.
  double norm_bound() const;
};

// Antisymmetric central difference for ∂_r with zero extension.
CMatrix difference_matrix(std::size_t n, double h);

// e^{μr/2} [Σ_j α_j (D + (β - μ/2) I)^j] e^{μr/2} + shift·I, which equals
// e^{μr} Σ_j α_j (D + βI)^j in the continuum and keeps self-adjoint operators
// symmetric. Model cones freeze the coefficients at t = 0.
DiscreteOperator assemble(const FuchsOperator& op, const LogGrid& grid);

// ‖M - Mᵀ‖_F / ‖M‖_F (0 for the zero matrix).
double symmetry_defect(const CMatrix& m);

struct WeightedNormSpec {
  int s = 0;
  double gamma = 0.0;
  double p = 2.0;
};

// u in the original picture; nu is the mode eigenvalue.
double weighted_norm(std::span<const cplx> u, double nu, const WeightedNormSpec& spec,
                     const LogGrid& grid, int n);

// v = e^{-βr} u and back.
std::vector<cplx> to_line(std::span<const cplx> u, double gamma, const LogGrid& grid, int n);
std::vector<cplx> from_line(std::span<const cplx> v, double gamma, const LogGrid& grid, int n);

// log ρ / h as an integer; throws for non-grid-aligned ρ.
int grid_shift(double rho, const LogGrid& grid);

// (κ_ρ u)(t) = ρ^{(n+1)/2} u(ρ t) as an index shift, zero-filled.
std::vector<cplx> kappa_apply(std::span<const cplx> u, double rho, const LogGrid& grid, int n);

// max |(ρ^μ λ - M) - ρ^μ κ_ρ (λ - M) κ_ρ^{-1}| / max |M| over interior nodes.
double twisted_homogeneity_defect(const DiscreteOperator& op, std::size_t mode, double rho, cplx lambda);

}  // namespace conecalc
