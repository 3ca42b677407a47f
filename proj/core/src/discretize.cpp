#include "conecalc/discretize.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <string>

#include "conecalc/error.hpp"

namespace conecalc {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

Sparse sparse_difference(std::size_t n, double h) {
  std::vector<Eigen::Triplet<double>> t;
  const double c = 1.0 / (2.0 * h);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.emplace_back(static_cast<int>(i), static_cast<int>(i + 1), c);
    t.emplace_back(static_cast<int>(i + 1), static_cast<int>(i), -c);
  }
  Sparse d(static_cast<int>(n), static_cast<int>(n));
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

Sparse identity(std::size_t n) {
  Sparse i(static_cast<int>(n), static_cast<int>(n));
  i.setIdentity();
  return i;
}

std::vector<cplx> apply_line_derivative(std::span<const cplx> v, double beta, double h) {
  const std::size_t n = v.size();
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx right = i + 1 < n ? v[i + 1] : cplx(0.0);
    const cplx left = i > 0 ? v[i - 1] : cplx(0.0);
    out[i] = (right - left) / (2.0 * h) + beta * v[i];
  }
  return out;
}

double sum_pow(std::span<const cplx> v, double p, double h) {
  double s = 0.0;
  for (const cplx x : v) s += std::pow(std::abs(x), p);
  return h * s;
}

}  // namespace

LogGrid::LogGrid(double r_min, double r_max, int points, GridKind kind)
    : r_min_(r_min), r_max_(r_max), points_(points), kind_(kind) {
  if (points < 8) throw DomainError("grid.points must be >= 8");
  if (!std::isfinite(r_min) || !std::isfinite(r_max) || !(r_max > r_min))
    throw DomainError("grid: need finite rmin < rmax");
  if (kind == GridKind::model_cone && !(r_min < 0.0 && r_max > 0.0))
    throw DomainError("grid: model_cone needs rmin < 0 < rmax");
  if (kind == GridKind::truncated_cone && r_min != 0.0)
    throw DomainError("grid: truncated_cone needs rmin = 0");
}

double LogGrid::t(std::size_t i) const { return std::exp(-r(i)); }

DiscreteOperator DiscreteOperator::from_matrices(std::vector<CMatrix> matrices, int bandwidth) {
  DiscreteOperator op;
  op.bandwidth = bandwidth;
  for (std::size_t j = 0; j < matrices.size(); ++j) {
    if (matrices[j].rows() != matrices[j].cols()) throw DomainError("target matrices must be square");
    if (j > 0 && matrices[j].rows() != matrices[0].rows())
      throw DomainError("target matrices must share one size");
    op.modes.push_back({j, 0.0, 1, std::move(matrices[j])});
  }
  return op;
}

double DiscreteOperator::norm_bound() const {
  double b = 0.0;
  for (const auto& m : modes) b = std::max(b, m.matrix.cwiseAbs().colwise().sum().maxCoeff());
  return b;
}

CMatrix difference_matrix(std::size_t n, double h) {
  return CMatrix(sparse_difference(n, h).cast<cplx>());
}

DiscreteOperator assemble(const FuchsOperator& op, const LogGrid& grid) {
  validate(op);
  const std::size_t n = grid.size();
  if (n < static_cast<std::size_t>(2 * op.mu + 2))
    throw DomainError("grid too coarse for order " + std::to_string(op.mu) + " differences");

  DiscreteOperator out;
  out.grid = grid;
  out.source = op;
  out.weight = op.weight;
  out.dimension = op.dimension();
  out.beta = (op.dimension() + 1) / 2.0 - op.weight.gamma;
  out.mu = op.mu;
  out.bandwidth = op.mu;
  out.shift = op.shift;

  const Sparse b = sparse_difference(n, grid.h()) + (out.beta - op.mu / 2.0) * identity(n);
  std::vector<Sparse> powers{identity(n)};
  for (int k = 1; k <= op.mu; ++k) powers.push_back(Sparse(b * powers.back()));

  RVector half_weight(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) half_weight(static_cast<Eigen::Index>(i)) = std::exp(op.mu * grid.r(i) / 2.0);

  const bool frozen = grid.kind() == GridKind::model_cone;
  for (std::size_t j = 0; j < op.cross_section.mode_count(); ++j) {
    const auto& mode = op.cross_section.mode(j);
    Sparse p(static_cast<int>(n), static_cast<int>(n));
    for (int k = 0; k <= op.mu; ++k) {
      const Polynomial2& alpha = op.coeff[static_cast<std::size_t>(k)];
      if (alpha.is_zero()) continue;
      if (frozen) {
        p += alpha(0.0, mode.nu) * powers[static_cast<std::size_t>(k)];
      } else {
        RVector diag(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) diag(static_cast<Eigen::Index>(i)) = alpha(grid.t(i), mode.nu);
        p += Sparse(diag.asDiagonal() * powers[static_cast<std::size_t>(k)]);
      }
    }
    // w_i w_j is formed first so symmetric P gives a bitwise symmetric M.
    RMatrix dense = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (int k = 0; k < p.outerSize(); ++k)
      for (Sparse::InnerIterator it(p, k); it; ++it)
        dense(it.row(), it.col()) = it.value() * (half_weight(it.row()) * half_weight(it.col()));
    dense.diagonal().array() += op.shift;
    out.modes.push_back({j, mode.nu, mode.multiplicity, dense.cast<cplx>()});
  }
  return out;
}

double symmetry_defect(const CMatrix& m) {
  const double norm = m.norm();
  if (norm == 0.0) return 0.0;
  return (m - m.transpose()).norm() / norm;
}

std::vector<cplx> to_line(std::span<const cplx> u, double gamma, const LogGrid& grid, int n) {
  if (u.size() != grid.size()) throw DomainError("vector length does not match the grid");
  const double beta = (n + 1) / 2.0 - gamma;
  std::vector<cplx> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = std::exp(-beta * grid.r(i)) * u[i];
  return v;
}

std::vector<cplx> from_line(std::span<const cplx> v, double gamma, const LogGrid& grid, int n) {
  if (v.size() != grid.size()) throw DomainError("vector length does not match the grid");
  const double beta = (n + 1) / 2.0 - gamma;
  std::vector<cplx> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::exp(beta * grid.r(i)) * v[i];
  return u;
}

double weighted_norm(std::span<const cplx> u, double nu, const WeightedNormSpec& spec,
                     const LogGrid& grid, int n) {
  if (!(spec.p > 1.0) || !std::isfinite(spec.p)) throw DomainError("weighted norm: p must lie in (1, inf)");
  if (spec.s < 0 || spec.s > 2) throw DomainError("weighted norm: s must be 0, 1 or 2");
  const double beta = (n + 1) / 2.0 - spec.gamma;
  const double h = grid.h();
  const double p = spec.p;
  const double root_nu = std::sqrt(std::abs(nu));
  const std::vector<cplx> v = to_line(u, spec.gamma, grid, n);
  double total = sum_pow(v, p, h);
  if (spec.s >= 1) {
    // t∂_t maps to -(∂_r + β) in the line picture.
    const std::vector<cplx> dv = apply_line_derivative(v, beta, h);
    total += sum_pow(dv, p, h) + std::pow(root_nu, p) * sum_pow(v, p, h);
    if (spec.s == 2) {
      const std::vector<cplx> ddv = apply_line_derivative(dv, beta, h);
      total += sum_pow(ddv, p, h) + std::pow(root_nu, p) * sum_pow(dv, p, h) +
               std::pow(std::abs(nu), p) * sum_pow(v, p, h);
    }
  }
  return std::pow(total, 1.0 / p);
}

int grid_shift(double rho, const LogGrid& grid) {
  if (!(rho > 0.0)) throw DomainError("kappa: rho must be positive");
  const double m = std::log(rho) / grid.h();
  const double rounded = std::round(m);
  if (std::abs(m - rounded) > 1e-9 * std::max(1.0, std::abs(m)))
    throw DomainError("kappa: log(rho) must be an integer multiple of the grid spacing");
  return static_cast<int>(rounded);
}

std::vector<cplx> kappa_apply(std::span<const cplx> u, double rho, const LogGrid& grid, int n) {
  if (u.size() != grid.size()) throw DomainError("vector length does not match the grid");
  const int m = grid_shift(rho, grid);
  const double scale = std::pow(rho, (n + 1) / 2.0);
  const auto size = static_cast<long>(u.size());
  std::vector<cplx> out(u.size(), 0.0);
  // u(ρ t_i) sits at r_i - log ρ, i.e. index i - m.
  for (long i = 0; i < size; ++i) {
    const long src = i - m;
    if (src >= 0 && src < size) out[static_cast<std::size_t>(i)] = scale * u[static_cast<std::size_t>(src)];
  }
  return out;
}

double twisted_homogeneity_defect(const DiscreteOperator& op, std::size_t mode, double rho, cplx lambda) {
  if (!op.grid) throw DomainError("twisted homogeneity needs a grid-based operator");
  const LogGrid& grid = *op.grid;
  const int m = grid_shift(rho, grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double gamma = op.weight.gamma;
  const CMatrix& a = op.modes.at(mode).matrix;

  // κ_ρ and κ_ρ^{-1} in the line picture, column by column.
  const auto line_kappa = [&](double r) {
    CMatrix k = CMatrix::Zero(n, n);
    std::vector<cplx> e(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      std::fill(e.begin(), e.end(), cplx(0.0));
      e[static_cast<std::size_t>(j)] = 1.0;
      const auto image = to_line(kappa_apply(from_line(e, gamma, grid, op.dimension), r, grid, op.dimension),
                                 gamma, grid, op.dimension);
      for (Eigen::Index i = 0; i < n; ++i) k(i, j) = image[static_cast<std::size_t>(i)];
    }
    return k;
  };
  const CMatrix k = line_kappa(rho);
  const CMatrix k_inv = line_kappa(1.0 / rho);
  const CMatrix eye = CMatrix::Identity(n, n);
  const double rho_mu = std::pow(rho, op.mu);
  const CMatrix lhs = rho_mu * lambda * eye - a;
  const CMatrix rhs = rho_mu * (k * (lambda * eye - a) * k_inv);

  const Eigen::Index reach = std::max(op.bandwidth, 1);
  const Eigen::Index lo = reach + std::max<Eigen::Index>(m, 0);
  const Eigen::Index hi = n - reach + std::min<Eigen::Index>(m, 0);
  if (hi - lo < 1) throw DomainError("twisted homogeneity: no interior nodes for this rho");
  const Eigen::Index w = hi - lo;
  const double scale = std::max(a.block(lo, lo, w, w).cwiseAbs().maxCoeff(), std::abs(rho_mu * lambda));
  const double defect = (lhs.block(lo, lo, w, w) - rhs.block(lo, lo, w, w)).cwiseAbs().maxCoeff();
  return scale == 0.0 ? defect : defect / scale;
}

}  // namespace conecalc
