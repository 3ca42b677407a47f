#include "conecalc/calculus.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "conecalc/error.hpp"
#include "conecalc/linalg.hpp"
#include "conecalc/parallel.hpp"

namespace conecalc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_complex(cplx z) {
  std::ostringstream out;
  out.precision(10);
  out << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return out.str();
}

void require_modes(const DiscreteOperator& target) {
  if (target.modes.empty()) throw DomainError("target has no modes");
}

bool is_real(const CMatrix& m) { return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0; }

bool all_real(const DiscreteOperator& target) {
  return std::all_of(target.modes.begin(), target.modes.end(), [](const ModeMatrix& m) { return is_real(m.matrix); });
}

std::vector<cplx> block_eigenvalues(const CMatrix& block) {
  if (is_real_symmetric(block, 0.0)) {
    const RMatrix real = block.real();
    try {
      const SymmetricEigen e = spd_eigen(real);
      return {e.values.begin(), e.values.end()};
    } catch (const NumericalError&) {
      // not positive definite: fall through to the symmetric QR path
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(real, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    return {solver.eigenvalues().begin(), solver.eigenvalues().end()};
  }
  Eigen::ComplexEigenSolver<CMatrix> solver(block, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return {solver.eigenvalues().begin(), solver.eigenvalues().end()};
}

double zero_tolerance(const DiscreteOperator& target) { return 1e-12 * std::max(1.0, target.norm_bound()); }

// Every eigenvalue must lie strictly inside the region enclosed by the
// contour, or be numerically zero (deflated into the δ-disk).
void validate_contour(const DiscreteOperator& target, const ContourQuadrature& contour) {
  const double zero = zero_tolerance(target);
  const auto spectra = spectrum(target);
  for (std::size_t j = 0; j < spectra.size(); ++j)
    for (const cplx lambda : spectra[j]) {
      const double modulus = std::abs(lambda);
      if (modulus <= zero) continue;
      const double arg = std::abs(principal_arg(lambda));
      if (modulus <= contour.delta * (1.0 + 1e-10))
        throw NumericalError("eigenvalue " + format_complex(lambda) + " of mode " + std::to_string(j) +
                             " lies in the delta-disk; choose delta below the smallest nonzero |eigenvalue|");
      if (arg >= contour.theta * (1.0 - 1e-10))
        throw NumericalError("eigenvalue " + format_complex(lambda) + " of mode " + std::to_string(j) +
                             " is not enclosed by the contour (|arg| >= theta)");
    }
}

std::size_t chunk_size(Eigen::Index block_size) {
  const auto entries = static_cast<std::size_t>(block_size * block_size);
  return std::clamp<std::size_t>((std::size_t{1} << 21) / std::max<std::size_t>(entries, 1), 1, 256);
}

constexpr Eigen::Index kExactScanSize = 1024;

double resolvent_two_norm(const ResolventFactor& factor, Eigen::Index n) {
  return two_norm(
      n, [&](CVector& x) { factor.solve(x); }, [&](CVector& x) { factor.solve(x, true); });
}

CMatrix dense_resolvent(const BlockOperator& op, cplx lambda) {
  std::vector<CMatrix> local;
  for (std::size_t b = 0; b < op.blocks().size(); ++b) local.push_back(op.local_resolvent(b, lambda));
  return op.expand(local);
}

}  // namespace

ModeVectors resolvent_apply(const DiscreteOperator& target, cplx lambda, const ModeVectors& f) {
  require_modes(target);
  if (f.size() != target.modes.size()) throw DomainError("resolvent_apply: one vector per mode expected");
  ModeVectors out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const BlockOperator op(target.modes[j].matrix);
    try {
      const ResolventFactor factor(op, lambda);
      out[j] = f[j];
      factor.solve(out[j]);
    } catch (const NumericalError& e) {
      throw NumericalError("resolvent at lambda = " + format_complex(lambda) + ", mode " + std::to_string(j) +
                           ": " + e.what());
    }
  }
  return out;
}

std::vector<cplx> spectrum(const DiscreteOperator& target, std::size_t mode) {
  const CMatrix& m = target.modes.at(mode).matrix;
  std::vector<cplx> values;
  for (const auto& index : decoupled_blocks(m)) {
    const auto part = block_eigenvalues(m(index, index));
    values.insert(values.end(), part.begin(), part.end());
  }
  std::sort(values.begin(), values.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return values;
}

std::vector<std::vector<cplx>> spectrum(const DiscreteOperator& target) {
  std::vector<std::vector<cplx>> out(target.modes.size());
  parallel_for(out.size(), [&](std::size_t j) { out[j] = spectrum(target, j); });
  return out;
}

double default_delta(const DiscreteOperator& target) {
  const double zero = zero_tolerance(target);
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& values : spectrum(target))
    for (const cplx v : values)
      if (std::abs(v) > zero) smallest = std::min(smallest, std::abs(v));
  return std::min(0.5, 0.5 * smallest);
}

ContourQuadrature make_contour(const DiscreteOperator& target, std::span<const cplx> zs,
                               const ContourOptions& options) {
  if (zs.empty()) throw DomainError("contour: no exponents given");
  const double delta = options.delta ? *options.delta : default_delta(target);
  const KeyholeRegion region(delta, options.theta);
  if (options.s_max && options.n_ray && options.n_arc) {
    double re = -std::numeric_limits<double>::infinity();
    for (const cplx z : zs) re = std::max(re, z.real());
    return contour_nodes(region, *options.s_max, *options.n_ray, *options.n_arc, re);
  }
  return plan_contour(region, std::max(target.norm_bound(), delta), zs, options.tol);
}

PowerResult dunford_power(const DiscreteOperator& target, std::span<const cplx> zs,
                          const ContourQuadrature& contour) {
  require_modes(target);
  for (const cplx z : zs)
    if (!(z.real() < 0.0)) throw DomainError("dunford_power needs Re z < 0, got z = " + format_complex(z));
  validate_contour(target, contour);

  const bool fold = all_real(target);
  std::vector<cplx> ext(zs.begin(), zs.end());
  std::vector<std::size_t> conj_index(ext.size());
  if (fold) {
    for (std::size_t e = 0; e < zs.size(); ++e) {
      const cplx c = std::conj(zs[e]);
      const auto it = std::find(ext.begin(), ext.end(), c);
      conj_index[e] = static_cast<std::size_t>(it - ext.begin());
      if (it == ext.end()) ext.push_back(c);
    }
  }

  // With a real target the mirror node contributes -conj(w λ^{z̄} R(λ)), so
  // the lower half of the contour is folded into the conjugate exponents.
  std::vector<cplx> lambdas;
  std::vector<cplx> weights;
  for (const auto& node : contour.nodes) {
    if (!fold) {
      lambdas.push_back(node.lambda);
      weights.push_back(node.weight);
    } else if (node.lambda.imag() > 0.0) {
      lambdas.push_back(node.lambda);
      weights.push_back(node.weight);
    } else if (node.lambda.imag() == 0.0) {
      lambdas.push_back(node.lambda);
      weights.push_back(0.5 * node.weight);
    }
  }
  const auto k_total = static_cast<Eigen::Index>(lambdas.size());
  const auto e_total = static_cast<Eigen::Index>(ext.size());
  CMatrix coefficients(k_total, e_total);
  for (Eigen::Index k = 0; k < k_total; ++k)
    for (Eigen::Index e = 0; e < e_total; ++e)
      coefficients(k, e) = weights[static_cast<std::size_t>(k)] *
                           principal_pow(lambdas[static_cast<std::size_t>(k)], ext[static_cast<std::size_t>(e)]);

  std::vector<BlockOperator> ops;
  ops.reserve(target.modes.size());
  for (const auto& m : target.modes) ops.emplace_back(m.matrix);
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t j = 0; j < ops.size(); ++j)
    for (std::size_t b = 0; b < ops[j].blocks().size(); ++b) tasks.emplace_back(j, b);

  // acc[t] column e holds Σ w λ^{z_e} (λ - T_b)^{-1}, packed as its lower
  // triangle when T_b is complex symmetric (then so is every resolvent).
  std::vector<CMatrix> acc(tasks.size());
  std::vector<char> packed(tasks.size(), 0);
  parallel_for(tasks.size(), [&](std::size_t t) {
    const auto [j, b] = tasks[t];
    const CMatrix& local = ops[j].blocks()[b].local;
    const auto m = local.rows();
    const bool symmetric = local == local.transpose();
    const Eigen::Index rows = symmetric ? m * (m + 1) / 2 : m * m;
    const std::size_t chunk = chunk_size(m);
    CMatrix sum = CMatrix::Zero(rows, e_total);
    CMatrix stack(rows, static_cast<Eigen::Index>(chunk));
    for (Eigen::Index k0 = 0; k0 < k_total; k0 += static_cast<Eigen::Index>(chunk)) {
      const Eigen::Index width = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), k_total - k0);
      for (Eigen::Index k = 0; k < width; ++k) {
        CMatrix r;
        try {
          r = ops[j].local_resolvent(b, lambdas[static_cast<std::size_t>(k0 + k)]);
        } catch (const NumericalError& e) {
          throw NumericalError("contour node collides with the spectrum of mode " + std::to_string(j) + ": " +
                               e.what());
        }
        if (symmetric) {
          Eigen::Index row = 0;
          for (Eigen::Index c = 0; c < m; ++c) {
            stack.col(k).segment(row, m - c) = r.col(c).tail(m - c);
            row += m - c;
          }
        } else {
          stack.col(k) = r.reshaped();
        }
      }
      sum.noalias() += stack.leftCols(width) * coefficients.middleRows(k0, width);
    }
    acc[t] = std::move(sum);
    packed[t] = symmetric ? 1 : 0;
  });

  const auto unpack = [&](std::size_t t, std::size_t m, Eigen::Index e) {
    const auto n = static_cast<Eigen::Index>(m);
    if (!packed[t]) return CMatrix(acc[t].col(e).reshaped(n, n));
    CMatrix out(n, n);
    Eigen::Index row = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
      out.col(c).tail(n - c) = acc[t].col(e).segment(row, n - c);
      out.row(c).tail(n - c - 1) = acc[t].col(e).segment(row + 1, n - c - 1).transpose();
      row += n - c;
    }
    return out;
  };

  const cplx two_pi_i(0.0, 2.0 * pi);
  PowerResult out;
  out.zs.assign(zs.begin(), zs.end());
  out.node_count = contour.nodes.size();
  out.powers.assign(zs.size(), ModeMatrices(target.modes.size()));
  for (std::size_t e = 0; e < zs.size(); ++e) {
    std::size_t t = 0;
    for (std::size_t j = 0; j < ops.size(); ++j) {
      std::vector<CMatrix> local;
      std::vector<CMatrix> local_conj;
      for (std::size_t b = 0; b < ops[j].blocks().size(); ++b, ++t) {
        const auto m = static_cast<std::size_t>(ops[j].blocks()[b].local.rows());
        local.push_back(unpack(t, m, static_cast<Eigen::Index>(e)));
        if (fold) local_conj.push_back(unpack(t, m, static_cast<Eigen::Index>(conj_index[e])));
      }
      CMatrix p = ops[j].expand(local);
      if (fold) p -= ops[j].expand(local_conj).conjugate();
      out.powers[e][j] = p / two_pi_i;
    }
  }

  // Resolvent bound at the truncation radius, used to scale the scalar tail.
  const cplx edge = contour.delta * std::exp(contour.s_max) * std::polar(1.0, contour.theta);
  double bound = 0.0;
  for (const auto& op : ops) {
    const ResolventFactor factor(op, edge);
    bound = std::max(bound, std::abs(edge) * resolvent_two_norm(factor, op.size()));
  }
  out.truncation_resolvent = bound;
  out.tail_bound = contour.tail_bound * bound;
  return out;
}

std::vector<ModeMatrices> power_oracle(const DiscreteOperator& target, std::span<const cplx> zs) {
  require_modes(target);
  std::vector<ModeMatrices> out(zs.size(), ModeMatrices(target.modes.size()));
  for (std::size_t j = 0; j < target.modes.size(); ++j) {
    const CMatrix& a = target.modes[j].matrix;
    for (auto& per_z : out) per_z[j] = CMatrix::Zero(a.rows(), a.cols());
    for (const auto& index : decoupled_blocks(a)) {
      const CMatrix block = a(index, index);
      if (is_real_symmetric(block, 0.0)) {
        SymmetricEigen e;
        try {
          e = spd_eigen(block.real());
        } catch (const NumericalError&) {
          throw NumericalError("power oracle: mode " + std::to_string(j) +
                               " has an eigenvalue on the branch cut (lambda <= 0)");
        }
        const CMatrix v = e.vectors.cast<cplx>();
        for (std::size_t z = 0; z < zs.size(); ++z) {
          CVector d(e.values.size());
          for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = principal_pow(e.values(i), zs[z]);
          out[z][j](index, index) = v * d.asDiagonal() * v.transpose();
        }
        continue;
      }
      Eigen::ComplexEigenSolver<CMatrix> solver(block, true);
      if (solver.info() != Eigen::Success) throw NumericalError("power oracle: eigensolver did not converge");
      const CVector& values = solver.eigenvalues();
      const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
      for (const cplx v : values)
        if (v.real() <= 0.0 && std::abs(v.imag()) <= 1e-14 * scale)
          throw NumericalError("power oracle: eigenvalue " + format_complex(v) + " of mode " + std::to_string(j) +
                               " lies on the branch cut");
      const CMatrix& vectors = solver.eigenvectors();
      const Eigen::JacobiSVD<CMatrix> svd(vectors);
      const auto& s = svd.singularValues();
      const double cond = s(0) / s(s.size() - 1);
      if (!(cond < 1e8))
        throw NumericalError("power oracle: eigenvector condition number " + std::to_string(cond) + " of mode " +
                             std::to_string(j) + " exceeds 1e8");
      const CMatrix inverse = vectors.partialPivLu().inverse();
      for (std::size_t z = 0; z < zs.size(); ++z) {
        CVector d(values.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = principal_pow(values(i), zs[z]);
        out[z][j](index, index) = vectors * d.asDiagonal() * inverse;
      }
    }
  }
  return out;
}

Projection spectral_projection_e0(const DiscreteOperator& target, double delta, int n_arc) {
  require_modes(target);
  if (!(delta > 0.0)) throw DomainError("spectral projection: delta must be positive");
  if (n_arc < 8) throw DomainError("spectral projection: n_arc must be >= 8");
  const auto spectra = spectrum(target);
  for (std::size_t j = 0; j < spectra.size(); ++j)
    for (const cplx v : spectra[j])
      if (std::abs(std::abs(v) - delta) <= 1e-8 * delta)
        throw NumericalError("spectral projection: eigenvalue " + format_complex(v) + " of mode " +
                             std::to_string(j) + " lies on the circle |lambda| = delta");
  Projection out;
  out.e0.resize(target.modes.size());
  parallel_for(target.modes.size(), [&](std::size_t j) {
    const BlockOperator op(target.modes[j].matrix);
    std::vector<CMatrix> local;
    for (std::size_t b = 0; b < op.blocks().size(); ++b) {
      const auto m = op.blocks()[b].local.rows();
      CMatrix sum = CMatrix::Zero(m, m);
      // dλ = iλ dφ, so the trapezoid sum is the mean of λ R(λ).
      for (int k = 0; k < n_arc; ++k) {
        const cplx lambda = std::polar(delta, 2.0 * pi * k / n_arc);
        sum += lambda * op.local_resolvent(b, lambda);
      }
      local.push_back(sum / static_cast<double>(n_arc));
    }
    CMatrix e = op.expand(local);
    if (is_real(target.modes[j].matrix)) e = e.real().cast<cplx>();
    out.e0[j] = std::move(e);
  });
  for (const auto& e : out.e0) out.idempotency_defect = std::max(out.idempotency_defect, (e * e - e).norm());
  return out;
}

std::vector<ModeMatrices> imaginary_powers(const DiscreteOperator& target, std::span<const double> ys,
                                           const ContourQuadrature& contour) {
  std::vector<cplx> zs;
  for (const double y : ys) zs.emplace_back(-1.0, y);
  PowerResult p = dunford_power(target, zs, contour);
  for (auto& per_mode : p.powers)
    for (std::size_t j = 0; j < per_mode.size(); ++j) per_mode[j] = per_mode[j] * target.modes[j].matrix;
  return std::move(p.powers);
}

CMatrix reweight(const CMatrix& m, const LogGrid& grid, double gamma, double gamma_new) {
  if (static_cast<std::size_t>(m.rows()) != grid.size()) throw DomainError("reweight: size does not match grid");
  RVector e(m.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i)
    e(i) = std::exp((gamma_new - gamma) * grid.r(static_cast<std::size_t>(i)));
  return e.asDiagonal() * m * e.cwiseInverse().asDiagonal();
}

double operator_norm(const DiscreteOperator& target, const ModeMatrices& m, double p, std::uint64_t seed) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (p == 2.0) {
      best = std::max(best, two_norm(m[j]));
      continue;
    }
    const CMatrix local =
        target.grid ? reweight(m[j], *target.grid, target.weight.gamma, gamma_p(target.dimension, p)) : m[j];
    best = std::max(best, estimate_p_norm(local, p, seed + j).lower);
  }
  return best;
}

std::vector<double> default_radii() {
  std::vector<double> r;
  for (int k = -2; k <= 16; ++k) r.push_back(std::pow(10.0, k / 2.0));
  return r;
}

CalculusReport resolvent_norm_scan(const DiscreteOperator& target, double theta,
                                   const ResolventScanOptions& options) {
  const auto start = Clock::now();
  require_modes(target);
  if (!(theta > 0.0 && theta <= pi)) throw DomainError("resolvent scan: theta must lie in (0, pi]");
  const std::vector<double> radii = options.radii.empty() ? default_radii() : options.radii;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw DomainError("resolvent scan: radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw DomainError("resolvent scan: radii must be ascending");
  }
  if (!(options.p > 1.0)) throw DomainError("resolvent scan: p must exceed 1");

  std::vector<double> angles{pi};
  if (theta < pi) angles = {theta, -theta, pi};

  std::vector<BlockOperator> ops;
  for (const auto& m : target.modes) ops.emplace_back(m.matrix);

  CalculusReport report;
  report.operation = "resolvent_norm_scan";
  report.parameters = {{"theta", theta}, {"p", options.p}, {"radii", static_cast<std::int64_t>(radii.size())},
                       {"trend_tolerance", options.trend_tolerance}};
  if (options.p != 2.0) report.notes.push_back("p != 2: values are certified lower bounds from dual power iteration");

  Table table{"resolvent_scan", {"radius", "arg", "value"}, {}};
  std::vector<std::vector<double>> values(angles.size(), std::vector<double>(radii.size(), 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> points;
  for (std::size_t a = 0; a < angles.size(); ++a)
    for (std::size_t k = 0; k < radii.size(); ++k) points.emplace_back(a, k);
  parallel_for(points.size(), [&](std::size_t i) {
    const auto [a, k] = points[i];
    const cplx lambda = std::polar(radii[k], angles[a]);
    double best = 0.0;
    for (std::size_t j = 0; j < ops.size(); ++j) {
      try {
        double norm = 0.0;
        if (options.p == 2.0) {
          // Lanczos cannot separate the cluster of singular values near 1 at large radii.
          norm = ops[j].size() <= kExactScanSize ? exact_two_norm(dense_resolvent(ops[j], lambda))
                                                 : resolvent_two_norm(ResolventFactor(ops[j], lambda), ops[j].size());
        } else {
          CMatrix r = dense_resolvent(ops[j], lambda);
          if (target.grid)
            r = reweight(r, *target.grid, target.weight.gamma, gamma_p(target.dimension, options.p));
          norm = estimate_p_norm(r, options.p, options.seed + j).lower;
        }
        best = std::max(best, radii[k] * norm);
      } catch (const NumericalError& e) {
        throw NumericalError("resolvent scan: lambda = " + format_complex(lambda) + " hits the spectrum of mode " +
                             std::to_string(j) + " (" + e.what() + ")");
      }
    }
    values[a][k] = best;
  });

  double sup = 0.0;
  double worst_increase = -std::numeric_limits<double>::infinity();
  const double decade_start = radii.back() / 10.0;
  std::vector<double> per_radius(radii.size(), 0.0);
  for (std::size_t a = 0; a < angles.size(); ++a)
    for (std::size_t k = 0; k < radii.size(); ++k) {
      sup = std::max(sup, values[a][k]);
      per_radius[k] = std::max(per_radius[k], values[a][k]);
      table.rows.push_back({radii[k], angles[a], values[a][k]});
    }
  // The trend is taken on the sup over the rays at each radius.
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (radii[k - 1] >= decade_start * (1.0 - 1e-12))
      worst_increase = std::max(worst_increase, per_radius[k] / per_radius[k - 1] - 1.0);
  if (!std::isfinite(worst_increase)) worst_increase = 0.0;
  report.results = {{"sup", sup}, {"max_relative_increase_last_decade", worst_increase}};
  report.check_flag("sup_finite", std::isfinite(sup));
  report.check_at_most("non_increasing_last_decade", worst_increase, options.trend_tolerance);
  report.tables.push_back(std::move(table));
  report.seconds = elapsed(start);
  return report;
}

namespace {

struct BipMeasure {
  std::vector<std::vector<double>> norms;  // [p][y]
  std::vector<std::vector<double>> rect;   // [p][sample]
  std::size_t nodes = 0;
  double tail_bound = 0.0;
};

BipMeasure measure_bip(const DiscreteOperator& target, const std::vector<double>& ys,
                       const std::vector<cplx>& rect_zs, const BipOptions& options) {
  BipMeasure out;
  std::vector<cplx> zs;
  for (const double y : ys) zs.emplace_back(-1.0, y);
  const ContourQuadrature contour = make_contour(target, zs, options.contour);
  const auto powers = imaginary_powers(target, ys, contour);
  out.nodes = contour.nodes.size();
  out.tail_bound = contour.tail_bound;
  const ContourQuadrature rect_contour = make_contour(target, rect_zs, options.contour);
  const PowerResult rect = dunford_power(target, rect_zs, rect_contour);
  out.nodes += rect_contour.nodes.size();
  for (const double p : options.ps) {
    std::vector<double> row(ys.size());
    parallel_for(ys.size(), [&](std::size_t i) { row[i] = operator_norm(target, powers[i], p, options.seed); });
    out.norms.push_back(std::move(row));
    std::vector<double> rect_row;
    for (const auto& m : rect.powers) rect_row.push_back(operator_norm(target, m, p, options.seed));
    out.rect.push_back(std::move(rect_row));
  }
  return out;
}

std::string p_label(double p) {
  std::ostringstream out;
  out << p;
  return out.str();
}

}  // namespace

CalculusReport bip_scan(const DiscreteOperator& target, const Sector& sector, const BipOptions& options) {
  const auto start = Clock::now();
  require_modes(target);
  if (options.steps < 2) throw DomainError("bip scan: steps must be >= 2");
  if (!(options.y_max > 0.0)) throw DomainError("bip scan: y_max must be positive");
  if (options.ps.empty()) throw DomainError("bip scan: no exponent p given");
  for (const double p : options.ps)
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("bip scan: p must lie in (1, inf)");

  std::vector<double> ys;
  for (int k = 0; k < options.steps; ++k) ys.push_back(-options.y_max + 2.0 * options.y_max * k / (options.steps - 1));
  const std::vector<cplx> rect_zs{{-0.1, -options.y_max}, {-0.1, -options.y_max / 2}, {-0.1, 0.0},
                                  {-0.1, options.y_max / 2}, {-0.1, options.y_max}};
  const double theta = sector.theta();

  CalculusReport report;
  report.operation = "bip_scan";
  report.parameters = {{"theta", theta},
                       {"y_max", options.y_max},
                       {"steps", static_cast<std::int64_t>(options.steps)},
                       {"contour_theta", options.contour.theta},
                       {"seed", static_cast<std::int64_t>(options.seed)}};
  report.notes.push_back("condition (A3) is sampled for |Im z| <= y_max only");

  const BipMeasure fine = measure_bip(target, ys, rect_zs, options);
  std::optional<BipMeasure> coarse;
  std::size_t coarse_points = 0;
  if (options.refine && target.source && target.grid && target.grid->size() / 2 >= 8) {
    const LogGrid& g = *target.grid;
    coarse_points = g.size() / 2;
    const LogGrid half(g.r_min(), g.r_max(), static_cast<int>(coarse_points), g.kind());
    coarse = measure_bip(assemble(*target.source, half), ys, rect_zs, options);
  } else {
    report.notes.push_back("refinement at N/2 skipped: target has no source operator or grid");
  }
  report.results.emplace_back("contour_nodes", static_cast<std::int64_t>(fine.nodes));
  report.results.emplace_back("contour_tail_bound", fine.tail_bound);
  if (coarse) report.results.emplace_back("coarse_points", static_cast<std::int64_t>(coarse_points));

  const bool self_adjoint = std::all_of(target.modes.begin(), target.modes.end(),
                                        [](const ModeMatrix& m) { return is_real_symmetric(m.matrix, 0.0); });
  for (std::size_t pi_ = 0; pi_ < options.ps.size(); ++pi_) {
    const double p = options.ps[pi_];
    const std::string suffix = options.ps.size() == 1 ? "" : "_p" + p_label(p);
    Table table{"bip_scan" + suffix, {"y", "norm", "e_theta_bound", "ratio"}, {}};
    double sup = 0.0;
    double sup_half = 0.0;
    double sup_coarse = 0.0;
    double unimodular = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double scale = std::exp(-theta * std::abs(ys[i]));
      const double value = scale * fine.norms[pi_][i];
      double ratio = std::numeric_limits<double>::quiet_NaN();
      if (coarse) {
        const double coarse_value = scale * coarse->norms[pi_][i];
        sup_coarse = std::max(sup_coarse, coarse_value);
        ratio = value / coarse_value;
      }
      sup = std::max(sup, value);
      if (i % 2 == 0) sup_half = std::max(sup_half, value);
      unimodular = std::max(unimodular, std::abs(fine.norms[pi_][i] - 1.0));
      table.rows.push_back({ys[i], fine.norms[pi_][i], value, ratio});
    }
    const std::string tag = "_p" + p_label(p);
    report.results.emplace_back("sup" + tag, sup);
    report.check_flag("sup_finite" + tag, std::isfinite(sup));
    const double drift_half = std::max(sup / sup_half, sup_half / sup);
    report.check_at_most("half_resolution_drift" + tag, drift_half, 2.0, "must stay below 2");
    if (coarse) {
      const double drift = std::max(sup / sup_coarse, sup_coarse / sup);
      report.results.emplace_back("sup_coarse" + tag, sup_coarse);
      report.check_at_most("refinement_drift" + tag, drift, 2.0, "sup at N versus N/2; must stay below 2");
    }
    if (p == 2.0 && self_adjoint) {
      report.results.emplace_back("max_unimodularity_deviation", unimodular);
      report.check_at_most("unimodular_imaginary_powers", unimodular, options.unimodularity_tol,
                           "self-adjoint target: ||A^{iy}||_2 = 1");
    }
    report.tables.push_back(std::move(table));

    Table rect{"rectangle" + suffix, {"re", "im", "norm", "e_theta_bound"}, {}};
    double rect_sup = 0.0;
    for (std::size_t i = 0; i < rect_zs.size(); ++i) {
      const double v = std::exp(-theta * std::abs(rect_zs[i].imag())) * fine.rect[pi_][i];
      rect_sup = std::max(rect_sup, v);
      rect.rows.push_back({rect_zs[i].real(), rect_zs[i].imag(), fine.rect[pi_][i], v});
    }
    report.check_flag("rectangle_bounded" + tag, std::isfinite(rect_sup));
    report.tables.push_back(std::move(rect));
  }
  report.seconds = elapsed(start);
  return report;
}

LogSamples sample_log_grid(const std::function<double(double)>& g, double x_min, double x_max, int points) {
  if (points < 3 || !(x_max > x_min)) throw DomainError("log samples: need x_min < x_max and >= 3 points");
  LogSamples s;
  s.x_min = x_min;
  s.h = (x_max - x_min) / (points - 1);
  s.g.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) s.g[static_cast<std::size_t>(i)] = g(std::exp(x_min + s.h * i));
  return s;
}

HardyValue hardy_check(const LogSamples& samples, double p, double r, HardyTail tail) {
  if (!(p > 1.0)) throw DomainError("hardy check: p must exceed 1");
  if (!(r > 0.0)) throw DomainError("hardy check: r must be positive");
  const std::size_t n = samples.g.size();
  if (n < 3 || !(samples.h > 0.0)) throw DomainError("hardy check: need at least 3 samples");
  for (std::size_t i = 0; i < n; ++i)
    if (!(samples.g[i] >= 0.0))
      throw DomainError("hardy check: negative or invalid sample g[" + std::to_string(i) + "]");

  const double h = samples.h;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(samples.x_min + h * static_cast<double>(i));
  const auto trapezoid = [&](const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (i == 0 || i + 1 == n ? 0.5 : 1.0) * f[i];
    return h * s;
  };

  // Inner integral in log coordinates: ds = s dx.
  std::vector<double> inner(n);
  std::vector<double> lhs_f(n);
  std::vector<double> rhs_f(n);
  double lhs_tail = 0.0;
  if (tail == HardyTail::lower) {
    inner[0] = samples.g[0] * t[0];
    for (std::size_t i = 1; i < n; ++i)
      inner[i] = inner[i - 1] + 0.5 * h * (samples.g[i - 1] * t[i - 1] + samples.g[i] * t[i]);
    for (std::size_t i = 0; i < n; ++i) {
      lhs_f[i] = std::pow(inner[i], p) * std::pow(t[i], -r);
      rhs_f[i] = std::pow(samples.g[i], p) * std::pow(t[i], p - r);
    }
    // Beyond the grid the inner integral is frozen at its last value.
    lhs_tail = std::pow(inner[n - 1], p) * std::pow(t[n - 1], -r) / r;
  } else {
    inner[n - 1] = 0.0;
    for (std::size_t i = n - 1; i-- > 0;)
      inner[i] = inner[i + 1] + 0.5 * h * (samples.g[i] * t[i] + samples.g[i + 1] * t[i + 1]);
    for (std::size_t i = 0; i < n; ++i) {
      lhs_f[i] = std::pow(inner[i], p) * std::pow(t[i], r);
      rhs_f[i] = std::pow(samples.g[i], p) * std::pow(t[i], p + r);
    }
    // Below the grid the inner integral is frozen at its first value.
    lhs_tail = std::pow(inner[0], p) * std::pow(t[0], r) / r;
  }
  HardyValue out;
  out.lhs = trapezoid(lhs_f) + lhs_tail;
  out.rhs = trapezoid(rhs_f);
  out.constant = std::pow(p / r, p);
  out.bound = out.constant * out.rhs;
  out.pass = out.lhs <= out.bound * (1.0 + 1e-6);
  return out;
}

CalculusReport hardy_suite(int points_per_unit) {
  const auto start = Clock::now();
  struct Family {
    const char* name;
    std::function<double(double)> g;
    // Smallest value of p·a + p for g ~ t^a near 0 (lower tail RHS) and
    // whether the function is compactly supported in (0, 1].
    double a;
    bool compact;
  };
  const auto indicator_power = [](double a) {
    return [a](double t) {
      if (t < 1.0) return std::pow(t, a);
      if (t == 1.0) return 0.5;  // jump node takes the mean value
      return 0.0;
    };
  };
  const std::vector<Family> families{{"indicator", indicator_power(0.0), 0.0, true},
                                     {"t^0.5", indicator_power(0.5), 0.5, true},
                                     {"t", indicator_power(1.0), 1.0, true},
                                     {"t^2", indicator_power(2.0), 2.0, true},
                                     {"exp(-t)", [](double t) { return std::exp(-t); }, 0.0, false}};
  const std::vector<double> ps{1.5, 2.0, 3.0};
  const std::vector<double> rs{0.5, 1.0, 2.0};
  const double x_min = -60.0;
  const double x_max = 60.0;
  const int points = static_cast<int>((x_max - x_min) * points_per_unit) + 1;

  CalculusReport report;
  report.operation = "hardy_check";
  report.parameters = {{"x_min", x_min}, {"x_max", x_max}, {"points", static_cast<std::int64_t>(points)}};
  Table table{"hardy", {"family", "p", "r", "tail", "lhs", "bound", "ratio"}, {}};
  int skipped = 0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const LogSamples samples = sample_log_grid(families[f].g, x_min, x_max, points);
    for (const double p : ps)
      for (const double r : rs)
        for (const HardyTail tail : {HardyTail::lower, HardyTail::upper}) {
          // The lower-tail right side ∫ g^p t^{p-1-r} needs p(a+1) > r at 0.
          if (tail == HardyTail::lower && !(p * (families[f].a + 1.0) > r)) {
            ++skipped;
            continue;
          }
          const HardyValue v = hardy_check(samples, p, r, tail);
          const std::string name = std::string(families[f].name) + "_p" + p_label(p) + "_r" + p_label(r) +
                                   (tail == HardyTail::lower ? "_lower" : "_upper");
          report.checks.push_back({name, v.lhs, v.bound * (1.0 + 1e-6), v.pass, ""});
          table.rows.push_back({static_cast<double>(f), p, r, tail == HardyTail::lower ? 0.0 : 1.0, v.lhs, v.bound,
                                v.bound > 0.0 ? v.lhs / v.bound : 0.0});
        }
  }
  report.results = {{"cases", static_cast<std::int64_t>(table.rows.size())},
                    {"skipped_infinite_rhs", static_cast<std::int64_t>(skipped)}};
  report.notes.push_back("family index: 0 indicator of (0,1], 1 t^0.5, 2 t, 3 t^2 on (0,1], 4 exp(-t); tail 0 lower, 1 upper");
  report.tables.push_back(std::move(table));
  report.seconds = elapsed(start);
  return report;
}

CalculusReport check_ellipticity(const FuchsOperator& op, const Sector& sector, double gamma,
                                 const EllipticityOptions& options) {
  const auto start = Clock::now();
  if (options.resolution < 8) throw DomainError("ellipticity: scan resolution must be >= 8");
  CalculusReport report;
  report.operation = "ellipticity";
  report.parameters = {{"theta", sector.theta()},
                       {"gamma", gamma},
                       {"resolution", static_cast<std::int64_t>(options.resolution)}};

  const SymbolScan scan = scan_symbols(op, sector, options.resolution);
  report.results.emplace_back("symbol_samples", static_cast<std::int64_t>(scan.samples));
  report.results.emplace_back("symbol_angular_margin", scan.angular_margin);
  report.check_flag("E1_symbols_outside_sector", scan.pass, scan.failure.value_or(""));

  FuchsOperator model = op;
  model.weight.gamma = gamma;
  const LogGrid grid = options.grid ? *options.grid : LogGrid(-12.0, 12.0, 256, GridKind::model_cone);
  const DiscreteOperator discrete = assemble(model, grid);
  std::int64_t inside = 0;
  double min_modulus = std::numeric_limits<double>::infinity();
  double min_real = std::numeric_limits<double>::infinity();
  std::string first;
  const auto spectra = spectrum(discrete);
  for (std::size_t j = 0; j < spectra.size(); ++j)
    for (const cplx v : spectra[j]) {
      min_modulus = std::min(min_modulus, std::abs(v));
      min_real = std::min(min_real, v.real());
      if (std::abs(v) > options.zero_radius && in_sector(v, sector)) {
        if (inside == 0) first = "eigenvalue " + format_complex(v) + " of mode " + std::to_string(j);
        ++inside;
      }
    }
  report.results.emplace_back("model_cone_points", static_cast<std::int64_t>(grid.size()));
  report.results.emplace_back("min_abs_eigenvalue", min_modulus);
  report.results.emplace_back("min_real_eigenvalue", min_real);
  report.results.emplace_back("eigenvalues_in_sector", inside);
  report.check_flag("E2_model_cone_spectrum_outside_sector", inside == 0, first);

  const WeightLine line = weight_line_invertible(op, gamma);
  report.results.emplace_back("conormal_line", line.line);
  report.results.emplace_back("conormal_margin", line.margin);
  report.check_flag("conormal_invertible_on_weight_line", line.invertible,
                    "elliptic with respect to the weight gamma + mu");
  report.seconds = elapsed(start);
  return report;
}

}  // namespace conecalc
