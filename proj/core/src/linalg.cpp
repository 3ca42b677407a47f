#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "conecalc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "conecalc/error.hpp"
#include "conecalc/rng.hpp"

namespace conecalc {

static_assert(sizeof(lapack_int) == sizeof(int));

namespace {

constexpr double min_rcond = 1e-14;

std::string format_complex(cplx z) {
  return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

CVector dual_vector(const CVector& x, double p) {
  const double norm = vector_p_norm(x, p);
  CVector y = CVector::Zero(x.size());
  if (norm == 0.0) return y;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x(i));
    if (a > 0.0) y(i) = std::pow(a / norm, p - 1.0) * (x(i) / a);
  }
  return y;
}

double largest_singular_value_dense(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

std::vector<std::vector<Eigen::Index>> decoupled_blocks(const CMatrix& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != cplx(0.0)) {
        const std::size_t ri = find_root(parent, static_cast<std::size_t>(i));
        const std::size_t rj = find_root(parent, static_cast<std::size_t>(j));
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find_root(parent, i);
    if (slot[r] == n) {
      slot[r] = blocks.size();
      blocks.emplace_back();
    }
    blocks[slot[r]].push_back(static_cast<Eigen::Index>(i));
  }
  return blocks;
}

int lower_bandwidth(const CMatrix& a) {
  int b = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j + 1; i < a.rows(); ++i)
      if (a(i, j) != cplx(0.0)) b = std::max(b, static_cast<int>(i - j));
  return b;
}

int upper_bandwidth(const CMatrix& a) {
  int b = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (a(i, j) != cplx(0.0)) b = std::max(b, static_cast<int>(j - i));
  return b;
}

bool is_real_symmetric(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  const double limit = tol * scale;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (std::abs(a(i, j).imag()) > limit) return false;
      if (std::abs(a(i, j).real() - a(j, i).real()) > limit) return false;
    }
  return true;
}

BandedLU::BandedLU(const CMatrix& a, int kl, int ku) : n_(a.rows()), kl_(kl), ku_(ku) {
  if (a.rows() != a.cols()) throw DomainError("banded LU needs a square matrix");
  if (n_ == 0) return;
  const Eigen::Index ldab = 2 * kl + ku + 1;
  ab_.assign(static_cast<std::size_t>(ldab * n_), cplx(0.0));
  for (Eigen::Index j = 0; j < n_; ++j)
    for (Eigen::Index i = std::max<Eigen::Index>(0, j - ku); i <= std::min(n_ - 1, j + kl); ++i)
      ab_[static_cast<std::size_t>(kl + ku + i - j + j * ldab)] = a(i, j);

  row_scale_.resize(n_);
  col_scale_.resize(n_);
  double rowcnd = 0.0;
  double colcnd = 0.0;
  double amax = 0.0;
  lapack_int info = LAPACKE_zgbequ(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_),
                                   kl, ku, ab_.data() + kl, static_cast<lapack_int>(ldab), row_scale_.data(),
                                   col_scale_.data(), &rowcnd, &colcnd, &amax);
  if (info > 0) throw NumericalError("banded LU: matrix has an exactly zero row or column");
  if (info < 0) throw NumericalError("banded LU: zgbequ argument error " + std::to_string(info));

  double anorm = 0.0;
  for (Eigen::Index j = 0; j < n_; ++j) {
    double column = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(0, j - ku); i <= std::min(n_ - 1, j + kl); ++i) {
      cplx& v = ab_[static_cast<std::size_t>(kl + ku + i - j + j * ldab)];
      v *= row_scale_(i) * col_scale_(j);
      column += std::abs(v);
    }
    anorm = std::max(anorm, column);
  }

  ipiv_.resize(static_cast<std::size_t>(n_));
  info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_), kl, ku,
                        ab_.data(), static_cast<lapack_int>(ldab), ipiv_.data());
  if (info > 0) throw NumericalError("banded LU: exactly singular pivot " + std::to_string(info));
  if (info < 0) throw NumericalError("banded LU: zgbtrf argument error " + std::to_string(info));
  info = LAPACKE_zgbcon(LAPACK_COL_MAJOR, '1', static_cast<lapack_int>(n_), kl, ku, ab_.data(),
                        static_cast<lapack_int>(ldab), ipiv_.data(), anorm, &rcond_);
  if (info != 0) throw NumericalError("banded LU: zgbcon failed");
  if (!(rcond_ >= min_rcond))
    throw NumericalError("banded LU: condition estimate " + std::to_string(1.0 / rcond_) + " exceeds 1e14");
}

void BandedLU::solve(CMatrix& b, bool adjoint) const {
  if (b.rows() != n_) throw DomainError("banded LU: right-hand side has the wrong length");
  if (n_ == 0 || b.cols() == 0) return;
  const RVector& pre = adjoint ? col_scale_ : row_scale_;
  const RVector& post = adjoint ? row_scale_ : col_scale_;
  b = pre.asDiagonal() * b;
  const lapack_int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, adjoint ? 'C' : 'N', static_cast<lapack_int>(n_), kl_,
                                         ku_, static_cast<lapack_int>(b.cols()), ab_.data(),
                                         static_cast<lapack_int>(2 * kl_ + ku_ + 1), ipiv_.data(), b.data(),
                                         static_cast<lapack_int>(n_));
  if (info != 0) throw NumericalError("banded LU: zgbtrs failed");
  b = post.asDiagonal() * b;
}

namespace {

// Plain complex product; std::complex operator* goes through __muldc3.
inline cplx fast_mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace

CMatrix BandedLU::inverse() const {
  CMatrix x = CMatrix::Zero(n_, n_);
  const Eigen::Index ldab = 2 * kl_ + ku_ + 1;
  const Eigen::Index kd = kl_ + ku_;
  const cplx* ab = ab_.data();
  std::vector<cplx> pivot_inverse(static_cast<std::size_t>(n_));
  for (Eigen::Index j = 0; j < n_; ++j) pivot_inverse[static_cast<std::size_t>(j)] = 1.0 / ab[kd + j * ldab];
  // Same elimination order as zgbtrs: row swaps interleaved with L, then U.
  for (Eigen::Index c = 0; c < n_; ++c) {
    cplx* b = x.col(c).data();
    b[c] = row_scale_(c);
    for (Eigen::Index j = std::max<Eigen::Index>(0, c - kl_); j < n_ - 1; ++j) {
      const Eigen::Index l = ipiv_[static_cast<std::size_t>(j)] - 1;
      if (l != j) std::swap(b[l], b[j]);
      const cplx bj = b[j];
      const Eigen::Index lm = std::min<Eigen::Index>(kl_, n_ - 1 - j);
      const cplx* multipliers = ab + kd + j * ldab;
      for (Eigen::Index i = 1; i <= lm; ++i) b[j + i] -= fast_mul(bj, multipliers[i]);
    }
    for (Eigen::Index j = n_ - 1; j >= 0; --j) {
      const cplx bj = fast_mul(b[j], pivot_inverse[static_cast<std::size_t>(j)]);
      b[j] = bj;
      const cplx* column = ab + kd - j + j * ldab;
      for (Eigen::Index i = std::max<Eigen::Index>(0, j - kd); i < j; ++i) b[i] -= fast_mul(bj, column[i]);
    }
  }
  return col_scale_.asDiagonal() * x;
}

void BandedLU::solve(CVector& b, bool adjoint) const {
  CMatrix m = b;
  solve(m, adjoint);
  b = m.col(0);
}

BlockOperator::BlockOperator(CMatrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw DomainError("operator matrix must be square");
  for (auto& index : decoupled_blocks(a_)) {
    Block block;
    block.index = std::move(index);
    const CMatrix local = a_(block.index, block.index);
    const auto m = local.rows();
    const int kl = lower_bandwidth(local);
    const int ku = upper_bandwidth(local);
    if (kl + ku <= std::max<Eigen::Index>(2, m / 8)) {
      block.local = local;
      block.kl = kl;
      block.ku = ku;
    } else if ((local - local.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * local.cwiseAbs().maxCoeff()) {
      Eigen::Tridiagonalization<CMatrix> tri(local);
      block.reduced = true;
      block.basis = tri.matrixQ();
      block.local = tri.matrixT();
      block.kl = 1;
      block.ku = 1;
    } else {
      Eigen::HessenbergDecomposition<CMatrix> hess(local);
      block.reduced = true;
      block.basis = hess.matrixQ();
      block.local = hess.matrixH();
      block.local.triangularView<Eigen::StrictlyLower>().setZero();
      block.local.diagonal(-1) = hess.matrixH().diagonal(-1);
      block.kl = 1;
      block.ku = static_cast<int>(m) - 1;
    }
    blocks_.push_back(std::move(block));
  }
}

CMatrix BlockOperator::local_resolvent(std::size_t b, cplx lambda) const {
  const Block& block = blocks_.at(b);
  CMatrix shifted = -block.local;
  shifted.diagonal().array() += lambda;
  try {
    return BandedLU(shifted, block.kl, block.ku).inverse();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at lambda = " + format_complex(lambda));
  }
}

CMatrix BlockOperator::expand(const std::vector<CMatrix>& local) const {
  if (local.size() != blocks_.size()) throw DomainError("expand: one matrix per block expected");
  CMatrix out = CMatrix::Zero(size(), size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Block& block = blocks_[b];
    if (block.reduced)
      out(block.index, block.index) = block.basis * local[b] * block.basis.adjoint();
    else
      out(block.index, block.index) = local[b];
  }
  return out;
}

ResolventFactor::ResolventFactor(const BlockOperator& op, cplx lambda) : op_(&op), lambda_(lambda) {
  factors_.reserve(op.blocks().size());
  for (const auto& block : op.blocks()) {
    CMatrix shifted = -block.local;
    shifted.diagonal().array() += lambda;
    try {
      factors_.emplace_back(shifted, block.kl, block.ku);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at lambda = " + format_complex(lambda));
    }
  }
}

double ResolventFactor::rcond() const {
  double r = 1.0;
  for (const auto& f : factors_) r = std::min(r, f.rcond());
  return r;
}

void ResolventFactor::solve(CMatrix& u, bool adjoint) const {
  if (u.rows() != op_->size()) throw DomainError("resolvent: right-hand side has the wrong length");
  const auto& blocks = op_->blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    CMatrix x = u(block.index, Eigen::all);
    if (block.reduced) x = block.basis.adjoint() * x;
    factors_[b].solve(x, adjoint);
    if (block.reduced) x = block.basis * x;
    u(block.index, Eigen::all) = x;
  }
}

void ResolventFactor::solve(CVector& u, bool adjoint) const {
  CMatrix m = u;
  solve(m, adjoint);
  u = m.col(0);
}

SymmetricEigen spd_eigen(const RMatrix& a) {
  if (a.rows() != a.cols()) throw DomainError("spd_eigen needs a square matrix");
  const auto n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  if (n == 0) return out;
  RMatrix l = a;
  lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, l.data(), n);
  if (info > 0) throw NumericalError("spd_eigen: matrix is not positive definite");
  if (info < 0) throw NumericalError("spd_eigen: dpotrf argument error");
  RMatrix g = l.triangularView<Eigen::Lower>().transpose();
  RVector sva(n);
  RMatrix u(n, n);
  RMatrix v(n, n);
  double stat[7] = {};
  lapack_int istat[3] = {};
  info = LAPACKE_dgejsv(LAPACK_COL_MAJOR, 'C', 'N', 'V', 'N', 'N', 'N', n, n, g.data(), n, sva.data(), u.data(), n,
                        v.data(), n, stat, istat);
  if (info != 0) throw NumericalError("spd_eigen: dgejsv failed with info " + std::to_string(info));
  const double scale = stat[1] / stat[0];
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return sva(x) < sva(y); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double sigma = scale * sva(order[static_cast<std::size_t>(k)]);
    out.values(k) = sigma * sigma;
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

double two_norm(Eigen::Index n, const LinearMap& apply, const LinearMap& apply_adjoint, int max_iterations,
                double tol) {
  if (n == 0) return 0.0;
  Rng rng(0x2545F4914F6CDD1DULL);
  CVector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = cplx(rng.normal(), rng.normal());
  q.normalize();

  std::vector<CVector> basis{q};
  std::vector<double> alpha;
  std::vector<double> beta;
  double theta = 0.0;
  const int limit = static_cast<int>(std::min<Eigen::Index>(n, max_iterations));
  for (int k = 0; k < limit; ++k) {
    CVector w = basis.back();
    apply(w);
    apply_adjoint(w);
    alpha.push_back(basis.back().dot(w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;

    const auto m = static_cast<Eigen::Index>(alpha.size());
    RMatrix t = RMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    const double next = Eigen::SelfAdjointEigenSolver<RMatrix>(t, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const bool converged = k >= 2 && std::abs(next - theta) <= tol * std::abs(next);
    theta = next;
    const double b = w.norm();
    if (converged || b <= 1e-14 * std::max(std::abs(theta), 1e-300)) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return std::sqrt(std::max(theta, 0.0));
}

double two_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() != a.cols()) return largest_singular_value_dense(a);
  double best = 0.0;
  for (const auto& index : decoupled_blocks(a)) {
    const CMatrix block = a(index, index);
    if (block.rows() <= 320) {
      best = std::max(best, largest_singular_value_dense(block));
    } else {
      best = std::max(best, two_norm(
                                block.rows(), [&](CVector& x) { x = block * x; },
                                [&](CVector& x) { x = block.adjoint() * x; }));
    }
  }
  return best;
}

double exact_two_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() != a.cols()) return largest_singular_value_dense(a);
  double best = 0.0;
  for (const auto& index : decoupled_blocks(a)) best = std::max(best, largest_singular_value_dense(a(index, index)));
  return best;
}

double vector_p_norm(const CVector& x, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)), p);
  return std::pow(s, 1.0 / p);
}

NormEstimate estimate_p_norm(const CMatrix& a, double p, std::uint64_t seed, int iterations, int restarts) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p-norm estimate: p must lie in (1, inf)");
  NormEstimate out;
  if (a.size() == 0) return out;
  const double q = p / (p - 1.0);
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  const double norm_inf = a.cwiseAbs().rowwise().sum().maxCoeff();
  out.upper = std::pow(norm1, 1.0 / p) * std::pow(norm_inf, 1.0 - 1.0 / p);

  for (int r = 0; r < restarts; ++r) {
    CVector x(a.cols());
    if (r == 0) {
      x.setOnes();
    } else {
      Rng rng(seed + static_cast<std::uint64_t>(r));
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(rng.normal(), rng.normal());
    }
    x /= vector_p_norm(x, p);
    for (int it = 0; it < iterations; ++it) {
      const CVector y = a * x;
      out.lower = std::max(out.lower, vector_p_norm(y, p));
      const CVector z = a.adjoint() * dual_vector(y, p);
      const double zq = vector_p_norm(z, q);
      if (zq <= z.dot(x).real() * (1.0 + 1e-14) || zq == 0.0) break;
      x = dual_vector(z, q);
    }
  }
  out.upper = std::max(out.upper, out.lower);
  return out;
}

}  // namespace conecalc
