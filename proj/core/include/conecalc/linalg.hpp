#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "conecalc/types.hpp"

namespace conecalc {

// Index sets of the connected components of the sparsity graph of a.
std::vector<std::vector<Eigen::Index>> decoupled_blocks(const CMatrix& a);

int lower_bandwidth(const CMatrix& a);
int upper_bandwidth(const CMatrix& a);
bool is_real_symmetric(const CMatrix& a, double tol = 0.0);

// Equilibrated banded LU (zgbequ + zgbtrf); throws NumericalError when the
// reciprocal condition number of the equilibrated matrix is below 1e-14.
class BandedLU {
 public:
  BandedLU(const CMatrix& a, int kl, int ku);

  Eigen::Index size() const { return n_; }
  double rcond() const { return rcond_; }
  // Overwrites b with a^{-1} b (or a^{-H} b).
  void solve(CMatrix& b, bool adjoint = false) const;
  void solve(CVector& b, bool adjoint = false) const;
  // a^{-1}, skipping the leading zeros of each identity column.
  CMatrix inverse() const;

 private:
  Eigen::Index n_;
  int kl_;
  int ku_;
  std::vector<cplx> ab_;
  std::vector<int> ipiv_;
  RVector row_scale_;
  RVector col_scale_;
  double rcond_ = 0.0;
};

// A matrix split into decoupled diagonal blocks. Narrow blocks are kept as
// they are; wide blocks are reduced by a unitary similarity A = Q T Qᴴ with T
// tridiagonal (Hermitian blocks) or upper Hessenberg.
class BlockOperator {
 public:
  struct Block {
    std::vector<Eigen::Index> index;
    bool reduced = false;
    CMatrix basis;  // Q when reduced
    CMatrix local;  // T or the original block
    int kl = 0;
    int ku = 0;
  };

  explicit BlockOperator(CMatrix a);

  const CMatrix& matrix() const { return a_; }
  Eigen::Index size() const { return a_.rows(); }
  const std::vector<Block>& blocks() const { return blocks_; }

  // (λ - T_b)^{-1} in the local basis of block b.
  CMatrix local_resolvent(std::size_t b, cplx lambda) const;
  // Q_b S_b Q_bᴴ for every block, scattered into an N×N matrix.
  CMatrix expand(const std::vector<CMatrix>& local) const;

 private:
  CMatrix a_;
  std::vector<Block> blocks_;
};

// Factorization of λ - A for repeated solves.
class ResolventFactor {
 public:
  ResolventFactor(const BlockOperator& op, cplx lambda);

  cplx lambda() const { return lambda_; }
  double rcond() const;
  // u ← (λ - A)^{-1} u, or the adjoint.
  void solve(CVector& u, bool adjoint = false) const;
  void solve(CMatrix& u, bool adjoint = false) const;

 private:
  const BlockOperator* op_;
  cplx lambda_;
  std::vector<BandedLU> factors_;
};

struct SymmetricEigen {
  RVector values;  // ascending
  RMatrix vectors;
};

// Cholesky followed by the preconditioned Jacobi SVD of the factor. Small
// eigenvalues of graded matrices keep their relative accuracy.
SymmetricEigen spd_eigen(const RMatrix& a);

using LinearMap = std::function<void(CVector&)>;

// Largest singular value of x -> apply(x) by Lanczos on XᴴX with full
// reorthogonalization.
double two_norm(Eigen::Index n, const LinearMap& apply, const LinearMap& apply_adjoint,
                int max_iterations = 80, double tol = 1e-13);
double two_norm(const CMatrix& a);
// Dense SVD of every decoupled block, whatever its size.
double exact_two_norm(const CMatrix& a);

struct NormEstimate {
  double lower = 0.0;  // attained by a computed vector
  double upper = 0.0;  // ‖A‖₁^{1/p} ‖A‖_∞^{1-1/p}
};

// Dual power iteration for ‖A‖_{p→p}.
NormEstimate estimate_p_norm(const CMatrix& a, double p, std::uint64_t seed, int iterations = 50,
                             int restarts = 5);

double vector_p_norm(const CVector& x, double p);

}  // namespace conecalc
