// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qrfem/assembly.hpp"

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace qrfem {

/// Raised when a factorization finds a (numerically) singular matrix.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// [[A11, A12], [A21, A22]] with A12 = A21^T.
struct BlockSystem {
  SparseMatrix a11;
  SparseMatrix a12;
  SparseMatrix a21;
  SparseMatrix a22;
  Eigen::VectorXd rhs_primal;
  Eigen::VectorXd rhs_dual;

  [[nodiscard]] Eigen::Index primal_size() const noexcept { return a11.rows(); }
  [[nodiscard]] Eigen::Index dual_size() const noexcept { return a22.rows(); }
  [[nodiscard]] SparseMatrix matrix() const;
  [[nodiscard]] Eigen::VectorXd rhs() const;
};

/// Joins two square blocks into a block-diagonal matrix.
[[nodiscard]] SparseMatrix block_diagonal(const SparseMatrix& a, const SparseMatrix& b);

struct BlockSolution {
  Eigen::VectorXd primal;
  Eigen::VectorXd dual;
  /// ||K x - b|| / (1 + ||b||).
  double relative_residual = 0.0;
};

/// LU with partial pivoting (UMFPACK). Throws SingularMatrixError.
[[nodiscard]] BlockSolution solve_direct(const BlockSystem& system);
[[nodiscard]] Eigen::VectorXd solve_sparse(const SparseMatrix& matrix, const Eigen::VectorXd& rhs);

/// Solves with a symmetric positive definite matrix (sparse Cholesky).
[[nodiscard]] Eigen::VectorXd solve_spd(const SparseMatrix& matrix, const Eigen::VectorXd& rhs);

enum class ConditionMethod { DenseExact, PowerIteration };

inline constexpr Eigen::Index dense_limit = 2000;

/// Euclidean condition number sigma_max / sigma_min.
[[nodiscard]] double condition_number(const SparseMatrix& matrix, ConditionMethod method);

/// Smallest generalized singular value of A between the norms induced by
/// n_trial and n_test, i.e. sigma_min(N_test^{-1/2} A N_trial^{-1/2}).
/// Dense for at most dense_limit unknowns; above that a sparse shift-invert
/// subspace iteration on the symmetric pencil (requires A symmetric and
/// n_trial == n_test). Throws std::invalid_argument for non-SPD Gram matrices.
[[nodiscard]] double infsup_constant(const SparseMatrix& a, const SparseMatrix& n_trial,
                                     const SparseMatrix& n_test);

/// Dense-only variant; no size cap.
[[nodiscard]] double infsup_constant_dense(const SparseMatrix& a, const SparseMatrix& n_trial,
                                           const SparseMatrix& n_test);

/// Sparse variant for symmetric A with a shared Gram matrix.
[[nodiscard]] double infsup_constant_sparse(const SparseMatrix& a, const SparseMatrix& gram);

}  // namespace qrfem
