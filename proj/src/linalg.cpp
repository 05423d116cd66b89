// SPDX-License-Identifier: Apache-2.0
#include "qrfem/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace qrfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append_block(Triplets& out, const SparseMatrix& block, Eigen::Index row0,
                  Eigen::Index col0) {
  for (int k = 0; k < block.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(block, k); it; ++it) {
      out.emplace_back(static_cast<int>(it.row() + row0), static_cast<int>(it.col() + col0),
                       it.value());
    }
  }
}

Eigen::MatrixXd random_block(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = dist(rng);
  }
  return x;
}

/// Orthonormalizes the columns of y with respect to the inner product `gram`
/// (identity when gram is empty) by a twice-applied Cholesky QR.
Eigen::MatrixXd orthonormalize(Eigen::MatrixXd y, const SparseMatrix* gram) {
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd gy = gram ? Eigen::MatrixXd(*gram * y) : y;
    Eigen::MatrixXd s = y.transpose() * gy;
    s = 0.5 * (s + s.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
      y = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
      continue;
    }
    y = llt.matrixU().solve<Eigen::OnTheRight>(y);
  }
  return y;
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by
/// subspace iteration with Rayleigh-Ritz.
template <typename Op>
double dominant_eigenvalue(Op apply, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Index p = std::min<Eigen::Index>(6, n);
  Eigen::MatrixXd x = orthonormalize(random_block(n, p, seed), nullptr);
  double previous = 0.0;
  for (int iter = 0; iter < 5000; ++iter) {
    const Eigen::MatrixXd y = apply(x);
    Eigen::MatrixXd h = x.transpose() * y;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double estimate = es.eigenvalues().maxCoeff();
    x = orthonormalize(y * es.eigenvectors(), nullptr);
    if (iter > 3 && std::abs(estimate - previous) <= 1e-12 * std::abs(estimate)) {
      return estimate;
    }
    previous = estimate;
  }
  return previous;
}

bool is_symmetric(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const SparseMatrix t = m.transpose();
  const double scale = std::max(1.0, m.norm());
  return (m - t).norm() <= 1e-12 * scale;
}

void check_finite(const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw SingularMatrixError("solution contains non-finite values");
}

}  // namespace

SparseMatrix BlockSystem::matrix() const {
  const Eigen::Index np = primal_size();
  const Eigen::Index nd = dual_size();
  Triplets t;
  t.reserve(static_cast<std::size_t>(a11.nonZeros() + a12.nonZeros() + a21.nonZeros() +
                                     a22.nonZeros()));
  append_block(t, a11, 0, 0);
  append_block(t, a12, 0, np);
  append_block(t, a21, np, 0);
  append_block(t, a22, np, np);
  SparseMatrix k(np + nd, np + nd);
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

Eigen::VectorXd BlockSystem::rhs() const {
  Eigen::VectorXd b(primal_size() + dual_size());
  b << rhs_primal, rhs_dual;
  return b;
}

SparseMatrix block_diagonal(const SparseMatrix& a, const SparseMatrix& b) {
  Triplets t;
  append_block(t, a, 0, 0);
  append_block(t, b, a.rows(), a.cols());
  SparseMatrix m(a.rows() + b.rows(), a.cols() + b.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd solve_sparse(const SparseMatrix& matrix, const Eigen::VectorXd& rhs) {
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(matrix);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("LU factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("LU solve failed");
  check_finite(x);
  return x;
}

Eigen::VectorXd solve_spd(const SparseMatrix& matrix, const Eigen::VectorXd& rhs) {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(matrix);
  if (ldlt.info() != Eigen::Success) throw SingularMatrixError("LDLT factorization failed");
  Eigen::VectorXd x = ldlt.solve(rhs);
  check_finite(x);
  return x;
}

BlockSolution solve_direct(const BlockSystem& system) {
  if (system.a12.rows() != system.primal_size() || system.a12.cols() != system.dual_size() ||
      system.a21.rows() != system.dual_size() || system.a21.cols() != system.primal_size() ||
      system.rhs_primal.size() != system.primal_size() ||
      system.rhs_dual.size() != system.dual_size()) {
    throw std::invalid_argument("block system dimensions are inconsistent");
  }
  const SparseMatrix k = system.matrix();
  const Eigen::VectorXd b = system.rhs();
  const Eigen::VectorXd x = solve_sparse(k, b);
  BlockSolution sol;
  sol.primal = x.head(system.primal_size());
  sol.dual = x.tail(system.dual_size());
  sol.relative_residual = (k * x - b).norm() / (1.0 + b.norm());
  if (!(sol.relative_residual <= 1e-10)) {
    throw SingularMatrixError("direct solve residual too large: " +
                              std::to_string(sol.relative_residual));
  }
  return sol;
}

double condition_number(const SparseMatrix& matrix, ConditionMethod method) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw std::invalid_argument("condition number needs a non-empty square matrix");
  }
  const Eigen::Index n = matrix.rows();
  if (method == ConditionMethod::DenseExact) {
    if (n > dense_limit) {
      throw std::invalid_argument("dense condition number limited to 2000 unknowns");
    }
    const Eigen::MatrixXd dense(matrix);
    Eigen::VectorXd sv;
    if (is_symmetric(matrix)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
      sv = es.eigenvalues().cwiseAbs();
    } else {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
      sv = svd.singularValues();
    }
    const double smax = sv.maxCoeff();
    const double smin = sv.minCoeff();
    if (!(smin > smax * std::numeric_limits<double>::epsilon())) {
      throw SingularMatrixError("matrix is numerically singular");
    }
    return smax / smin;
  }

  const SparseMatrix mt = matrix.transpose();
  const double smax2 = dominant_eigenvalue(
      [&](const Eigen::MatrixXd& x) { return Eigen::MatrixXd(mt * (matrix * x)); }, n, 17);
  Eigen::UmfPackLU<SparseMatrix> lu(matrix);
  Eigen::UmfPackLU<SparseMatrix> lut(mt);
  if (lu.info() != Eigen::Success || lut.info() != Eigen::Success) {
    throw SingularMatrixError("matrix is singular");
  }
  const double inv_smin2 = dominant_eigenvalue(
      [&](const Eigen::MatrixXd& x) {
        Eigen::MatrixXd y = lu.solve(x);
        return Eigen::MatrixXd(lut.solve(y));
      },
      n, 29);
  if (!std::isfinite(inv_smin2) || inv_smin2 <= 0.0) {
    throw SingularMatrixError("matrix is numerically singular");
  }
  return std::sqrt(smax2 * inv_smin2);
}

double infsup_constant_dense(const SparseMatrix& a, const SparseMatrix& n_trial,
                             const SparseMatrix& n_test) {
  if (a.cols() != n_trial.rows() || a.rows() != n_test.rows() ||
      n_trial.rows() != n_trial.cols() || n_test.rows() != n_test.cols()) {
    throw std::invalid_argument("inf-sup: Gram matrices do not match the operator");
  }
  const Eigen::LLT<Eigen::MatrixXd> trial{Eigen::MatrixXd(n_trial)};
  const Eigen::LLT<Eigen::MatrixXd> test{Eigen::MatrixXd(n_test)};
  if (trial.info() != Eigen::Success || test.info() != Eigen::Success) {
    throw std::invalid_argument("inf-sup: Gram matrix is not symmetric positive definite");
  }
  // M = L_test^{-1} A L_trial^{-T}
  Eigen::MatrixXd m = test.matrixL().solve(Eigen::MatrixXd(a));
  m = trial.matrixU().solve<Eigen::OnTheRight>(m);
  if (m.rows() == m.cols() && (m - m.transpose()).norm() <= 1e-10 * m.norm()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

double infsup_constant_sparse(const SparseMatrix& a, const SparseMatrix& gram) {
  if (a.rows() != a.cols() || gram.rows() != a.rows() || gram.cols() != a.cols()) {
    throw std::invalid_argument("inf-sup: Gram matrix does not match the operator");
  }
  if (!is_symmetric(a) || !is_symmetric(gram)) {
    throw std::invalid_argument("sparse inf-sup needs a symmetric operator and Gram matrix");
  }
  Eigen::SimplicialLLT<SparseMatrix> chol(gram);
  if (chol.info() != Eigen::Success) {
    throw std::invalid_argument("inf-sup: Gram matrix is not symmetric positive definite");
  }
  Eigen::UmfPackLU<SparseMatrix> lu(a);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("inf-sup: operator is singular");

  // Shift-invert subspace iteration for the eigenvalues of A x = mu N x with
  // smallest |mu|; the generalized singular values are the |mu|.
  const Eigen::Index n = a.rows();
  const Eigen::Index p = std::min<Eigen::Index>(8, n);
  Eigen::MatrixXd x = orthonormalize(random_block(n, p, 41), &gram);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 2000; ++iter) {
    Eigen::MatrixXd y = lu.solve(Eigen::MatrixXd(gram * x));
    y = orthonormalize(std::move(y), &gram);
    Eigen::MatrixXd h = y.transpose() * (a * y);
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double estimate = es.eigenvalues().cwiseAbs().minCoeff();
    x = y * es.eigenvectors();
    if (std::abs(estimate - previous) <= 1e-11 * estimate) return estimate;
    previous = estimate;
  }
  return previous;
}

double infsup_constant(const SparseMatrix& a, const SparseMatrix& n_trial,
                       const SparseMatrix& n_test) {
  if (a.rows() <= dense_limit && a.cols() <= dense_limit) {
    return infsup_constant_dense(a, n_trial, n_test);
  }
  if (!n_trial.isApprox(n_test)) {
    throw std::invalid_argument("sparse inf-sup route needs identical trial and test norms");
  }
  return infsup_constant_sparse(a, n_trial);
}

}  // namespace qrfem
