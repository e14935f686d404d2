#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

#include "kdviss/banded.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

/// Banded realization of a generator on a grid, with cached spectral data
/// of its symmetric part (needed by the dissipativity gate and by the
/// Lyapunov constant C).
class LinearOperator {
 public:
  LinearOperator(const Grid& grid, BandedMatrix matrix)
      : grid_(grid), matrix_(std::move(matrix)) {
    if (matrix_.size() != grid_.size()) {
      throw DimensionError("operator dimension does not match grid");
    }
    const Eigen::MatrixXd a = matrix_.dense();
    const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eig(sym, Eigen::EigenvaluesOnly);
    max_sym_eig_ = sym_eig.eigenvalues().maxCoeff();
    min_sym_eig_ = sym_eig.eigenvalues().minCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(a.transpose() * a, Eigen::EigenvaluesOnly);
    spectral_norm_ = std::sqrt(std::max(0.0, gram.eigenvalues().maxCoeff()));
  }

  const Grid& grid() const noexcept { return grid_; }
  const BandedMatrix& matrix() const noexcept { return matrix_; }

  /// Largest eigenvalue of (A + A^T)/2.
  double max_symmetric_eigenvalue() const noexcept { return max_sym_eig_; }
  double min_symmetric_eigenvalue() const noexcept { return min_sym_eig_; }
  double spectral_norm() const noexcept { return spectral_norm_; }

  StateVector apply(const StateVector& z) const {
    if (!(z.grid() == grid_)) throw DimensionError("operator and state live on different grids");
    return StateVector(grid_, matrix_.apply(z.values()));
  }

  /// A - B B^* with B the identity.
  LinearOperator minus_identity() const { return LinearOperator(grid_, matrix_.shifted(-1.0, 1.0)); }

 private:
  Grid grid_;
  BandedMatrix matrix_;
  double max_sym_eig_ = 0.0;
  double min_sym_eig_ = 0.0;
  double spectral_norm_ = 0.0;
};

/// Graph norm of D(A): ||z|| + ||A z||.
inline double norm_graph(const StateVector& z, const LinearOperator& a) {
  return norm_l2(z) + norm_l2(a.apply(z));
}

}  // namespace kdviss
