#pragma once

// Grid functions on a uniform 1-D mesh of [0, L] with homogeneous Dirichlet
// boundary nodes, and the discrete inner product / norms used throughout.
//
// All integrals use the rectangle rule h * sum over interior nodes. Boundary
// nodes carry zero, so this coincides with the trapezoid rule.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include "kdviss/errors.hpp"

namespace kdviss {

/// Uniform grid on [0, L]: nodes x_j = j*h, j = 0..n+1, with x_0 and x_{n+1}
/// the (implicitly zero) Dirichlet nodes.
class Grid {
 public:
  Grid(double length, std::size_t n_interior) : length_(length), n_(n_interior) {
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw ParameterError("grid length must be positive and finite");
    }
    if (n_interior < 3) {
      throw ParameterError("grid needs at least 3 interior nodes, got " +
                           std::to_string(n_interior));
    }
    h_ = length_ / static_cast<double>(n_ + 1);
  }

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }

  /// Coordinate of interior node i (0-based), i.e. x_{i+1}.
  double node(std::size_t i) const noexcept {
    return static_cast<double>(i + 1) * h_;
  }

  Eigen::VectorXd nodes() const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) x[static_cast<Eigen::Index>(i)] = node(i);
    return x;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  double length_;
  std::size_t n_;
  double h_;
};

/// Real grid function: values at the interior nodes of `grid`.
class StateVector {
 public:
  explicit StateVector(const Grid& grid)
      : grid_(grid), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()))) {}

  StateVector(const Grid& grid, Eigen::VectorXd values)
      : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
      throw DimensionError("state has " + std::to_string(values_.size()) +
                           " values, grid has " + std::to_string(grid_.size()) +
                           " interior nodes");
    }
    if (!values_.allFinite()) {
      throw ParameterError("state contains non-finite values");
    }
  }

  /// Samples f at the interior nodes.
  static StateVector sample(const Grid& grid, const std::function<double(double)>& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = f(grid.node(i));
    }
    return StateVector(grid, std::move(v));
  }

  static StateVector constant(const Grid& grid, double c) {
    return StateVector(grid,
                       Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), c));
  }

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }
  std::size_t size() const noexcept { return grid_.size(); }

  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  StateVector& operator+=(const StateVector& o) {
    check_same_grid(o);
    values_ += o.values_;
    return *this;
  }
  StateVector& operator-=(const StateVector& o) {
    check_same_grid(o);
    values_ -= o.values_;
    return *this;
  }
  StateVector& operator*=(double s) {
    values_ *= s;
    return *this;
  }

  friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
  friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
  friend StateVector operator*(double s, StateVector a) { return a *= s; }
  friend StateVector operator*(StateVector a, double s) { return a *= s; }

  void check_same_grid(const StateVector& o) const {
    if (!(grid_ == o.grid_)) throw DimensionError("grid mismatch between states");
  }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

inline double inner_l2(const StateVector& a, const StateVector& b) {
  a.check_same_grid(b);
  return a.grid().spacing() * a.values().dot(b.values());
}

inline double norm_l2(const StateVector& z) {
  return std::sqrt(z.grid().spacing()) * z.values().norm();
}

inline double norm_linf(const StateVector& z) {
  return z.size() == 0 ? 0.0 : z.values().cwiseAbs().maxCoeff();
}

/// Discrete L1 norm; stands in for the dual norm of L-infinity.
inline double norm_l1(const StateVector& z) {
  return z.grid().spacing() * z.values().cwiseAbs().sum();
}

}  // namespace kdviss
