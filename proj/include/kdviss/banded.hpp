#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kdviss/errors.hpp"

namespace kdviss {

/// Square band matrix with `lower` sub- and `upper` super-diagonals.
///
/// Storage is row-major over the band: entry (i, j) with
/// -lower <= j - i <= upper lives at data_[i * width + (j - i + lower)].
class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
      : n_(n), lower_(lower), upper_(upper), data_(n * (lower + upper + 1), 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return lower_; }
  std::size_t upper() const noexcept { return upper_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return i < n_ && j < n_ && j + lower_ >= i && j <= i + upper_;
  }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return in_band(i, j) ? data_[slot(i, j)] : 0.0;
  }

  /// Mutable access; (i, j) must be inside the band.
  double& at(std::size_t i, std::size_t j) {
    if (!in_band(i, j)) {
      throw DimensionError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") outside band");
    }
    return data_[slot(i, j)];
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != n_) throw DimensionError("band matvec size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= lower_ ? i - lower_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + upper_);
      double acc = 0.0;
      for (std::size_t j = j0; j <= j1; ++j) acc += data_[slot(i, j)] * x[static_cast<Eigen::Index>(j)];
      y[static_cast<Eigen::Index>(i)] = acc;
    }
    return y;
  }

  Eigen::MatrixXd dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= lower_ ? i - lower_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + upper_);
      for (std::size_t j = j0; j <= j1; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data_[slot(i, j)];
      }
    }
    return m;
  }

  /// alpha * I + beta * this
  BandedMatrix shifted(double alpha, double beta) const {
    BandedMatrix out(*this);
    for (double& v : out.data_) v *= beta;
    for (std::size_t i = 0; i < n_; ++i) out.data_[slot(i, i)] += alpha;
    return out;
  }

  static BandedMatrix from_dense(const Eigen::MatrixXd& m, std::size_t lower, std::size_t upper) {
    if (m.rows() != m.cols()) throw DimensionError("band matrix must be square");
    const auto n = static_cast<std::size_t>(m.rows());
    BandedMatrix b(n, lower, upper);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (b.in_band(i, j)) {
          b.at(i, j) = v;
        } else if (v != 0.0) {
          throw DimensionError("dense matrix has entries outside the requested band");
        }
      }
    }
    return b;
  }

 private:
  friend class BandedLU;

  std::size_t slot(std::size_t i, std::size_t j) const noexcept {
    return i * (lower_ + upper_ + 1) + (j + lower_ - i);
  }

  std::size_t n_;
  std::size_t lower_;
  std::size_t upper_;
  std::vector<double> data_;
};

/// Doolittle LU of a band matrix without pivoting.
///
/// Valid for matrices whose symmetric part is positive definite (every
/// leading minor is then nonsingular), which covers I - tau*A for dissipative
/// A. A vanishing pivot is reported as a ConfigurationError.
class BandedLU {
 public:
  explicit BandedLU(BandedMatrix m) : lu_(std::move(m)) {
    const std::size_t n = lu_.n_;
    const std::size_t kl = lu_.lower_;
    const std::size_t ku = lu_.upper_;
    double scale = 0.0;
    for (double v : lu_.data_) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
      const double pivot = lu_.data_[lu_.slot(k, k)];
      if (!(std::abs(pivot) > 1e-14 * std::max(scale, 1.0))) {
        throw ConfigurationError("singular pivot at row " + std::to_string(k) +
                                 " in band LU factorization");
      }
      const std::size_t i_end = std::min(n - 1, k + kl);
      const std::size_t j_end = std::min(n - 1, k + ku);
      for (std::size_t i = k + 1; i <= i_end; ++i) {
        double& lik = lu_.data_[lu_.slot(i, k)];
        lik /= pivot;
        for (std::size_t j = k + 1; j <= j_end; ++j) {
          lu_.data_[lu_.slot(i, j)] -= lik * lu_.data_[lu_.slot(k, j)];
        }
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const std::size_t n = lu_.n_;
    if (static_cast<std::size_t>(b.size()) != n) throw DimensionError("band solve size mismatch");
    const std::size_t kl = lu_.lower_;
    const std::size_t ku = lu_.upper_;
    Eigen::VectorXd x = b;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = i >= kl ? i - kl : 0;
      double acc = x[static_cast<Eigen::Index>(i)];
      for (std::size_t j = j0; j < i; ++j) acc -= lu_.data_[lu_.slot(i, j)] * x[static_cast<Eigen::Index>(j)];
      x[static_cast<Eigen::Index>(i)] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      const std::size_t j1 = std::min(n - 1, ii + ku);
      double acc = x[static_cast<Eigen::Index>(ii)];
      for (std::size_t j = ii + 1; j <= j1; ++j) acc -= lu_.data_[lu_.slot(ii, j)] * x[static_cast<Eigen::Index>(j)];
      x[static_cast<Eigen::Index>(ii)] = acc / lu_.data_[lu_.slot(ii, ii)];
    }
    return x;
  }

 private:
  BandedMatrix lu_;
};

}  // namespace kdviss
