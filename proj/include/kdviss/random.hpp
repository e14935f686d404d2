#pragma once

// Deterministic sample generators. Every sample i of a stream seeded with s
// gets its own engine seeded from (s, i), so results do not depend on the
// order in which samples are evaluated.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "kdviss/linear_operator.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5851f42d4c957f2dULL)));
}

/// Node-wise uniform in [-amplitude, amplitude].
inline StateVector random_rough(const Grid& grid, double amplitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
  return StateVector(grid, std::move(v));
}

/// Random sine series with `modes` terms, rescaled so that its sup norm is a
/// uniform draw in (0, amplitude].
inline StateVector random_fourier(const Grid& grid, double amplitude, std::mt19937_64& rng,
                                  int modes = 8) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l = grid.length();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  for (int j = 1; j <= modes; ++j) {
    const double a = gauss(rng) / j;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] += a * std::sin(j * std::numbers::pi * grid.node(i) / l);
    }
  }
  const double sup = v.cwiseAbs().maxCoeff();
  if (sup > 0.0) v *= amplitude * (1.0 - u(rng)) / sup;
  return StateVector(grid, std::move(v));
}

/// Smooth data compatible with the discrete KdV boundary conditions: a sine
/// series with mode amplitudes decaying like j^-3, multiplied by the envelope
/// (4x(L-x)/L^2)^4. The envelope makes the profile vanish to fourth order at
/// both ends, so the ghost values used by the stencil are consistent with it.
inline StateVector random_smooth(const Grid& grid, std::mt19937_64& rng, int modes = 6) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double l = grid.length();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  for (int j = 1; j <= modes; ++j) {
    const double a = gauss(rng) / (static_cast<double>(j) * j * j);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] += a * std::sin(j * std::numbers::pi * grid.node(i) / l);
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i);
    const double e = 4.0 * x * (l - x) / (l * l);
    v[static_cast<Eigen::Index>(i)] *= e * e * e * e;
  }
  return StateVector(grid, std::move(v));
}

/// random_smooth rescaled to graph norm exactly `radius`.
inline StateVector random_smooth_with_graph_norm(const LinearOperator& a, double radius,
                                                 std::mt19937_64& rng) {
  StateVector z = random_smooth(a.grid(), rng);
  const double g = norm_graph(z, a);
  if (g > 0.0) z *= radius / g;
  return z;
}

}  // namespace kdviss
