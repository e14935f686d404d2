#pragma once

// Finite-difference generator of the linearized KdV equation
//   z_t = -z_x - z_xxx,  z(0) = z(L) = 0,  z_x(L) = 0.

#include <algorithm>
#include <cstdint>
#include <string>

#include "kdviss/banded.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/linear_operator.hpp"
#include "kdviss/random.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

/// Relative slack of the dissipativity gate: lambda_max <= 1e-8 * ||A||.
inline constexpr double kDissipativityRelTol = 1e-8;

inline double dissipativity_tolerance(const LinearOperator& a) {
  return kDissipativityRelTol * a.spectral_norm();
}

/// Throws DissipativityGateFailed unless (A + A^T)/2 is negative
/// semidefinite within dissipativity_tolerance(A).
inline void require_dissipative(const LinearOperator& a) {
  const double tol = dissipativity_tolerance(a);
  if (a.max_symmetric_eigenvalue() > tol) {
    throw DissipativityGateFailed(a.max_symmetric_eigenvalue(), tol);
  }
}

/// Banded matrix of A z = -z' - z''' on the interior nodes.
///
/// z' uses the backward difference (z_j - z_{j-1})/h; z''' the centered
/// stencil (-z_{j-2} + 2 z_{j-1} - 2 z_{j+1} + z_{j+2})/(2h^3). Ghost values:
/// z_0 = z_{-1} = 0 and z_{n+1} = 0 (Dirichlet), z_{n+2} = z_n (z_x(L) = 0).
inline BandedMatrix kdv_matrix(const Grid& grid) {
  const std::size_t n = grid.size();
  if (n < 5) throw ParameterError("KdV operator needs n_interior >= 5");
  const double h = grid.spacing();
  const double c1 = 1.0 / h;
  const double c3 = 1.0 / (2.0 * h * h * h);
  BandedMatrix m(n, 2, 2);
  // node j = r + 1 of the full grid; columns are interior nodes 1..n
  auto add = [&](std::size_t row, long node, double w) {
    const long last = static_cast<long>(n);
    if (node == last + 2) node = last;  // reflective ghost
    if (node < 1 || node > last) return;
    m.at(row, static_cast<std::size_t>(node - 1)) += w;
  };
  for (std::size_t r = 0; r < n; ++r) {
    const long j = static_cast<long>(r) + 1;
    add(r, j, -c1);
    add(r, j - 1, c1);
    add(r, j - 2, c3);
    add(r, j - 1, -2.0 * c3);
    add(r, j + 1, 2.0 * c3);
    add(r, j + 2, -c3);
  }
  return m;
}

/// Assembles the KdV generator and enforces the dissipativity gate.
inline LinearOperator build_kdv_operator(const Grid& grid) {
  LinearOperator a(grid, kdv_matrix(grid));
  require_dissipative(a);
  return a;
}

/// Max of the sampled Rayleigh quotients <Az, z>/||z||^2 and the exact
/// eigen-bound lambda_max((A + A^T)/2).
inline double check_dissipativity(const LinearOperator& a, long n_samples, std::uint64_t rng_seed) {
  double worst = a.max_symmetric_eigenvalue();
  for (long i = 0; i < n_samples; ++i) {
    auto rng = sample_engine(rng_seed, static_cast<std::uint64_t>(i));
    const StateVector z = (i % 2 == 0) ? random_rough(a.grid(), 1.0, rng)
                                       : random_fourier(a.grid(), 1.0, rng);
    const double nz = inner_l2(z, z);
    if (nz > 0.0) worst = std::max(worst, inner_l2(a.apply(z), z) / nz);
  }
  return worst;
}

}  // namespace kdviss
