#pragma once

#include <cmath>
#include <optional>

#include "kdviss/errors.hpp"
#include "kdviss/linear_operator.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

/// V(z) = <P z, z>; P = identity when absent.
inline double v_quadratic(const std::optional<LinearOperator>& p, const StateVector& z) {
  if (!p) return inner_l2(z, z);
  return inner_l2(p->apply(z), z);
}

/// V1(z) = V(z) + (2M/3) ||z||^3
inline double v1_value(const std::optional<LinearOperator>& p, double m, const StateVector& z) {
  const double n = norm_l2(z);
  return v_quadratic(p, z) + (2.0 * m / 3.0) * n * n * n;
}

/// V2(z) = V(z) + M~ r ||z||^2
inline double v2_value(const std::optional<LinearOperator>& p, double m_tilde, double r,
                       const StateVector& z) {
  const double n = norm_l2(z);
  return v_quadratic(p, z) + m_tilde * r * n * n;
}

}  // namespace kdviss
