#pragma once

// Lyapunov functionals for the saturated loop and the parameter choices that
// make them decrease:
//   V  = <Pz, z>
//   V1 = V + (2M/3)||z||^3          (S = U)
//   V2 = V + M~ r ||z||^2           (S != U, data with graph norm <= r)

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kdviss/closed_loop.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/kdv.hpp"
#include "kdviss/linear_operator.hpp"
#include "kdviss/lyapunov_functions.hpp"
#include "kdviss/random.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

/// Case-1 weights and the resulting ISS-Lyapunov rates.
struct Case1Params {
  double m = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  /// C - 2 M C0/eps2 - |B|^2 |P|^2/eps1
  double alpha = 0.0;
  /// Same expression with the C0 factor dropped from the middle term.
  double alpha_without_c0 = 0.0;
  /// C0 2 M eps2 + k^2 eps1
  double rho_gain = 0.0;
};

struct Case2Params {
  double m_tilde = 0.0;
  std::optional<double> mu;  // C / (|P| + M~ r), when C and r are known
};

struct LyapunovParams {
  std::optional<LinearOperator> p;  // identity when empty
  double c = 0.0;
  double norm_b = 1.0;
  double k = 1.0;
  double c0 = 0.0;
  double m = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double m_tilde = 0.0;
  double r = 0.0;
  double c_s = 0.0;

  double norm_p() const { return p ? p->spectral_norm() : 1.0; }

  bool case1_feasible() const {
    const double np = norm_p();
    return m >= 2.0 * norm_b * np && eps1 > 0.0 && eps2 > 0.0 &&
           2.0 * m * c0 / eps2 + norm_b * norm_b * np * np / eps1 <= c * (1.0 + 1e-12);
  }

  bool case2_feasible() const { return m_tilde > 2.0 * c_s * norm_p(); }

  /// P must be symmetric and positive definite.
  void validate_p() const {
    if (!p) return;
    const Eigen::MatrixXd d = p->matrix().dense();
    if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff())) {
      throw ParameterError("P must be symmetric");
    }
    if (!(p->min_symmetric_eigenvalue() > 0.0)) throw ParameterError("P must be positive definite");
  }

  ObserverSettings observers() const {
    ObserverSettings o;
    o.p = p;
    o.m = m;
    o.m_tilde = m_tilde;
    o.r = r;
    return o;
  }
};

inline double v_quadratic(const LyapunovParams& params, const StateVector& z) {
  return v_quadratic(params.p, z);
}

inline double v1(const LyapunovParams& params, const StateVector& z) {
  if (!(params.m > 0.0)) throw ParameterError("V1 needs M > 0");
  return v1_value(params.p, params.m, z);
}

inline double v2(const LyapunovParams& params, const StateVector& z) {
  if (!(params.m_tilde > 0.0) || !(params.r > 0.0)) throw ParameterError("V2 needs M~ > 0 and r > 0");
  return v2_value(params.p, params.m_tilde, params.r, z);
}

/// Largest C with  <Ã z, P z> + <P z, Ã z> <= -C ||z||^2,  Ã = A - B B^*.
inline double measure_decay_constant(const LinearOperator& a,
                                     const std::optional<LinearOperator>& p = std::nullopt) {
  const Eigen::MatrixXd at = a.matrix().dense() - Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(a.grid().size()), static_cast<Eigen::Index>(a.grid().size()));
  const Eigen::MatrixXd pm = p ? p->matrix().dense()
                               : Eigen::MatrixXd::Identity(at.rows(), at.cols());
  const Eigen::MatrixXd form = at.transpose() * pm + pm * at;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (form + form.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return -eig.eigenvalues().maxCoeff();
}

/// Minimal admissible M and an even split of `safety * C` between the two
/// constraint terms, so the decrease rate keeps (1 - safety) C.
inline Case1Params select_params_case1(double c, double norm_b, double norm_p, double c0, double k,
                                       double safety = 0.5) {
  if (!(c > 0.0)) throw InfeasibleParameters("decay constant C must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw ParameterError("safety must lie in (0, 1)");
  if (!(norm_b > 0.0) || !(norm_p > 0.0) || !(c0 > 0.0) || !(k > 0.0)) {
    throw ParameterError("case-1 constants must be positive");
  }
  Case1Params out;
  out.m = 2.0 * norm_b * norm_p;
  const double share = 0.5 * safety * c;
  out.eps2 = 2.0 * out.m * c0 / share;
  out.eps1 = norm_b * norm_b * norm_p * norm_p / share;
  const double t1 = norm_b * norm_b * norm_p * norm_p / out.eps1;
  out.alpha = c - 2.0 * out.m * c0 / out.eps2 - t1;
  out.alpha_without_c0 = c - 2.0 * out.m / out.eps2 - t1;
  out.rho_gain = c0 * 2.0 * out.m * out.eps2 + k * k * out.eps1;
  if (!(out.alpha > 0.0)) throw InfeasibleParameters("case-1 decrease rate is not positive");
  return out;
}

/// M~ = margin * 2 c_S |P|, and mu = C/(|P| + M~ r) when C and r are given.
inline Case2Params select_param_case2(double c_s, double norm_p, double margin,
                                      std::optional<double> c = std::nullopt,
                                      std::optional<double> r = std::nullopt) {
  if (!(c_s > 0.0) || !(norm_p > 0.0)) throw ParameterError("c_S and |P| must be positive");
  if (!(margin > 1.0)) throw ParameterError("margin must exceed 1 (M~ > 2 c_S |P| is strict)");
  Case2Params out;
  out.m_tilde = margin * 2.0 * c_s * norm_p;
  if (c && r) {
    if (!(*r > 0.0)) throw ParameterError("r must be positive");
    out.mu = *c / (norm_p + out.m_tilde * *r);
  }
  return out;
}

/// Sup of ||z||_inf / ||z||_{D(A)} over smooth samples.
inline double estimate_embedding_constant(const LinearOperator& a, long n_samples,
                                          std::uint64_t rng_seed) {
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  double best = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    auto rng = sample_engine(rng_seed, static_cast<std::uint64_t>(i));
    const StateVector z = random_smooth(a.grid(), rng);
    const double g = norm_graph(z, a);
    if (g > 0.0) best = std::max(best, norm_linf(z) / g);
  }
  return best;
}

inline double estimate_embedding_constant(const Grid& grid, long n_samples, std::uint64_t rng_seed) {
  return estimate_embedding_constant(build_kdv_operator(grid), n_samples, rng_seed);
}

enum class LyapunovChoice { V, V1, V2 };

struct DissipationReport {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> dv_dt;
  std::vector<double> bound;
  std::vector<double> margin;
  long violation_count = 0;
  double worst_margin = 0.0;
};

/// Checks dV/dt <= -alpha ||z||^2 + rho ||d||^2 along a recorded trajectory.
/// dV/dt is a centered difference (one-sided at the ends); a step counts as a
/// violation when margin < -1e-6 (1 + |V|)/dt.
inline DissipationReport dissipation_report(const Trajectory& traj, LyapunovChoice which,
                                            double alpha_coeff, double rho_gain) {
  const std::size_t n = traj.size();
  if (n < 3) throw ParameterError("dissipation report needs at least 3 records");
  DissipationReport rep;
  rep.t = traj.times;
  rep.v.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Observables& o = traj.observables[k];
    rep.v[k] = which == LyapunovChoice::V ? o.v : which == LyapunovChoice::V1 ? o.v1 : o.v2;
  }
  rep.dv_dt.resize(n);
  rep.bound.resize(n);
  rep.margin.resize(n);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? k : k + 1;
    const double span = traj.times[hi] - traj.times[lo];
    rep.dv_dt[k] = (rep.v[hi] - rep.v[lo]) / span;
    const Observables& o = traj.observables[k];
    rep.bound[k] = -alpha_coeff * o.norm_l2 * o.norm_l2 + rho_gain * o.norm_d * o.norm_d;
    rep.margin[k] = rep.bound[k] - rep.dv_dt[k];
    const double dt = k + 1 < n ? traj.times[k + 1] - traj.times[k] : traj.times[k] - traj.times[k - 1];
    const double tol = 1e-6 * (1.0 + std::abs(rep.v[k])) / dt;
    if (rep.margin[k] < -tol) ++rep.violation_count;
    rep.worst_margin = std::min(rep.worst_margin, rep.margin[k]);
  }
  return rep;
}

inline void write_dissipation_csv(std::ostream& os, const DissipationReport& rep) {
  std::ostringstream s;
  s.precision(17);
  s << "t,V,dVdt,bound,margin\n";
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    s << rep.t[k] << ',' << rep.v[k] << ',' << rep.dv_dt[k] << ',' << rep.bound[k] << ','
      << rep.margin[k] << '\n';
  }
  os << s.str();
}

}  // namespace kdviss
