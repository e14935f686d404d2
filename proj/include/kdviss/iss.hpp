#pragma once

// Trajectory-level ISS analysis of the saturated loop.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kdviss/closed_loop.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/parallel.hpp"
#include "kdviss/random.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

// ---------------------------------------------------------------------------
// Disturbance gap

struct GapReport {
  std::vector<double> t;
  std::vector<double> gap;                 // ||z^d(t) - z(t)||
  std::vector<double> paper_bound;         // sqrt(k/2 * int_0^t ||d||^2)
  std::vector<double> conservative_bound;  // sqrt(int_0^t e^{a(t-s)} b ||d(s)||^2 ds)
  long paper_bound_violations = 0;
  long conservative_violations = 0;
  double growth_rate = 0.0;  // a = 3 k |B|^2
  double forcing_gain = 0.0; // b = k
};

inline bool exceeds(double value, double bound) { return value > bound * (1.0 + 1e-6) + 1e-8; }

/// Runs the loop from z0 with disturbance d and without it, and bounds their
/// difference. The gap obeys
///   d/dt ||e||^2 <= 2k(||B^*e|| + ||d||)||B^*e|| <= 3k|B|^2 ||e||^2 + k ||d||^2,
/// so the retained-exponential bound uses a = 3k|B|^2 and b = k.
inline GapReport gronwall_gap(const SaturatedSystem& sys, const StateVector& z0,
                              const DisturbanceSignal& d, double t_final, double dt) {
  ObserverSettings obs;
  obs.store_states = true;
  const SaturatedSystem disturbed = sys.with_disturbance(d);
  const SaturatedSystem undisturbed = sys.with_disturbance(DisturbanceSignal::zero());
  Trajectory with_d;
  Trajectory without_d;
  parallel_for(2, [&](std::size_t i) {
    if (i == 0) with_d = simulate(disturbed, z0, t_final, dt, obs);
    else without_d = simulate(undisturbed, z0, t_final, dt, obs);
  });

  const double k = sys.saturation() ? sys.saturation()->lipschitz_k() : 1.0;
  const double nb = sys.norm_b();
  GapReport rep;
  rep.growth_rate = 3.0 * k * nb * nb;
  rep.forcing_gain = k;
  const std::size_t n = with_d.size();
  rep.t = with_d.times;
  rep.gap.resize(n);
  rep.paper_bound.resize(n);
  rep.conservative_bound.resize(n);

  double plain = 0.0;     // int ||d||^2
  double weighted = 0.0;  // int e^{a(t-s)} ||d||^2
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double h = rep.t[j] - rep.t[j - 1];
      const double d0 = with_d.observables[j - 1].norm_d;
      const double d1 = with_d.observables[j].norm_d;
      const double grow = std::exp(rep.growth_rate * h);
      plain += 0.5 * h * (d0 * d0 + d1 * d1);
      weighted = grow * weighted + 0.5 * h * (grow * d0 * d0 + d1 * d1);
    }
    rep.gap[j] = norm_l2(with_d.states[j] - without_d.states[j]);
    rep.paper_bound[j] = std::sqrt(0.5 * k * plain);
    rep.conservative_bound[j] = std::sqrt(rep.forcing_gain * weighted);
    if (exceeds(rep.gap[j], rep.paper_bound[j])) ++rep.paper_bound_violations;
    if (exceeds(rep.gap[j], rep.conservative_bound[j])) ++rep.conservative_violations;
  }
  return rep;
}

inline void write_gap_csv(std::ostream& os, const GapReport& rep) {
  std::ostringstream s;
  s.precision(17);
  s << "t,gap,paper_bound,conservative_bound\n";
  for (std::size_t j = 0; j < rep.t.size(); ++j) {
    s << rep.t[j] << ',' << rep.gap[j] << ',' << rep.paper_bound[j] << ','
      << rep.conservative_bound[j] << '\n';
  }
  os << s.str();
}

// ---------------------------------------------------------------------------
// Exponential majorants

/// K e^{-mu t} fitted to normalized decay curves y(t) = ||z(t)||/||z0||.
struct ExponentialFit {
  double k = 1.0;
  double mu = 0.0;
  double rms_residual = 0.0;
  bool decaying = false;
};

/// Least squares on log y = log K - mu t, then K is lifted so that
/// K e^{-mu t} >= y at every sample.
inline ExponentialFit fit_majorant(const std::vector<std::vector<double>>& times,
                                   const std::vector<std::vector<double>>& ratios) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  long count = 0;
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (std::size_t j = 0; j < times[s].size(); ++j) {
      const double y = ratios[s][j];
      if (!(y > 1e-300)) continue;
      const double t = times[s][j];
      const double ly = std::log(y);
      st += t;
      sy += ly;
      stt += t * t;
      sty += t * ly;
      ++count;
    }
  }
  ExponentialFit fit;
  if (count < 2) return fit;
  const double denom = count * stt - st * st;
  if (!(denom > 0.0)) return fit;
  const double slope = (count * sty - st * sy) / denom;
  fit.mu = -slope;
  const double intercept = (sy - slope * st) / count;
  double lift = 0.0;
  double sq = 0.0;
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (std::size_t j = 0; j < times[s].size(); ++j) {
      const double y = ratios[s][j];
      if (!(y > 1e-300)) continue;
      const double t = times[s][j];
      const double resid = std::log(y) - (intercept - fit.mu * t);
      sq += resid * resid;
      lift = std::max(lift, std::log(y) + fit.mu * t);
    }
  }
  fit.k = std::max(1.0, std::exp(lift));
  fit.rms_residual = std::sqrt(sq / count);
  fit.decaying = fit.mu > 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Semi-global exponential stability

struct SemiGlobalFit {
  std::vector<double> r_values;
  std::vector<double> K_of_r;
  std::vector<double> mu_of_r;
  std::vector<double> fit_residuals;
  std::vector<bool> certified;
  /// Initial data used for each r (graph norm exactly r).
  std::vector<std::vector<StateVector>> initial_states;
  double horizon = 0.0;
  double dt = 0.0;

  std::optional<std::size_t> index_of(double r) const {
    for (std::size_t i = 0; i < r_values.size(); ++i) {
      if (std::abs(r_values[i] - r) <= 1e-12 * std::max(1.0, std::abs(r))) return i;
    }
    return std::nullopt;
  }
};

/// For every r, draws smooth profiles (the same shapes for every r), scales
/// them to graph norm r, simulates the undisturbed loop and fits a majorizing
/// K(r) e^{-mu(r) t}.
inline SemiGlobalFit fit_semiglobal(const SaturatedSystem& sys, const std::vector<double>& r_values,
                                    long samples_per_r, double t_final, double dt,
                                    std::uint64_t rng_seed) {
  if (r_values.empty()) throw ParameterError("r_values must not be empty");
  if (samples_per_r < 1) throw ParameterError("samples_per_r must be >= 1");
  if (!sys.disturbance().is_zero()) throw ParameterError("semi-global fit needs d = 0");

  SemiGlobalFit fit;
  fit.r_values = r_values;
  fit.horizon = t_final;
  fit.dt = dt;
  const std::size_t nr = r_values.size();
  const auto ns = static_cast<std::size_t>(samples_per_r);
  fit.initial_states.resize(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    if (!(r_values[i] > 0.0)) throw ParameterError("r values must be positive");
    for (std::size_t s = 0; s < ns; ++s) {
      auto rng = sample_engine(rng_seed, s);
      fit.initial_states[i].push_back(random_smooth_with_graph_norm(sys.op(), r_values[i], rng));
    }
  }

  std::vector<std::vector<double>> times(nr * ns);
  std::vector<std::vector<double>> ratios(nr * ns);
  ObserverSettings obs;
  obs.store_states = false;
  parallel_for(nr * ns, [&](std::size_t idx) {
    const StateVector& z0 = fit.initial_states[idx / ns][idx % ns];
    const Trajectory tr = simulate(sys, z0, t_final, dt, obs);
    const double n0 = tr.observables.front().norm_l2;
    times[idx] = tr.times;
    ratios[idx].resize(tr.size());
    for (std::size_t j = 0; j < tr.size(); ++j) ratios[idx][j] = tr.observables[j].norm_l2 / n0;
  });

  for (std::size_t i = 0; i < nr; ++i) {
    const std::vector<std::vector<double>> ts(times.begin() + static_cast<long>(i * ns),
                                              times.begin() + static_cast<long>((i + 1) * ns));
    const std::vector<std::vector<double>> ys(ratios.begin() + static_cast<long>(i * ns),
                                              ratios.begin() + static_cast<long>((i + 1) * ns));
    const ExponentialFit f = fit_majorant(ts, ys);
    fit.K_of_r.push_back(f.k);
    fit.mu_of_r.push_back(f.decaying ? f.mu : std::numeric_limits<double>::quiet_NaN());
    fit.fit_residuals.push_back(f.rms_residual);
    fit.certified.push_back(f.decaying);
  }
  return fit;
}

struct Globalization {
  double t_r = 0.0;       // ln(r K_r)/mu_r, clamped at 0
  double k_global = 1.0;  // K_1 e^{mu_1 T_r}
  double mu_global = 0.0; // mu_1
};

/// Hand-off construction from the semi-global fit: after T_r every
/// trajectory with ||z0|| <= r is inside the unit ball, from where the r = 1
/// constants apply.
inline Globalization globalize(const SemiGlobalFit& fit, double r) {
  const auto ir = fit.index_of(r);
  const auto i1 = fit.index_of(1.0);
  if (!ir) throw ParameterError("fit does not contain the requested r");
  if (!i1) throw ParameterError("fit does not contain the reference level r = 1");
  if (!fit.certified[*ir] || !fit.certified[*i1]) throw FitFailure("fit is not certified at r or at 1");
  const double kr = fit.K_of_r[*ir];
  const double mur = fit.mu_of_r[*ir];
  Globalization g;
  g.t_r = r * kr <= 1.0 ? 0.0 : std::log(r * kr) / mur;
  g.mu_global = fit.mu_of_r[*i1];
  g.k_global = fit.K_of_r[*i1] * std::exp(g.mu_global * g.t_r);
  return g;
}

struct GlobalizationCheck {
  double max_norm_at_t_r = 0.0;     // max ||z(T_r)|| over the ensemble
  double max_global_ratio = 0.0;    // max ||z(t)|| / (K e^{-mu t} ||z0||), t >= T_r
  long samples = 0;
};

/// Re-simulates the r-ensemble of the fit up to max(T_r, horizon) and
/// measures the two claims of the construction.
inline GlobalizationCheck verify_globalization(const SaturatedSystem& sys, const SemiGlobalFit& fit,
                                               double r, const Globalization& g) {
  const auto ir = fit.index_of(r);
  if (!ir) throw ParameterError("fit does not contain the requested r");
  const auto& ens = fit.initial_states[*ir];
  const double horizon = std::max(fit.horizon, g.t_r);
  std::vector<double> at_tr(ens.size(), 0.0);
  std::vector<double> ratio(ens.size(), 0.0);
  parallel_for(ens.size(), [&](std::size_t s) {
    ObserverSettings obs;
    obs.store_states = false;
    const StateVector& z0 = ens[s];
    const double n0 = norm_l2(z0);
    if (g.t_r > 0.0) {
      const Trajectory head = simulate(sys, z0, g.t_r, std::min(fit.dt, g.t_r), obs);
      at_tr[s] = head.observables.back().norm_l2;
    } else {
      at_tr[s] = n0;
    }
    const Trajectory tr = simulate(sys, z0, horizon, fit.dt, obs);
    for (std::size_t j = 0; j < tr.size(); ++j) {
      const double t = tr.times[j];
      if (t + 1e-12 < g.t_r) continue;
      const double bound = g.k_global * std::exp(-g.mu_global * t) * n0;
      ratio[s] = std::max(ratio[s], tr.observables[j].norm_l2 / bound);
    }
  });
  GlobalizationCheck c;
  c.samples = static_cast<long>(ens.size());
  c.max_norm_at_t_r = *std::max_element(at_tr.begin(), at_tr.end());
  c.max_global_ratio = *std::max_element(ratio.begin(), ratio.end());
  return c;
}

inline void write_key_values(std::ostream& os, const SemiGlobalFit& fit) {
  std::ostringstream s;
  s.precision(17);
  for (std::size_t i = 0; i < fit.r_values.size(); ++i) {
    s << "r[" << i << "]=" << fit.r_values[i] << '\n'
      << "K[" << i << "]=" << fit.K_of_r[i] << '\n'
      << "mu[" << i << "]=" << fit.mu_of_r[i] << '\n'
      << "residual[" << i << "]=" << fit.fit_residuals[i] << '\n'
      << "certified[" << i << "]=" << (fit.certified[i] ? "true" : "false") << '\n';
  }
  os << s.str();
}

// ---------------------------------------------------------------------------
// ISS certificate

struct IssCertificate {
  double K = 1.0;
  double mu = 0.0;
  double rho_gain = 0.0;
  long ensemble_size = 0;
  double max_violation = 0.0;
  bool valid = false;
  long worst_member = -1;  // member with the largest pre-gain excess
  double tolerance = 1e-6;
};

/// Members are all pairs (z0_i, d_j). The KL part K e^{-mu t} s is the
/// majorizing fit of the undisturbed runs from each z0_i; the gain is then
/// the least rho with
///   ||z(t)|| <= K e^{-mu t} ||z0|| + rho ||d||_{L2(0,T;U)}
/// on every member at every recorded t.
inline IssCertificate iss_certificate(const SaturatedSystem& sys,
                                      const std::vector<StateVector>& z0_ensemble,
                                      const std::vector<DisturbanceSignal>& d_ensemble,
                                      double t_final, double dt, double gain_cap = 1e6,
                                      double tolerance = 1e-6) {
  if (z0_ensemble.empty() || d_ensemble.empty()) throw ParameterError("ensembles must be nonempty");
  const std::size_t nz = z0_ensemble.size();
  const std::size_t nd = d_ensemble.size();
  ObserverSettings obs;
  obs.store_states = false;

  // undisturbed runs fix the KL part
  std::vector<Trajectory> free_runs(nz);
  parallel_for(nz, [&](std::size_t i) {
    free_runs[i] = simulate(sys.with_disturbance(DisturbanceSignal::zero()), z0_ensemble[i],
                            t_final, dt, obs);
  });
  std::vector<std::vector<double>> ts;
  std::vector<std::vector<double>> ys;
  for (const Trajectory& tr : free_runs) {
    const double n0 = tr.observables.front().norm_l2;
    if (n0 == 0.0) continue;
    std::vector<double> y(tr.size());
    for (std::size_t j = 0; j < tr.size(); ++j) y[j] = tr.observables[j].norm_l2 / n0;
    ts.push_back(tr.times);
    ys.push_back(std::move(y));
  }
  IssCertificate cert;
  cert.tolerance = tolerance;
  cert.ensemble_size = static_cast<long>(nz * nd);
  if (ts.empty()) {
    cert.K = 1.0;
    cert.mu = 1.0;
  } else {
    const ExponentialFit f = fit_majorant(ts, ys);
    if (!f.decaying) throw FitFailure("undisturbed ensemble does not decay");
    cert.K = f.k;
    cert.mu = f.mu;
  }

  std::vector<Trajectory> runs(nz * nd);
  parallel_for(nz * nd, [&](std::size_t idx) {
    const std::size_t i = idx / nd;
    const std::size_t j = idx % nd;
    if (d_ensemble[j].is_zero()) return;  // identical to the free run
    runs[idx] = simulate(sys.with_disturbance(d_ensemble[j]), z0_ensemble[i], t_final, dt, obs);
  });
  auto member = [&](std::size_t idx) -> const Trajectory& {
    return d_ensemble[idx % nd].is_zero() ? free_runs[idx / nd] : runs[idx];
  };

  auto excess = [&](const Trajectory& tr, std::size_t j) {
    const double n0 = tr.observables.front().norm_l2;
    return tr.observables[j].norm_l2 - cert.K * std::exp(-cert.mu * tr.times[j]) * n0;
  };

  double rho = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < nz * nd; ++idx) {
    const Trajectory& tr = member(idx);
    const double dnorm = tr.disturbance_energy_norm().back();
    for (std::size_t j = 0; j < tr.size(); ++j) {
      const double e = excess(tr, j);
      if (e > worst) {
        worst = e;
        cert.worst_member = static_cast<long>(idx);
      }
      if (e > 0.0 && dnorm > 0.0) rho = std::max(rho, e / dnorm);
    }
  }
  cert.rho_gain = std::min(rho, gain_cap);

  double max_violation = 0.0;
  for (std::size_t idx = 0; idx < nz * nd; ++idx) {
    const Trajectory& tr = member(idx);
    const double dnorm = tr.disturbance_energy_norm().back();
    for (std::size_t j = 0; j < tr.size(); ++j) {
      max_violation = std::max(max_violation, excess(tr, j) - cert.rho_gain * dnorm);
    }
  }
  cert.max_violation = max_violation;
  cert.valid = max_violation <= tolerance && rho <= gain_cap;
  return cert;
}

inline void write_key_values(std::ostream& os, const IssCertificate& c) {
  std::ostringstream s;
  s.precision(17);
  s << "K=" << c.K << '\n'
    << "mu=" << c.mu << '\n'
    << "rho_gain=" << c.rho_gain << '\n'
    << "ensemble_size=" << c.ensemble_size << '\n'
    << "max_violation=" << c.max_violation << '\n'
    << "tolerance=" << c.tolerance << '\n'
    << "worst_member=" << c.worst_member << '\n'
    << "valid=" << (c.valid ? "true" : "false") << '\n';
  os << s.str();
}

// ---------------------------------------------------------------------------
// Bounded reachability

struct BrsResult {
  bool holds = true;
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// ||z(t)||^2 <= ||z0||^2 + C0 ||d||_{L2(0,t;U)} at every record, with
/// slack 1e-8 (1 + ||z0||^2).
inline BrsResult brs_check(const Trajectory& traj, double c0) {
  BrsResult res;
  if (traj.size() == 0) return res;
  const double n0 = traj.observables.front().norm_l2;
  const double tol = 1e-8 * (1.0 + n0 * n0);
  const std::vector<double> dn = traj.disturbance_energy_norm();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double nz = traj.observables[k].norm_l2;
    const double margin = n0 * n0 + c0 * dn[k] - nz * nz;
    res.worst_margin = std::min(res.worst_margin, margin);
    if (margin < -tol) res.holds = false;
  }
  return res;
}

}  // namespace kdviss
