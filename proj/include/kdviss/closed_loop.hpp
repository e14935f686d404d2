#pragma once

// Saturated closed loop  z' = A z - B sat(B^* z + d(t))  with B = I, and its
// IMEX time integration: Crank-Nicolson on A, explicit midpoint on the
// feedback term.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kdviss/banded.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/linear_operator.hpp"
#include "kdviss/lyapunov_functions.hpp"
#include "kdviss/saturation.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

/// Time-dependent disturbance d(t), a grid function for every t.
class DisturbanceSignal {
 public:
  enum class Kind { Zero, CosineScaled, PiecewiseConstantTable, Custom };

  DisturbanceSignal() = default;

  static DisturbanceSignal zero() { return {}; }

  /// d(t)(x) = amplitude * cos(frequency * t), constant in space.
  static DisturbanceSignal cosine(double amplitude, double frequency = 1.0) {
    DisturbanceSignal d;
    d.kind_ = Kind::CosineScaled;
    d.amplitude_ = amplitude;
    d.frequency_ = frequency;
    return d;
  }

  /// Tabulated samples (t_i, d_i), linearly interpolated in t and held
  /// constant outside the table range. Times must be strictly increasing.
  static DisturbanceSignal table(std::vector<std::pair<double, StateVector>> samples) {
    if (samples.empty()) throw ParameterError("disturbance table is empty");
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (!(samples[i].first > samples[i - 1].first)) {
        throw ParameterError("disturbance table times must be strictly increasing");
      }
      samples[i].second.check_same_grid(samples[0].second);
    }
    DisturbanceSignal d;
    d.kind_ = Kind::PiecewiseConstantTable;
    d.table_ = std::make_shared<const std::vector<std::pair<double, StateVector>>>(std::move(samples));
    return d;
  }

  static DisturbanceSignal custom(std::function<StateVector(const Grid&, double)> f) {
    DisturbanceSignal d;
    d.kind_ = Kind::Custom;
    d.custom_ = std::move(f);
    return d;
  }

  Kind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double frequency() const noexcept { return frequency_; }
  bool is_zero() const noexcept {
    return kind_ == Kind::Zero || (kind_ == Kind::CosineScaled && amplitude_ == 0.0);
  }

  StateVector operator()(const Grid& grid, double t) const {
    switch (kind_) {
      case Kind::Zero:
        return StateVector(grid);
      case Kind::CosineScaled:
        return StateVector::constant(grid, amplitude_ * std::cos(frequency_ * t));
      case Kind::PiecewiseConstantTable:
        return interpolate(grid, t);
      case Kind::Custom:
        return custom_(grid, t);
    }
    return StateVector(grid);
  }

 private:
  StateVector interpolate(const Grid& grid, double t) const {
    const auto& tab = *table_;
    if (!(tab.front().second.grid() == grid)) throw DimensionError("disturbance table grid mismatch");
    if (t <= tab.front().first) return tab.front().second;
    if (t >= tab.back().first) return tab.back().second;
    auto it = std::upper_bound(tab.begin(), tab.end(), t,
                               [](double v, const auto& e) { return v < e.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.first) / (hi.first - lo.first);
    return (1.0 - w) * lo.second + w * hi.second;
  }

  Kind kind_ = Kind::Zero;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  std::shared_ptr<const std::vector<std::pair<double, StateVector>>> table_;
  std::function<StateVector(const Grid&, double)> custom_;
};

/// Immutable closed loop. Without a saturation the feedback is the linear
/// law u = -(B^* z + d).
class SaturatedSystem {
 public:
  SaturatedSystem(LinearOperator a, std::optional<SaturationMap> sigma, DisturbanceSignal d)
      : a_(std::move(a)), sigma_(std::move(sigma)), d_(std::move(d)) {}

  const LinearOperator& op() const noexcept { return a_; }
  const Grid& grid() const noexcept { return a_.grid(); }
  const std::optional<SaturationMap>& saturation() const noexcept { return sigma_; }
  const DisturbanceSignal& disturbance() const noexcept { return d_; }
  bool b_is_identity() const noexcept { return true; }
  double norm_b() const noexcept { return 1.0; }

  /// Lipschitz constant of the feedback map times ||B||^2.
  double feedback_lipschitz() const noexcept {
    return (sigma_ ? sigma_->lipschitz_k() : 1.0) * norm_b() * norm_b();
  }

  /// B sat(B^* z + d)
  StateVector feedback(const StateVector& z, const StateVector& d) const {
    StateVector arg = z + d;
    return sigma_ ? (*sigma_)(arg) : arg;
  }

  StateVector feedback_at(const StateVector& z, double t) const { return feedback(z, d_(grid(), t)); }

  /// A z - B sat(B^* z + d(t))
  StateVector rhs(const StateVector& z, double t) const { return a_.apply(z) - feedback_at(z, t); }

  SaturatedSystem with_disturbance(DisturbanceSignal d) const { return {a_, sigma_, std::move(d)}; }

 private:
  LinearOperator a_;
  std::optional<SaturationMap> sigma_;
  DisturbanceSignal d_;
};

inline SaturatedSystem assemble_closed_loop(const LinearOperator& a,
                                            std::optional<SaturationMap> sigma,
                                            DisturbanceSignal d) {
  if (d.kind() == DisturbanceSignal::Kind::PiecewiseConstantTable) {
    // evaluation checks the table grid against A's grid
    (void)d(a.grid(), 0.0);
  }
  return SaturatedSystem(a, std::move(sigma), std::move(d));
}

/// One-step map for a fixed (system, dt). Holds the factorization of
/// I - dt/2 A, so it is built once and reused across steps.
class ImexStepper {
 public:
  ImexStepper(const SaturatedSystem& sys, double dt)
      : sys_(&sys),
        dt_(dt),
        implicit_(factor(sys, dt)),
        explicit_(sys.op().matrix().shifted(1.0, 0.5 * dt)) {}

  double dt() const noexcept { return dt_; }

  /// (I - dt/2 A) z+ = (I + dt/2 A) z - dt B sat(B^* zh + d(t + dt/2)),
  /// zh = z + dt/2 (A z - B sat(B^* z + d(t))).
  StateVector step(const StateVector& z, double t) const {
    const LinearOperator& a = sys_->op();
    if (!(z.grid() == a.grid())) throw DimensionError("state grid does not match system grid");
    const StateVector half = z + (0.5 * dt_) * (a.apply(z) - sys_->feedback_at(z, t));
    const StateVector f = sys_->feedback_at(half, t + 0.5 * dt_);
    Eigen::VectorXd rhs = explicit_.apply(z.values()) - dt_ * f.values();
    return StateVector(a.grid(), implicit_.solve(rhs));
  }

 private:
  static BandedLU factor(const SaturatedSystem& sys, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("time step must be positive");
    if (!(dt * sys.feedback_lipschitz() < 1.0)) {
      throw ParameterError("time step violates dt * k * ||B||^2 < 1");
    }
    return BandedLU(sys.op().matrix().shifted(1.0, -0.5 * dt));
  }

  const SaturatedSystem* sys_;
  double dt_;
  BandedLU implicit_;
  BandedMatrix explicit_;
};

inline StateVector step(const SaturatedSystem& sys, const StateVector& z, double t, double dt) {
  return ImexStepper(sys, dt).step(z, t);
}

/// Parameters of the Lyapunov observables recorded along a trajectory.
struct ObserverSettings {
  std::optional<LinearOperator> p;  // identity when empty
  double m = 0.0;                   // V1 weight
  double m_tilde = 0.0;             // V2 weight
  double r = 0.0;                   // V2 radius
  bool store_states = true;

  static ObserverSettings norms_only() {
    ObserverSettings o;
    o.store_states = false;
    return o;
  }
};

struct Observables {
  double norm_l2 = 0.0;
  double norm_linf = 0.0;
  double norm_graph = 0.0;
  double v = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double norm_u = 0.0;
  double norm_d = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;  // empty unless ObserverSettings::store_states
  std::vector<Observables> observables;

  std::size_t size() const noexcept { return times.size(); }

  /// ||d||_{L2(0, t_k; U)} at every record (trapezoid rule on the samples).
  std::vector<double> disturbance_energy_norm() const {
    std::vector<double> out(times.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double a = observables[k - 1].norm_d;
      const double b = observables[k].norm_d;
      acc += 0.5 * (times[k] - times[k - 1]) * (a * a + b * b);
      out[k] = std::sqrt(acc);
    }
    return out;
  }
};

inline Observables observe(const SaturatedSystem& sys, const ObserverSettings& obs,
                           const StateVector& z, double t) {
  Observables o;
  const StateVector d = sys.disturbance()(sys.grid(), t);
  o.norm_l2 = norm_l2(z);
  o.norm_linf = norm_linf(z);
  o.norm_graph = norm_graph(z, sys.op());
  o.v = v_quadratic(obs.p, z);
  o.v1 = v1_value(obs.p, obs.m, z);
  o.v2 = v2_value(obs.p, obs.m_tilde, obs.r, z);
  o.norm_u = norm_l2(sys.feedback(z, d));
  o.norm_d = norm_l2(d);
  return o;
}

/// Integrates from t = 0 to T with ceil(T/dt) steps; the last step is
/// shortened so the final record sits exactly at T.
inline Trajectory simulate(const SaturatedSystem& sys, const StateVector& z0, double t_final,
                           double dt, const ObserverSettings& obs = {}) {
  if (!(t_final > 0.0)) throw ParameterError("final time must be positive");
  if (!(dt > 0.0) || dt > t_final) throw ParameterError("time step must lie in (0, T]");
  if (!(z0.grid() == sys.grid())) throw DimensionError("initial state grid mismatch");

  const auto n_steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  const double last_dt = t_final - static_cast<double>(n_steps - 1) * dt;

  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.observables.reserve(n_steps + 1);
  if (obs.store_states) traj.states.reserve(n_steps + 1);

  auto record = [&](const StateVector& z, double t) {
    traj.times.push_back(t);
    traj.observables.push_back(observe(sys, obs, z, t));
    if (obs.store_states) traj.states.push_back(z);
  };

  const ImexStepper stepper(sys, dt);
  std::optional<ImexStepper> tail;
  if (std::abs(last_dt - dt) > 1e-12 * dt) tail.emplace(sys, last_dt);

  StateVector z = z0;
  record(z, 0.0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const bool last = k + 1 == n_steps;
    z = (last && tail) ? tail->step(z, t) : stepper.step(z, t);
    record(z, last ? t_final : static_cast<double>(k + 1) * dt);
  }
  return traj;
}

inline void write_observables_csv(std::ostream& os, const Trajectory& traj) {
  std::ostringstream s;
  s.precision(17);
  s << "t,norm_l2,norm_linf,norm_graph,V,V1,V2,norm_u,norm_d\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Observables& o = traj.observables[k];
    s << traj.times[k] << ',' << o.norm_l2 << ',' << o.norm_linf << ',' << o.norm_graph << ','
      << o.v << ',' << o.v1 << ',' << o.v2 << ',' << o.norm_u << ',' << o.norm_d << '\n';
  }
  os << s.str();
}

/// Full state surface: one row per record, first column t, then the
/// interior node values. The header carries the node coordinates.
inline void write_states_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.size() != traj.times.size()) {
    throw ParameterError("trajectory was recorded without states");
  }
  std::ostringstream s;
  s.precision(17);
  s << 't';
  if (!traj.states.empty()) {
    const Grid& g = traj.states.front().grid();
    for (std::size_t i = 0; i < g.size(); ++i) s << ',' << g.node(i);
  }
  s << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    s << traj.times[k];
    const auto& v = traj.states[k].values();
    for (Eigen::Index i = 0; i < v.size(); ++i) s << ',' << v[i];
    s << '\n';
  }
  os << s.str();
}

}  // namespace kdviss
