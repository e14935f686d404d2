#pragma once

// Saturation maps on grid functions and a randomized falsification check of
// the admissibility axioms:
//   1. ||sat(s)||_S <= level
//   2. <sat(s) - sat(t), s - t> >= 0
//   3. ||sat(s) - sat(t)|| <= k ||s - t||
//   4. ||sat(s) - s||_{S'} <= <sat(s), s>
//   5. <s, sat(s + d) - sat(s)> <= C0 ||d||

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kdviss/errors.hpp"
#include "kdviss/parallel.hpp"
#include "kdviss/random.hpp"
#include "kdviss/spaces.hpp"

namespace kdviss {

enum class SaturationKind { PointwiseLinf, HilbertNorm };

inline const char* to_string(SaturationKind kind) {
  return kind == SaturationKind::PointwiseLinf ? "pointwise" : "hilbert";
}

inline double sat_scalar(double x, double level) {
  if (!(level > 0.0)) throw ParameterError("saturation level must be positive");
  return std::clamp(x, -level, level);
}

/// Node-wise clamp to [-level, level].
inline StateVector sat_pointwise(const StateVector& z, double level) {
  if (!(level > 0.0)) throw ParameterError("saturation level must be positive");
  StateVector out = z;
  out.values() = z.values().cwiseMax(-level).cwiseMin(level);
  return out;
}

/// Radial retraction onto the closed L2 ball of radius `level`.
inline StateVector sat_hilbert(const StateVector& z, double level) {
  if (!(level > 0.0)) throw ParameterError("saturation level must be positive");
  const double n = norm_l2(z);
  if (n <= level) return z;
  StateVector out = z * (level / n);
  // rounding can leave the result a few ulps outside the ball
  while (norm_l2(out) > level) out *= 1.0 - std::numeric_limits<double>::epsilon();
  return out;
}

/// A saturation operator together with its declared axiom constants.
class SaturationMap {
 public:
  SaturationMap(SaturationKind kind, double level, double lipschitz_k, double item5_c0)
      : kind_(kind), level_(level), k_(lipschitz_k), c0_(item5_c0) {
    if (!(level > 0.0)) throw ParameterError("saturation level must be positive");
    if (!(lipschitz_k >= 1.0)) throw ParameterError("declared Lipschitz constant must be >= 1");
    if (!(item5_c0 > 0.0)) throw ParameterError("declared Item-5 constant must be positive");
  }

  /// Radial saturation with k = 3 and C0 = 3 * level.
  static SaturationMap hilbert(double level = 1.0) {
    return SaturationMap(SaturationKind::HilbertNorm, level, 3.0, 3.0 * level);
  }

  /// Node-wise clamp with k = 1 and C0 = sqrt(L) * level.
  ///
  /// The C0 value follows from the node-wise bound
  /// s (sat(s + d) - sat(s)) <= level |d|, integrated and combined with
  /// ||d||_1 <= sqrt(L) ||d||_2.
  static SaturationMap pointwise(double level, double domain_length) {
    if (!(domain_length > 0.0)) throw ParameterError("domain length must be positive");
    return SaturationMap(SaturationKind::PointwiseLinf, level, 1.0,
                         std::sqrt(domain_length) * level);
  }

  static SaturationMap make(SaturationKind kind, double level, double domain_length) {
    return kind == SaturationKind::HilbertNorm ? hilbert(level) : pointwise(level, domain_length);
  }

  SaturationKind kind() const noexcept { return kind_; }
  double level() const noexcept { return level_; }
  double lipschitz_k() const noexcept { return k_; }
  double item5_c0() const noexcept { return c0_; }

  StateVector operator()(const StateVector& z) const {
    return kind_ == SaturationKind::PointwiseLinf ? sat_pointwise(z, level_)
                                                  : sat_hilbert(z, level_);
  }

  /// Norm of S: L-infinity for the node-wise clamp, L2 otherwise.
  double norm_s(const StateVector& z) const {
    return kind_ == SaturationKind::PointwiseLinf ? norm_linf(z) : norm_l2(z);
  }

  /// Norm of S': L1 for the node-wise clamp, L2 otherwise.
  double norm_s_dual(const StateVector& z) const {
    return kind_ == SaturationKind::PointwiseLinf ? norm_l1(z) : norm_l2(z);
  }

 private:
  SaturationKind kind_;
  double level_;
  double k_;
  double c0_;
};

struct AxiomReport {
  long bound_violations = 0;
  long monotonicity_violations = 0;
  long lipschitz_violations = 0;
  long item4_violations = 0;
  long item5_violations = 0;
  double lipschitz_estimate = 0.0;
  double item4_max_residual = -std::numeric_limits<double>::infinity();
  double item5_C0_estimate = 0.0;
  long samples_used = 0;

  long total_violations() const {
    return bound_violations + monotonicity_violations + lipschitz_violations + item4_violations +
           item5_violations;
  }
};

/// One `name=value` per line.
inline void write_key_values(std::ostream& os, const AxiomReport& r) {
  std::ostringstream s;
  s.precision(17);
  s << "bound_violations=" << r.bound_violations << '\n'
    << "monotonicity_violations=" << r.monotonicity_violations << '\n'
    << "lipschitz_violations=" << r.lipschitz_violations << '\n'
    << "item4_violations=" << r.item4_violations << '\n'
    << "item5_violations=" << r.item5_violations << '\n'
    << "lipschitz_estimate=" << r.lipschitz_estimate << '\n'
    << "item4_max_residual=" << r.item4_max_residual << '\n'
    << "item5_C0_estimate=" << r.item5_C0_estimate << '\n'
    << "samples_used=" << r.samples_used << '\n';
  os << s.str();
}

namespace detail {

constexpr double kMonotoneTol = 1e-12;
constexpr double kItemTol = 1e-10;

// Even samples are node-wise uniform, odd samples are smooth sine series.
inline StateVector axiom_sample(const Grid& grid, double amplitude, std::mt19937_64& rng,
                                bool smooth) {
  return smooth ? random_fourier(grid, amplitude, rng) : random_rough(grid, amplitude, rng);
}

struct PairSample {
  StateVector s;
  StateVector t;
};

inline PairSample draw_pair(const Grid& grid, double amplitude, std::uint64_t seed,
                            std::uint64_t i) {
  auto rng = sample_engine(seed, i);
  const bool smooth = (i % 2) == 1;
  StateVector s = axiom_sample(grid, amplitude, rng, smooth);
  StateVector t = axiom_sample(grid, amplitude, rng, smooth);
  // every fourth pair is a small perturbation of s, to probe local ratios
  if (i % 4 == 3) {
    std::uniform_real_distribution<double> u(1e-4, 1e-1);
    t = s + u(rng) * (t - s);
  }
  return {std::move(s), std::move(t)};
}

}  // namespace detail

/// Sup over samples of <s, sat(s + d) - sat(s)> / ||d||. With
/// perturbation_scale = 0 every d vanishes and the estimate is 0.
inline double estimate_item5_C0(const SaturationMap& sigma, const Grid& grid, long n_samples,
                                double amplitude, std::uint64_t rng_seed,
                                double perturbation_scale = 1.0) {
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  if (!(amplitude > 0.0)) throw ParameterError("amplitude must be positive");
  std::vector<double> ratios(static_cast<std::size_t>(n_samples), 0.0);
  parallel_for(ratios.size(), [&](std::size_t i) {
    auto [s, t] = detail::draw_pair(grid, amplitude, rng_seed, i);
    const StateVector d = perturbation_scale * (t - s);
    const double dn = norm_l2(d);
    if (dn == 0.0) return;
    ratios[i] = inner_l2(s, sigma(s + d) - sigma(s)) / dn;
  });
  return std::max(0.0, *std::max_element(ratios.begin(), ratios.end()));
}

inline AxiomReport check_axioms(const SaturationMap& sigma, const Grid& grid, long n_samples,
                                double amplitude, std::uint64_t rng_seed) {
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  if (!(amplitude > 0.0)) throw ParameterError("amplitude must be positive");

  struct Partial {
    bool bound_bad = false, mono_bad = false, lip_bad = false, i4_bad = false, i5_bad = false;
    double lip = 0.0;
    double i4 = -std::numeric_limits<double>::infinity();
    double i5 = 0.0;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(n_samples));
  const double level = sigma.level();
  const double k = sigma.lipschitz_k();
  const double c0 = sigma.item5_c0();

  parallel_for(parts.size(), [&](std::size_t i) {
    Partial& p = parts[i];
    auto [s, t] = detail::draw_pair(grid, amplitude, rng_seed, i);
    const StateVector ss = sigma(s);
    const StateVector st = sigma(t);

    p.bound_bad = sigma.norm_s(ss) > level || sigma.norm_s(st) > level;

    const StateVector diff = s - t;
    const StateVector sdiff = ss - st;
    p.mono_bad = inner_l2(sdiff, diff) < -detail::kMonotoneTol;

    const double dn = norm_l2(diff);
    if (dn > 0.0) {
      const double sn = norm_l2(sdiff);
      p.lip = sn / dn;
      p.lip_bad = sn > k * dn + detail::kItemTol;
    }

    for (const StateVector* x : {&s, &t}) {
      const StateVector sx = sigma(*x);
      const double r = sigma.norm_s_dual(sx - *x) - inner_l2(sx, *x);
      p.i4 = std::max(p.i4, r);
      if (r > detail::kItemTol) p.i4_bad = true;
    }

    const StateVector d = t - s;
    const double lhs = inner_l2(s, sigma(s + d) - ss);
    const double d_norm = norm_l2(d);
    if (d_norm > 0.0) p.i5 = lhs / d_norm;
    p.i5_bad = lhs > c0 * d_norm + detail::kItemTol;
  });

  AxiomReport r;
  r.samples_used = n_samples;
  for (const Partial& p : parts) {
    r.bound_violations += p.bound_bad;
    r.monotonicity_violations += p.mono_bad;
    r.lipschitz_violations += p.lip_bad;
    r.item4_violations += p.i4_bad;
    r.item5_violations += p.i5_bad;
    r.lipschitz_estimate = std::max(r.lipschitz_estimate, p.lip);
    r.item4_max_residual = std::max(r.item4_max_residual, p.i4);
    r.item5_C0_estimate = std::max(r.item5_C0_estimate, p.i5);
  }
  return r;
}

}  // namespace kdviss
