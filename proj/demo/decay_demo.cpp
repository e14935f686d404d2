// Saturated vs. unsaturated feedback on the linearized KdV equation.
//
// Prints ||z(t)|| once per time unit for both loops, starting from
// z0 = A (1 - cos x) with a user-chosen amplitude A (default 5).

#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "kdviss/kdviss.hpp"

int main(int argc, char** argv) {
  using namespace kdviss;
  const double amplitude = argc > 1 ? std::atof(argv[1]) : 5.0;

  const Grid grid(2.0 * std::numbers::pi, 127);
  const LinearOperator a = build_kdv_operator(grid);
  const StateVector z0 = one_minus_cosine(grid, amplitude);

  const auto saturated = assemble_closed_loop(a, SaturationMap::pointwise(1.0, grid.length()),
                                              DisturbanceSignal::zero());
  const auto linear = assemble_closed_loop(a, std::nullopt, DisturbanceSignal::zero());

  ObserverSettings obs;
  obs.store_states = false;
  const Trajectory ts = simulate(saturated, z0, 9.0, 1e-3, obs);
  const Trajectory tl = simulate(linear, z0, 9.0, 1e-3, obs);

  std::printf("%6s %14s %14s\n", "t", "saturated", "linear");
  for (std::size_t k = 0; k < ts.size(); k += 1000) {
    std::printf("%6.2f %14.6e %14.6e\n", ts.times[k], ts.observables[k].norm_l2,
                tl.observables[k].norm_l2);
  }
  return 0;
}
