#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gyrad/lattice_field.hpp"
#include "gyrad/mc_stats.hpp"
#include "gyrad/step_distribution.hpp"

namespace gyrad::saw {

// Exact self-avoiding-walk two-point functions phi_t for t = 0..T from
// depth-first path enumeration.  Every prefix of a self-avoiding path is
// one, so one sweep fills all slices.
struct SawEnumeration {
  std::vector<LatticeField> fields;
  std::vector<double> path_count_weighted;  // sum_x phi_t(x)
};

// Intended for kernels with small explicit support; throws resource_limit
// when the (support-1)^T path-count estimate exceeds path_cap.
SawEnumeration enumerate(const kern::StepDistribution& D, int T,
                         double path_cap = 5e7);

struct SampleOptions {
  int n_threads = 1;
  // Acceptance of the self-avoidance indicator decays with t; raising the
  // horizon past this cap must be an explicit caller decision.
  int t_cap = 40;
};

// Unbiased estimator from N independent D-walks of length T: the SAW weight
// is the walk measure restricted by the self-avoidance indicator, so
// P(self-avoiding up to t) estimates sum_x phi_t and |X_1(t)|^r times the
// indicator estimates the axis moment.  Deterministic for fixed (seed, N)
// under any thread count.
mc::McSeries sample_saw_moments(const kern::StepDistribution& D, int T,
                                std::span<const double> r_list, long long N,
                                std::uint64_t seed,
                                const SampleOptions& opt = {});

// sum_{t<=T} m^t sum_x phi_t(x).
double susceptibility_partial_sum(const SawEnumeration& e, double m);

// Ratio-method estimate of the susceptibility radius of convergence from
// the mass sequence: extrapolates c_{t+1}/c_t linearly in 1/t.
double ratio_method_mc(std::span<const double> masses);

}  // namespace gyrad::saw
