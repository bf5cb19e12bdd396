#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gyrad/lattice_field.hpp"
#include "gyrad/mc_stats.hpp"
#include "gyrad/step_distribution.hpp"

namespace gyrad::op {

enum class BondScheme {
  direct,   // one uniform per candidate bond
  thinned,  // Poisson-binomial count inversion + conditional selection
};

// One oriented-percolation configuration grown from the origin.  Bond
// ((u,t),(v,t+1)) is open with probability p D(v-u); each bond's uniform is
// a pure function of (seed, replica, t, u, v), so configurations at p < p'
// with a shared seed are coupled monotonically by construction.
struct OpConfigRun {
  double p = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint64_t>> frontier_history;  // packed sites
};

OpConfigRun grow_cluster(const kern::StepDistribution& D, double p, int T,
                         std::uint64_t seed, std::uint64_t replica = 0,
                         BondScheme scheme = BondScheme::direct);

struct SampleOptions {
  int n_threads = 1;
  BondScheme scheme = BondScheme::direct;
};

// Replica-averaged frontier statistics: sum_x phi_t = E|frontier(t)| and
// sum_x |x_1|^r phi_t = E[sum_{x in frontier} |x_1|^r].
mc::McSeries estimate_op_moments(const kern::StepDistribution& D, double p,
                                 int T, std::span<const double> r_list,
                                 long long N, std::uint64_t seed,
                                 const SampleOptions& opt = {});

// Pointwise membership probabilities phi_t(x) at probe sites, estimated over
// N replicas; result indexed [t][site].
std::vector<std::vector<mc::McEstimate>> estimate_pointwise(
    const kern::StepDistribution& D, double p, int T,
    std::span<const std::vector<long long>> sites, long long N,
    std::uint64_t seed, const SampleOptions& opt = {});

// Exact small-t oracles: t=0 delta, t=1 pD, t=2 the independent-routes
// product 1 - prod_y (1 - p^2 D(y) D(x-y)).
LatticeField exact_two_point_small_t(const kern::StepDistribution& D, double p,
                                     int t);

}  // namespace gyrad::op
