#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gyrad/errors.hpp"
#include "gyrad/op_engine.hpp"
#include "gyrad/packing.hpp"

using namespace gyrad;

namespace {

// Exhaustive two-layer oracle for d = 1, support {-1, 0, 1}: enumerate every
// configuration of the 12 bonds with its exact probability.
std::vector<double> exhaustive_two_layer(const kern::StepDistribution& D,
                                         double p) {
  REQUIRE(D.d == 1);
  REQUIRE(D.radius == 1);
  std::vector<long long> x(1);
  double q[3];  // bond probabilities per offset -1, 0, 1
  for (int i = 0; i < 3; ++i) {
    x[0] = i - 1;
    q[i] = p * D.at(x);
  }
  // Bonds 0..2: origin -> u = -1,0,1.  Bonds 3..11: u -> u + off.
  std::vector<double> phi2(5, 0.0);  // x = -2..2
  for (int mask = 0; mask < (1 << 12); ++mask) {
    double prob = 1.0;
    for (int b = 0; b < 12; ++b) {
      const double qb = q[b < 3 ? b : (b - 3) % 3];
      prob *= (mask & (1 << b)) ? qb : (1.0 - qb);
    }
    if (prob == 0.0) continue;
    for (int xi = -2; xi <= 2; ++xi) {
      bool reached = false;
      for (int u = -1; u <= 1 && !reached; ++u) {
        const int off = xi - u;
        if (off < -1 || off > 1) continue;
        const int b0 = u + 1;
        const int b1 = 3 + (u + 1) * 3 + (off + 1);
        if ((mask & (1 << b0)) && (mask & (1 << b1))) reached = true;
      }
      if (reached) phi2[xi + 2] += prob;
    }
  }
  return phi2;
}

}  // namespace

TEST_CASE("cluster growth basics: p = 0, support bound, one-step mean") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 3, 0.3);

  auto dead = op::grow_cluster(D, 0.0, 5, 123);
  for (int t = 1; t <= 5; ++t) CHECK(dead.frontier_history[t].empty());

  const double p = 0.8;
  double mean1 = 0.0;
  const int N = 20000;
  std::vector<long long> coords(1);
  for (int rep = 0; rep < N; ++rep) {
    auto run = op::grow_cluster(D, p, 3, 999, rep);
    mean1 += static_cast<double>(run.frontier_history[1].size());
    for (int t = 0; t <= 3; ++t)
      for (auto key : run.frontier_history[t]) {
        pack::unpack_point(key, coords);
        CHECK(std::abs(coords[0]) <= t * D.radius);
      }
  }
  mean1 /= N;
  // E|frontier(1)| = sum_x pD(x) = p; binomial-ish stderr bound.
  CHECK(std::abs(mean1 - p) <= 4.0 * std::sqrt(p / N));
}

TEST_CASE("monotone coupling: shared uniforms, larger p grows the frontier") {
  auto D = kern::build_kac_kernel(1, 1.0, 2.0, 2, 0.3);
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    auto lo = op::grow_cluster(D, 0.5, 6, 31415, rep);
    auto hi = op::grow_cluster(D, 0.9, 6, 31415, rep);
    for (int t = 0; t <= 6; ++t) {
      for (auto key : lo.frontier_history[t]) {
        const auto& h = hi.frontier_history[t];
        CHECK(std::find(h.begin(), h.end(), key) != h.end());
      }
    }
  }
}

TEST_CASE("exact small-t oracles") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 2, 0.3);
  const double p = 0.7;

  auto f0 = op::exact_two_point_small_t(D, p, 0);
  CHECK(f0.values[0] == 1.0);

  auto f1 = op::exact_two_point_small_t(D, p, 1);
  std::vector<long long> x(1);
  for (long long xi = -2; xi <= 2; ++xi) {
    x[0] = xi;
    CHECK(f1.at(x) == doctest::Approx(p * D.at(x)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(op::exact_two_point_small_t(D, p, 3), invalid_parameter);
  CHECK_THROWS_AS(op::grow_cluster(D, 1.0 / D.max_weight() + 0.1, 2, 1),
                  invalid_parameter);
}

TEST_CASE("t = 2 closed form equals exhaustive configuration enumeration") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 1, 2.0);
  for (double p : {0.4, 0.9}) {
    const std::vector<double> oracle = exhaustive_two_layer(D, p);
    auto f2 = op::exact_two_point_small_t(D, p, 2);
    std::vector<long long> x(1);
    for (int xi = -2; xi <= 2; ++xi) {
      x[0] = xi;
      CHECK(f2.at(x) == doctest::Approx(oracle[xi + 2]).epsilon(1e-12));
    }
  }
}

TEST_CASE("MC frontier statistics match the exact small-t fields") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 2, 0.3);
  const double p = 0.75;
  const long long N = 200000;

  std::vector<double> rs{1.0};
  op::SampleOptions opt;
  opt.n_threads = 2;
  auto mc = op::estimate_op_moments(D, p, 4, rs, N, 777, opt);

  // t = 1 mass -> p within 4 stderr.
  CHECK(std::abs(mc.rows[1].mass.mean - p) <= 4.0 * mc.rows[1].mass.stderr_);

  // t = 2 mass and moment against the closed form.
  auto f2 = op::exact_two_point_small_t(D, p, 2);
  CHECK(std::abs(mc.rows[2].mass.mean - f2.mass) <= 4.0 * mc.rows[2].mass.stderr_);

  double mom = 0.0;
  std::vector<long long> x(1);
  for (long long xi = -4; xi <= 4; ++xi) {
    x[0] = xi;
    mom += std::abs(static_cast<double>(xi)) * f2.at(x);
  }
  CHECK(std::abs(mc.rows[2].moment[0].mean - mom) <= 4.0 * mc.rows[2].moment[0].stderr_);

  // Subcritical-style decay: mass ratio bounded by p up to noise.
  for (int t = 1; t <= 3; ++t) {
    const auto& a = mc.rows[t].mass;
    const auto& b = mc.rows[t + 1].mass;
    CHECK(b.mean <= p * a.mean * (1.0 + 3.0 * (a.stderr_ / a.mean + b.stderr_ / std::max(b.mean, 1e-12))));
  }
}

TEST_CASE("pointwise membership estimates agree with pD at t = 1") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 2, 0.3);
  const double p = 0.6;
  std::vector<std::vector<long long>> sites{{0}, {1}, {-1}, {2}, {-2}};
  auto est = op::estimate_pointwise(D, p, 1, sites, 150000, 2718);
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const double expect = p * D.at(sites[s]);
    const auto& e = est[1][s];
    CHECK(std::abs(e.mean - expect) <= 4.0 * std::max(e.stderr_, 1e-6));
  }
}

TEST_CASE("thinned bond scheme agrees with the direct scheme") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 3, 0.3);
  const double p = 0.85;
  std::vector<double> rs{1.0};
  op::SampleOptions direct, thinned;
  direct.scheme = op::BondScheme::direct;
  thinned.scheme = op::BondScheme::thinned;
  auto a = op::estimate_op_moments(D, p, 4, rs, 120000, 5150, direct);
  auto b = op::estimate_op_moments(D, p, 4, rs, 120000, 6161, thinned);
  for (int t = 1; t <= 4; ++t) {
    const double se = std::hypot(a.rows[t].mass.stderr_, b.rows[t].mass.stderr_);
    CHECK(std::abs(a.rows[t].mass.mean - b.rows[t].mass.mean) <= 4.0 * se);
    const double sem = std::hypot(a.rows[t].moment[0].stderr_, b.rows[t].moment[0].stderr_);
    CHECK(std::abs(a.rows[t].moment[0].mean - b.rows[t].moment[0].mean) <= 4.0 * sem);
  }
}

TEST_CASE("OP estimates are bit-identical under any worker count") {
  auto D = kern::build_kac_kernel(1, 1.0, 2.0, 2, 0.3);
  std::vector<double> rs{0.7};
  op::SampleOptions one, three;
  one.n_threads = 1;
  three.n_threads = 3;
  auto a = op::estimate_op_moments(D, 0.8, 5, rs, 20000, 11, one);
  auto b = op::estimate_op_moments(D, 0.8, 5, rs, 20000, 11, three);
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    CHECK(a.rows[t].mass.mean == b.rows[t].mass.mean);
    CHECK(a.rows[t].moment[0].mean == b.rows[t].moment[0].mean);
    CHECK(a.rows[t].ratio[0].stderr_ == b.rows[t].ratio[0].stderr_);
  }
}
