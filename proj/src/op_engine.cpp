#include "gyrad/op_engine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gyrad/errors.hpp"
#include "gyrad/packing.hpp"
#include "gyrad/rng.hpp"

namespace gyrad::op {

namespace {

constexpr std::size_t kFrontierCap = 1 << 24;

struct Support {
  int d;
  std::size_t n;
  std::vector<long long> offsets;  // d per entry
  std::vector<double> q;           // p * D(offset)

  Support(const kern::StepDistribution& D, double p) : d(D.d), n(D.size()) {
    offsets.reserve(n * static_cast<std::size_t>(d));
    q.reserve(n);
    std::vector<long long> x(D.d, -D.radius);
    std::size_t idx = 0;
    while (true) {
      for (int i = 0; i < D.d; ++i) offsets.push_back(x[i]);
      q.push_back(p * D.weights[idx++]);
      int axis = 0;
      while (axis < D.d) {
        if (++x[axis] <= D.radius) break;
        x[axis] = -D.radius;
        ++axis;
      }
      if (axis == D.d) break;
    }
  }
};

// Poisson-binomial machinery for the thinned bond scheme: sample how many
// bonds open out of a source, then which ones, conditioned on the count via
// suffix tables.  Equals the direct per-bond scheme in distribution.
struct ThinnedTables {
  int kmax = 0;
  std::vector<double> count_cdf;  // P(count <= k), k = 0..kmax
  std::vector<double> suffix;     // S_i(j), i = 0..n, j = 0..kmax

  ThinnedTables() = default;
  explicit ThinnedTables(const Support& sup) {
    const std::size_t n = sup.n;
    double mean = 0.0;
    for (double qi : sup.q) mean += qi;
    kmax = std::min<int>(static_cast<int>(n),
                         static_cast<int>(std::ceil(mean + 12.0 * std::sqrt(mean + 1.0) + 16.0)));
    const std::size_t cols = static_cast<std::size_t>(kmax) + 1;
    suffix.assign((n + 1) * cols, 0.0);
    suffix[n * cols + 0] = 1.0;
    for (std::size_t i = n; i-- > 0;) {
      const double qi = sup.q[i];
      for (int j = 0; j <= kmax; ++j) {
        double v = (1.0 - qi) * suffix[(i + 1) * cols + j];
        if (j > 0) v += qi * suffix[(i + 1) * cols + (j - 1)];
        suffix[i * cols + j] = v;
      }
    }
    count_cdf.resize(cols);
    double acc = 0.0;
    for (int j = 0; j <= kmax; ++j) {
      acc += suffix[j];
      count_cdf[j] = acc;
    }
    // Renormalize the truncated count distribution (tail < 1e-12 by the
    // kmax choice).
    for (double& c : count_cdf) c /= acc;
  }
};

struct ClusterGrower {
  const Support& sup;
  const ThinnedTables* thin;
  std::uint64_t bond_seed;
  BondScheme scheme;
  std::vector<long long> coords;
  std::vector<long long> vcoords;
  std::unordered_set<std::uint64_t> next;

  ClusterGrower(const Support& s, const ThinnedTables* tt, std::uint64_t bs,
                BondScheme sc)
      : sup(s), thin(tt), bond_seed(bs), scheme(sc),
        coords(s.d), vcoords(s.d) {}

  // Advances frontier (packed sites) from slice t to t+1.
  void step(std::vector<std::uint64_t>& frontier, long long t) {
    next.clear();
    for (const std::uint64_t u : frontier) {
      pack::unpack_point(u, coords);
      if (scheme == BondScheme::direct) {
        for (std::size_t i = 0; i < sup.n; ++i) {
          const double qi = sup.q[i];
          if (qi <= 0.0) continue;
          for (int a = 0; a < sup.d; ++a)
            vcoords[a] = coords[a] + sup.offsets[i * sup.d + a];
          const std::uint64_t v = pack::pack_point(vcoords);
          if (rng::keyed_uniform(bond_seed, static_cast<std::uint64_t>(t), u, v) < qi)
            next.insert(v);
        }
      } else {
        // Per-source stream keyed by (seed, t, u); count from the
        // Poisson-binomial CDF, then conditional selection.
        rng::Xoshiro256pp g(rng::mix64(
            bond_seed ^ rng::mix64(static_cast<std::uint64_t>(t) + 0x9e3779b97f4a7c15ULL) ^
            rng::mix64(u + 0xc2b2ae3d27d4eb4fULL)));
        const auto& cdf = thin->count_cdf;
        const double u0 = g.uniform01();
        int k = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u0) -
                                 cdf.begin());
        if (k > thin->kmax) k = thin->kmax;
        const std::size_t cols = static_cast<std::size_t>(thin->kmax) + 1;
        std::size_t i = 0;
        while (k > 0 && i < sup.n) {
          const double si = thin->suffix[i * cols + k];
          const double p_open = si > 0.0
                                    ? sup.q[i] * thin->suffix[(i + 1) * cols + (k - 1)] / si
                                    : 0.0;
          if (g.uniform01() < p_open) {
            for (int a = 0; a < sup.d; ++a)
              vcoords[a] = coords[a] + sup.offsets[i * sup.d + a];
            next.insert(pack::pack_point(vcoords));
            --k;
          }
          ++i;
        }
      }
    }
    if (next.size() > kFrontierCap)
      throw resource_limit("oriented-percolation frontier exceeded the size cap");
    frontier.assign(next.begin(), next.end());
  }
};

void validate(const kern::StepDistribution& D, double p, int T) {
  if (p < 0.0) throw invalid_parameter("bond parameter p must be >= 0");
  if (T < 0) throw invalid_parameter("horizon T must be >= 0");
  if (p * D.max_weight() > 1.0)
    throw invalid_parameter("p D(x) exceeds 1 for some x; not a bond probability");
}

std::uint64_t replica_bond_seed(std::uint64_t seed, std::uint64_t replica) {
  return rng::mix64(seed ^ rng::mix64(replica + 0x6a09e667f3bcc909ULL));
}

}  // namespace

OpConfigRun grow_cluster(const kern::StepDistribution& D, double p, int T,
                         std::uint64_t seed, std::uint64_t replica,
                         BondScheme scheme) {
  validate(D, p, T);
  const Support sup(D, p);
  ThinnedTables const* thin_ptr = nullptr;
  ThinnedTables tables = scheme == BondScheme::thinned
                             ? ThinnedTables(sup)
                             : ThinnedTables{};
  if (scheme == BondScheme::thinned) thin_ptr = &tables;

  OpConfigRun run;
  run.p = p;
  run.seed = seed;
  std::vector<long long> origin(D.d, 0);
  std::vector<std::uint64_t> frontier{pack::pack_point(origin)};
  run.frontier_history.push_back(frontier);

  ClusterGrower grower(sup, thin_ptr, replica_bond_seed(seed, replica), scheme);
  for (int t = 0; t < T; ++t) {
    grower.step(frontier, t);
    std::vector<std::uint64_t> sorted = frontier;
    std::sort(sorted.begin(), sorted.end());
    run.frontier_history.push_back(std::move(sorted));
    if (frontier.empty()) {
      while (static_cast<int>(run.frontier_history.size()) <= T)
        run.frontier_history.emplace_back();
      break;
    }
  }
  return run;
}

mc::McSeries estimate_op_moments(const kern::StepDistribution& D, double p,
                                 int T, std::span<const double> r_list,
                                 long long N, std::uint64_t seed,
                                 const SampleOptions& opt) {
  validate(D, p, T);
  if (N < 1) throw invalid_parameter("replica count N must be >= 1");
  const Support sup(D, p);
  const ThinnedTables tables =
      opt.scheme == BondScheme::thinned ? ThinnedTables(sup) : ThinnedTables{};
  const ThinnedTables* thin_ptr =
      opt.scheme == BondScheme::thinned ? &tables : nullptr;

  const std::size_t nr = r_list.size();
  const std::size_t cols_per_t = 2 + 3 * nr;  // m, m^2; per r: M, M^2, M m
  const std::size_t n_cols = static_cast<std::size_t>(T + 1) * cols_per_t;
  std::vector<double> rs(r_list.begin(), r_list.end());
  const int d = D.d;
  const long long lim = pack::axis_limit(d);

  auto replica = [&](std::size_t i, double* cols) {
    ClusterGrower grower(sup, thin_ptr, replica_bond_seed(seed, i), opt.scheme);
    thread_local std::vector<std::uint64_t> frontier;
    frontier.clear();
    std::vector<long long> origin(d, 0);
    frontier.push_back(pack::pack_point(origin));
    const int bits = pack::bits_per_axis(d);
    const std::uint64_t mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
    for (int t = 0; t <= T; ++t) {
      if (t > 0) grower.step(frontier, t - 1);
      double* c = cols + static_cast<std::size_t>(t) * cols_per_t;
      const double m = static_cast<double>(frontier.size());
      c[0] += m;
      c[1] += m * m;
      for (std::size_t ri = 0; ri < nr; ++ri) {
        double M = 0.0;
        for (const std::uint64_t key : frontier) {
          const long long x1 = static_cast<long long>(key & mask) - lim;
          const double ax = std::abs(static_cast<double>(x1));
          M += (rs[ri] == 0.0) ? 1.0
                               : (ax == 0.0 ? 0.0 : std::exp(rs[ri] * std::log(ax)));
        }
        c[2 + 3 * ri] += M;
        c[3 + 3 * ri] += M * M;
        c[4 + 3 * ri] += M * m;
      }
      if (frontier.empty()) break;  // later slices contribute zeros
    }
  };

  const std::vector<double> totals = mc::blockwise_parallel_sums(
      static_cast<std::size_t>(N), n_cols, opt.n_threads, replica);

  const std::string scheme_name =
      opt.scheme == BondScheme::direct
          ? "op-frontier/keyed-bond-uniforms"
          : "op-frontier/poisson-binomial-thinning";
  mc::McSeries out;
  out.r_list = rs;
  for (int t = 0; t <= T; ++t) {
    const double* c = totals.data() + static_cast<std::size_t>(t) * cols_per_t;
    mc::McSeries::Row row;
    row.t = t;
    row.mass = mc::mean_estimate(c[0], c[1], N, seed, scheme_name);
    for (std::size_t ri = 0; ri < nr; ++ri) {
      row.moment.push_back(
          mc::mean_estimate(c[2 + 3 * ri], c[3 + 3 * ri], N, seed, scheme_name));
      row.ratio.push_back(mc::ratio_estimate(c[0], c[1], c[2 + 3 * ri],
                                             c[3 + 3 * ri], c[4 + 3 * ri], N,
                                             seed, scheme_name));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<std::vector<mc::McEstimate>> estimate_pointwise(
    const kern::StepDistribution& D, double p, int T,
    std::span<const std::vector<long long>> sites, long long N,
    std::uint64_t seed, const SampleOptions& opt) {
  validate(D, p, T);
  if (N < 1) throw invalid_parameter("replica count N must be >= 1");
  const Support sup(D, p);
  const ThinnedTables tables =
      opt.scheme == BondScheme::thinned ? ThinnedTables(sup) : ThinnedTables{};
  const ThinnedTables* thin_ptr =
      opt.scheme == BondScheme::thinned ? &tables : nullptr;

  std::vector<std::uint64_t> site_keys;
  site_keys.reserve(sites.size());
  for (const auto& s : sites) site_keys.push_back(pack::pack_point(s));

  const std::size_t ns = site_keys.size();
  const std::size_t n_cols = static_cast<std::size_t>(T + 1) * ns;

  auto replica = [&](std::size_t i, double* cols) {
    ClusterGrower grower(sup, thin_ptr, replica_bond_seed(seed, i), opt.scheme);
    thread_local std::vector<std::uint64_t> frontier;
    frontier.clear();
    std::vector<long long> origin(sup.d, 0);
    frontier.push_back(pack::pack_point(origin));
    for (int t = 0; t <= T; ++t) {
      if (t > 0) grower.step(frontier, t - 1);
      if (frontier.empty()) break;
      double* c = cols + static_cast<std::size_t>(t) * ns;
      for (std::size_t s = 0; s < ns; ++s)
        if (std::find(frontier.begin(), frontier.end(), site_keys[s]) !=
            frontier.end())
          c[s] += 1.0;
    }
  };

  const std::vector<double> totals = mc::blockwise_parallel_sums(
      static_cast<std::size_t>(N), n_cols, opt.n_threads, replica);

  std::vector<std::vector<mc::McEstimate>> out(static_cast<std::size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    out[t].reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      const double m = totals[static_cast<std::size_t>(t) * ns + s];
      out[t].push_back(mc::mean_estimate(m, m, N, seed, "op-pointwise"));
    }
  }
  return out;
}

LatticeField exact_two_point_small_t(const kern::StepDistribution& D, double p,
                                     int t) {
  validate(D, p, t);
  if (t == 0) return LatticeField::delta(D.d, 0);
  if (t == 1) {
    LatticeField f = LatticeField::delta(D.d, D.radius);
    f.t = 1;
    for (std::size_t i = 0; i < D.size(); ++i) f.values[i] = p * D.weights[i];
    f.recompute_mass();
    return f;
  }
  if (t != 2)
    throw invalid_parameter(
        "exact OP two-point function is implemented for t <= 2 only");

  double cost = 1.0;
  for (int i = 0; i < D.d; ++i)
    cost *= static_cast<double>(4 * D.radius + 1) *
            static_cast<double>(2 * D.radius + 1);
  if (cost > 2e8) throw resource_limit("support too large for the exact t=2 product");

  LatticeField f = LatticeField::delta(D.d, 2 * D.radius);
  f.t = 2;
  std::fill(f.values.begin(), f.values.end(), 0.0);
  std::vector<long long> x(D.d, -f.box_radius);
  std::vector<long long> y(D.d);
  std::vector<long long> diff(D.d);
  while (true) {
    // 1 - prod over intermediate sites y of (1 - p^2 D(y) D(x-y)); routes
    // through distinct y use disjoint bonds and are independent.
    double log_miss = 0.0;
    bool any = false;
    std::fill(y.begin(), y.end(), -D.radius);
    while (true) {
      for (int i = 0; i < D.d; ++i) diff[i] = x[i] - y[i];
      const double q = p * D.at(y) * p * D.at(diff);
      if (q > 0.0) {
        any = true;
        log_miss += std::log1p(-q);
      }
      int axis = 0;
      while (axis < D.d) {
        if (++y[axis] <= D.radius) break;
        y[axis] = -D.radius;
        ++axis;
      }
      if (axis == D.d) break;
    }
    if (any) f.ref(x) = -std::expm1(log_miss);
    int axis = 0;
    while (axis < D.d) {
      if (++x[axis] <= f.box_radius) break;
      x[axis] = -f.box_radius;
      ++axis;
    }
    if (axis == D.d) break;
  }
  f.recompute_mass();
  return f;
}

}  // namespace gyrad::op
