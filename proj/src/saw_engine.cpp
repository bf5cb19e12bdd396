#include "gyrad/saw_engine.hpp"

#include <algorithm>
#include <cmath>

#include "gyrad/errors.hpp"
#include "gyrad/packing.hpp"
#include "gyrad/rng.hpp"

namespace gyrad::saw {

namespace {

struct DfsFrame {
  std::size_t next_offset = 0;
};

// All signed coordinate permutations of x, deduplicated, in a deterministic
// order.
std::vector<std::vector<long long>> orbit_members(std::span<const long long> x) {
  const int d = static_cast<int>(x.size());
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i;
  std::vector<std::vector<long long>> members;
  do {
    for (int signs = 0; signs < (1 << d); ++signs) {
      std::vector<long long> y(d);
      for (int i = 0; i < d; ++i)
        y[i] = (signs & (1 << i)) ? -x[perm[i]] : x[perm[i]];
      members.push_back(std::move(y));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return members;
}

void symmetrize_orbits(LatticeField& f) {
  const long long R = f.box_radius;
  std::vector<long long> x(f.d, -R);
  while (true) {
    const auto members = orbit_members(x);
    if (members.front() == x) {  // canonical representative
      double total = 0.0;
      for (const auto& m : members) total += f.values[f.index(m)];
      const double avg = total / static_cast<double>(members.size());
      for (const auto& m : members) f.values[f.index(m)] = avg;
    }
    int axis = 0;
    while (axis < f.d) {
      if (++x[axis] <= R) break;
      x[axis] = -R;
      ++axis;
    }
    if (axis == f.d) break;
  }
}

}  // namespace

SawEnumeration enumerate(const kern::StepDistribution& D, int T,
                         double path_cap) {
  if (T < 0) throw invalid_parameter("horizon T must be >= 0");
  const kern::StepSampler support(D);

  // Offsets excluding the zero step (it violates avoidance immediately).
  std::vector<std::size_t> moves;
  for (std::size_t i = 0; i < support.support_size(); ++i) {
    bool zero = true;
    for (long long c : support.offset(i)) zero = zero && (c == 0);
    if (!zero) moves.push_back(i);
  }
  const double est = std::pow(static_cast<double>(moves.size()),
                              static_cast<double>(T));
  if (est > path_cap)
    throw resource_limit("enumeration would visit about " +
                         std::to_string(est) + " paths (cap " +
                         std::to_string(path_cap) + ")");

  SawEnumeration out;
  out.fields.reserve(static_cast<std::size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    out.fields.push_back(LatticeField::delta(D.d, static_cast<long long>(t) * D.radius));
    out.fields.back().t = t;
    if (t > 0) std::fill(out.fields[t].values.begin(), out.fields[t].values.end(), 0.0);
  }

  // Iterative DFS over self-avoiding paths, accumulating every prefix.
  std::vector<long long> pos(D.d, 0);
  std::vector<long long> nxt(D.d);
  std::vector<std::uint64_t> visited{pack::pack_point(pos)};
  std::vector<double> weight{1.0};
  std::vector<DfsFrame> stack{DfsFrame{}};

  while (!stack.empty()) {
    DfsFrame& frame = stack.back();
    const int depth = static_cast<int>(stack.size()) - 1;
    if (depth == T || frame.next_offset >= moves.size()) {
      if (depth > 0) {
        const std::size_t mi = moves[stack[depth - 1].next_offset - 1];
        for (int i = 0; i < D.d; ++i) pos[i] -= support.offset(mi)[i];
      }
      visited.pop_back();
      weight.pop_back();
      stack.pop_back();
      continue;
    }
    const std::size_t mi = moves[frame.next_offset++];
    for (int i = 0; i < D.d; ++i) nxt[i] = pos[i] + support.offset(mi)[i];
    const std::uint64_t key = pack::pack_point(nxt);
    if (std::find(visited.begin(), visited.end(), key) != visited.end())
      continue;
    const double w = weight.back() * support.weight(mi);
    const int t = depth + 1;
    out.fields[t].ref(nxt) += w;
    pos = nxt;
    visited.push_back(key);
    weight.push_back(w);
    stack.push_back(DfsFrame{});
  }

  // DFS visits mirrored paths in different orders, which leaves ulp-level
  // asymmetries in the accumulated sums.  Averaging each symmetry orbit in a
  // fixed member order makes the fields Z^d-symmetric exactly.
  for (auto& f : out.fields) symmetrize_orbits(f);

  for (auto& f : out.fields) {
    f.recompute_mass();
    out.path_count_weighted.push_back(f.mass);
  }
  return out;
}

mc::McSeries sample_saw_moments(const kern::StepDistribution& D, int T,
                                std::span<const double> r_list, long long N,
                                std::uint64_t seed, const SampleOptions& opt) {
  if (N < 1) throw invalid_parameter("replica count N must be >= 1");
  if (T < 1) throw invalid_parameter("horizon T must be >= 1");
  if (T > opt.t_cap)
    throw invalid_parameter(
        "SAW horizon exceeds the acceptance-decay cap; raise t_cap explicitly");

  const kern::StepSampler sampler(D);
  const std::size_t nr = r_list.size();
  const std::size_t cols_per_t = 1 + 2 * nr;  // mass; per r: M, M^2
  const std::size_t n_cols = static_cast<std::size_t>(T + 1) * cols_per_t;
  std::vector<double> rs(r_list.begin(), r_list.end());
  const int d = D.d;

  auto replica = [&](std::size_t i, double* cols) {
    rng::Xoshiro256pp g = rng::replica_stream(seed, i);
    thread_local std::vector<long long> pos, step;
    thread_local std::vector<std::uint64_t> visited;
    pos.assign(d, 0);
    step.assign(d, 0);
    visited.clear();
    visited.push_back(pack::pack_point(pos));
    // t = 0: mass 1; |0|^r is 1 only at r = 0.
    cols[0] += 1.0;
    for (std::size_t ri = 0; ri < nr; ++ri) {
      if (rs[ri] == 0.0) {
        cols[1 + 2 * ri] += 1.0;
        cols[2 + 2 * ri] += 1.0;
      }
    }
    for (int t = 1; t <= T; ++t) {
      sampler.sample(g, step);
      for (int a = 0; a < d; ++a) pos[a] += step[a];
      const std::uint64_t key = pack::pack_point(pos);
      if (std::find(visited.begin(), visited.end(), key) != visited.end())
        break;  // indicator is 0 from here on
      visited.push_back(key);
      double* c = cols + static_cast<std::size_t>(t) * cols_per_t;
      c[0] += 1.0;
      const double ax = std::abs(static_cast<double>(pos[0]));
      for (std::size_t ri = 0; ri < nr; ++ri) {
        const double m = (rs[ri] == 0.0)
                             ? 1.0
                             : (ax == 0.0 ? 0.0 : std::exp(rs[ri] * std::log(ax)));
        c[1 + 2 * ri] += m;
        c[2 + 2 * ri] += m * m;
      }
    }
  };

  const std::vector<double> totals = mc::blockwise_parallel_sums(
      static_cast<std::size_t>(N), n_cols, opt.n_threads, replica);

  const std::string scheme =
      "saw-indicator-paths/xoshiro256pp-replica-streams";
  mc::McSeries out;
  out.r_list = rs;
  for (int t = 0; t <= T; ++t) {
    const double* c = totals.data() + static_cast<std::size_t>(t) * cols_per_t;
    mc::McSeries::Row row;
    row.t = t;
    // The indicator is 0/1, so its square equals itself.
    row.mass = mc::mean_estimate(c[0], c[0], N, seed, scheme);
    for (std::size_t ri = 0; ri < nr; ++ri) {
      const double sM = c[1 + 2 * ri], sM2 = c[2 + 2 * ri];
      row.moment.push_back(mc::mean_estimate(sM, sM2, N, seed, scheme));
      // M already carries the indicator, so sum(M * m) = sum(M).
      row.ratio.push_back(
          mc::ratio_estimate(c[0], c[0], sM, sM2, sM, N, seed, scheme));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

double susceptibility_partial_sum(const SawEnumeration& e, double m) {
  if (m < 0.0) throw invalid_parameter("fugacity m must be >= 0");
  if (e.path_count_weighted.empty())
    throw invalid_parameter("empty enumeration");
  double acc = 0.0;
  double mt = 1.0;
  for (double c : e.path_count_weighted) {
    acc += mt * c;
    mt *= m;
  }
  return acc;
}

double ratio_method_mc(std::span<const double> masses) {
  if (masses.size() < 3)
    throw invalid_parameter("ratio method needs at least 3 coefficients");
  // OLS of r_t = c_{t+1}/c_t against 1/t; the intercept estimates 1/m_c.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t t = 1; t + 1 < masses.size(); ++t) {
    if (masses[t] <= 0.0) continue;
    const double rt = masses[t + 1] / masses[t];
    const double x = 1.0 / static_cast<double>(t);
    sx += x;
    sy += rt;
    sxx += x * x;
    sxy += x * rt;
    ++n;
  }
  if (n < 2) throw invalid_parameter("ratio method needs 2 usable ratios");
  const double det = static_cast<double>(n) * sxx - sx * sx;
  const double intercept = (sy * sxx - sx * sxy) / det;
  if (intercept <= 0.0)
    throw numeric_failure("ratio extrapolation gave a nonpositive limit");
  return 1.0 / intercept;
}

}  // namespace gyrad::saw
