#include "gyrad/rw_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "gyrad/asymptotics.hpp"
#include "gyrad/errors.hpp"
#include "gyrad/fft.hpp"
#include "gyrad/quadrature.hpp"
#include "gyrad/simd.hpp"

namespace gyrad::rw {

namespace {

std::size_t box_volume(int d, long long radius) {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(2 * radius + 1);
  return n;
}

double box_volume_est(int d, long long radius) {
  double n = 1.0;
  for (int i = 0; i < d; ++i) n *= static_cast<double>(2 * radius + 1);
  return n;
}

// Direct convolution with leak accounting; kernel offsets outer, contiguous
// x_1 runs inner.
std::pair<LatticeField, double> convolve_direct(const LatticeField& phi,
                                                const kern::StepDistribution& D,
                                                long long out_radius) {
  const int d = phi.d;
  LatticeField out;
  out.d = d;
  out.t = phi.t + 1;
  out.box_radius = out_radius;
  out.values.assign(box_volume(d, out_radius), 0.0);

  const long long sf = phi.side();
  const long long so = out.side();
  const std::size_t rows_f = phi.values.size() / static_cast<std::size_t>(sf);
  const auto& ops = simd::active();

  // Per-row masses, needed only when rows can fall outside the box.
  std::vector<double> row_mass;
  const bool may_leak = out_radius < phi.box_radius + D.radius;
  if (may_leak && d > 1) {
    row_mass.resize(rows_f);
    for (std::size_t row = 0; row < rows_f; ++row)
      row_mass[row] = ops.sum(phi.values.data() + row * sf, sf);
  }

  double leak = 0.0;
  std::vector<long long> w(d, -D.radius);
  std::size_t widx = 0;
  do {
    const double kw = D.weights[widx++];
    for (std::size_t row = 0; row < rows_f; ++row) {
      std::size_t rr = row;
      bool inside = true;
      std::size_t out_row_base = 0;
      std::size_t stride = static_cast<std::size_t>(so);
      for (int i = 1; i < d; ++i) {
        const long long ai =
            static_cast<long long>(rr % static_cast<std::size_t>(sf)) - phi.box_radius;
        rr /= static_cast<std::size_t>(sf);
        const long long oi = ai + w[i];
        if (oi < -out_radius || oi > out_radius) {
          inside = false;
          break;
        }
        out_row_base += static_cast<std::size_t>(oi + out_radius) * stride;
        stride *= static_cast<std::size_t>(so);
      }
      const double* src_row = phi.values.data() + row * static_cast<std::size_t>(sf);
      if (!inside) {
        leak += kw * (d > 1 ? row_mass[row] : 0.0);
        continue;
      }
      const long long lo = std::max(-phi.box_radius, -out_radius - w[0]);
      const long long hi = std::min(phi.box_radius, out_radius - w[0]);
      if (lo > hi) {
        leak += kw * ops.sum(src_row, sf);
        continue;
      }
      ops.axpy(kw, src_row + (lo + phi.box_radius),
               out.values.data() + out_row_base +
                   static_cast<std::size_t>(lo + w[0] + out_radius),
               static_cast<std::size_t>(hi - lo + 1));
      if (lo > -phi.box_radius)
        leak += kw * ops.sum(src_row, static_cast<std::size_t>(lo + phi.box_radius));
      if (hi < phi.box_radius)
        leak += kw * ops.sum(src_row + (hi + 1 + phi.box_radius),
                             static_cast<std::size_t>(phi.box_radius - hi));
    }
  } while ([&] {
    for (auto& wi : w) {
      if (++wi <= D.radius) return true;
      wi = -D.radius;
    }
    return false;
  }());

  out.recompute_mass();
  return {std::move(out), leak};
}

// Cache of half-complex convolution plans keyed by FFT size, shared per
// evolution run (thread-unsafe by design: one evolve per thread).
struct FftConvCache {
  const kern::StepDistribution* D = nullptr;
  std::map<std::size_t, std::unique_ptr<fft::RealConvPlan>> plans;
  std::vector<double> out_buf;

  fft::RealConvPlan& plan_for(std::size_t signal_len) {
    const std::size_t ks = D->size();
    const std::size_t n = fft::next_pow2(signal_len + ks - 1);
    auto it = plans.find(n);
    if (it == plans.end()) {
      auto plan = std::make_unique<fft::RealConvPlan>(
          std::span<const double>(D->weights), n - ks + 1);
      it = plans.emplace(n, std::move(plan)).first;
    }
    return *it->second;
  }
};

std::pair<LatticeField, double> convolve_fft(const LatticeField& phi,
                                             const kern::StepDistribution& D,
                                             long long out_radius,
                                             FftConvCache& cache) {
  if (phi.d != 1)
    throw invalid_parameter("FFT convolution backend is implemented for d = 1");
  const std::size_t n_sig = phi.values.size();
  const std::size_t n_full = n_sig + D.size() - 1;
  cache.out_buf.resize(n_full);
  cache.plan_for(n_sig).run(std::span<const double>(phi.values),
                            std::span<double>(cache.out_buf));

  // Full linear result spans radius phi.box_radius + D.radius.
  const long long full_radius = phi.box_radius + D.radius;
  LatticeField out;
  out.d = 1;
  out.t = phi.t + 1;
  out.box_radius = out_radius;
  out.values.assign(box_volume(1, out_radius), 0.0);

  const auto& ops = simd::active();
  double leak = 0.0;
  const long long drop = full_radius - out_radius;  // cells per flank
  if (drop > 0) {
    leak += ops.sum(cache.out_buf.data(), static_cast<std::size_t>(drop));
    leak += ops.sum(cache.out_buf.data() + (n_full - drop),
                    static_cast<std::size_t>(drop));
    std::copy_n(cache.out_buf.data() + drop, out.values.size(),
                out.values.data());
  } else {
    std::copy_n(cache.out_buf.data(), n_full, out.values.data() - drop);
  }

  // FFT rounding leaves +/- dust of order eps * peak in cells whose true
  // value is far smaller.  Clamping only the negatives would bias weighted
  // moments upward, so zero everything below the roundoff floor.
  double peak = 0.0;
  for (const double v : out.values) peak = std::max(peak, v);
  const double floor_v = 1e-15 * peak;
  double min_v = 0.0;
  for (double& v : out.values) {
    min_v = std::min(min_v, v);
    if (v < floor_v) v = 0.0;
  }
  if (min_v < -1e-11)
    throw numeric_failure("FFT convolution produced a significant negative value");

  out.recompute_mass();
  return {std::move(out), leak};
}

long long target_radius(const BoxPolicy& box, long long t, long long kernel_radius) {
  switch (box.kind) {
    case BoxPolicy::Kind::grow:
      return t * kernel_radius;
    case BoxPolicy::Kind::fixed:
      return box.radius;
    case BoxPolicy::Kind::grow_capped:
      return std::min(t * kernel_radius, box.radius);
  }
  return 0;
}

}  // namespace

std::pair<LatticeField, double> convolve_step(const LatticeField& phi,
                                              const kern::StepDistribution& D,
                                              long long out_radius,
                                              Backend backend) {
  if (phi.d != D.d) throw invalid_parameter("field/kernel dimension mismatch");
  if (backend == Backend::fft) {
    FftConvCache cache;
    cache.D = &D;
    return convolve_fft(phi, D, out_radius, cache);
  }
  return convolve_direct(phi, D, out_radius);
}

void evolve(const kern::StepDistribution& D, long long T,
            const EvolveOptions& opt,
            const std::function<void(const LatticeField&)>& visit) {
  if (T < 0) throw invalid_parameter("horizon T must be >= 0");
  if ((opt.box.kind == BoxPolicy::Kind::fixed ||
       opt.box.kind == BoxPolicy::Kind::grow_capped) &&
      opt.box.radius < D.radius)
    throw invalid_parameter("box radius must be at least the kernel radius");

  const long long max_radius = target_radius(opt.box, T, D.radius);
  const double peak_doubles = 2.5 * box_volume_est(D.d, max_radius) +
                              4.0 * static_cast<double>(fft::next_pow2(
                                        static_cast<std::size_t>(
                                            std::min(box_volume_est(1, max_radius + D.radius),
                                                     1e18))));
  if (peak_doubles * 8.0 > static_cast<double>(opt.mem_cap_bytes))
    throw resource_limit("evolution memory estimate exceeds the configured cap");

  LatticeField phi = LatticeField::delta(
      D.d, opt.box.kind == BoxPolicy::Kind::fixed ? opt.box.radius : 0);
  visit(phi);

  FftConvCache cache;
  cache.D = &D;

  for (long long t = 1; t <= T; ++t) {
    const long long out_radius = target_radius(opt.box, t, D.radius);
    Backend be = opt.backend;
    if (be == Backend::automatic) {
      const double cost = box_volume_est(D.d, out_radius) *
                          static_cast<double>(D.size());
      be = (cost > opt.direct_cost_threshold && D.d == 1) ? Backend::fft
                                                          : Backend::direct;
    }
    std::pair<LatticeField, double> step =
        (be == Backend::fft) ? convolve_fft(phi, D, out_radius, cache)
                             : convolve_direct(phi, D, out_radius);
    if (opt.box.kind != BoxPolicy::Kind::grow &&
        step.second > opt.box.leak_tol)
      throw numeric_failure("per-step truncation leak exceeds the tolerance");
    step.first.leak = phi.leak + step.second;
    phi = std::move(step.first);
    visit(phi);
  }
}

std::vector<LatticeField> evolve_collect(const kern::StepDistribution& D,
                                         long long T,
                                         const EvolveOptions& opt) {
  std::vector<LatticeField> out;
  out.reserve(static_cast<std::size_t>(T + 1));
  evolve(D, T, opt, [&](const LatticeField& f) { out.push_back(f); });
  return out;
}

namespace {

// |x|^r with the x = 0 convention; log-exp form for arbitrary real r.
double power_abs(double x, double r) {
  if (r == 0.0) return 1.0;
  const double a = std::abs(x);
  if (a == 0.0) return 0.0;
  return std::exp(r * std::log(a));
}

std::vector<double> axis_weight_table(long long radius, double r) {
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  for (long long x = -radius; x <= radius; ++x)
    w[static_cast<std::size_t>(x + radius)] = power_abs(static_cast<double>(x), r);
  return w;
}

}  // namespace

double abs_moment_axis(const LatticeField& phi, double r) {
  if (r < 0.0) throw invalid_parameter("moment order r must be >= 0");
  const auto& ops = simd::active();
  const std::vector<double> w = axis_weight_table(phi.box_radius, r);
  const std::size_t s = static_cast<std::size_t>(phi.side());
  const std::size_t rows = phi.values.size() / s;
  if (rows == 1) return ops.dot(w.data(), phi.values.data(), s);
  const std::vector<double> marginal = phi.axis_marginal();
  return ops.dot(w.data(), marginal.data(), s);
}

double abs_moment_radial(const LatticeField& phi, double r) {
  if (r < 0.0) throw invalid_parameter("moment order r must be >= 0");
  if (phi.d == 1) return abs_moment_axis(phi, r);
  const long long R = phi.box_radius;
  std::vector<long long> x(phi.d, -R);
  double acc = 0.0, comp = 0.0;
  std::size_t idx = 0;
  while (true) {
    const double v = phi.values[idx];
    if (v != 0.0) {
      double ssq = 0.0;
      for (int i = 0; i < phi.d; ++i)
        ssq += static_cast<double>(x[i]) * static_cast<double>(x[i]);
      const double term = (ssq == 0.0 || r == 0.0)
                              ? (r == 0.0 ? v : 0.0)
                              : std::exp(0.5 * r * std::log(ssq)) * v;
      const double y = term - comp;
      const double t2 = acc + y;
      comp = (t2 - acc) - y;
      acc = t2;
    }
    ++idx;
    int axis = 0;
    while (axis < phi.d) {
      if (++x[axis] <= R) break;
      x[axis] = -R;
      ++axis;
    }
    if (axis == phi.d) break;
  }
  return acc;
}

double gyration_radius(const LatticeField& phi, double r) {
  if (r <= 0.0) throw invalid_parameter("gyration radius requires r > 0");
  if (phi.mass <= 0.0) throw degenerate_field("field has no mass");
  return std::pow(abs_moment_radial(phi, r) / phi.mass, 1.0 / r);
}

double characteristic_ratio(const LatticeField& phi,
                            std::span<const double> k) {
  if (phi.mass <= 0.0) throw degenerate_field("field has no mass");
  const long long R = phi.box_radius;
  std::vector<long long> x(phi.d, -R);
  double acc = 0.0, comp = 0.0;
  std::size_t idx = 0;
  while (true) {
    const double v = phi.values[idx];
    if (v != 0.0) {
      double phase = 0.0;
      for (int i = 0; i < phi.d; ++i) phase += k[i] * static_cast<double>(x[i]);
      const double term = std::cos(phase) * v;
      const double y = term - comp;
      const double t2 = acc + y;
      comp = (t2 - acc) - y;
      acc = t2;
    }
    ++idx;
    int axis = 0;
    while (axis < phi.d) {
      if (++x[axis] <= R) break;
      x[axis] = -R;
      ++axis;
    }
    if (axis == phi.d) break;
  }
  return acc / phi.mass;
}

double fractional_moment_via_integral(const LatticeField& phi, double r,
                                      double rel_tol) {
  if (!(r > 0.0 && r < 2.0))
    throw invalid_parameter("representation integral requires r in (0, 2)");

  const std::vector<double> marginal = phi.axis_marginal();
  const long long R = phi.box_radius;

  // Folded marginal over x_1 = 1..R (the x_1 = 0 column never contributes).
  std::vector<double> folded(static_cast<std::size_t>(R) + 1, 0.0);
  for (long long a = 1; a <= R; ++a)
    folded[static_cast<std::size_t>(a)] =
        marginal[static_cast<std::size_t>(R + a)] +
        marginal[static_cast<std::size_t>(R - a)];

  // Head: adaptive quadrature of u^{-1-r} sum_x (1 - cos(u x_1)) phi(x)
  // over [0, 1], with 1 - cos written as 2 sin^2 for small-u accuracy.
  auto head_integrand = [&](double u) {
    double g = 0.0, comp = 0.0;
    for (long long a = 1; a <= R; ++a) {
      const double m = folded[static_cast<std::size_t>(a)];
      if (m == 0.0) continue;
      const double s = std::sin(0.5 * u * static_cast<double>(a));
      const double term = 2.0 * s * s * m;
      const double y = term - comp;
      const double t2 = g + y;
      comp = (t2 - g) - y;
      g = t2;
    }
    return g * std::pow(u, -1.0 - r);
  };
  auto head = quad::integrate(head_integrand, 0.0, 1.0, 0.1 * rel_tol, 1e-14, 6000);

  // Tail: int_1^inf (1-cos(u a)) u^{-1-r} du = a^r T_r(a) per site, with
  // T_r(w) = (1-cos w) w^{-r}/r + S_r(w)/r.
  double tail = 0.0;
  for (long long a = 1; a <= R; ++a) {
    const double m = folded[static_cast<std::size_t>(a)];
    if (m == 0.0) continue;
    const double w = static_cast<double>(a);
    const double t_r = (1.0 - std::cos(w)) * std::pow(w, -r) / r +
                       asympt::sin_tail_integral(r, w) / r;
    tail += m * std::pow(w, r) * t_r;
  }

  const double kr = asympt::K_r_closed(r);
  const double value = (head.value + tail) / kr;
  if (!head.converged || (value != 0.0 && head.abs_error / kr > rel_tol * std::abs(value)))
    throw numeric_failure("representation integral did not reach the residual target");
  return value;
}

MomentSeries compute_moments(const kern::StepDistribution& D, long long T,
                             std::span<const double> r_list,
                             const EvolveOptions& opt,
                             std::span<const long long> emit_times) {
  MomentSeries series;
  series.r_list.assign(r_list.begin(), r_list.end());

  const long long max_radius = target_radius(opt.box, T, D.radius);

  // Weight tables at the final radius; slices serve smaller boxes.
  std::vector<std::vector<double>> tables;
  tables.reserve(r_list.size());
  for (double r : r_list) tables.push_back(axis_weight_table(max_radius, r));

  std::size_t emit_pos = 0;
  const auto& ops = simd::active();
  evolve(D, T, opt, [&](const LatticeField& phi) {
    if (!emit_times.empty()) {
      if (emit_pos >= emit_times.size() || phi.t != emit_times[emit_pos]) return;
      ++emit_pos;
    }
    MomentRow row;
    row.t = phi.t;
    row.mass = phi.mass;
    row.leak = phi.leak;
    const std::size_t s = static_cast<std::size_t>(phi.side());
    std::vector<double> marginal;
    const double* m1 = phi.values.data();
    if (phi.d > 1) {
      marginal = phi.axis_marginal();
      m1 = marginal.data();
    }
    const std::size_t off = static_cast<std::size_t>(max_radius - phi.box_radius);
    for (std::size_t ri = 0; ri < series.r_list.size(); ++ri) {
      const double moment = ops.dot(tables[ri].data() + off, m1, s);
      row.moment_axis.push_back(moment);
      row.ratio.push_back(phi.mass > 0.0 ? moment / phi.mass : 0.0);
      const double rr = series.r_list[ri];
      double gyr = 0.0;
      if (rr > 0.0 && phi.mass > 0.0) {
        // In d = 1 the Euclidean and axis moments coincide.
        const double radial =
            phi.d == 1 ? moment : abs_moment_radial(phi, rr);
        gyr = std::pow(radial / phi.mass, 1.0 / rr);
      }
      row.gyration.push_back(gyr);
    }
    series.rows.push_back(std::move(row));
  });
  return series;
}

}  // namespace gyrad::rw
