#include "gyrad/power_series.hpp"

#include <algorithm>
#include <cmath>

#include "gyrad/errors.hpp"

namespace gyrad::series {

PowerSeries binomial_coefficients(double beta, std::size_t T) {
  if (beta <= -1.0 && beta == std::floor(beta))
    throw invalid_parameter("beta must not be a negative integer <= -1");
  if (T > 100000) throw resource_limit("series horizon capped at 1e5");
  PowerSeries c(T + 1);
  c[0] = 1.0;
  for (std::size_t t = 1; t <= T; ++t)
    c[t] = c[t - 1] * (beta + static_cast<double>(t)) / static_cast<double>(t);
  return c;
}

namespace {

PowerSeries cauchy_product(const PowerSeries& a, const PowerSeries& b) {
  const std::size_t T = a.size() - 1;
  PowerSeries out(T + 1, 0.0);
  for (std::size_t t = 0; t <= T; ++t) {
    double acc = 0.0;
    for (std::size_t s = 0; s <= t; ++s) acc = std::fma(a[s], b[t - s], acc);
    out[t] = acc;
  }
  return out;
}

}  // namespace

PowerSeries singular_coefficients(double beta, int gamma, std::size_t T) {
  if (gamma < 0 || gamma > 2)
    throw invalid_parameter(
        "log power gamma must be 0, 1 or 2 (fractional powers have no formal "
        "power series)");
  PowerSeries out = binomial_coefficients(beta, T);
  if (gamma == 0) return out;
  PowerSeries log_series(T + 1, 0.0);
  for (std::size_t t = 1; t <= T; ++t)
    log_series[t] = 1.0 / static_cast<double>(t);
  for (int g = 0; g < gamma; ++g) out = cauchy_product(out, log_series);
  return out;
}

std::vector<LatticeField> delta_identity_series(int d, std::size_t T) {
  std::vector<LatticeField> I;
  I.reserve(T + 1);
  I.push_back(LatticeField::delta(d, 0));
  for (std::size_t t = 1; t <= T; ++t) {
    LatticeField z = LatticeField::delta(d, 0);
    z.t = static_cast<long long>(t);
    z.values[0] = 0.0;
    z.mass = 0.0;
    I.push_back(std::move(z));
  }
  return I;
}

LaceDecomposition deconvolve_lace(const std::vector<LatticeField>& phi,
                                  const std::vector<LatticeField>& I) {
  if (phi.empty() || I.size() != phi.size())
    throw invalid_parameter("phi and I series must be nonempty and equal length");
  if (sup_diff(phi[0], I[0]) > 1e-13)
    throw invalid_parameter("phi[0] must agree with I[0]");

  const std::size_t T = phi.size() - 1;
  LaceDecomposition out;
  out.phi = phi;
  out.I = I;
  out.J.push_back([&] {
    LatticeField z = LatticeField::delta(phi[0].d, 0);
    z.values[0] = 0.0;
    z.mass = 0.0;
    return z;
  }());

  // J_t = phi_t - I_t - sum_{s=1}^{t-1} J_s * phi_{t-s}; the s = t term is
  // J_t itself since phi_0 is a delta.
  for (std::size_t t = 1; t <= T; ++t) {
    LatticeField J_t = phi[t];
    {
      // J_t -= I_t
      const LatticeField& It = I[t];
      std::vector<long long> x(It.d, -It.box_radius);
      while (true) {
        const double v = It.at(x);
        if (v != 0.0) J_t.ref(x) -= v;
        int axis = 0;
        while (axis < It.d) {
          if (++x[axis] <= It.box_radius) break;
          x[axis] = -It.box_radius;
          ++axis;
        }
        if (axis == It.d) break;
      }
    }
    for (std::size_t s = 1; s < t; ++s) {
      const LatticeField conv =
          convolve_fields(out.J[s], phi[t - s], J_t.box_radius);
      for (std::size_t i = 0; i < J_t.values.size(); ++i)
        J_t.values[i] -= conv.values[i];
    }
    J_t.t = static_cast<long long>(t);
    J_t.recompute_mass();
    out.J.push_back(std::move(J_t));
  }

  // Round trip: phi_t should equal I_t + sum_{s=1}^t J_s * phi_{t-s}.
  double worst = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    LatticeField recon = I[t];
    if (recon.box_radius < phi[t].box_radius) {
      LatticeField wide = LatticeField::delta(phi[t].d, phi[t].box_radius);
      std::fill(wide.values.begin(), wide.values.end(), 0.0);
      std::vector<long long> x(recon.d, -recon.box_radius);
      while (true) {
        const double v = recon.at(x);
        if (v != 0.0) wide.ref(x) = v;
        int axis = 0;
        while (axis < recon.d) {
          if (++x[axis] <= recon.box_radius) break;
          x[axis] = -recon.box_radius;
          ++axis;
        }
        if (axis == recon.d) break;
      }
      recon = std::move(wide);
    }
    for (std::size_t s = 1; s <= t; ++s) {
      const LatticeField conv =
          convolve_fields(out.J[s], phi[t - s], recon.box_radius);
      for (std::size_t i = 0; i < recon.values.size(); ++i)
        recon.values[i] += conv.values[i];
    }
    recon.t = static_cast<long long>(t);
    worst = std::max(worst, sup_diff(recon, phi[t]));
  }
  out.reconstruction_residual = worst;
  if (worst > 1e-12)
    throw numeric_failure(
        "lace reconstruction residual " + std::to_string(worst) +
        " exceeds 1e-12 (box truncation is corrupting the convolutions)");
  return out;
}

BlowupPoint partial_sum_point(std::span<const double> coeffs, double m) {
  BlowupPoint p;
  p.m = m;
  double acc = 0.0, comp = 0.0;
  double mt = 1.0;
  double last = 0.0;
  for (double c : coeffs) {
    if (c != 0.0) {
      last = mt * c;
      const double y = last - comp;
      const double t2 = acc + y;
      comp = (t2 - acc) - y;
      acc = t2;
    }
    mt *= m;
  }
  p.value = acc;
  p.tail_fraction = acc != 0.0 ? std::abs(last / acc) : 0.0;
  return p;
}

double amplitude_at_fixed_exponent(std::span<const BlowupPoint> points,
                                   double m_c, double exponent,
                                   const BlowupWindow& window) {
  if (m_c <= 0.0) throw invalid_parameter("m_c must be positive");
  double acc = 0.0;
  int n = 0;
  for (const auto& p : points) {
    const double eps = 1.0 - p.m / m_c;
    if (eps < window.eps_min || eps > window.eps_max) continue;
    if (p.tail_fraction > window.tail_max) continue;
    if (p.value <= 0.0) continue;
    acc += std::log(p.value) + exponent * std::log(eps);
    ++n;
  }
  if (n < 5)
    throw invalid_parameter("amplitude estimate needs at least 5 usable points");
  return std::exp(acc / n);
}

BlowupFit fit_generating_blowup(std::span<const BlowupPoint> points, double m_c,
                                double expected_exponent,
                                const BlowupWindow& window) {
  if (m_c <= 0.0) throw invalid_parameter("m_c must be positive");
  std::vector<std::pair<double, double>> usable;  // (log eps, log value)
  for (const auto& p : points) {
    const double eps = 1.0 - p.m / m_c;
    if (eps < window.eps_min || eps > window.eps_max) continue;
    if (p.tail_fraction > window.tail_max) continue;
    if (p.value <= 0.0) continue;
    usable.emplace_back(std::log(eps), std::log(p.value));
  }
  if (usable.size() < 5)
    throw invalid_parameter("blowup fit needs at least 5 usable points");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : usable) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(usable.size());
  const double det = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / det;
  const double inter = (sy * sxx - sx * sxy) / det;

  BlowupFit fit;
  fit.exponent = -slope;
  fit.amplitude = std::exp(inter);
  fit.points_used = static_cast<int>(usable.size());
  fit.expected_exponent = expected_exponent;
  double ss = 0.0;
  for (auto [x, y] : usable) {
    const double r = y - (inter + slope * x);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace gyrad::series
