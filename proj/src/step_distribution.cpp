#include "gyrad/step_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stack>

#include "gyrad/asymptotics.hpp"
#include "gyrad/errors.hpp"
#include "gyrad/quadrature.hpp"
#include "gyrad/simd.hpp"

namespace gyrad::kern {

namespace {

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// Odometer over [-R, R]^d, x_1 fastest; returns false when exhausted.
bool advance(std::vector<long long>& x, long long R) {
  for (auto& xi : x) {
    if (++xi <= R) return true;
    xi = -R;
  }
  return false;
}

}  // namespace

std::size_t StepDistribution::index(std::span<const long long> x) const {
  const long long s = side();
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int i = 0; i < d; ++i) {
    idx += static_cast<std::size_t>(x[i] + radius) * stride;
    stride *= static_cast<std::size_t>(s);
  }
  return idx;
}

double StepDistribution::at(std::span<const long long> x) const {
  for (int i = 0; i < d; ++i)
    if (x[i] < -radius || x[i] > radius) return 0.0;
  return weights[index(x)];
}

double StepDistribution::max_weight() const {
  return *std::max_element(weights.begin(), weights.end());
}

StepDistribution build_kac_kernel(int d, double L, double alpha,
                                  long long radius, double tail_tol) {
  if (d < 1) throw invalid_parameter("dimension must be >= 1");
  if (L < 1.0) throw invalid_parameter("range parameter L must be >= 1");
  if (alpha <= 0.0) throw invalid_parameter("tail exponent alpha must be > 0");
  // Radius 1 is allowed: the small-support kernels driving the exact SAW
  // enumeration and the OP two-layer oracle are R = 1 boxes.
  const long long min_radius = std::max<long long>(1, static_cast<long long>(std::ceil(L)));
  if (radius < min_radius)
    throw invalid_parameter("truncation radius must be >= max(1, ceil(L))");

  StepDistribution D;
  D.d = d;
  D.L = L;
  D.alpha = alpha;
  D.radius = radius;

  double volume = 1.0;
  for (int i = 0; i < d; ++i) volume *= static_cast<double>(2 * radius + 1);
  if (volume > 4.0e8) throw resource_limit("kernel box too large to allocate");
  D.weights.resize(static_cast<std::size_t>(volume));

  // h depends on |x|^2 only, so symmetry of the weights is exact.
  const double expo = -(d + alpha);
  std::vector<long long> x(d, -radius);
  std::size_t idx = 0;
  do {
    double ssq = 0.0;
    for (int i = 0; i < d; ++i)
      ssq += static_cast<double>(x[i]) * static_cast<double>(x[i]);
    const double scaled = std::sqrt(ssq) / L;
    D.weights[idx++] = std::pow(std::max(scaled, 1.0), expo);
  } while (advance(x, radius));

  const double h_sum = simd::active().sum(D.weights.data(), D.weights.size());
  D.c_h = 1.0 / h_sum;
  simd::active().scale(D.weights.data(), D.c_h, D.weights.size());

  // Discarded mass: sum_{|x|_inf > R} h(x/L) <= kappa L^{d+alpha} omega_d
  // R^{-alpha} / alpha with kappa = 2 covering lattice-vs-integral slack.
  const double kappa = 2.0;
  D.tail_bound = D.c_h * kappa * std::pow(L, d + alpha) *
                 asympt::sphere_surface(d) * std::pow(static_cast<double>(radius), -alpha) /
                 alpha;
  if (D.tail_bound > tail_tol)
    throw truncation_error(
        "truncation radius leaves too much tail mass (bound " +
            std::to_string(D.tail_bound) + " > tolerance " +
            std::to_string(tail_tol) + ")",
        D.tail_bound);
  return D;
}

double fourier(const StepDistribution& D, std::span<const double> k) {
  KahanSum acc;
  std::vector<long long> x(D.d, -D.radius);
  std::size_t idx = 0;
  do {
    double phase = 0.0;
    for (int i = 0; i < D.d; ++i) phase += k[i] * static_cast<double>(x[i]);
    acc.add(std::cos(phase) * D.weights[idx++]);
  } while (advance(x, D.radius));
  return acc.s;
}

double one_minus_fourier(const StepDistribution& D, std::span<const double> k) {
  KahanSum acc;
  std::vector<long long> x(D.d, -D.radius);
  std::size_t idx = 0;
  do {
    double phase = 0.0;
    for (int i = 0; i < D.d; ++i) phase += k[i] * static_cast<double>(x[i]);
    const double s = std::sin(0.5 * phase);
    acc.add(2.0 * s * s * D.weights[idx++]);
  } while (advance(x, D.radius));
  return acc.s;
}

MomentValue abs_moment(const StepDistribution& D, double r) {
  if (r < 0.0) throw invalid_parameter("moment order r must be >= 0");
  KahanSum acc;
  std::vector<long long> x(D.d, -D.radius);
  std::size_t idx = 0;
  do {
    double ssq = 0.0;
    for (int i = 0; i < D.d; ++i)
      ssq += static_cast<double>(x[i]) * static_cast<double>(x[i]);
    const double w = D.weights[idx++];
    if (r == 0.0) {
      acc.add(w);
    } else if (ssq > 0.0) {
      acc.add(std::exp(0.5 * r * std::log(ssq)) * w);
    }
  } while (advance(x, D.radius));
  return {acc.s, r >= D.alpha};
}

namespace {

// Int_{R^d} (1 - cos y_1) / |y|^{d+alpha} d^d y for alpha in (0, 2), d <= 3,
// via the radial-angular reduction: series on [0, 1], exact power tail plus
// an oscillatory correction handled by sin_tail_integral or an
// Euler-accelerated Bessel tail.
double cos_deficit_integral(int d, double alpha) {
  if (d == 1) {
    // 2 * [ int_0^1 (1-cos y) y^{-1-a} dy + (1-cos 1)/a + S_a(1)/a ].
    double head = 0.0;
    double fact = 1.0;  // (2n)!
    for (int n = 1; n <= 24; ++n) {
      fact *= (2.0 * n - 1.0) * (2.0 * n);
      const double term =
          ((n % 2 == 1) ? 1.0 : -1.0) / (fact * (2.0 * n - alpha));
      head += term;
      if (std::abs(term) < 1e-17 * std::abs(head)) break;
    }
    return 2.0 * (head + (1.0 - std::cos(1.0)) / alpha +
                  asympt::sin_tail_integral(alpha, 1.0) / alpha);
  }
  if (d == 2) {
    // 2 pi [ int_0^1 (1-J0) rho^{-1-a} + 1/a - int_1^inf J0 rho^{-1-a} ].
    double head = 0.0;
    double msq = 1.0;  // (m!)^2
    double pow4 = 1.0;
    for (int m = 1; m <= 24; ++m) {
      msq *= static_cast<double>(m) * static_cast<double>(m);
      pow4 *= 4.0;
      const double term =
          ((m % 2 == 1) ? 1.0 : -1.0) / (pow4 * msq * (2.0 * m - alpha));
      head += term;
      if (std::abs(term) < 1e-17 * std::abs(head)) break;
    }
    auto f = [alpha](double rho) {
      return std::cyl_bessel_j(0.0, rho) * std::pow(rho, -1.0 - alpha);
    };
    // J0 sign changes sit near (k - 1/4) pi; start the alternating tail on
    // such a boundary past 40.
    const double start = (std::ceil(40.0 / M_PI + 0.25) - 0.25) * M_PI;
    auto bulk = quad::integrate(f, 1.0, start, 1e-12, 1e-15, 4000);
    if (!bulk.converged)
      throw numeric_failure("Bessel quadrature did not converge");
    double bessel_tail = 0.0;
    {
      constexpr int kTerms = 24;
      std::vector<double> mag(kTerms);
      double sign0 = 0.0;
      for (int j = 0; j < kTerms; ++j) {
        auto seg = quad::integrate(f, start + j * M_PI, start + (j + 1) * M_PI,
                                   1e-14, 1e-16, 8);
        if (j == 0) sign0 = seg.value >= 0.0 ? 1.0 : -1.0;
        mag[j] = std::abs(seg.value);
      }
      double total = 0.0;
      double scale = 0.5;
      std::vector<double> diff = mag;
      for (int c = 0; c < kTerms; ++c) {
        total += scale * diff[0];
        scale *= 0.5;
        for (int j = 0; j + 1 < kTerms - c; ++j) diff[j] -= diff[j + 1];
      }
      bessel_tail = sign0 * total;
    }
    return 2.0 * M_PI * (head + 1.0 / alpha - bulk.value - bessel_tail);
  }
  if (d == 3) {
    // 4 pi [ int_0^1 (1 - sinc) rho^{-1-a} + 1/a - int_1^inf sin(rho) rho^{-2-a} ].
    double head = 0.0;
    double fact = 1.0;  // (2m+1)!
    for (int m = 1; m <= 24; ++m) {
      fact *= (2.0 * m) * (2.0 * m + 1.0);
      const double term =
          ((m % 2 == 1) ? 1.0 : -1.0) / (fact * (2.0 * m - alpha));
      head += term;
      if (std::abs(term) < 1e-17 * std::abs(head)) break;
    }
    return 4.0 * M_PI *
           (head + 1.0 / alpha - asympt::sin_tail_integral(alpha + 2.0, 1.0));
  }
  throw invalid_parameter(
      "closed-form amplitude is implemented for d <= 3 when alpha < 2");
}

}  // namespace

double v_alpha_closed_form(const StepDistribution& D) {
  // The continuum normalizer of the profile carries the L^d volume factor
  // relative to the stored lattice normalizer.
  const double ch_cont = D.c_h * std::pow(D.L, D.d);
  if (D.alpha > 2.0) return abs_moment(D, 2.0).value / (2.0 * D.d);
  if (D.alpha == 2.0)
    return ch_cont * D.L * D.L * asympt::sphere_surface(D.d) / (2.0 * D.d);
  return ch_cont * std::pow(D.L, D.alpha) * cos_deficit_integral(D.d, D.alpha);
}

DispersionFit fit_dispersion(const StepDistribution& D,
                             std::span<const double> k_grid, bool log_mode) {
  if (k_grid.size() < 5)
    throw invalid_parameter("dispersion fit needs at least 5 grid points");
  double kmin = k_grid[0], kmax = k_grid[0];
  for (double k : k_grid) {
    if (!(k > 0.0) || !(k < 1.0 / D.L))
      throw invalid_parameter("dispersion grid must satisfy 0 < k < 1/L");
    kmin = std::min(kmin, k);
    kmax = std::max(kmax, k);
  }
  if (kmax / kmin < 9.999)
    throw invalid_parameter("dispersion grid must span at least one decade");

  const std::size_t n = k_grid.size();
  std::vector<double> y(n);
  std::vector<double> kvec(D.d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    kvec[0] = k_grid[i];
    y[i] = one_minus_fourier(D, kvec);
  }

  DispersionFit fit;
  fit.log_mode = log_mode;
  if (!log_mode) {
    // OLS of log y on log k.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lx = std::log(k_grid[i]);
      const double ly = std::log(y[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double inter = (sy * sxx - sx * sxy) / det;
    fit.exponent_est = slope;
    fit.v_alpha_est = std::exp(inter);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pred = fit.v_alpha_est * std::pow(k_grid[i], slope);
      const double rel = (y[i] - pred) / y[i];
      ss += rel * rel;
    }
    fit.residual = std::sqrt(ss / n);
  } else {
    // y / k^2 regressed on log(1/(Lk)); slope recovers v_2.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = std::log(1.0 / (D.L * k_grid[i]));
      const double u = y[i] / (k_grid[i] * k_grid[i]);
      sx += z;
      sy += u;
      sxx += z * z;
      sxy += z * u;
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double inter = (sy * sxx - sx * sxy) / det;
    fit.exponent_est = 2.0;
    fit.v_alpha_est = slope;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = std::log(1.0 / (D.L * k_grid[i]));
      const double pred = k_grid[i] * k_grid[i] * (slope * z + inter);
      const double rel = (y[i] - pred) / y[i];
      ss += rel * rel;
    }
    fit.residual = std::sqrt(ss / n);
  }
  return fit;
}

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw invalid_parameter("alias table needs a nonempty support");
  prob_.resize(n);
  alias_.resize(n);
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw invalid_parameter("alias table weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw invalid_parameter("alias table weights sum to zero");

  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i)
    scaled[i] = weights[i] * static_cast<double>(n) / total;

  std::stack<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    if (scaled[i] < 1.0)
      small.push(static_cast<std::uint32_t>(i));
    else
      large.push(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.top();
    small.pop();
    const std::uint32_t l = large.top();
    large.pop();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0)
      small.push(l);
    else
      large.push(l);
  }
  while (!large.empty()) {
    prob_[large.top()] = 1.0;
    alias_[large.top()] = large.top();
    large.pop();
  }
  while (!small.empty()) {
    prob_[small.top()] = 1.0;
    alias_[small.top()] = small.top();
    small.pop();
  }
}

std::size_t AliasTable::sample(rng::Xoshiro256pp& g) const {
  const std::size_t n = prob_.size();
  const double u1 = g.uniform01();
  std::size_t i = static_cast<std::size_t>(u1 * static_cast<double>(n));
  if (i >= n) i = n - 1;
  return g.uniform01() < prob_[i] ? i : alias_[i];
}

StepSampler::StepSampler(const StepDistribution& D)
    : d_(D.d),
      size_(D.size()),
      weights_(D.weights),
      table_(D.weights) {
  offsets_.reserve(size_ * static_cast<std::size_t>(d_));
  std::vector<long long> x(D.d, -D.radius);
  do {
    for (int i = 0; i < D.d; ++i) offsets_.push_back(x[i]);
  } while (advance(x, D.radius));
}

std::size_t StepSampler::sample(rng::Xoshiro256pp& g,
                                std::span<long long> out) const {
  const std::size_t i = table_.sample(g);
  for (int a = 0; a < d_; ++a) out[a] = offsets_[i * d_ + a];
  return i;
}

}  // namespace gyrad::kern
