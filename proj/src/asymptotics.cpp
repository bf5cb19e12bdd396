#include "gyrad/asymptotics.hpp"

#include <cmath>
#include <vector>

#include "gyrad/errors.hpp"
#include "gyrad/quadrature.hpp"

namespace gyrad::asympt {

namespace {

// Lanczos, g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_gamma(double z) {
  double x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z - 1.0 + i);
  const double t = z + 6.5;
  return std::sqrt(2.0 * M_PI) * std::pow(t, z - 0.5) * std::exp(-t) * x;
}

}  // namespace

double gamma_fn(double x) {
  if (x <= -1.0)
    throw invalid_parameter("gamma_fn domain is x > -1");
  if (x == 0.0 || (x < 0.0 && x == std::floor(x)))
    throw invalid_parameter("gamma_fn pole at nonpositive integer");
  double shift = 1.0;
  while (x < 0.5) {
    shift *= x;
    x += 1.0;
  }
  return lanczos_gamma(x) / shift;
}

double sphere_surface(int d) {
  if (d < 1) throw invalid_parameter("dimension must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * d) / gamma_fn(0.5 * d);
}

double K_r_closed(double r) {
  if (r <= 0.0 || r >= 2.0)
    throw invalid_parameter("K_r requires r in (0, 2)");
  return M_PI / (2.0 * gamma_fn(r + 1.0) * std::sin(0.5 * r * M_PI));
}

namespace {

// Alternating half-period series for int_W^inf sin(v) v^{-r} dv, where W is
// a multiple of pi, accelerated with the Euler transformation.
double alternating_tail(double r, double big_w) {
  const long k0 = std::lround(big_w / M_PI);
  constexpr int kTerms = 24;
  std::vector<double> mag(kTerms);
  for (int j = 0; j < kTerms; ++j) {
    const double lo = (k0 + j) * M_PI;
    const double hi = lo + M_PI;
    auto seg = quad::integrate(
        [r](double v) { return std::sin(v) * std::pow(v, -r); }, lo, hi,
        1e-14, 1e-16, 8);
    mag[j] = std::abs(seg.value);
  }
  // Euler transform: sum (-1)^j mag_j = sum_k Delta^k mag_0 / 2^{k+1}.
  double total = 0.0;
  double scale = 0.5;
  std::vector<double> diff = mag;
  for (int k = 0; k < kTerms; ++k) {
    total += scale * diff[0];
    scale *= 0.5;
    for (int j = 0; j + 1 < kTerms - k; ++j) diff[j] = diff[j] - diff[j + 1];
  }
  const double sign = (k0 % 2 == 0) ? 1.0 : -1.0;  // sin > 0 on (0, pi)
  return sign * total;
}

}  // namespace

double sin_tail_integral(double r, double w) {
  if (w <= 0.0) throw invalid_parameter("sin_tail_integral requires w > 0");
  const double cut = std::max(w, 40.0);
  const double big_w = M_PI * std::ceil(cut / M_PI);
  double bulk = 0.0;
  if (big_w > w) {
    auto res = quad::integrate(
        [r](double v) { return std::sin(v) * std::pow(v, -r); }, w, big_w,
        1e-12, 1e-15, 4000);
    if (!res.converged)
      throw numeric_failure("sin_tail_integral bulk quadrature did not converge");
    bulk = res.value;
  }
  return bulk + alternating_tail(r, big_w);
}

double K_r_quadrature(double r) {
  if (r <= 0.0 || r >= 2.0)
    throw invalid_parameter("K_r requires r in (0, 2)");
  // int_0^1 sin(v) v^{-r} dv as a fast alternating power series.
  double head = 0.0;
  double fact = 1.0;  // (2n+1)!
  for (int n = 0; n < 24; ++n) {
    if (n > 0) fact *= (2.0 * n) * (2.0 * n + 1.0);
    const double term = ((n % 2 == 0) ? 1.0 : -1.0) / (fact * (2.0 * n + 2.0 - r));
    head += term;
    if (std::abs(term) < 1e-17 * std::abs(head)) break;
  }
  return (head + sin_tail_integral(r, 1.0)) / r;
}

double AsymptoticParams::d_c() const { return 2.0 * std::min(alpha, 2.0); }

AsymptoticParams AsymptoticParams::rw(double alpha, double v_alpha) {
  AsymptoticParams p;
  p.alpha = alpha;
  p.v_alpha = v_alpha;
  p.C_I = 1.0;
  p.C_II = 1.0;
  p.m_c = 1.0;
  return p;
}

double sin_prefactor(double r, double alpha) {
  if (alpha >= 2.0) return 1.0;  // sin(r pi/alpha) cancels exactly
  return 2.0 * std::sin(0.5 * r * M_PI) / (alpha * std::sin(r * M_PI / alpha));
}

namespace {

void check_moment_domain(const AsymptoticParams& p, double r) {
  if (p.alpha <= 0.0) throw invalid_parameter("alpha must be positive");
  if (r <= 0.0) throw invalid_parameter("moment order r must be positive");
  if (r >= p.alpha)
    throw invalid_parameter(
        "moment order r must satisfy r < alpha (the r-th moment diverges)");
}

}  // namespace

double generating_blowup_prediction(const AsymptoticParams& p, double r, double m) {
  check_moment_domain(p, r);
  if (m < 0.0 || m >= p.m_c)
    throw invalid_parameter("blowup prediction requires 0 <= m < m_c");
  const double a2 = std::min(p.alpha, 2.0);
  const double eps = 1.0 - m / p.m_c;
  double value = sin_prefactor(r, p.alpha) * gamma_fn(r + 1.0) * p.C_I *
                 std::pow(p.C_II * p.v_alpha, r / a2) *
                 std::pow(eps, -(1.0 + r / a2));
  if (p.alpha == 2.0) value *= std::pow(std::log(1.0 / std::sqrt(eps)), 0.5 * r);
  return value;
}

double moment_ratio_prediction(const AsymptoticParams& p, double r, double t) {
  check_moment_domain(p, r);
  if (t < 1.0) throw invalid_parameter("ratio prediction requires t >= 1");
  const double a2 = std::min(p.alpha, 2.0);
  double base = p.C_II * p.v_alpha * t;
  if (p.alpha == 2.0) base *= std::log(std::sqrt(t));
  return sin_prefactor(r, p.alpha) * gamma_fn(r + 1.0) /
         gamma_fn(r / a2 + 1.0) * std::pow(base, r / a2);
}

double k_scaling_factor(const AsymptoticParams& p, double t) {
  const double a2 = std::min(p.alpha, 2.0);
  if (p.alpha == 2.0)
    return std::pow(p.v_alpha * t * std::log(std::sqrt(t)), -0.5);
  return std::pow(p.v_alpha * t, -1.0 / a2);
}

std::pair<double, bool> conjecture_exponent(double alpha) {
  if (alpha <= 0.0) throw invalid_parameter("alpha must be positive");
  return {1.0 / std::min(alpha, 2.0), alpha == 2.0};
}

}  // namespace gyrad::asympt
