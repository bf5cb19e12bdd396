#pragma once

#include <utility>

namespace gyrad::asympt {

// Closed-form constants and predicted curves for the long-range models:
// the moment-conversion constant K_r, the generating-function blowup law,
// the large-t moment-ratio law, and the scaling map k_t.

// Gamma function, Lanczos approximation, >= 1e-12 relative on [0.1, 50];
// extended to x in (-1, 0) through Gamma(x) = Gamma(x+1)/x.
double gamma_fn(double x);

// Surface area of the unit sphere in R^d: 2 pi^{d/2} / Gamma(d/2).
double sphere_surface(int d);

// K_r = int_0^inf (1-cos v) / v^{1+r} dv = pi / (2 Gamma(r+1) sin(r pi/2)),
// valid for r in (0, 2).
double K_r_closed(double r);

// Same constant by numerics: K_r = (1/r) int_0^inf sin(v) v^{-r} dv,
// evaluated as a power series near 0, adaptive quadrature on the bulk and
// an Euler-accelerated alternating series over half-period tails.
// Relative residual <= 1e-8.
double K_r_quadrature(double r);

// S_r(w) = int_w^inf sin(v) v^{-r} dv for w > 0, r in (0, 2).  Shared by
// K_r_quadrature and the fractional-moment representation integral.
double sin_tail_integral(double r, double w);

struct AsymptoticParams {
  double alpha = 0.0;
  double v_alpha = 0.0;
  double C_I = 1.0;
  double C_II = 1.0;
  double m_c = 1.0;

  double d_c() const;  // upper-critical dimension 2 (alpha ^ 2)

  // Random-walk preset: C_I = C_II = 1, m_c = 1.
  static AsymptoticParams rw(double alpha, double v_alpha);
};

// 2 sin(r pi / (alpha v 2)) / ((alpha ^ 2) sin(r pi / alpha)).  For
// alpha >= 2 the two sines cancel exactly, so that branch is evaluated as 1
// and the expression has no removable singularity left anywhere in 0 < r <
// alpha.
double sin_prefactor(double r, double alpha);

// Main term of the generating-function blowup as m -> m_c:
// sin_prefactor * Gamma(r+1) * C_I (C_II v)^{r/(a^2)} / (1-m/m_c)^{1+r/(a^2)},
// times (log 1/sqrt(1-m/m_c))^{r/2} when alpha == 2.
double generating_blowup_prediction(const AsymptoticParams& p, double r, double m);

// Predicted moment ratio sum |x_1|^r phi_t / sum phi_t at time t.
double moment_ratio_prediction(const AsymptoticParams& p, double r, double t);

// k_t scaling: k (v t)^{-1/(a^2)}, with the log-corrected alpha = 2 branch.
double k_scaling_factor(const AsymptoticParams& p, double t);

// Gyration-radius growth exponent 1/(alpha ^ 2) and whether the alpha = 2
// sqrt-log correction applies.
std::pair<double, bool> conjecture_exponent(double alpha);

}  // namespace gyrad::asympt
