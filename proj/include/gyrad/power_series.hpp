#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gyrad/lattice_field.hpp"

namespace gyrad::series {

using PowerSeries = std::vector<double>;

// Coefficients of (1-z)^{-1-beta}: c_0 = 1, c_t = c_{t-1} (beta + t) / t
// = Gamma(beta+t+1) / (t! Gamma(beta+1)).
PowerSeries binomial_coefficients(double beta, std::size_t T);

// Coefficients of (1-z)^{-1-beta} (log 1/(1-z))^gamma for gamma in {0,1,2}
// (integer log powers only; fractional gamma has no formal power series).
PowerSeries singular_coefficients(double beta, int gamma, std::size_t T);

// Renewal decomposition phi_t = I_t + sum_{s=1}^t (J_s * phi_{t-s}).
struct LaceDecomposition {
  std::vector<LatticeField> I;
  std::vector<LatticeField> J;  // J[0] is the zero field
  std::vector<LatticeField> phi;
  double reconstruction_residual = 0.0;
};

// Solves for J recursively; phi[0] must match I[0] (a delta for the walk
// models).  Throws numeric_failure when the round-trip residual exceeds
// 1e-12 (a sign of box truncation corrupting the convolutions).
LaceDecomposition deconvolve_lace(const std::vector<LatticeField>& phi,
                                  const std::vector<LatticeField>& I);

// I-series for the walk models: delta at t = 0, zero afterwards.
std::vector<LatticeField> delta_identity_series(int d, std::size_t T);

struct BlowupPoint {
  double m = 0.0;
  double value = 0.0;
  double tail_fraction = 0.0;  // |last partial-sum term| / |value|
};

// Truncated evaluation sum_{t<=T} m^t c_t with its tail indicator.
BlowupPoint partial_sum_point(std::span<const double> coeffs, double m);

struct BlowupWindow {
  double eps_min = 1e-3;   // window in eps = 1 - m/m_c
  double eps_max = 1e-1;
  double tail_max = 0.01;  // usable points need tail_fraction below this
};

struct BlowupFit {
  double exponent = 0.0;   // of (1 - m/m_c)^{-exponent}
  double amplitude = 0.0;
  double rms_residual = 0.0;  // log-space
  int points_used = 0;
  double expected_exponent = 0.0;
};

// Log-log regression of partial sums against 1 - m/m_c.
BlowupFit fit_generating_blowup(std::span<const BlowupPoint> points, double m_c,
                                double expected_exponent,
                                const BlowupWindow& window = {});

// Amplitude with the blowup exponent pinned: geometric mean of
// value * eps^exponent over the usable window.  The standard way to read an
// amplitude off a series when the exponent is known; the free fit trades
// slope error against amplitude error and extrapolates it to eps = 1.
double amplitude_at_fixed_exponent(std::span<const BlowupPoint> points,
                                   double m_c, double exponent,
                                   const BlowupWindow& window = {});

}  // namespace gyrad::series
