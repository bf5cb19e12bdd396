#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gyrad/lattice_field.hpp"
#include "gyrad/step_distribution.hpp"

namespace gyrad::rw {

enum class Backend { automatic, direct, fft };

struct BoxPolicy {
  enum class Kind { grow, fixed, grow_capped };
  Kind kind = Kind::grow;
  long long radius = 0;    // for fixed / grow_capped
  double leak_tol = 1e-4;  // per-step leak tolerance off the grow policy

  static BoxPolicy grow() { return {}; }
  static BoxPolicy fixed(long long r, double tol = 1e-4) {
    return {Kind::fixed, r, tol};
  }
  static BoxPolicy grow_capped(long long r, double tol = 1e-4) {
    return {Kind::grow_capped, r, tol};
  }
};

struct EvolveOptions {
  BoxPolicy box;
  Backend backend = Backend::automatic;
  // Direct convolution above this many multiply-adds switches to FFT.
  double direct_cost_threshold = 1e8;
  std::size_t mem_cap_bytes = std::size_t{3} << 30;
};

// One convolution step phi * D onto the given output box.  Returns the new
// field and the mass dropped outside the box.  The FFT backend is the d = 1
// fast path (every large-box run in this project is one-dimensional);
// direct covers all dimensions.
std::pair<LatticeField, double> convolve_step(const LatticeField& phi,
                                              const kern::StepDistribution& D,
                                              long long out_radius,
                                              Backend backend);

// Exact evolution phi_0 = delta, phi_t = phi_{t-1} * D, visiting every slice
// in order.  Only two slices are alive at any time.
void evolve(const kern::StepDistribution& D, long long T,
            const EvolveOptions& opt,
            const std::function<void(const LatticeField&)>& visit);

// Convenience collector for small runs.
std::vector<LatticeField> evolve_collect(const kern::StepDistribution& D,
                                         long long T,
                                         const EvolveOptions& opt = {});

// sum_x |x_1|^r phi(x); |0|^r = 0 for r > 0 and 1 for r = 0.
double abs_moment_axis(const LatticeField& phi, double r);

// sum_x |x|^r phi(x) with the Euclidean norm.
double abs_moment_radial(const LatticeField& phi, double r);

// Gyration radius (sum |x|^r phi / sum phi)^{1/r}, r > 0.
double gyration_radius(const LatticeField& phi, double r);

// (sum_x cos(k.x) phi(x)) / mass.
double characteristic_ratio(const LatticeField& phi, std::span<const double> k);

// The fractional-moment representation: (1/K_r) int_0^inf du u^{-1-r}
// sum_x (1 - cos(u x_1)) phi_t(x), r in (0, 2), evaluated by adaptive
// quadrature on [0, 1] plus the exact per-site tail identity.  Agrees with
// abs_moment_axis; rel_tol is the acceptance residual.
double fractional_moment_via_integral(const LatticeField& phi, double r,
                                      double rel_tol = 1e-6);

struct MomentRow {
  long long t = 0;
  double mass = 0.0;
  double leak = 0.0;
  std::vector<double> moment_axis;  // aligned with r_list
  std::vector<double> ratio;        // moment_axis / mass
  std::vector<double> gyration;     // Euclidean-norm gyration radius
};

struct MomentSeries {
  std::vector<double> r_list;
  std::vector<MomentRow> rows;
};

// Evolve and record mass/moment rows, either at every t (emit_times empty)
// or at the given sorted times.
MomentSeries compute_moments(const kern::StepDistribution& D, long long T,
                             std::span<const double> r_list,
                             const EvolveOptions& opt,
                             std::span<const long long> emit_times = {});

}  // namespace gyrad::rw
