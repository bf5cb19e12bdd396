#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gyrad/rng.hpp"

namespace gyrad::kern {

// Truncated, normalized long-range step kernel on Z^d with profile
// h(x) = (|x| v 1)^{-(d+alpha)}:  D(x) = c_h h(x/L) on [-R, R]^d.
// Weights depend on |x|^2 only, so the Z^d symmetry is exact by
// construction.  Immutable after build; safe to share across threads.
struct StepDistribution {
  int d = 1;
  double L = 1.0;
  double alpha = 0.0;
  long long radius = 0;
  std::vector<double> weights;  // (2R+1)^d, lexicographic, x_1 fastest
  double c_h = 0.0;             // 1 / sum_box h(x/L)
  double tail_bound = 0.0;      // bound on the discarded (pre-normalization) mass

  long long side() const { return 2 * radius + 1; }
  std::size_t size() const { return weights.size(); }
  std::size_t index(std::span<const long long> x) const;
  double at(std::span<const long long> x) const;  // zero outside the box
  double max_weight() const;
};

StepDistribution build_kac_kernel(int d, double L, double alpha,
                                  long long radius, double tail_tol = 1e-3);

// D^(k) = sum_x cos(k.x) D(x); the imaginary part vanishes by symmetry.
double fourier(const StepDistribution& D, std::span<const double> k);

// 1 - D^(k) = sum_x 2 sin^2(k.x/2) D(x), cancellation-free for small k.
double one_minus_fourier(const StepDistribution& D, std::span<const double> k);

struct MomentValue {
  double value = 0.0;
  // Set when r >= alpha: the truncated sum is returned but the
  // infinite-lattice moment diverges (grows like R^{r-alpha}).
  bool divergent = false;
};

// sum_x |x|^r D(x) over the truncated box, compensated accumulation.
MomentValue abs_moment(const StepDistribution& D, double r);

// v_alpha of the dispersion law 1 - D^(k) ~ v |k|^{alpha ^ 2}:
//   alpha > 2:  sigma^2 / (2d)
//   alpha = 2:  c_h L^{d+2} omega_d / (2d)      (continuum normalizer)
//   alpha < 2:  c_h L^{d+alpha} Int (1-cos y_1)/|y|^{d+alpha} d^d y,
// the integral by series + tail quadrature (d <= 3).
double v_alpha_closed_form(const StepDistribution& D);

struct DispersionFit {
  double exponent_est = 0.0;
  double v_alpha_est = 0.0;
  bool log_mode = false;
  double residual = 0.0;  // RMS relative fit residual
};

// Least-squares fit of the small-k dispersion law along e_1.  log_mode fits
// 1 - D^ against k^2 log(1/(Lk)) with the exponent pinned at 2 (the alpha=2
// branch); otherwise a log-log power fit.
DispersionFit fit_dispersion(const StepDistribution& D,
                             std::span<const double> k_grid, bool log_mode);

// Vose alias table; O(1) draws, deterministic construction.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);
  std::size_t sample(rng::Xoshiro256pp& g) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Alias sampler plus the decoded support offsets.
class StepSampler {
 public:
  explicit StepSampler(const StepDistribution& D);

  // Draws a step, writes it into out (size d), returns the support index.
  std::size_t sample(rng::Xoshiro256pp& g, std::span<long long> out) const;

  std::size_t support_size() const { return size_; }
  // d entries per support point, same indexing as the kernel weights.
  std::span<const long long> offset(std::size_t i) const {
    return {offsets_.data() + i * d_, static_cast<std::size_t>(d_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }

 private:
  int d_;
  std::size_t size_;
  std::vector<long long> offsets_;
  std::vector<double> weights_;
  AliasTable table_;
};

// kernel.json round trip:
// {d, L, alpha, radius, c_h, tail_bound, weights: [[x..., p], ...]}
// with rows in lexicographic order of (x_1, ..., x_d).
void save_json(const StepDistribution& D, const std::string& path);
StepDistribution load_json(const std::string& path);

}  // namespace gyrad::kern
