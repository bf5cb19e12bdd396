#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gyrad {

// Time slice of a two-point function: a dense nonnegative array over the
// sup-norm box [-box_radius, box_radius]^d.  Storage is lexicographic with
// x_1 fastest, so axis sums and moment dot products run over contiguous
// memory.  leak carries the probability mass dropped so far by fixed-box
// truncation (zero under the grow policy).
struct LatticeField {
  int d = 1;
  long long t = 0;
  long long box_radius = 0;
  std::vector<double> values;
  double mass = 0.0;
  double leak = 0.0;

  static LatticeField delta(int d, long long radius = 0);

  long long side() const { return 2 * box_radius + 1; }
  std::size_t size() const;

  std::size_t index(std::span<const long long> x) const;
  // Value at x, zero outside the box.
  double at(std::span<const long long> x) const;
  double& ref(std::span<const long long> x);

  void recompute_mass();

  // Marginal over all axes but the first, indexed by x_1 + box_radius.
  std::vector<double> axis_marginal() const;
};

// Sup-norm distance over the union box.
double sup_diff(const LatticeField& a, const LatticeField& b);

// Direct lattice convolution (a * b) restricted to [-out_radius,
// out_radius]^d; contributions falling outside are dropped.
LatticeField convolve_fields(const LatticeField& a, const LatticeField& b,
                             long long out_radius);

}  // namespace gyrad
