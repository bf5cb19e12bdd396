#include "gyrad/lattice_field.hpp"

#include <algorithm>
#include <cmath>

#include "gyrad/errors.hpp"
#include "gyrad/simd.hpp"

namespace gyrad {

namespace {

std::size_t checked_volume(int d, long long radius) {
  if (d < 1) throw invalid_parameter("dimension must be >= 1");
  if (radius < 0) throw invalid_parameter("box radius must be >= 0");
  const long long side = 2 * radius + 1;
  double est = 1.0;
  for (int i = 0; i < d; ++i) est *= static_cast<double>(side);
  if (est > 1.6e9) throw resource_limit("lattice box too large to allocate");
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(side);
  return n;
}

}  // namespace

LatticeField LatticeField::delta(int d, long long radius) {
  LatticeField f;
  f.d = d;
  f.t = 0;
  f.box_radius = radius;
  f.values.assign(checked_volume(d, radius), 0.0);
  f.values[f.size() / 2] = 1.0;  // center of the odd-sided box
  f.mass = 1.0;
  return f;
}

std::size_t LatticeField::size() const { return values.size(); }

std::size_t LatticeField::index(std::span<const long long> x) const {
  const long long s = side();
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int i = 0; i < d; ++i) {
    idx += static_cast<std::size_t>(x[i] + box_radius) * stride;
    stride *= static_cast<std::size_t>(s);
  }
  return idx;
}

double LatticeField::at(std::span<const long long> x) const {
  for (int i = 0; i < d; ++i)
    if (x[i] < -box_radius || x[i] > box_radius) return 0.0;
  return values[index(x)];
}

double& LatticeField::ref(std::span<const long long> x) {
  return values[index(x)];
}

void LatticeField::recompute_mass() {
  mass = simd::active().sum(values.data(), values.size());
}

std::vector<double> LatticeField::axis_marginal() const {
  const std::size_t s = static_cast<std::size_t>(side());
  std::vector<double> m(s, 0.0);
  const std::size_t rows = values.size() / s;
  for (std::size_t row = 0; row < rows; ++row) {
    const double* v = values.data() + row * s;
    for (std::size_t i = 0; i < s; ++i) m[i] += v[i];
  }
  return m;
}

double sup_diff(const LatticeField& a, const LatticeField& b) {
  if (a.d != b.d) throw invalid_parameter("field dimension mismatch");
  const long long r = std::max(a.box_radius, b.box_radius);
  std::vector<long long> x(a.d, -r);
  double worst = 0.0;
  while (true) {
    worst = std::max(worst, std::abs(a.at(x) - b.at(x)));
    int axis = 0;
    while (axis < a.d) {
      if (++x[axis] <= r) break;
      x[axis] = -r;
      ++axis;
    }
    if (axis == a.d) break;
  }
  return worst;
}

LatticeField convolve_fields(const LatticeField& a, const LatticeField& b,
                             long long out_radius) {
  if (a.d != b.d) throw invalid_parameter("field dimension mismatch");
  const int d = a.d;
  LatticeField out;
  out.d = d;
  out.t = a.t + b.t;
  out.box_radius = out_radius;
  out.values.assign(checked_volume(d, out_radius), 0.0);

  const long long sa = a.side();
  const long long so = out.side();
  const std::size_t rows_a = a.values.size() / static_cast<std::size_t>(sa);

  // Iterate support points of b as convolution offsets; inner contiguous
  // x_1 runs of a map to shifted runs of out.
  std::vector<long long> w(d, -b.box_radius);
  std::vector<long long> rest(d, 0);
  while (true) {
    const double bw = b.values[b.index(w)];
    if (bw != 0.0) {
      for (std::size_t row = 0; row < rows_a; ++row) {
        // Decode the rest-coordinates of this row of a.
        std::size_t rr = row;
        bool inside = true;
        std::size_t out_row_base = 0;
        std::size_t stride = static_cast<std::size_t>(so);
        for (int i = 1; i < d; ++i) {
          const long long ai =
              static_cast<long long>(rr % static_cast<std::size_t>(sa)) - a.box_radius;
          rr /= static_cast<std::size_t>(sa);
          const long long oi = ai + w[i];
          if (oi < -out_radius || oi > out_radius) {
            inside = false;
            break;
          }
          out_row_base += static_cast<std::size_t>(oi + out_radius) * stride;
          stride *= static_cast<std::size_t>(so);
        }
        if (!inside) continue;
        const long long lo = std::max(-a.box_radius, -out_radius - w[0]);
        const long long hi = std::min(a.box_radius, out_radius - w[0]);
        if (lo > hi) continue;
        const double* src =
            a.values.data() + row * static_cast<std::size_t>(sa) +
            static_cast<std::size_t>(lo + a.box_radius);
        double* dst = out.values.data() + out_row_base +
                      static_cast<std::size_t>(lo + w[0] + out_radius);
        simd::active().axpy(bw, src, dst, static_cast<std::size_t>(hi - lo + 1));
      }
    }
    int axis = 0;
    while (axis < d) {
      if (++w[axis] <= b.box_radius) break;
      w[axis] = -b.box_radius;
      ++axis;
    }
    if (axis == d) break;
  }
  out.recompute_mass();
  return out;
}

}  // namespace gyrad
