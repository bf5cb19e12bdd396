#include "gyrad/fft.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "fft_detail.hpp"
#include "gyrad/errors.hpp"
#include "gyrad/simd.hpp"

namespace gyrad::fft {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

namespace {

std::unique_ptr<Plan> build_plan(std::size_t m) {
  auto plan = std::make_unique<Plan>();
  plan->m = m;

  int bits = 0;
  while ((std::size_t{1} << bits) < m) ++bits;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    if (i < r) {
      plan->swaps.push_back(static_cast<std::uint32_t>(i));
      plan->swaps.push_back(static_cast<std::uint32_t>(r));
    }
  }

  for (std::size_t len = 4; len <= m; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<double> tw(2 * half);
    for (std::size_t j = 0; j < half; ++j) {
      const double ang = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(len);
      tw[2 * j] = std::cos(ang);
      tw[2 * j + 1] = std::sin(ang);
    }
    plan->stage_tw.push_back(std::move(tw));
  }
  return plan;
}

}  // namespace

const Plan& plan_for(std::size_t m) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Plan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_plan(m)).first;
  return *it->second;
}

void transform_scalar(double* x, const Plan& plan, bool inverse) {
  const std::size_t m = plan.m;
  for (std::size_t p = 0; p < plan.swaps.size(); p += 2) {
    const std::size_t i = plan.swaps[p], j = plan.swaps[p + 1];
    std::swap(x[2 * i], x[2 * j]);
    std::swap(x[2 * i + 1], x[2 * j + 1]);
  }

  // len == 2: unit twiddle.
  for (std::size_t base = 0; base < m; base += 2) {
    const double ur = x[2 * base], ui = x[2 * base + 1];
    const double vr = x[2 * base + 2], vi = x[2 * base + 3];
    x[2 * base] = ur + vr;
    x[2 * base + 1] = ui + vi;
    x[2 * base + 2] = ur - vr;
    x[2 * base + 3] = ui - vi;
  }

  std::size_t stage = 0;
  for (std::size_t len = 4; len <= m; len <<= 1, ++stage) {
    const std::size_t half = len / 2;
    const double* tw = plan.stage_tw[stage].data();
    for (std::size_t base = 0; base < m; base += len) {
      double* u = x + 2 * base;
      double* v = x + 2 * (base + half);
      for (std::size_t j = 0; j < half; ++j) {
        const double wr = tw[2 * j];
        const double wi = inverse ? -tw[2 * j + 1] : tw[2 * j + 1];
        const double vr = v[2 * j], vi = v[2 * j + 1];
        const double tr = std::fma(wr, vr, -(wi * vi));
        const double ti = std::fma(wr, vi, wi * vr);
        const double ur = u[2 * j], ui = u[2 * j + 1];
        u[2 * j] = ur + tr;
        u[2 * j + 1] = ui + ti;
        v[2 * j] = ur - tr;
        v[2 * j + 1] = ui - ti;
      }
    }
  }

  if (inverse) simd::active().scale(x, 1.0 / static_cast<double>(m), 2 * m);
}

namespace {

bool use_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool v = simd::active_name() == "avx2";
  return v;
#else
  return false;
#endif
}

}  // namespace

}  // namespace detail

void transform(std::span<double> interleaved, bool inverse) {
  const std::size_t m = interleaved.size() / 2;
  if (m < 2 || (m & (m - 1)) != 0 || interleaved.size() != 2 * m)
    throw invalid_parameter("fft length must be a power of two >= 2");
  const detail::Plan& plan = detail::plan_for(m);
#if defined(__x86_64__) || defined(_M_X64)
  if (detail::use_avx2()) {
    detail::transform_avx2(interleaved.data(), plan, inverse);
    return;
  }
#endif
  detail::transform_scalar(interleaved.data(), plan, inverse);
}

RealConvPlan::RealConvPlan(std::span<const double> kernel,
                           std::size_t max_signal)
    : kernel_size_(kernel.size()), max_signal_(max_signal) {
  if (kernel.empty()) throw invalid_parameter("empty convolution kernel");
  const std::size_t n_out = max_signal_ + kernel_size_ - 1;
  n_ = next_pow2(n_out);
  if (n_ < 8) n_ = 8;
  m_ = n_ / 2;

  rc_tw_.resize(2 * (m_ / 2 + 1));
  for (std::size_t k = 0; k <= m_ / 2; ++k) {
    const double ang = -M_PI * static_cast<double>(k) / static_cast<double>(m_);
    rc_tw_[2 * k] = std::cos(ang);
    rc_tw_[2 * k + 1] = std::sin(ang);
  }

  work_.assign(2 * m_, 0.0);
  for (std::size_t i = 0; i < kernel.size(); ++i) work_[i] = kernel[i];
  transform(std::span<double>(work_), false);

  // Untangle the packed transform into the half spectrum K[0..m]:
  // K[q] = E[q] + W^q O[q] with E[q] = (Z[q] + conj(Z[m-q]))/2,
  // O[q] = -i (Z[q] - conj(Z[m-q]))/2, and W^{m-k} = (-re, im) of W^k.
  kernel_spec_.assign(2 * (m_ + 1), 0.0);
  const double e0 = work_[0], o0 = work_[1];
  kernel_spec_[0] = e0 + o0;
  kernel_spec_[2 * m_] = e0 - o0;
  for (std::size_t q = 1; q < m_; ++q) {
    const std::size_t qm = m_ - q;
    const double zr = work_[2 * q], zi = work_[2 * q + 1];
    const double yr = work_[2 * qm], yi = work_[2 * qm + 1];
    const double er = 0.5 * (zr + yr), ei = 0.5 * (zi - yi);
    const double odr = 0.5 * (zi + yi), odi = 0.5 * (yr - zr);
    double wr, wi;
    if (q <= m_ / 2) {
      wr = rc_tw_[2 * q];
      wi = rc_tw_[2 * q + 1];
    } else {
      wr = -rc_tw_[2 * qm];
      wi = rc_tw_[2 * qm + 1];
    }
    kernel_spec_[2 * q] = er + (wr * odr - wi * odi);
    kernel_spec_[2 * q + 1] = ei + (wr * odi + wi * odr);
  }
}

void RealConvPlan::run(std::span<const double> signal, std::span<double> out) {
  if (signal.size() > max_signal_)
    throw invalid_parameter("signal longer than the convolution plan allows");
  const std::size_t n_out = signal.size() + kernel_size_ - 1;
  if (out.size() < n_out)
    throw invalid_parameter("convolution output span too small");

  double* z = work_.data();
  std::memset(z, 0, 2 * m_ * sizeof(double));
  std::memcpy(z, signal.data(), signal.size() * sizeof(double));
  transform(std::span<double>(work_), false);

  const double* ks = kernel_spec_.data();

  // Fused pass: untangle S[k], multiply by K[k], retangle into Y[k] for the
  // inverse half-transform.  Endpoints first (S[0], S[m] are real).
  {
    const double e0 = z[0], o0 = z[1];
    const double p0 = (e0 + o0) * ks[0];
    const double pm = (e0 - o0) * ks[2 * m_];
    z[0] = 0.5 * (p0 + pm);
    z[1] = 0.5 * (p0 - pm);
  }
  for (std::size_t k = 1; k <= m_ / 2; ++k) {
    const std::size_t km = m_ - k;
    const double zr = z[2 * k], zi = z[2 * k + 1];
    const double yr = z[2 * km], yi = z[2 * km + 1];
    const double wr = rc_tw_[2 * k], wi = rc_tw_[2 * k + 1];

    // Forward untangle at k and m-k.
    const double er = 0.5 * (zr + yr), ei = 0.5 * (zi - yi);
    const double odr = 0.5 * (zi + yi), odi = 0.5 * (yr - zr);
    const double skr = er + (wr * odr - wi * odi);
    const double ski = ei + (wr * odi + wi * odr);
    double smr, smi;
    if (km == k) {
      smr = skr;
      smi = ski;
    } else {
      const double wr2 = -wr, wi2 = wi;  // W^{m-k}
      const double er2 = er, ei2 = -ei;  // E[m-k] = conj(E[k])
      const double odr2 = odr, odi2 = -odi;
      smr = er2 + (wr2 * odr2 - wi2 * odi2);
      smi = ei2 + (wr2 * odi2 + wi2 * odr2);
    }

    // Multiply by the kernel spectrum.
    const double pkr = skr * ks[2 * k] - ski * ks[2 * k + 1];
    const double pki = skr * ks[2 * k + 1] + ski * ks[2 * k];
    const double pmr = smr * ks[2 * km] - smi * ks[2 * km + 1];
    const double pmi = smr * ks[2 * km + 1] + smi * ks[2 * km];

    // Inverse retangle: E' = (P[k] + conj(P[m-k]))/2,
    // O' = conj(W^k) (P[k] - conj(P[m-k]))/2, Y = E' + i O'.
    {
      const double epr = 0.5 * (pkr + pmr), epi = 0.5 * (pki - pmi);
      const double dr = 0.5 * (pkr - pmr), di = 0.5 * (pki + pmi);
      const double opr = wr * dr + wi * di;   // conj(w) * d
      const double opi = wr * di - wi * dr;
      z[2 * k] = epr - opi;
      z[2 * k + 1] = epi + opr;
    }
    if (km != k) {
      const double epr = 0.5 * (pmr + pkr), epi = 0.5 * (pmi - pki);
      const double dr = 0.5 * (pmr - pkr), di = 0.5 * (pmi + pki);
      const double wr2 = -wr, wi2 = wi;  // W^{m-k}; conj applied below
      const double opr = wr2 * dr + wi2 * di;
      const double opi = wr2 * di - wi2 * dr;
      z[2 * km] = epr - opi;
      z[2 * km + 1] = epi + opr;
    }
  }

  transform(std::span<double>(work_), true);
  std::memcpy(out.data(), z, n_out * sizeof(double));
}

void naive_dft(std::span<const double> in_reim, std::span<double> out_reim,
               bool inverse) {
  const std::size_t m = in_reim.size() / 2;
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < m; ++k) {
    double sr = 0.0, si = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double ang = sign * 2.0 * M_PI * static_cast<double>(k * j) /
                         static_cast<double>(m);
      const double c = std::cos(ang), s = std::sin(ang);
      sr += in_reim[2 * j] * c - in_reim[2 * j + 1] * s;
      si += in_reim[2 * j] * s + in_reim[2 * j + 1] * c;
    }
    if (inverse) {
      sr /= static_cast<double>(m);
      si /= static_cast<double>(m);
    }
    out_reim[2 * k] = sr;
    out_reim[2 * k + 1] = si;
  }
}

}  // namespace gyrad::fft
