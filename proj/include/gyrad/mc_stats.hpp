#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace gyrad::mc {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long n_replicas = 0;
  std::uint64_t seed = 0;
  std::string scheme;
};

// Replica-indexed accumulation with fixed 1024-replica blocks.  Workers grab
// whole blocks and process replicas in index order; block partial sums fold
// in block order afterwards, so totals are bit-identical for any thread
// count.
inline std::vector<double> blockwise_parallel_sums(
    std::size_t n_items, std::size_t n_cols, int n_threads,
    const std::function<void(std::size_t item, double* cols)>& fn) {
  constexpr std::size_t kBlock = 1024;
  const std::size_t n_blocks = (n_items + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_sums(n_blocks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) break;
      std::vector<double> cols(n_cols, 0.0);
      const std::size_t lo = b * kBlock;
      const std::size_t hi = std::min(n_items, lo + kBlock);
      for (std::size_t i = lo; i < hi; ++i) fn(i, cols.data());
      block_sums[b] = std::move(cols);
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> totals(n_cols, 0.0);
  for (const auto& bs : block_sums)
    for (std::size_t c = 0; c < n_cols; ++c) totals[c] += bs[c];
  return totals;
}

inline McEstimate mean_estimate(double sum, double sumsq, long long n,
                                std::uint64_t seed, const std::string& scheme) {
  McEstimate e;
  e.n_replicas = n;
  e.seed = seed;
  e.scheme = scheme;
  e.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var =
        std::max(0.0, (sumsq - static_cast<double>(n) * e.mean * e.mean) /
                          static_cast<double>(n - 1));
    e.stderr_ = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

// Delta-method ratio M/m from per-replica sums (including the cross term).
inline McEstimate ratio_estimate(double sum_m, double sum_m2, double sum_M,
                                 double sum_M2, double sum_Mm, long long n,
                                 std::uint64_t seed, const std::string& scheme) {
  McEstimate e;
  e.n_replicas = n;
  e.seed = seed;
  e.scheme = scheme;
  const double nn = static_cast<double>(n);
  const double mbar = sum_m / nn;
  const double Mbar = sum_M / nn;
  if (mbar == 0.0) {
    e.mean = 0.0;
    e.stderr_ = 0.0;
    return e;
  }
  e.mean = Mbar / mbar;
  if (n > 1) {
    const double var_m = std::max(0.0, (sum_m2 - nn * mbar * mbar) / (nn - 1.0));
    const double var_M = std::max(0.0, (sum_M2 - nn * Mbar * Mbar) / (nn - 1.0));
    const double cov = (sum_Mm - nn * Mbar * mbar) / (nn - 1.0);
    const double var_ratio =
        (var_M + e.mean * e.mean * var_m - 2.0 * e.mean * cov) / (mbar * mbar);
    e.stderr_ = std::sqrt(std::max(0.0, var_ratio) / nn);
  }
  return e;
}

// Shared result layout for the SAW and OP samplers.
struct McSeries {
  std::vector<double> r_list;
  struct Row {
    long long t = 0;
    McEstimate mass;
    std::vector<McEstimate> moment;  // aligned with r_list
    std::vector<McEstimate> ratio;
  };
  std::vector<Row> rows;
};

}  // namespace gyrad::mc
