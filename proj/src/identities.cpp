#include <algorithm>
#include <cmath>
#include <random>

#include "rpsolve/richardson.hpp"

namespace rpsolve {

namespace {

Complex random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  return {coord(rng), coord(rng)};
}

}  // namespace

IdentityReport verify_identities(int trials, std::uint64_t seed) {
  IdentityReport report;
  report.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> order(1, 12);
  std::uniform_int_distribution<long long> entry(-1000000, 1000000);

  for (int trial = 0; trial < trials; ++trial) {
    // Upper triangle summed row-wise and column-wise; integer entries keep both exact.
    const int n = order(rng);
    std::vector<long long> a(static_cast<std::size_t>(n * n));
    for (auto& x : a) x = entry(rng);
    auto at = [&](int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; };
    long long by_rows = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) by_rows += at(i, j);
    }
    long long by_columns = 0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < j; ++i) by_columns += at(i, j);
    }
    if (by_rows != by_columns) ++report.double_sum_failures;

    // Distinct points at least 0.1 apart keep both sides well conditioned.
    Complex pa, pb, px;
    do {
      pa = random_point(rng);
      pb = random_point(rng);
      px = random_point(rng);
    } while (std::abs(pa - pb) < 0.1 || std::abs(px - pa) < 0.1 || std::abs(px - pb) < 0.1);
    const Complex product = 1.0 / ((px - pa) * (px - pb));
    const Complex split = (1.0 / (pa - pb)) * (1.0 / (px - pa) - 1.0 / (px - pb));
    const double error = std::abs(product - split) / std::abs(product);
    report.max_partial_fraction_error = std::max(report.max_partial_fraction_error, error);
    if (!(error <= 1e-12)) ++report.partial_fraction_failures;
  }
  return report;
}

}  // namespace rpsolve
