#include "rpsolve/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "rpsolve/errors.hpp"

namespace rpsolve {

namespace {

double binomial(int n, int k) {
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
  return std::round(value);
}

}  // namespace

ConfigBasis::ConfigBasis(int level_count, int pair_count, std::vector<std::uint32_t> configs)
    : level_count_(level_count), pair_count_(pair_count), configs_(std::move(configs)) {
  lookup_.reserve(configs_.size());
  for (std::size_t k = 0; k < configs_.size(); ++k) lookup_.emplace(configs_[k], k);
}

std::vector<int> ConfigBasis::occupied(std::size_t index) const {
  std::vector<int> out;
  const std::uint32_t mask = configs_.at(index);
  for (int j = 0; j < level_count_; ++j) {
    if (mask & (1u << j)) out.push_back(j);
  }
  return out;
}

std::size_t ConfigBasis::index_of(std::uint32_t config) const {
  const auto it = lookup_.find(config);
  return it == lookup_.end() ? configs_.size() : it->second;
}

double DenseSymMatrix::trace() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < dimension_; ++i) sum += (*this)(i, i);
  return sum;
}

ConfigBasis build_basis(int level_count, int pair_count) {
  if (level_count < 0 || pair_count < 0 || pair_count > level_count) {
    throw DomainError(fmt::format("invalid basis request: {} pairs in {} levels", pair_count,
                                  level_count));
  }
  if (level_count > kMaxOracleLevels) {
    throw CapacityError(fmt::format("oracle supports at most {} levels, got {}", kMaxOracleLevels,
                                    level_count));
  }
  if (binomial(level_count, pair_count) > static_cast<double>(kMaxBasisSize)) {
    throw CapacityError(fmt::format("basis C({}, {}) exceeds {} configurations", level_count,
                                    pair_count, kMaxBasisSize));
  }

  // Walk the index combinations c[0] < c[1] < ... in lexicographic order.
  std::vector<std::uint32_t> configs;
  std::vector<int> c(static_cast<std::size_t>(pair_count));
  for (int i = 0; i < pair_count; ++i) c[static_cast<std::size_t>(i)] = i;
  for (;;) {
    std::uint32_t mask = 0;
    for (int j : c) mask |= 1u << j;
    configs.push_back(mask);
    int i = pair_count - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == level_count - pair_count + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < pair_count; ++k) {
      c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  return ConfigBasis(level_count, pair_count, std::move(configs));
}

DenseSymMatrix build_hamiltonian(const ConfigBasis& basis, std::span<const Level> levels,
                                 double strength) {
  if (levels.size() != static_cast<std::size_t>(basis.level_count())) {
    throw DomainError(fmt::format("basis has {} levels but {} were supplied", basis.level_count(),
                                  levels.size()));
  }
  const std::size_t dim = basis.size();
  DenseSymMatrix h(dim);
  const int l = basis.level_count();
  for (std::size_t a = 0; a < dim; ++a) {
    const std::uint32_t mask = basis.configs()[a];
    double diagonal = 0.0;
    for (int j = 0; j < l; ++j) {
      if (mask & (1u << j)) diagonal += 2.0 * levels[static_cast<std::size_t>(j)].energy;
    }
    h.set(a, a, diagonal - strength * basis.pair_count());
    // b+_k b_j moves the pair on j to the empty state k.
    for (int j = 0; j < l; ++j) {
      if (!(mask & (1u << j))) continue;
      for (int k = 0; k < l; ++k) {
        if (mask & (1u << k)) continue;
        const std::size_t b = basis.index_of((mask & ~(1u << j)) | (1u << k));
        if (b > a) h.set(a, b, -strength);
      }
    }
  }
  return h;
}

DenseSymMatrix build_hamiltonian(const ConfigBasis& basis, const PairingProblem& problem) {
  if (!problem.resonances.empty() || problem.background || problem.complex_background) {
    throw DomainError("the oracle handles real discrete spectra only");
  }
  std::vector<Level> levels(problem.bound_levels);
  levels.insert(levels.end(), problem.box_levels.begin(), problem.box_levels.end());
  return build_hamiltonian(basis, levels, problem.strength);
}

std::vector<double> lowest_eigenvalues(const DenseSymMatrix& matrix, std::size_t count) {
  const std::size_t n = matrix.dimension();
  if (count > n) {
    throw DomainError(fmt::format("requested {} eigenvalues of a {}x{} matrix", count, n, n));
  }
  if (n > kMaxEigenDimension) {
    throw CapacityError(fmt::format("oracle eigen-solves are limited to dimension {}, got {}",
                                    kMaxEigenDimension, n));
  }
  std::vector<double> a(n * n);
  double frobenius = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i * n + j] = matrix(i, j);
      frobenius += a[i * n + j] * a[i * n + j];
    }
  }
  frobenius = std::sqrt(frobenius);
  // 1e-12 absolute, relaxed only where rounding in a large-norm matrix forbids it.
  const double threshold = std::max(1e-12, 1e-15 * frobenius);
  auto off_diagonal = [&] {
    double largest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) largest = std::max(largest, std::abs(a[i * n + j]));
    }
    return largest;
  };

  for (int sweep = 0; sweep < 100 && off_diagonal() >= threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          a[r * n + p] = a[p * n + r] = c * arp - s * arq;
          a[r * n + q] = a[q * n + r] = c * arq + s * arp;
        }
        a[p * n + p] -= t * apq;
        a[q * n + q] += t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
      }
    }
  }

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
  std::sort(values.begin(), values.end());
  values.resize(count);
  return values;
}

CompareReport compare(const PairSolution& solution, std::span<const double> oracle_values,
                      double tolerance, CompareTarget target) {
  CompareReport report;
  report.total = solution.total;
  report.tolerance = tolerance;
  if (oracle_values.empty()) {
    report.diagnostic = "no oracle eigenvalues to compare against";
    return report;
  }
  if (target == CompareTarget::Ground) {
    report.reference_index = 0;
  } else {
    double best = std::abs(solution.total.real() - oracle_values[0]);
    for (std::size_t k = 1; k < oracle_values.size(); ++k) {
      const double gap = std::abs(solution.total.real() - oracle_values[k]);
      if (gap < best) {
        best = gap;
        report.reference_index = k;
      }
    }
  }
  report.reference = oracle_values[report.reference_index];
  report.gap = std::abs(solution.total.real() - report.reference);
  const double leak = std::abs(solution.total.imag());
  if (leak > tolerance) {
    report.diagnostic = fmt::format("imaginary leak: |Im E| = {:.3e} exceeds {:.1e}", leak,
                                    tolerance);
    return report;
  }
  report.passed = report.gap <= tolerance;
  if (!report.passed) {
    report.diagnostic = fmt::format("gap {:.3e} to oracle eigenvalue {} exceeds {:.1e}",
                                    report.gap, report.reference_index, tolerance);
  }
  return report;
}

}  // namespace rpsolve
