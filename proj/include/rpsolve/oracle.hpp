#pragma once

// Exact diagonalization of the constant-pairing Hamiltonian in the
// seniority-zero space. Ground truth for discrete solves.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpsolve/richardson.hpp"
#include "rpsolve/spectrum.hpp"

namespace rpsolve {

inline constexpr int kMaxOracleLevels = 24;
inline constexpr std::size_t kMaxBasisSize = 500000;
inline constexpr std::size_t kMaxEigenDimension = 3000;

/// All n-pair configurations over L pair states, as bit masks in
/// lexicographic order of their sorted index lists.
class ConfigBasis {
 public:
  ConfigBasis(int level_count, int pair_count, std::vector<std::uint32_t> configs);

  int level_count() const { return level_count_; }
  int pair_count() const { return pair_count_; }
  std::size_t size() const { return configs_.size(); }
  const std::vector<std::uint32_t>& configs() const { return configs_; }

  std::vector<int> occupied(std::size_t index) const;
  /// Position of a configuration, or size() if absent.
  std::size_t index_of(std::uint32_t config) const;

 private:
  int level_count_;
  int pair_count_;
  std::vector<std::uint32_t> configs_;
  std::unordered_map<std::uint32_t, std::size_t> lookup_;
};

/// Real symmetric matrix; set() writes both triangles.
class DenseSymMatrix {
 public:
  explicit DenseSymMatrix(std::size_t dimension)
      : dimension_(dimension), entries_(dimension * dimension, 0.0) {}

  std::size_t dimension() const { return dimension_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dimension_ + j]; }
  void set(std::size_t i, std::size_t j, double value) {
    entries_[i * dimension_ + j] = value;
    entries_[j * dimension_ + i] = value;
  }
  double trace() const;

 private:
  std::size_t dimension_;
  std::vector<double> entries_;
};

ConfigBasis build_basis(int level_count, int pair_count);

/// H = sum_j 2e_j b+_j b_j - G B0+ B0 on the basis: diagonal sum 2e_j - G n,
/// -G between configurations related by moving one pair.
DenseSymMatrix build_hamiltonian(const ConfigBasis& basis, std::span<const Level> levels,
                                 double strength);

/// Same, taking bound and box levels from a problem; rejects resonant input.
DenseSymMatrix build_hamiltonian(const ConfigBasis& basis, const PairingProblem& problem);

/// The k smallest eigenvalues, ascending, by cyclic Jacobi rotations.
std::vector<double> lowest_eigenvalues(const DenseSymMatrix& matrix, std::size_t count);

enum class CompareTarget { Nearest, Ground };

struct CompareReport {
  Complex total;
  double reference = 0.0;
  std::size_t reference_index = 0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string diagnostic;
};

CompareReport compare(const PairSolution& solution, std::span<const double> oracle_values,
                      double tolerance = 1e-8, CompareTarget target = CompareTarget::Nearest);

}  // namespace rpsolve
