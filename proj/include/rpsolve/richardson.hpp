#pragma once

// Discrete Richardson equations: residual, Jacobian, seeding, the
// continuation solver and total-energy assembly.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpsolve/pair_system.hpp"
#include "rpsolve/spectrum.hpp"

namespace rpsolve {

/// The n pair energies E_v of one eigenstate.
struct PairEnergies {
  std::vector<Complex> values;
};

struct SolverSettings {
  /// Convergence threshold on the infinity norm of the residual.
  double newton_tolerance = 1e-12;
  int max_newton_iterations = 50;
  /// First continuation step; defaults to G/100.
  std::optional<double> initial_g_step;
  /// Smallest continuation step before giving up; defaults to G * 1e-8.
  std::optional<double> min_g_step;
  double collision_tolerance = 1e-9;
  /// Extra seed perturbations, one per pair when present.
  std::vector<Complex> seed_offsets;

  double first_step(double strength) const;
  double smallest_step(double strength) const;
  void validate(double strength) const;
};

struct PairSolution {
  PairEnergies energies;
  double residual_norm = 0.0;
  Complex total;
  int iterations = 0;
  int continuation_steps = 0;
  /// Diagnostics worth surfacing (principal-value evaluations, promotions, ...).
  std::vector<std::string> notes;
};

/// 2e_j for bound and box levels, in index order.
std::vector<Complex> discrete_pair_states(const PairingProblem& problem);

/// Indices of the n lowest pair states by real part (ties by index).
std::vector<int> ground_occupation(std::span<const Complex> pair_states, int pairs);

/// Validates an occupation against `state_count` pair states and `pairs`.
void check_occupation(std::span<const int> occupation, std::size_t state_count, int pairs);

std::vector<Complex> residual_discrete(const PairEnergies& energies, const PairingProblem& problem,
                                       double collision_tolerance = 1e-9);

Eigen::MatrixXcd jacobian_discrete(const PairEnergies& energies, const PairingProblem& problem,
                                   double collision_tolerance = 1e-9);

PairEnergies seed_g0(const PairingProblem& problem, std::span<const int> occupation, double g0);

/// Validated PairSystem of a problem without densities or resonances.
PairSystem make_discrete_system(const PairingProblem& problem);

PairSolution solve_discrete(const PairingProblem& problem, std::span<const int> occupation,
                            const SolverSettings& settings = {});

Complex total_energy(const PairEnergies& energies);

/// Packs a branch result into a PairSolution (total = sum of pair energies).
PairSolution make_solution(BranchResult branch);

struct IdentityReport {
  int trials = 0;
  int double_sum_failures = 0;
  int partial_fraction_failures = 0;
  double max_partial_fraction_error = 0.0;

  bool passed() const { return double_sum_failures == 0 && partial_fraction_failures == 0; }
};

/// Randomized checks of the double-sum relabeling
///   sum_i sum_{j>i} a_ij = sum_j sum_{i<j} a_ij   (exact, integer entries)
/// and the partial-fraction identity
///   1/((x-a)(x-b)) = (1/(a-b)) (1/(x-a) - 1/(x-b))  (relative 1e-12).
IdentityReport verify_identities(int trials = 1000, std::uint64_t seed = 20130701);

}  // namespace rpsolve
