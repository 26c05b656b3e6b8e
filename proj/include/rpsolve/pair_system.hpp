#pragma once

// Shared machinery behind every representation of the Richardson equations.
//
// All three representations have the form
//
//   r_v(E) = 1 - G * A(E_v) - sum_{w != v} 2G / (E_v - E_w)
//
// where the one-body function A collects discrete pair states
// sum_j 1/(2e_j - E) and, for continuum modes, density integrals
// (1/2) int g(e)/(2e - E) de. A PairSystem describes A; the solver below
// works on any PairSystem and allows complex G so that continuation paths can
// leave the real axis.

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rpsolve {

struct SolverSettings;

using Complex = std::complex<double>;

/// Value and derivative of a continuum contribution to A(E).
struct OneBodyValue {
  Complex value;
  Complex slope;
};

struct PairSystem {
  /// Pair-state energies 2e_j (complex for resonance poles).
  std::vector<Complex> poles;
  /// Optional continuum part of A(E); may throw ContourError.
  std::function<OneBodyValue(Complex)> continuum;
  /// True when A(conj E) = conj A(E); solutions are then conjugation closed.
  bool conjugate_symmetric = true;
};

/// r_v for complex strength. Throws SingularityError on pole hits.
std::vector<Complex> pair_residual(const PairSystem& system, std::span<const Complex> energies,
                                   Complex strength, double collision_tolerance);

Eigen::MatrixXcd pair_jacobian(const PairSystem& system, std::span<const Complex> energies,
                               Complex strength, double collision_tolerance);

double max_norm(std::span<const Complex> values);

struct BranchResult {
  std::vector<Complex> energies;
  double residual_norm = 0.0;
  int iterations = 0;
  int continuation_steps = 0;
  std::vector<std::string> notes;
};

/// Seeds 2e_j - g0 for the occupied pair states. Pair states sharing the same
/// energy are split by alternating imaginary offsets +-i g0/4, +-i g0/2, ...
/// (an odd group keeps one unshifted member) so the seed set stays
/// conjugation closed. `extra` (empty or one entry per pair) is added on top.
std::vector<Complex> seed_energies(std::span<const Complex> level_energies, double g0,
                                   std::span<const Complex> extra = {});

/// Follows a branch from G = 0 to `target`. `level_energies` holds the
/// occupied 2e_j, i.e. the G = 0 pair energies.
BranchResult solve_branch(const PairSystem& system, std::span<const Complex> level_energies,
                          double target, const SolverSettings& settings);

/// Continues an already converged solution at `from` to `to`.
BranchResult continue_branch(const PairSystem& system, std::vector<Complex> start, double from,
                             double to, const SolverSettings& settings);

/// Pairs each pair energy with its conjugate partner and forces exact
/// conjugate symmetry; returns false if some energy has no partner.
bool symmetrize_conjugates(std::vector<Complex>& energies, double tolerance);

/// Sorts by real part, then by imaginary part descending.
void canonical_order(std::vector<Complex>& energies);

}  // namespace rpsolve
