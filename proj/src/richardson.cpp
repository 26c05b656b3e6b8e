#include "rpsolve/richardson.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "rpsolve/errors.hpp"

namespace rpsolve {

double SolverSettings::first_step(double strength) const {
  return initial_g_step.value_or(strength / 100.0);
}

double SolverSettings::smallest_step(double strength) const {
  return min_g_step.value_or(strength * 1e-8);
}

void SolverSettings::validate(double strength) const {
  if (!(newton_tolerance > 0.0)) throw DomainError("newton_tolerance must be positive");
  if (max_newton_iterations < 1) throw DomainError("max_newton_iterations must be positive");
  if (!(collision_tolerance > 0.0)) throw DomainError("collision_tolerance must be positive");
  if (initial_g_step && !(*initial_g_step > 0.0)) {
    throw DomainError("initial_g_step must be positive");
  }
  if (min_g_step && !(*min_g_step > 0.0)) throw DomainError("min_g_step must be positive");
  if (strength > 0.0 && smallest_step(strength) > first_step(strength)) {
    throw DomainError("min_g_step must not exceed initial_g_step");
  }
}

std::vector<Complex> discrete_pair_states(const PairingProblem& problem) {
  std::vector<Complex> states;
  states.reserve(problem.bound_levels.size() + problem.box_levels.size());
  for (const auto& l : problem.bound_levels) states.emplace_back(2.0 * l.energy, 0.0);
  for (const auto& l : problem.box_levels) states.emplace_back(2.0 * l.energy, 0.0);
  return states;
}

std::vector<int> ground_occupation(std::span<const Complex> pair_states, int pairs) {
  if (pairs < 0 || static_cast<std::size_t>(pairs) > pair_states.size()) {
    throw DomainError(fmt::format("{} pairs do not fit into {} pair states", pairs,
                                  pair_states.size()));
  }
  std::vector<int> order(pair_states.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pair_states[static_cast<std::size_t>(a)].real() <
           pair_states[static_cast<std::size_t>(b)].real();
  });
  order.resize(static_cast<std::size_t>(pairs));
  std::sort(order.begin(), order.end());
  return order;
}

void check_occupation(std::span<const int> occupation, std::size_t state_count, int pairs) {
  if (occupation.size() != static_cast<std::size_t>(pairs)) {
    throw DomainError(fmt::format("occupation lists {} pair states but the problem has {} pairs",
                                  occupation.size(), pairs));
  }
  std::set<int> seen;
  for (int index : occupation) {
    if (index < 0 || static_cast<std::size_t>(index) >= state_count) {
      throw DomainError(fmt::format("occupation index {} outside 0..{}", index, state_count - 1));
    }
    if (!seen.insert(index).second) {
      throw DomainError(fmt::format("occupation index {} repeated", index));
    }
  }
}

std::vector<Complex> residual_discrete(const PairEnergies& energies, const PairingProblem& problem,
                                       double collision_tolerance) {
  const PairSystem system{discrete_pair_states(problem), {}, true};
  return pair_residual(system, energies.values, problem.strength, collision_tolerance);
}

Eigen::MatrixXcd jacobian_discrete(const PairEnergies& energies, const PairingProblem& problem,
                                   double collision_tolerance) {
  const PairSystem system{discrete_pair_states(problem), {}, true};
  return pair_jacobian(system, energies.values, problem.strength, collision_tolerance);
}

PairEnergies seed_g0(const PairingProblem& problem, std::span<const int> occupation, double g0) {
  const auto states = discrete_pair_states(problem);
  check_occupation(occupation, states.size(), static_cast<int>(occupation.size()));
  std::vector<Complex> occupied;
  for (int index : occupation) occupied.push_back(states[static_cast<std::size_t>(index)]);
  return {seed_energies(occupied, g0)};
}

PairSystem make_discrete_system(const PairingProblem& problem) {
  problem.validate();
  if (problem.background || problem.complex_background) {
    throw DomainError("discrete mode does not accept density tables");
  }
  if (!problem.resonances.empty()) {
    throw DomainError("discrete mode does not accept resonances; use a complex-energy mode");
  }
  return PairSystem{discrete_pair_states(problem), {}, true};
}

PairSolution solve_discrete(const PairingProblem& problem, std::span<const int> occupation,
                            const SolverSettings& settings) {
  const auto system = make_discrete_system(problem);
  check_occupation(occupation, system.poles.size(), problem.pairs);
  std::vector<Complex> occupied;
  for (int index : occupation) occupied.push_back(system.poles[static_cast<std::size_t>(index)]);
  return make_solution(solve_branch(system, occupied, problem.strength, settings));
}

Complex total_energy(const PairEnergies& energies) {
  Complex sum = 0.0;
  for (const auto& e : energies.values) sum += e;
  return sum;
}

PairSolution make_solution(BranchResult branch) {
  PairSolution solution;
  solution.energies.values = std::move(branch.energies);
  solution.total = total_energy(solution.energies);
  solution.residual_norm = branch.residual_norm;
  solution.iterations = branch.iterations;
  solution.continuation_steps = branch.continuation_steps;
  solution.notes = std::move(branch.notes);
  return solution;
}

}  // namespace rpsolve
