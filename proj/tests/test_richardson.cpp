#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "rpsolve/errors.hpp"
#include "rpsolve/oracle.hpp"
#include "rpsolve/richardson.hpp"
#include "test_support.hpp"

using namespace rpsolve;
using namespace rpsolve::testing;

namespace {

const double kGolden = (1.0 - std::sqrt(5.0)) / 2.0;

std::vector<double> all_eigenvalues(const PairingProblem& p) {
  const auto basis = build_basis(static_cast<int>(p.bound_levels.size()), p.pairs);
  return lowest_eigenvalues(build_hamiltonian(basis, p), basis.size());
}

}  // namespace

TEST_SUITE("richardson") {

TEST_CASE("residual of the two-level problem") {
  const auto p = discrete_problem({0.0, 1.0}, 0.5, 1);
  CHECK(max_norm(residual_discrete({{kGolden}}, p)) < 1e-12);
  const auto r = residual_discrete({{-1.0}}, p);
  CHECK(std::abs(r[0] - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("residual is one at zero strength") {
  const auto p = discrete_problem({0.0, 0.3, 1.0, 2.5}, 0.0, 3);
  const auto r = residual_discrete({{Complex(-1, 0.5), Complex(0.7, -0.2), Complex(3, 1)}}, p);
  for (const auto& x : r) CHECK(x == Complex(1.0, 0.0));
}

TEST_CASE("pair-pair term enters with the attractive sign") {
  const auto p = discrete_problem({0.0, 1.0}, 0.25, 2);
  const Complex e1{-0.5, 0.0};
  const Complex e2{3.0, 0.0};
  const auto r = residual_discrete({{e1, e2}}, p);
  const Complex expected = 1.0 - 0.25 * (1.0 / (0.0 - e1) + 1.0 / (2.0 - e1)) - 0.5 / (e1 - e2);
  CHECK(std::abs(r[0] - expected) < 1e-15);
}

TEST_CASE("pole hits raise singularity errors naming the pair") {
  const auto p = discrete_problem({0.0, 1.0}, 0.5, 2);
  try {
    residual_discrete({{Complex(2.0, 0.0), Complex(-1.0, 0.0)}}, p);
    FAIL("expected a singularity error");
  } catch (const SingularityError& e) {
    CHECK(e.first() == 0);
    CHECK(e.second() == -2);
  }
  try {
    residual_discrete({{Complex(-1.0, 0.0), Complex(-1.0, 1e-12)}}, p);
    FAIL("expected a singularity error");
  } catch (const SingularityError& e) {
    CHECK(e.first() == 0);
    CHECK(e.second() == 1);
  }
  CHECK_THROWS_AS(jacobian_discrete({{Complex(0.0, 0.0), Complex(-1.0, 0.0)}}, p),
                  SingularityError);
}

TEST_CASE("Jacobian closed-form entries") {
  const auto p = discrete_problem({0.0, 1.0}, 0.5, 1);
  const auto j = jacobian_discrete({{-1.0}}, p);
  REQUIRE(j.rows() == 1);
  CHECK(std::abs(j(0, 0) - (-0.5 * (1.0 + 1.0 / 9.0))) < 1e-12);
  CHECK(std::abs(j(0, 0).real() - (-0.5556)) < 1e-4);

  const auto zero = discrete_problem({0.0, 1.0, 2.0}, 0.0, 2);
  CHECK(jacobian_discrete({{Complex(-1, 0), Complex(5, 1)}}, zero).norm() == 0.0);
}

TEST_CASE("Jacobian matches central differences") {
  std::mt19937_64 rng(11);
  const auto p = discrete_problem({-0.7, 0.0, 0.4, 1.0, 1.9, 3.2}, 0.37, 4);
  const auto poles = discrete_pair_states(p);
  const double h = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    const auto state = admissible_state(rng, poles, p.pairs, 0.3);
    const auto jac = jacobian_discrete({state}, p);
    for (int v = 0; v < p.pairs; ++v) {
      auto plus = state;
      auto minus = state;
      plus[static_cast<std::size_t>(v)] += h;
      minus[static_cast<std::size_t>(v)] -= h;
      const auto rp = residual_discrete({plus}, p);
      const auto rm = residual_discrete({minus}, p);
      for (int u = 0; u < p.pairs; ++u) {
        const Complex fd = (rp[static_cast<std::size_t>(u)] - rm[static_cast<std::size_t>(u)]) / (2.0 * h);
        const Complex an = jac(u, v);
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("seeds sit just below the occupied pair states") {
  const auto p = discrete_problem({0.0, 1.0}, 0.5, 1);
  const auto s = seed_g0(p, std::vector<int>{0}, 0.005);
  REQUIRE(s.values.size() == 1);
  CHECK(std::abs(s.values[0] - Complex(-0.005, 0.0)) < 1e-18);

  const auto d = discrete_problem({1.0, 1.0}, 0.2, 2);
  auto split = seed_g0(d, std::vector<int>{0, 1}, 0.004).values;
  canonical_order(split);
  CHECK(std::abs(split[0] - Complex(2.0 - 0.004, 0.001)) < 1e-15);
  CHECK(std::abs(split[1] - Complex(2.0 - 0.004, -0.001)) < 1e-15);

  CHECK_THROWS_AS(seed_g0(d, std::vector<int>{1, 1}, 0.004), DomainError);
  CHECK_THROWS_AS(seed_g0(d, std::vector<int>{0, 2}, 0.004), DomainError);
}

TEST_CASE("odd degenerate groups keep one real seed") {
  const std::vector<Complex> states(3, Complex(2.0, 0.0));
  auto s = seed_energies(states, 0.01);
  canonical_order(s);
  CHECK(s[1] == Complex(2.0 - 0.01, 0.0));
  CHECK(conjugation_closed(s, 0.0));
}

TEST_CASE("two-level ground and excited states") {
  const auto p = discrete_problem({0.0, 1.0}, 0.5, 1);
  const auto ground = solve_discrete(p, std::vector<int>{0});
  CHECK(std::abs(ground.total - Complex(kGolden, 0.0)) < 1e-10);
  CHECK(ground.residual_norm < 1e-12);
  CHECK(ground.continuation_steps > 0);
  const auto excited = solve_discrete(p, std::vector<int>{1});
  CHECK(std::abs(excited.total - Complex((1.0 + std::sqrt(5.0)) / 2.0, 0.0)) < 1e-10);
}

TEST_CASE("degenerate model closed form") {
  const auto p = discrete_problem({1.0, 1.0, 1.0, 1.0}, 0.2, 2);
  const auto s = solve_discrete(p, ground_occupation(discrete_pair_states(p), 2));
  // 2 n e - G n (L - n + 1)
  CHECK(std::abs(s.total - Complex(2.8, 0.0)) < 1e-8);
}

TEST_CASE("zero strength returns the unperturbed configuration") {
  const auto p = discrete_problem({0.0, 0.5, 2.0}, 0.0, 2);
  const auto s = solve_discrete(p, std::vector<int>{0, 2});
  CHECK(s.total == Complex(4.0, 0.0));
  CHECK(s.residual_norm == 0.0);
}

TEST_CASE("total energy is the plain sum") {
  CHECK(total_energy({}) == Complex(0.0, 0.0));
  CHECK(std::abs(total_energy({{-0.618, 2.618}}) - Complex(2.0, 0.0)) < 1e-15);
  std::vector<Complex> pair{{0.3, 1.7}, {0.3, -1.7}};
  REQUIRE(symmetrize_conjugates(pair, 1e-9));
  const auto t = total_energy({pair});
  CHECK(t.real() == 0.6);
  CHECK(t.imag() == 0.0);
}

TEST_CASE("identities hold on randomized inputs") {
  const Complex a = 1.0, b = 3.0, x = 0.0;
  CHECK(std::abs(1.0 / ((x - a) * (x - b)) - (1.0 / (a - b)) * (1.0 / (x - a) - 1.0 / (x - b))) <
        1e-15);
  const auto report = verify_identities(1000);
  CHECK(report.trials == 1000);
  CHECK(report.passed());
  CHECK(report.max_partial_fraction_error <= 1e-12);
}

TEST_CASE("settings are validated") {
  SolverSettings s;
  s.newton_tolerance = 0.0;
  CHECK_THROWS_AS(s.validate(1.0), DomainError);
  s = {};
  s.initial_g_step = 1e-3;
  s.min_g_step = 1e-2;
  CHECK_THROWS_AS(s.validate(1.0), DomainError);
  s = {};
  CHECK(s.first_step(0.5) == doctest::Approx(0.005));
  CHECK(s.smallest_step(0.5) == doctest::Approx(0.5e-8));
}

TEST_CASE("a starved solver reports the last good strength") {
  const auto p = discrete_problem(picket_fence(6), 0.8, 3);
  SolverSettings s;
  s.max_newton_iterations = 1;
  s.initial_g_step = 0.4;
  s.min_g_step = 0.4;
  try {
    solve_discrete(p, std::vector<int>{0, 1, 2}, s);
    FAIL("expected nonconvergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.last_good_strength() >= 0.0);
    CHECK(e.last_good_strength() < 0.8);
  }
}

TEST_CASE("conjugate closure on real spectra") {
  const std::vector<std::vector<double>> spectra{
      picket_fence(6), {0.0, 0.1, 0.5, 0.55, 2.0, 3.0}, {-3.0, -1.0, 0.0, 0.2, 0.4, 4.0, 5.0}};
  for (const auto& e : spectra) {
    for (double g : {0.1, 0.4, 1.0, 2.0}) {
      const auto p = discrete_problem(e, g, 3);
      const auto s = solve_discrete(p, ground_occupation(discrete_pair_states(p), 3));
      CHECK(conjugation_closed(s.energies.values, 1e-9));
      CHECK(std::abs(s.total.imag()) < 1e-10);
    }
  }
}

TEST_CASE("weak coupling stays near the seed") {
  const auto p = discrete_problem({0.0, 0.3, 0.9, 1.7}, 1e-6, 2);
  for (const auto& occ : all_occupations(4, 2)) {
    const auto s = solve_discrete(p, occ);
    auto expected = std::vector<Complex>{2.0 * p.bound_levels[static_cast<std::size_t>(occ[0])].energy,
                                         2.0 * p.bound_levels[static_cast<std::size_t>(occ[1])].energy};
    canonical_order(expected);
    for (std::size_t v = 0; v < 2; ++v) CHECK(std::abs(s.energies.values[v] - expected[v]) < 1e-4);
  }
}

TEST_CASE("level order does not change the energy") {
  std::vector<double> e{0.0, 0.35, 0.8, 1.4, 2.1, 2.2};
  const double g = 0.6;
  const auto base = solve_discrete(discrete_problem(e, g, 3), std::vector<int>{0, 1, 2});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(e.begin(), e.end(), rng);
    const auto p = discrete_problem(e, g, 3);
    const auto s = solve_discrete(p, ground_occupation(discrete_pair_states(p), 3));
    CHECK(std::abs(s.total - base.total) < 1e-10);
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK(std::abs(s.energies.values[v] - base.energies.values[v]) < 1e-9);
    }
  }
}

TEST_CASE("ground states match exact diagonalization") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> level(-1.0, 3.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int count = 4 + trial % 7;
    const int pairs = std::min(6, 1 + trial % count);
    std::vector<double> e;
    for (int k = 0; k < count; ++k) e.push_back(level(rng));
    for (double g : {0.2, 0.7}) {
      const auto p = discrete_problem(e, g, pairs);
      const auto s = solve_discrete(p, ground_occupation(discrete_pair_states(p), pairs));
      const auto eig = all_eigenvalues(p);
      CHECK(compare(s, eig, 1e-8, CompareTarget::Ground).passed);
    }
  }
}

TEST_CASE("every occupation finds its own eigenvalue") {
  const std::vector<double> e{0.0, 0.4, 1.1, 1.5, 2.6, 3.0};
  for (double g : {0.3, 0.9}) {
    const auto p = discrete_problem(e, g, 3);
    const auto eig = all_eigenvalues(p);
    std::vector<std::size_t> hit;
    for (const auto& occ : all_occupations(6, 3)) {
      const auto s = solve_discrete(p, occ);
      const auto report = compare(s, eig);
      CHECK_MESSAGE(report.passed, report.diagnostic);
      hit.push_back(report.reference_index);
    }
    std::sort(hit.begin(), hit.end());
    CHECK(std::adjacent_find(hit.begin(), hit.end()) == hit.end());
    CHECK(hit.size() == eig.size());
  }
}

}  // TEST_SUITE
