#include <cmath>
#include <numbers>

#include <doctest.h>

#include "rpsolve/continuum.hpp"
#include "rpsolve/errors.hpp"
#include "test_support.hpp"

using namespace rpsolve;
using namespace rpsolve::testing;

namespace {

// Density 1 on (0, 10].
DensityTable unit_density() { return DensityTable::background({5.0, 10.0}, {1.0, 1.0}); }

Complex log_formula(double cutoff, Complex e) { return 0.5 * std::log((2.0 * cutoff - e) / (-e)); }

PairingProblem box_pairing(double radius, int count) {
  PairingProblem p;
  p.bound_levels = {{-2.0, "b1"}, {-0.5, "b2"}};
  p.box_levels = box_spectrum(radius, count, 1.0);
  p.strength = 0.3;
  p.pairs = 2;
  return p;
}

PairingProblem as_histogram(PairingProblem p) {
  p.background = box_histogram(p.box_levels);
  p.box_levels.clear();
  return p;
}

}  // namespace

TEST_SUITE("continuum") {

TEST_CASE("Gauss-Legendre rules") {
  for (int order : {1, 2, 5, 8, 64}) {
    const auto gl = gauss_legendre(order);
    REQUIRE(gl.nodes.size() == static_cast<std::size_t>(order));
    double weight = 0.0;
    for (double w : gl.weights) weight += w;
    CHECK(weight == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::is_sorted(gl.nodes.begin(), gl.nodes.end()));
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      CHECK(std::abs(gl.nodes[k] + gl.nodes[gl.nodes.size() - 1 - k]) < 1e-15);
    }
    // Exact through degree 2n - 1.
    const int degree = 2 * order - 2;
    double moment = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      moment += gl.weights[k] * std::pow(gl.nodes[k], degree);
    }
    CHECK(moment == doctest::Approx(2.0 / (degree + 1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
}

TEST_CASE("quadrature panels tile the range and respect breakpoints") {
  PairingProblem p;
  p.bound_levels = {{-1.0, "b"}};
  p.resonances = {{2.0, 0.1}};
  p.background = DensityTable::background({0.5, 1.5, 3.0}, {0.2, 0.1, 0.0});
  p.strength = 0.1;
  p.pairs = 1;
  const auto rule = make_quadrature_rule(p, 30.0);
  REQUIRE(!rule.panels.empty());
  CHECK(rule.panels.front().lo == 0.0);
  CHECK(rule.panels.back().hi == 30.0);
  for (std::size_t k = 0; k + 1 < rule.panels.size(); ++k) {
    CHECK(rule.panels[k].hi == rule.panels[k + 1].lo);
    CHECK(rule.panels[k].lo < rule.panels[k].hi);
  }
  auto has_edge = [&](double x) {
    for (const auto& panel : rule.panels) {
      if (std::abs(panel.lo - x) < 1e-14 || std::abs(panel.hi - x) < 1e-14) return true;
    }
    return false;
  };
  for (double x : {0.5, 1.5, 3.0, 2.0, 1.5, 2.5}) CHECK(has_edge(x));

  const auto plain = make_quadrature_rule(5.0, 16, {-1.0, 2.0, 7.0});
  REQUIRE(plain.panels.size() == 2);
  CHECK(plain.panels[0].hi == 2.0);
  CHECK_THROWS_AS(make_quadrature_rule(0.0, 16, {}), DomainError);
  CHECK_THROWS_AS(make_quadrature_rule(1.0, 0, {}), DomainError);
}

TEST_CASE("default cutoff") {
  PairingProblem p;
  p.bound_levels = {{-2.0, "b"}};
  p.resonances = {{3.0, 0.1}};
  CHECK(default_cutoff(p) == 60.0);
  p.background = DensityTable::background({1.0, 80.0}, {1.0, 0.0});
  CHECK(default_cutoff(p) == 80.0);
}

TEST_CASE("constant density against the logarithm") {
  const auto rule = make_quadrature_rule(10.0, kDefaultNodesPerPanel, {5.0});
  const auto v = integral_term(unit_density(), rule, Complex(-2.0, 0.0));
  CHECK(std::abs(v - 0.5 * std::log(11.0)) < 1e-6);
  CHECK(std::abs(v.real() - 1.19895) < 1e-5);
  for (const Complex e : {Complex(-0.3, 0.0), Complex(-50.0, 0.0), Complex(4.0, 2.0), Complex(1.0, -0.5)}) {
    CHECK(std::abs(integral_term(unit_density(), rule, e) - log_formula(10.0, e)) < 1e-6);
  }
}

TEST_CASE("zero density integrates to zero") {
  const auto zero = DensityTable::background({1.0, 2.0, 5.0}, {0.0, 0.0, 0.0});
  const auto rule = make_quadrature_rule(10.0, 32, {1.0, 2.0, 5.0});
  CHECK(integral_term(zero, rule, Complex(-1.0, 0.3)) == Complex(0.0, 0.0));
}

TEST_CASE("refinement reference near the contour") {
  const auto density = unit_density();
  const Complex e{1.0, -0.5};
  Complex previous = integral_term(density, make_quadrature_rule(10.0, 16, {5.0}), e);
  Complex reference = previous;
  for (int nodes = 32; nodes <= 1024; nodes *= 2) {
    reference = integral_term(density, make_quadrature_rule(10.0, nodes, {5.0}), e);
    if (std::abs(reference - previous) < 1e-10) break;
    previous = reference;
  }
  const auto v = integral_term(density, make_quadrature_rule(10.0, kDefaultNodesPerPanel, {5.0}), e);
  CHECK(std::abs(v - reference) < 1e-8);
}

TEST_CASE("doubling the nodes changes little") {
  const auto density = DensityTable::background({0.2, 1.0, 2.5, 6.0}, {0.3, 0.8, 0.4, 0.0});
  const std::vector<double> edges{0.2, 1.0, 2.5, 6.0};
  for (const Complex e : {Complex(-1.0, 0.0), Complex(-0.05, 0.0), Complex(3.0, 0.4), Complex(0.5, -1.0)}) {
    const auto coarse = integral_term(density, make_quadrature_rule(6.0, 64, edges), e);
    const auto fine = integral_term(density, make_quadrature_rule(6.0, 128, edges), e);
    CHECK(std::abs(coarse - fine) < 1e-9 * std::abs(fine));
  }
}

TEST_CASE("real pair energies inside the continuum") {
  const auto rule = make_quadrature_rule(10.0, kDefaultNodesPerPanel, {5.0});
  CHECK_THROWS_AS(integral_term(unit_density(), rule, Complex(6.0, 0.0)), ContourError);
  const auto pv = integral_term(unit_density(), rule, Complex(6.0, 0.0), true);
  CHECK(std::abs(pv - 0.5 * std::log(7.0 / 3.0)) < 1e-9);
  const auto pv_near = integral_term(unit_density(), rule, Complex(19.98, 0.0), true);
  CHECK(std::abs(pv_near - 0.5 * std::log(0.01 / 9.99)) < 1e-8);
  CHECK_THROWS_AS(integral_term(unit_density(), rule, Complex(20.0, 0.0), true), ContourError);
  // Beyond twice the cutoff the integrand is regular.
  CHECK(std::abs(integral_term(unit_density(), rule, Complex(25.0, 0.0)) - log_formula(10.0, 25.0)) < 1e-6);
}

TEST_CASE("mode requirements") {
  PairingProblem p = discrete_problem({-1.0}, 0.1, 1);
  CHECK_NOTHROW(make_continuum_problem(p, ContinuumMode::RealContinuum, 10.0));
  CHECK_THROWS_AS(make_continuum_problem(p, ContinuumMode::ComplexPole, 10.0), DomainError);
  CHECK_THROWS_AS(make_continuum_problem(p, ContinuumMode::ComplexFull, 10.0), DomainError);
  p.resonances = {{1.0, 0.1}};
  CHECK_NOTHROW(make_continuum_problem(p, ContinuumMode::ComplexPole, 10.0));
  CHECK_THROWS_AS(make_continuum_problem(p, ContinuumMode::ComplexFull, 10.0), DomainError);
  p.background = unit_density();
  CHECK_THROWS_AS(make_continuum_problem(p, ContinuumMode::ComplexFull, 10.0), DomainError);
  p.complex_background = DensityTable({1.0, 2.0}, {Complex(0.1, -0.1), 0.0}, DensityKind::ComplexBackground);
  CHECK_NOTHROW(make_continuum_problem(p, ContinuumMode::ComplexFull, 10.0));
  CHECK_THROWS_AS(make_continuum_problem(p, ContinuumMode::RealContinuum, 10.0), DomainError);

  const auto pole = make_continuum_problem(p, ContinuumMode::ComplexPole, 10.0);
  const auto states = continuum_pair_states(pole);
  REQUIRE(states.size() == 2);
  CHECK(states[1] == Complex(2.0, -0.1));
  const auto real = make_continuum_problem(discrete_problem({-1.0}, 0.1, 1), ContinuumMode::RealContinuum);
  CHECK(continuum_pair_states(real).size() == 1);
}

TEST_CASE("residuals at zero strength") {
  PairingProblem p = discrete_problem({-1.0, 0.5}, 0.0, 2);
  p.background = unit_density();
  const auto real = make_continuum_problem(p, ContinuumMode::RealContinuum, 10.0);
  const PairEnergies e{{Complex(-3.0, 0.2), Complex(-1.0, -0.4)}};
  for (const auto& r : residual_continuum(e, real)) CHECK(r == Complex(1.0, 0.0));
  p.resonances = {{2.0, 0.3}};
  p.background.reset();
  const auto pole = make_continuum_problem(p, ContinuumMode::ComplexPole, 10.0);
  for (const auto& r : residual_complex(e, pole)) CHECK(r == Complex(1.0, 0.0));
  CHECK_THROWS_AS(residual_complex(e, real), DomainError);
  CHECK_THROWS_AS(residual_continuum(e, pole), DomainError);
}

TEST_CASE("empty densities reduce to the discrete equations") {
  PairingProblem p = discrete_problem({-1.5, -0.2, 0.4, 1.1}, 0.45, 3);
  const PairEnergies e{{Complex(-3.4, 0.0), Complex(-0.9, 0.35), Complex(-0.9, -0.35)}};
  const auto discrete = residual_discrete(e, p);
  const auto absent = residual_continuum(e, make_continuum_problem(p, ContinuumMode::RealContinuum));
  p.background = DensityTable::background({0.5, 2.0, 4.0}, {0.0, 0.0, 0.0});
  const auto zero = residual_continuum(e, make_continuum_problem(p, ContinuumMode::RealContinuum));
  for (std::size_t v = 0; v < discrete.size(); ++v) {
    CHECK(std::abs(absent[v] - discrete[v]) <= 1e-14);
    CHECK(std::abs(zero[v] - discrete[v]) <= 1e-14);
  }
  const auto a = solve_discrete(discrete_problem({-1.5, -0.2, 0.4, 1.1}, 0.45, 3), std::vector<int>{0, 1, 2});
  const auto b = solve_continuum(make_continuum_problem(p, ContinuumMode::RealContinuum), std::vector<int>{0, 1, 2});
  CHECK(std::abs(a.total - b.total) < 1e-12);
  for (std::size_t v = 0; v < 3; ++v) CHECK(std::abs(a.energies.values[v] - b.energies.values[v]) < 1e-12);
}

TEST_CASE("narrow histogram density mimics the box levels") {
  const auto discrete = box_pairing(10.0, 10);
  auto narrow = discrete;
  narrow.background = box_histogram(discrete.box_levels, 0.1);
  narrow.box_levels.clear();
  const auto smeared = make_continuum_problem(narrow, ContinuumMode::RealContinuum, std::nullopt, 8);
  for (const PairEnergies e : {PairEnergies{{Complex(-4.5, 0.0), Complex(-1.6, 0.0)}},
                               PairEnergies{{Complex(-2.0, 0.7), Complex(-2.0, -0.7)}}}) {
    const auto a = residual_discrete(e, discrete);
    const auto b = residual_continuum(e, smeared);
    for (std::size_t v = 0; v < a.size(); ++v) CHECK(std::abs(a[v] - b[v]) < 1e-3);
  }
}

TEST_CASE("histogram solve tracks the discrete solve") {
  const auto discrete = box_pairing(10.0, 20);
  const auto occupation = ground_occupation(discrete_pair_states(discrete), 2);
  const auto a = solve_discrete(discrete, occupation);
  const auto b = solve_continuum(make_continuum_problem(as_histogram(discrete),
                                                       ContinuumMode::RealContinuum, std::nullopt, 8),
                                 occupation);
  CHECK(std::abs(a.total - b.total) < 1e-2 * std::abs(a.total));
  CHECK(std::abs(b.total.imag()) < 1e-10);
}

TEST_CASE("pole approximation example") {
  PairingProblem p = discrete_problem({-1.0}, 0.5, 1);
  p.resonances = {{1.0, 0.1}};
  const auto problem = make_continuum_problem(p, ContinuumMode::ComplexPole);
  const auto s = solve_continuum(problem, std::vector<int>{0});
  CHECK(max_norm(residual_complex(s.energies, problem)) < 1e-12);
  CHECK(std::abs(s.total.imag()) > 0.0);
  const auto r = solve_continuum(problem, std::vector<int>{1});
  CHECK(r.total.imag() < 0.0);
}

TEST_CASE("narrow resonance behaves like a bound level") {
  PairingProblem bound = discrete_problem({1.0}, 0.1, 1);
  const auto reference = solve_discrete(bound, std::vector<int>{0});
  CHECK(std::abs(reference.total - Complex(1.9, 0.0)) < 1e-12);
  double previous = 0.0;
  for (double width : {1e-8, 1e-4, 1e-2, 0.1, 0.2}) {
    PairingProblem p;
    p.resonances = {{1.0, width}};
    p.strength = 0.1;
    p.pairs = 1;
    const auto s = solve_continuum(make_continuum_problem(p, ContinuumMode::ComplexPole), std::vector<int>{0});
    if (width == 1e-8) {
      CHECK(std::abs(s.total - reference.total) < 1e-6);
      CHECK(std::abs(s.total - reference.total) < 1e-5);
    }
    CHECK(std::abs(s.total.imag()) > previous);
    previous = std::abs(s.total.imag());
  }
}

TEST_CASE("full complex representation adds background integrals") {
  PairingProblem p = discrete_problem({-1.0}, 0.5, 1);
  p.resonances = {{1.0, 0.1}};
  p.background = DensityTable::background({0.5, 2.0, 5.0}, {0.1, 0.05, 0.0});
  p.complex_background =
      DensityTable({0.5, 2.0, 5.0}, {Complex(0.05, -0.02), Complex(0.04, -0.01), 0.0},
                   DensityKind::ComplexBackground);
  const auto full = make_continuum_problem(p, ContinuumMode::ComplexFull, 5.0);
  const auto pole = make_continuum_problem(p, ContinuumMode::ComplexPole, 5.0);
  const PairEnergies e{{Complex(-2.3, 0.1)}};
  const auto rf = residual_complex(e, full);
  const auto rp = residual_complex(e, pole);
  const Complex integrals = integral_term(*p.background, full.quadrature, e.values[0]) +
                            integral_term(*p.complex_background, full.quadrature, e.values[0]);
  CHECK(std::abs((rf[0] - rp[0]) - (-0.5 * 0.5 * integrals)) < 1e-13);

  const auto s = solve_continuum(full, std::vector<int>{0});
  CHECK(max_norm(residual_complex(s.energies, full)) < 1e-12);
}

TEST_CASE("Lorentzians in a real continuum count both spin states") {
  PairingProblem p = discrete_problem({-1.0}, 0.4, 1);
  p.resonances = {{1.0, 0.3}};
  const auto problem = make_continuum_problem(p, ContinuumMode::RealContinuum, 40.0);
  const PairEnergies e{{Complex(-2.5, 0.0)}};
  const auto r = residual_continuum(e, problem);
  const auto& rule = problem.quadrature;
  const auto gl = gauss_legendre(rule.nodes_per_panel);
  Complex integral = 0.0;
  for (const auto& panel : rule.panels) {
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double x = 0.5 * (panel.lo + panel.hi) + 0.5 * (panel.hi - panel.lo) * gl.nodes[k];
      integral += 0.5 * (panel.hi - panel.lo) * gl.weights[k] * 2.0 *
                  lorentzian_density(p.resonances, x) / (2.0 * x - e.values[0]);
    }
  }
  const Complex expected = 1.0 - 0.4 / (-2.0 - e.values[0]) - 0.4 * 0.5 * integral;
  CHECK(std::abs(r[0] - expected) < 1e-13);
}

TEST_CASE("solutions on the real contour are flagged") {
  PairingProblem p = discrete_problem({2.0}, 0.05, 1);
  p.background = DensityTable::background({0.5, 5.0}, {0.2, 0.2});
  const auto s = solve_continuum(make_continuum_problem(p, ContinuumMode::RealContinuum, 5.0),
                                 std::vector<int>{0});
  CHECK(s.total.imag() == 0.0);
  CHECK(s.total.real() > 0.0);
  bool flagged = false;
  for (const auto& note : s.notes) flagged = flagged || note.find("principal value") != std::string::npos;
  CHECK(flagged);
}

}  // TEST_SUITE

TEST_CASE("poles hugging the contour are resolved by refinement") {
  const auto rule = make_quadrature_rule(10.0, 16, {5.0});
  for (const Complex e : {Complex(12.0, 0.02), Complex(12.0, -1e-6), Complex(-1e-4, 0.0), Complex(10.0, 1e-9)}) {
    CHECK(std::abs(integral_term(unit_density(), rule, e) - log_formula(10.0, e)) < 1e-10);
  }
}
