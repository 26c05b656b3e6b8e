#include "rpsolve/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include <boost/math/special_functions/legendre.hpp>
#include <fmt/format.h>

#include "rpsolve/errors.hpp"

namespace rpsolve {

namespace {

using DensityFunction = std::function<Complex(double)>;

bool on_contour(Complex e, double cutoff) {
  return std::abs(e.imag()) <= kContourTolerance && e.real() >= 0.0 &&
         0.5 * e.real() <= cutoff;
}

// Gauss-Legendre on fixed panels, with density-weighted weights cached once
// per density. A panel the pole 2e = E sits too close to is bisected towards
// it and integrated directly instead.
class WeightedNodes {
 public:
  WeightedNodes(DensityFunction density, const QuadratureRule& rule)
      : density_(std::move(density)), rule_(gauss_legendre(rule.nodes_per_panel)),
        panels_(rule.panels) {
    for (const auto& panel : panels_) {
      const double half = 0.5 * (panel.hi - panel.lo);
      const double mid = 0.5 * (panel.hi + panel.lo);
      for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
        const double x = mid + half * rule_.nodes[k];
        nodes_.push_back(2.0 * x);
        weights_.push_back(half * rule_.weights[k] * density_(x));
      }
    }
  }

  /// int g/(2e - E) and its E-derivative int g/(2e - E)^2.
  OneBodyValue evaluate(Complex e) const {
    OneBodyValue sum{0.0, 0.0};
    const std::size_t per_panel = rule_.nodes.size();
    for (std::size_t p = 0; p < panels_.size(); ++p) {
      if (!resolved(panels_[p].lo, panels_[p].hi, e)) {
        refine(panels_[p].lo, panels_[p].hi, e, 0, sum);
        continue;
      }
      for (std::size_t k = p * per_panel; k < (p + 1) * per_panel; ++k) {
        const Complex inv = 1.0 / (nodes_[k] - e);
        sum.value += weights_[k] * inv;
        sum.slope += weights_[k] * inv * inv;
      }
    }
    return sum;
  }

 private:
  // Gauss error on a panel falls like rho^(-2n), rho the Bernstein ellipse
  // through the pole.
  bool resolved(double lo, double hi, Complex e) const {
    const double half = 0.5 * (hi - lo);
    const Complex z = (0.5 * e - 0.5 * (hi + lo)) / half;
    Complex w = z + std::sqrt(z - 1.0) * std::sqrt(z + 1.0);
    const double rho = std::max(std::abs(w), 1.0 / std::abs(w));
    return 2.0 * static_cast<double>(rule_.nodes.size()) * std::log(rho) >= 40.0;
  }

  void refine(double lo, double hi, Complex e, int depth, OneBodyValue& sum) const {
    if (depth < 64 && !resolved(lo, hi, e)) {
      const double mid = 0.5 * (lo + hi);
      refine(lo, mid, e, depth + 1, sum);
      refine(mid, hi, e, depth + 1, sum);
      return;
    }
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    // Offset from the pole formed before adding the node, so tiny panels
    // next to it keep their relative accuracy.
    const Complex offset = mid - 0.5 * e;
    for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
      const double x = mid + half * rule_.nodes[k];
      const Complex weighted = half * rule_.weights[k] * density_(x);
      const Complex inv = 0.5 / (offset + half * rule_.nodes[k]);
      sum.value += weighted * inv;
      sum.slope += weighted * inv * inv;
    }
  }

  DensityFunction density_;
  GaussLegendre rule_;
  std::vector<Panel> panels_;
  std::vector<double> nodes_;
  std::vector<Complex> weights_;
};

Complex integrate(const DensityFunction& density, const QuadratureRule& rule, Complex e) {
  return WeightedNodes(density, rule).evaluate(e).value;
}

// Principal value at the real pole p = E/2: split the panels symmetrically
// around p and integrate (g(e) - g(p))/(2e - E); the subtracted constant
// contributes g(p)/2 ln((cutoff - p)/p) analytically.
Complex principal_value(const DensityFunction& density, const QuadratureRule& rule, double e) {
  const double cutoff = rule.upper_cutoff;
  const double p = 0.5 * e;
  if (!(p > 0.0) || !(p < cutoff)) {
    throw ContourError(fmt::format(
        "principal value undefined with the pole at the integration endpoint (E = {})", e));
  }
  std::vector<double> edges{0.0, cutoff};
  for (const auto& panel : rule.panels) {
    edges.push_back(panel.lo);
    edges.push_back(panel.hi);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  double reach = std::min(p, cutoff - p);
  for (double edge : edges) {
    const double d = std::abs(edge - p);
    if (d > 0.0) reach = std::min(reach, d);
  }
  std::vector<double> breakpoints;
  for (double edge : edges) {
    if (std::abs(edge - p) >= reach) breakpoints.push_back(edge);
  }
  breakpoints.push_back(p - 0.5 * reach);
  breakpoints.push_back(p);
  breakpoints.push_back(p + 0.5 * reach);
  const auto split = make_quadrature_rule(cutoff, rule.nodes_per_panel, std::move(breakpoints));

  const Complex at_pole = density(p);
  const auto gl = gauss_legendre(split.nodes_per_panel);
  Complex sum = 0.0;
  for (const auto& panel : split.panels) {
    const double half = 0.5 * (panel.hi - panel.lo);
    const double mid = 0.5 * (panel.hi + panel.lo);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double x = mid + half * gl.nodes[k];
      sum += half * gl.weights[k] * (density(x) - at_pole) / (2.0 * x - e);
    }
  }
  return sum + 0.5 * at_pole * std::log((cutoff - p) / p);
}

DensityFunction mode_density(const ContinuumProblem& problem) {
  const auto& base = problem.base;
  switch (problem.mode) {
    case ContinuumMode::RealContinuum: {
      // Resonances listed alongside a real continuum are part of its density,
      // two spin states per Lorentzian.
      // An absent table is an empty density.
      if (!base.background && base.resonances.empty()) return {};
      const auto background = base.background;
      const auto resonances = base.resonances;
      return [background, resonances](double x) {
        const Complex tabulated = background ? (*background)(x) : Complex{};
        return tabulated + 2.0 * lorentzian_density(resonances, x);
      };
    }
    case ContinuumMode::ComplexFull: {
      const auto background = *base.background;
      const auto rotated = *base.complex_background;
      return [background, rotated](double x) { return background(x) + rotated(x); };
    }
    case ContinuumMode::ComplexPole:
      break;
  }
  return {};
}

}  // namespace

PairSystem make_pair_system(const ContinuumProblem& problem) {
  problem.validate();
  PairSystem system;
  system.poles = continuum_pair_states(problem);
  system.conjugate_symmetric = problem.mode == ContinuumMode::RealContinuum;

  auto density = mode_density(problem);
  if (!density) return system;
  auto nodes = std::make_shared<const WeightedNodes>(density, problem.quadrature);
  const auto rule = problem.quadrature;
  system.continuum = [nodes, density, rule](Complex e) -> OneBodyValue {
    if (!on_contour(e, rule.upper_cutoff)) {
      const auto full = nodes->evaluate(e);
      return {0.5 * full.value, 0.5 * full.slope};
    }
    const double x = e.real();
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const Complex value = principal_value(density, rule, x);
    const Complex slope =
        (principal_value(density, rule, x + h) - principal_value(density, rule, x - h)) /
        (2.0 * h);
    return {0.5 * value, 0.5 * slope};
  };
  return system;
}

GaussLegendre gauss_legendre(int order) {
  if (order < 1) throw DomainError(fmt::format("Gauss-Legendre order must be positive, got {}", order));
  GaussLegendre rule;
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    rule.nodes.push_back(-*it);
  }
  for (double x : zeros) rule.nodes.push_back(x);
  std::sort(rule.nodes.begin(), rule.nodes.end());
  for (double x : rule.nodes) {
    const double dp = boost::math::legendre_p_prime(order, x);
    rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

QuadratureRule make_quadrature_rule(double cutoff, int nodes_per_panel,
                                    std::vector<double> breakpoints) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw DomainError(fmt::format("integration cutoff must be positive, got {}", cutoff));
  }
  if (nodes_per_panel < 1) throw DomainError("nodes_per_panel must be positive");
  std::vector<double> edges{0.0, cutoff};
  for (double b : breakpoints) {
    if (b > 0.0 && b < cutoff) edges.push_back(b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  QuadratureRule rule;
  rule.nodes_per_panel = nodes_per_panel;
  rule.upper_cutoff = cutoff;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) rule.panels.push_back({edges[k], edges[k + 1]});
  return rule;
}

double default_cutoff(const PairingProblem& problem) {
  double scale = 0.0;
  for (const auto* list : {&problem.bound_levels, &problem.box_levels}) {
    for (const auto& l : *list) scale = std::max(scale, std::abs(2.0 * l.energy));
  }
  for (const auto& r : problem.resonances) scale = std::max(scale, std::abs(2.0 * r.position));
  double cutoff = 10.0 * scale;
  for (const auto* table : {&problem.background, &problem.complex_background}) {
    if (*table) cutoff = std::max(cutoff, (*table)->grid().back());
  }
  return cutoff > 0.0 ? cutoff : 1.0;
}

QuadratureRule make_quadrature_rule(const PairingProblem& problem, std::optional<double> cutoff,
                                    int nodes_per_panel) {
  const double upper = cutoff.value_or(default_cutoff(problem));
  std::vector<double> breakpoints;
  for (const auto* table : {&problem.background, &problem.complex_background}) {
    if (*table) {
      const auto& grid = (*table)->grid();
      breakpoints.insert(breakpoints.end(), grid.begin(), grid.end());
    }
  }
  for (const auto& r : problem.resonances) {
    breakpoints.push_back(r.position);
    for (double offset = 5.0 * r.width; offset < upper; offset *= 2.0) {
      breakpoints.push_back(r.position - offset);
      breakpoints.push_back(r.position + offset);
    }
  }
  return make_quadrature_rule(upper, nodes_per_panel, std::move(breakpoints));
}

void ContinuumProblem::validate() const {
  base.validate();
  if (quadrature.panels.empty() || !(quadrature.upper_cutoff > 0.0)) {
    throw DomainError("continuum problem needs a quadrature rule");
  }
  switch (mode) {
    case ContinuumMode::RealContinuum:
      if (base.complex_background) {
        throw DomainError("real-continuum mode takes no complex background table");
      }
      break;
    case ContinuumMode::ComplexFull:
      if (!base.background) throw DomainError("complex-full mode requires a background table");
      if (!base.complex_background) {
        throw DomainError("complex-full mode requires a complex background table");
      }
      [[fallthrough]];
    case ContinuumMode::ComplexPole:
      if (base.resonances.empty()) throw DomainError("complex-energy modes require resonances");
      break;
  }
}

ContinuumProblem make_continuum_problem(PairingProblem base, ContinuumMode mode,
                                        std::optional<double> cutoff, int nodes_per_panel) {
  ContinuumProblem problem;
  problem.quadrature = make_quadrature_rule(base, cutoff, nodes_per_panel);
  problem.base = std::move(base);
  problem.mode = mode;
  problem.validate();
  return problem;
}

Complex integral_term(const DensityTable& density, const QuadratureRule& rule, Complex pair_energy,
                      bool principal_value_requested) {
  const DensityFunction g = [&density](double x) { return density(x); };
  if (on_contour(pair_energy, rule.upper_cutoff)) {
    if (!principal_value_requested) {
      throw ContourError(fmt::format("pair energy ({}, {}) lies on the integration contour",
                                     pair_energy.real(), pair_energy.imag()));
    }
    return principal_value(g, rule, pair_energy.real());
  }
  return integrate(g, rule, pair_energy);
}

std::vector<Complex> continuum_pair_states(const ContinuumProblem& problem) {
  auto states = discrete_pair_states(problem.base);
  if (problem.mode != ContinuumMode::RealContinuum) {
    for (const auto& r : problem.base.resonances) states.push_back(2.0 * r.pole());
  }
  return states;
}

std::vector<Complex> residual_continuum(const PairEnergies& energies,
                                        const ContinuumProblem& problem,
                                        double collision_tolerance) {
  if (problem.mode != ContinuumMode::RealContinuum) {
    throw DomainError("residual_continuum needs a real-continuum problem");
  }
  return pair_residual(make_pair_system(problem), energies.values, problem.base.strength,
                       collision_tolerance);
}

std::vector<Complex> residual_complex(const PairEnergies& energies, const ContinuumProblem& problem,
                                      double collision_tolerance) {
  if (problem.mode == ContinuumMode::RealContinuum) {
    throw DomainError("residual_complex needs a complex-pole or complex-full problem");
  }
  return pair_residual(make_pair_system(problem), energies.values, problem.base.strength,
                       collision_tolerance);
}

PairSolution solve_continuum(const ContinuumProblem& problem, std::span<const int> occupation,
                             const SolverSettings& settings) {
  const auto system = make_pair_system(problem);
  check_occupation(occupation, system.poles.size(), problem.base.pairs);
  std::vector<Complex> occupied;
  for (int index : occupation) occupied.push_back(system.poles[static_cast<std::size_t>(index)]);
  auto solution = make_solution(solve_branch(system, occupied, problem.base.strength, settings));
  for (auto& note : contour_notes(problem, solution.energies.values)) {
    solution.notes.push_back(std::move(note));
  }
  return solution;
}

std::vector<std::string> contour_notes(const ContinuumProblem& problem,
                                       std::span<const Complex> energies) {
  std::vector<std::string> notes;
  const bool has_density = problem.mode == ContinuumMode::ComplexFull ||
                           (problem.mode == ContinuumMode::RealContinuum &&
                            (problem.base.background || !problem.base.resonances.empty()));
  if (!has_density) return notes;
  for (const auto& e : energies) {
    if (on_contour(e, problem.quadrature.upper_cutoff)) {
      notes.push_back(fmt::format(
          "pair energy {} lies on the real contour; density integral taken as a principal value",
          e.real()));
    }
  }
  return notes;
}

}  // namespace rpsolve
