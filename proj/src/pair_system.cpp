#include "rpsolve/pair_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "rpsolve/errors.hpp"
#include "rpsolve/richardson.hpp"

namespace rpsolve {

namespace {

constexpr double kLargestNorm = std::numeric_limits<double>::infinity();

void check_admissible(const PairSystem& system, std::span<const Complex> energies,
                      double collision_tolerance) {
  for (std::size_t v = 0; v < energies.size(); ++v) {
    for (std::size_t j = 0; j < system.poles.size(); ++j) {
      if (std::abs(system.poles[j] - energies[v]) < collision_tolerance) {
        throw SingularityError(
            fmt::format("pair energy {} collides with pair state {} at 2e = ({}, {})", v, j,
                        system.poles[j].real(), system.poles[j].imag()),
            static_cast<int>(v), -1 - static_cast<int>(j));
      }
    }
    for (std::size_t w = v + 1; w < energies.size(); ++w) {
      if (std::abs(energies[v] - energies[w]) < collision_tolerance) {
        throw SingularityError(fmt::format("pair energies {} and {} collide", v, w),
                               static_cast<int>(v), static_cast<int>(w));
      }
    }
  }
}

bool all_finite(std::span<const Complex> values) {
  return std::all_of(values.begin(), values.end(), [](Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

struct NewtonResult {
  bool converged = false;
  double norm = kLargestNorm;
  int iterations = 0;
};

// Residual evaluation that reports inadmissible points instead of throwing.
bool try_residual(const PairSystem& system, std::span<const Complex> energies, Complex strength,
                  double collision_tolerance, std::vector<Complex>& out) {
  try {
    out = pair_residual(system, energies, strength, collision_tolerance);
  } catch (const SingularityError&) {
    return false;
  } catch (const ContourError&) {
    return false;
  }
  return all_finite(out);
}

// Rounding-error estimate for the residual: subtractions p - E lose
// eps (|p| + |E|) absolutely, which the 1/d^2 sensitivity amplifies. Small
// first continuation steps put pair energies within ~G of their pole, where
// this floor can exceed the requested tolerance.
double residual_floor(const PairSystem& system, std::span<const Complex> energies,
                      Complex strength) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double g = std::abs(strength);
  double worst = 0.0;
  for (std::size_t v = 0; v < energies.size(); ++v) {
    const double ev = std::abs(energies[v]);
    double sum = 1.0;
    for (const auto& pole : system.poles) {
      const double d = std::abs(pole - energies[v]);
      sum += g * (std::abs(pole) + ev) / (d * d) + g / d;
    }
    for (std::size_t w = 0; w < energies.size(); ++w) {
      if (w == v) continue;
      const double d = std::abs(energies[w] - energies[v]);
      sum += 2.0 * g * (std::abs(energies[w]) + ev) / (d * d) + 2.0 * g / d;
    }
    worst = std::max(worst, sum);
  }
  return eps * worst;
}

// Damped Newton with step halving on the residual infinity norm.
NewtonResult newton(const PairSystem& system, std::vector<Complex>& energies, Complex strength,
                    const SolverSettings& settings) {
  NewtonResult result;
  const double tol = settings.collision_tolerance;
  std::vector<Complex> residual;
  if (!try_residual(system, energies, strength, tol, residual)) return result;
  double norm = max_norm(residual);

  const auto n = static_cast<Eigen::Index>(energies.size());
  std::vector<Complex> trial(energies.size());
  std::vector<Complex> trial_residual;
  for (int it = 0; it < settings.max_newton_iterations; ++it) {
    if (norm <= std::max(settings.newton_tolerance, 16.0 * residual_floor(system, energies, strength))) {
      result = {true, norm, it};
      return result;
    }
    Eigen::MatrixXcd jac;
    try {
      jac = pair_jacobian(system, energies, strength, tol);
    } catch (const Error&) {
      result = {false, norm, it + 1};
      return result;
    }
    Eigen::VectorXcd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) rhs(k) = -residual[static_cast<std::size_t>(k)];
    const Eigen::VectorXcd step = jac.partialPivLu().solve(rhs);
    if (!step.allFinite()) {
      result = {false, norm, it + 1};
      return result;
    }

    bool accepted = false;
    for (double lambda = 1.0; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
      for (Eigen::Index k = 0; k < n; ++k) {
        trial[static_cast<std::size_t>(k)] = energies[static_cast<std::size_t>(k)] + lambda * step(k);
      }
      if (!try_residual(system, trial, strength, tol, trial_residual)) continue;
      const double trial_norm = max_norm(trial_residual);
      if (trial_norm < (1.0 - 1e-4 * lambda) * norm) {
        energies = trial;
        residual = trial_residual;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result = {false, norm, it + 1};
      return result;
    }
  }
  const double floor = 16.0 * residual_floor(system, energies, strength);
  result = {norm <= std::max(settings.newton_tolerance, floor), norm,
            settings.max_newton_iterations};
  return result;
}

// First-order predictor: at a solution r = 1 - G B(E) = 0, so dE/dG = J^{-1} 1/G.
std::vector<Complex> predict(const PairSystem& system, const std::vector<Complex>& energies,
                             Complex strength, Complex delta, double collision_tolerance) {
  if (strength == Complex{}) return energies;
  Eigen::MatrixXcd jac;
  try {
    jac = pair_jacobian(system, energies, strength, collision_tolerance);
  } catch (const Error&) {
    return energies;
  }
  const auto n = static_cast<Eigen::Index>(energies.size());
  const Eigen::VectorXcd rhs = Eigen::VectorXcd::Constant(n, 1.0 / strength);
  const Eigen::VectorXcd slope = jac.partialPivLu().solve(rhs);
  if (!slope.allFinite()) return energies;
  std::vector<Complex> out(energies);
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] += delta * slope(k);
  return out;
}

// Walks a converged solution along the strength axis with adaptive steps.
// Steps that fail near a branch point of the pair energies are retried along
// a small half-circle in the complex strength plane; the eigenvalue itself is
// analytic there, so the detour lands on the same eigenstate.
class Walker {
 public:
  Walker(const PairSystem& system, const SolverSettings& settings, double base_step,
         double min_step, BranchResult& result)
      : system_(system),
        settings_(settings),
        base_step_(base_step),
        min_step_(min_step),
        result_(result) {}

  void run(std::vector<Complex>& energies, double from, double to) {
    double g = from;
    const double direction = to >= from ? 1.0 : -1.0;
    double h = base_step_;
    bool promoted = false;
    double detour_origin = std::numeric_limits<double>::quiet_NaN();

    while (g != to) {
      const double remaining = std::abs(to - g);
      double next = g + direction * std::min(h, remaining);
      if (std::abs(to - next) <= 1e-14 * std::max(1.0, std::abs(to))) next = to;
      const double step = std::abs(next - g);

      auto trial = energies;
      if (advance(trial, g, next)) {
        energies = std::move(trial);
        g = next;
        ++result_.continuation_steps;
        h = std::min(2.0 * step, 8.0 * base_step_);
        continue;
      }

      if (auto pair = closest_pair(energies);
          pair && pair->distance < 100.0 * settings_.collision_tolerance) {
        auto promoted_trial = energies;
        const Complex mid = 0.5 * (energies[pair->a] + energies[pair->b]);
        promoted_trial[pair->a] = mid + Complex(0.0, step);
        promoted_trial[pair->b] = mid - Complex(0.0, step);
        promoted = true;
        if (solve_at(promoted_trial, next)) {
          result_.notes.push_back(fmt::format(
              "pair energies {} and {} promoted to a conjugate pair at G = {}", pair->a, pair->b,
              next));
          energies = std::move(promoted_trial);
          g = next;
          ++result_.continuation_steps;
          continue;
        }
      }

      if (step > base_step_ / 8.0) {
        h = 0.5 * step;
        continue;
      }

      if (!(detour_origin == g)) {
        detour_origin = g;
        const double span = direction * std::min(base_step_, remaining);
        auto detoured = energies;
        if (detour(detoured, g, span)) {
          result_.notes.push_back(
              fmt::format("complex-strength detour from G = {} to G = {}", g, g + span));
          energies = std::move(detoured);
          g = std::abs(to - (g + span)) <= 1e-14 * std::max(1.0, std::abs(to)) ? to : g + span;
          ++result_.continuation_steps;
          h = base_step_;
          continue;
        }
      }

      h = 0.5 * step;
      if (h < min_step_) {
        const auto message =
            fmt::format("continuation stalled at G = {} (step {} below minimum {})", g, h,
                        min_step_);
        if (promoted) throw CollisionError("unresolved pair-energy collision; " + message, g);
        throw NonConvergenceError(message, g);
      }
    }
  }

  bool solve_at(std::vector<Complex>& energies, Complex strength) {
    const auto outcome = newton(system_, energies, strength, settings_);
    result_.iterations += outcome.iterations;
    if (outcome.converged) result_.residual_norm = outcome.norm;
    return outcome.converged;
  }

 private:
  // Predictor-corrector step from `from` to `to`. Rejects steps whose
  // corrector wanders from the prediction or that move a pair energy by more
  // than a fraction of its distance to the nearest singularity; either sign
  // means the step may have jumped to another branch.
  bool advance(std::vector<Complex>& energies, Complex from, Complex to) {
    const auto start = energies;
    auto trial = predict(system_, start, from, to - from, settings_.collision_tolerance);
    const auto predicted = trial;
    if (!solve_at(trial, to)) return false;
    for (std::size_t v = 0; v < start.size(); ++v) {
      double scale = std::numeric_limits<double>::infinity();
      for (const auto& pole : system_.poles) scale = std::min(scale, std::abs(pole - start[v]));
      for (std::size_t w = 0; w < start.size(); ++w) {
        if (w != v) scale = std::min(scale, std::abs(start[w] - start[v]));
      }
      const double moved = std::abs(trial[v] - start[v]);
      const double drift = std::abs(trial[v] - predicted[v]);
      if (moved > 0.5 * scale || drift > 0.1 * scale) return false;
    }
    energies = std::move(trial);
    return true;
  }

  struct Pair {
    std::size_t a;
    std::size_t b;
    double distance;
  };

  static std::optional<Pair> closest_pair(const std::vector<Complex>& energies) {
    std::optional<Pair> best;
    for (std::size_t a = 0; a < energies.size(); ++a) {
      for (std::size_t b = a + 1; b < energies.size(); ++b) {
        const double d = std::abs(energies[a] - energies[b]);
        if (!best || d < best->distance) best = Pair{a, b, d};
      }
    }
    return best;
  }

  bool detour(std::vector<Complex>& energies, double from, double span) {
    const Complex centre = from + 0.5 * span;
    const double radius = 0.5 * span;
    auto point = [&](double t) {
      if (t >= 1.0) return Complex(from + span, 0.0);
      return centre - radius * std::exp(Complex(0.0, -std::numbers::pi * t));
    };
    auto current = energies;
    Complex strength = from;
    double t = 0.0;
    double dt = 1.0 / 16.0;
    while (t < 1.0) {
      const double t_next = std::min(1.0, t + dt);
      const Complex g_next = point(t_next);
      auto trial = current;
      if (advance(trial, strength, g_next)) {
        current = std::move(trial);
        strength = g_next;
        t = t_next;
        dt = std::min(1.0 / 8.0, 1.5 * dt);
      } else {
        dt *= 0.5;
        if (dt < 1.0 / 8192.0) return false;
      }
    }
    energies = std::move(current);
    return true;
  }

  const PairSystem& system_;
  const SolverSettings& settings_;
  double base_step_;
  double min_step_;
  BranchResult& result_;
};

void finish(const PairSystem& system, double strength, const SolverSettings& settings,
            BranchResult& result) {
  if (system.conjugate_symmetric) {
    if (!symmetrize_conjugates(result.energies, 1e-6)) {
      result.notes.push_back("pair energies are not closed under conjugation");
    }
  }
  canonical_order(result.energies);
  result.residual_norm =
      max_norm(pair_residual(system, result.energies, strength, settings.collision_tolerance));
  if (result.residual_norm > settings.newton_tolerance) {
    result.notes.push_back(fmt::format(
        "residual {:.3e} limited by rounding (tolerance {:.1e})", result.residual_norm,
        settings.newton_tolerance));
  }
}

}  // namespace

double max_norm(std::span<const Complex> values) {
  double norm = 0.0;
  for (const auto& z : values) norm = std::max(norm, std::abs(z));
  return norm;
}

std::vector<Complex> pair_residual(const PairSystem& system, std::span<const Complex> energies,
                                   Complex strength, double collision_tolerance) {
  check_admissible(system, energies, collision_tolerance);
  std::vector<Complex> out(energies.size());
  for (std::size_t v = 0; v < energies.size(); ++v) {
    Complex one_body = 0.0;
    for (const auto& pole : system.poles) one_body += 1.0 / (pole - energies[v]);
    if (system.continuum) one_body += system.continuum(energies[v]).value;
    Complex pair_term = 0.0;
    for (std::size_t w = 0; w < energies.size(); ++w) {
      if (w != v) pair_term += 2.0 / (energies[v] - energies[w]);
    }
    out[v] = 1.0 - strength * one_body - strength * pair_term;
  }
  return out;
}

Eigen::MatrixXcd pair_jacobian(const PairSystem& system, std::span<const Complex> energies,
                               Complex strength, double collision_tolerance) {
  check_admissible(system, energies, collision_tolerance);
  const auto n = static_cast<Eigen::Index>(energies.size());
  Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index v = 0; v < n; ++v) {
    const Complex ev = energies[static_cast<std::size_t>(v)];
    Complex slope = 0.0;
    for (const auto& pole : system.poles) {
      const Complex d = pole - ev;
      slope += 1.0 / (d * d);
    }
    if (system.continuum) slope += system.continuum(ev).slope;
    Complex diagonal = -strength * slope;
    for (Eigen::Index w = 0; w < n; ++w) {
      if (w == v) continue;
      const Complex d = ev - energies[static_cast<std::size_t>(w)];
      const Complex coupling = 2.0 * strength / (d * d);
      diagonal += coupling;
      jac(v, w) = -coupling;
    }
    jac(v, v) = diagonal;
  }
  return jac;
}

std::vector<Complex> seed_energies(std::span<const Complex> level_energies, double g0,
                                   std::span<const Complex> extra) {
  if (!extra.empty() && extra.size() != level_energies.size()) {
    throw DomainError(fmt::format("seed_offsets has {} entries, expected {}", extra.size(),
                                  level_energies.size()));
  }
  std::vector<Complex> seeds(level_energies.size());
  std::vector<bool> done(level_energies.size(), false);
  for (std::size_t v = 0; v < level_energies.size(); ++v) {
    if (done[v]) continue;
    std::vector<std::size_t> group;
    for (std::size_t w = v; w < level_energies.size(); ++w) {
      if (!done[w] && level_energies[w] == level_energies[v]) {
        group.push_back(w);
        done[w] = true;
      }
    }
    const bool odd = group.size() % 2 == 1;
    for (std::size_t k = 0; k < group.size(); ++k) {
      double offset = 0.0;
      if (group.size() > 1) {
        const std::size_t rank = odd ? k : k + 1;  // odd groups: first member unshifted
        if (rank > 0) {
          const double magnitude = 0.25 * g0 * static_cast<double>((rank + 1) / 2);
          offset = rank % 2 == 1 ? magnitude : -magnitude;
        }
      }
      seeds[group[k]] = level_energies[group[k]] - g0 + Complex(0.0, offset);
    }
  }
  for (std::size_t v = 0; v < extra.size(); ++v) seeds[v] += extra[v];
  return seeds;
}

BranchResult solve_branch(const PairSystem& system, std::span<const Complex> level_energies,
                          double target, const SolverSettings& settings) {
  settings.validate(target);
  BranchResult result;
  if (target == 0.0) {
    result.energies.assign(level_energies.begin(), level_energies.end());
    canonical_order(result.energies);
    return result;
  }

  const double min_step = settings.smallest_step(target);
  double g0 = std::min(settings.first_step(target), target);
  Walker walker(system, settings, settings.first_step(target), min_step, result);
  std::vector<Complex> energies;
  for (;;) {
    energies = seed_energies(level_energies, g0, settings.seed_offsets);
    if (walker.solve_at(energies, g0)) break;
    g0 *= 0.5;
    if (g0 < min_step) {
      throw NonConvergenceError("could not converge the initial continuation step from the seeds",
                                0.0);
    }
  }
  ++result.continuation_steps;
  walker.run(energies, g0, target);
  result.energies = std::move(energies);
  finish(system, target, settings, result);
  return result;
}

BranchResult continue_branch(const PairSystem& system, std::vector<Complex> start, double from,
                             double to, const SolverSettings& settings) {
  settings.validate(to);
  if (from == 0.0) throw DomainError("continue_branch cannot start at G = 0");
  BranchResult result;
  const double scale = std::max(std::abs(to), std::abs(from));
  const double base = settings.initial_g_step.value_or(scale / 100.0);
  const double min_step = settings.min_g_step.value_or(scale * 1e-8);
  Walker walker(system, settings, base, min_step, result);
  walker.run(start, from, to);
  if (from == to && !walker.solve_at(start, to)) {
    throw NonConvergenceError("starting point is not a solution", from);
  }
  result.energies = std::move(start);
  finish(system, to, settings, result);
  return result;
}

bool symmetrize_conjugates(std::vector<Complex>& energies, double tolerance) {
  std::vector<bool> matched(energies.size(), false);
  bool closed = true;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (matched[i]) continue;
    matched[i] = true;
    const double self_gap = 2.0 * std::abs(energies[i].imag());
    std::size_t partner = energies.size();
    double partner_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < energies.size(); ++j) {
      if (matched[j]) continue;
      const double gap = std::abs(energies[j] - std::conj(energies[i]));
      if (gap < partner_gap) {
        partner_gap = gap;
        partner = j;
      }
    }
    const double scale = std::max(1.0, std::abs(energies[i]));
    if (self_gap <= partner_gap) {
      if (self_gap > tolerance * scale) {
        closed = false;
      } else {
        energies[i] = {energies[i].real(), 0.0};
      }
      continue;
    }
    if (partner_gap > tolerance * scale) {
      closed = false;
      continue;
    }
    matched[partner] = true;
    const Complex mean = 0.5 * (energies[i] + std::conj(energies[partner]));
    energies[i] = mean;
    energies[partner] = std::conj(mean);
  }
  return closed;
}

void canonical_order(std::vector<Complex>& energies) {
  std::stable_sort(energies.begin(), energies.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() > b.imag();
  });
}

}  // namespace rpsolve
