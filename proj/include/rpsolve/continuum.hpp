#pragma once

// Density integrals and the real-continuum / complex-energy Richardson
// equations.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpsolve/pair_system.hpp"
#include "rpsolve/richardson.hpp"
#include "rpsolve/spectrum.hpp"

namespace rpsolve {

inline constexpr int kDefaultNodesPerPanel = 64;
/// |Im E| at or below this counts as lying on the real integration contour.
inline constexpr double kContourTolerance = 1e-12;

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int order);

/// Fixed panel-wise Gauss-Legendre rule tiling (0, upper_cutoff].
struct QuadratureRule {
  std::vector<Panel> panels;
  int nodes_per_panel = kDefaultNodesPerPanel;
  double upper_cutoff = 0.0;
};

/// Panels between consecutive breakpoints of {0, cutoff} and those of
/// `breakpoints` that fall inside.
QuadratureRule make_quadrature_rule(double cutoff, int nodes_per_panel,
                                    std::vector<double> breakpoints);

/// Ten times the largest |2e| among levels and resonances, extended to the
/// end of any density table.
double default_cutoff(const PairingProblem& problem);

/// Rule whose panel edges include every density-grid point and, for each
/// resonance, its position and geometrically graded points starting at +-5 width.
QuadratureRule make_quadrature_rule(const PairingProblem& problem,
                                    std::optional<double> cutoff = std::nullopt,
                                    int nodes_per_panel = kDefaultNodesPerPanel);

enum class ContinuumMode { RealContinuum, ComplexPole, ComplexFull };

struct ContinuumProblem {
  PairingProblem base;
  QuadratureRule quadrature;
  ContinuumMode mode = ContinuumMode::RealContinuum;

  void validate() const;
};

ContinuumProblem make_continuum_problem(PairingProblem base, ContinuumMode mode,
                                        std::optional<double> cutoff = std::nullopt,
                                        int nodes_per_panel = kDefaultNodesPerPanel);

/// int_0^cutoff g(e) / (2e - E) de. A real E inside (0, 2 cutoff) lies on the
/// contour: without `principal_value` that is a ContourError, with it the
/// principal value is returned.
Complex integral_term(const DensityTable& density, const QuadratureRule& rule, Complex pair_energy,
                      bool principal_value = false);

/// Pair states usable as seeds: bound, box and (complex modes) resonance poles.
std::vector<Complex> continuum_pair_states(const ContinuumProblem& problem);

/// Richardson equations with a real single-particle density (RealContinuum).
std::vector<Complex> residual_continuum(const PairEnergies& energies,
                                        const ContinuumProblem& problem,
                                        double collision_tolerance = 1e-9);

/// Richardson equations with resonance poles (ComplexPole, ComplexFull).
std::vector<Complex> residual_complex(const PairEnergies& energies, const ContinuumProblem& problem,
                                      double collision_tolerance = 1e-9);

PairSolution solve_continuum(const ContinuumProblem& problem, std::span<const int> occupation,
                             const SolverSettings& settings = {});

/// PairSystem for any continuum mode; exposed for sweeps and tests.
PairSystem make_pair_system(const ContinuumProblem& problem);

/// One note per pair energy sitting on the real contour, where the density
/// integral was taken as a principal value.
std::vector<std::string> contour_notes(const ContinuumProblem& problem,
                                       std::span<const Complex> energies);

}  // namespace rpsolve
