#pragma once

// Single-particle input: bound and box levels, resonances, tabulated level
// densities and the resonant/background split.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rpsolve {

using Complex = std::complex<double>;

/// One doubly degenerate pair state (j+, j-) with real energy.
struct Level {
  double energy = 0.0;
  std::string label;
};

/// Single-particle resonance at position - i width/2.
struct Resonance {
  double position = 0.0;
  double width = 0.0;

  Complex pole() const { return {position, -0.5 * width}; }
  void validate() const;
};

enum class DensityKind { Background, ComplexBackground };

/// Level density tabulated on a positive, strictly increasing grid.
///
/// Values between grid points come from monotone piecewise-cubic Hermite
/// interpolation (real and imaginary parts interpolated independently).
/// Below the first grid point the first value is held constant down to zero
/// energy; above the last grid point the density vanishes.
class DensityTable {
 public:
  DensityTable(std::vector<double> grid, std::vector<Complex> values, DensityKind kind);

  static DensityTable background(std::vector<double> grid, const std::vector<double>& values);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Complex>& values() const { return values_; }
  DensityKind kind() const { return kind_; }

  Complex operator()(double energy) const;

 private:
  std::vector<double> grid_;
  std::vector<Complex> values_;
  std::vector<Complex> slopes_;
  DensityKind kind_;
};

/// Full model input. Discrete pair states are indexed bound levels first,
/// then box levels, then (in complex-energy modes) resonances.
struct PairingProblem {
  std::vector<Level> bound_levels;
  std::vector<Level> box_levels;
  std::vector<Resonance> resonances;
  std::optional<DensityTable> background;
  std::optional<DensityTable> complex_background;
  double strength = 0.0;
  int pairs = 0;

  /// Checks label uniqueness, resonance invariants, strength >= 0 and pairs >= 1.
  void validate() const;
};

/// s-wave states of a hard-walled box: mass_scale * (k pi / radius)^2, k = 1..count.
std::vector<Level> box_spectrum(double radius, int count, double mass_scale);

/// Sum of unit-area Lorentzians, one per resonance.
double lorentzian_density(std::span<const Resonance> resonances, double energy);

/// Removes the Lorentzian part of `total`, leaving the (possibly negative) background.
DensityTable split_density(const DensityTable& total, std::span<const Resonance> resonances);

/// Smears each box level into a Gaussian of area 2 (both spin orientations)
/// whose standard deviation is `width_fraction` of the local level spacing.
/// Gaussians are renormalized on (0, inf) so none of the area falls below
/// threshold. The table samples each Gaussian every sigma/points_per_sigma.
DensityTable box_histogram(std::span<const Level> levels, double width_fraction = 0.25,
                           int points_per_sigma = 6);

}  // namespace rpsolve
