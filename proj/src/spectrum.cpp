#include "rpsolve/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "rpsolve/errors.hpp"

namespace rpsolve {

namespace {

// Fritsch-Butland slopes for one real component; shape preserving.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (std::signbit(s) != std::signbit(d0) || d0 == 0.0) {
      s = 0.0;
    } else if (std::signbit(d0) != std::signbit(d1) && std::abs(s) > 3.0 * std::abs(d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

}  // namespace

void Resonance::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw DomainError(fmt::format("resonance width must be positive, got {}", width));
  }
  if (!(position > 0.0) || !std::isfinite(position)) {
    throw DomainError(fmt::format("resonance position must be positive, got {}", position));
  }
}

DensityTable::DensityTable(std::vector<double> grid, std::vector<Complex> values, DensityKind kind)
    : grid_(std::move(grid)), values_(std::move(values)), kind_(kind) {
  if (grid_.size() < 2) throw DomainError("density grid needs at least two points");
  if (grid_.size() != values_.size()) {
    throw DomainError(fmt::format("density grid has {} points but {} values", grid_.size(),
                                  values_.size()));
  }
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (!(grid_[k] > 0.0) || !std::isfinite(grid_[k])) {
      throw DomainError(fmt::format("density grid point {} is not a positive energy", k));
    }
    if (k > 0 && !(grid_[k] > grid_[k - 1])) {
      throw DomainError(fmt::format("density grid not strictly increasing at point {}", k));
    }
    if (!std::isfinite(values_[k].real()) || !std::isfinite(values_[k].imag())) {
      throw DomainError(fmt::format("density value at grid point {} is not finite", k));
    }
    if (kind_ == DensityKind::Background && values_[k].imag() != 0.0) {
      throw DomainError("background density must be real");
    }
  }

  std::vector<double> re(values_.size()), im(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) {
    re[k] = values_[k].real();
    im[k] = values_[k].imag();
  }
  const auto dre = pchip_slopes(grid_, re);
  const auto dim = pchip_slopes(grid_, im);
  slopes_.resize(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) slopes_[k] = {dre[k], dim[k]};
}

DensityTable DensityTable::background(std::vector<double> grid, const std::vector<double>& values) {
  return DensityTable(std::move(grid), std::vector<Complex>(values.begin(), values.end()),
                      DensityKind::Background);
}

Complex DensityTable::operator()(double energy) const {
  if (energy <= grid_.front()) return energy < 0.0 ? Complex{} : values_.front();
  if (energy > grid_.back()) return {};
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), energy);
  const std::size_t k = static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (k + 1 >= grid_.size()) return values_.back();
  const double h = grid_[k + 1] - grid_[k];
  const double t = (energy - grid_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[k] + h10 * h * slopes_[k] + h01 * values_[k + 1] + h11 * h * slopes_[k + 1];
}

void PairingProblem::validate() const {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw DomainError(fmt::format("pairing strength must be nonnegative, got {}", strength));
  }
  if (pairs < 1) throw DomainError(fmt::format("pair count must be positive, got {}", pairs));
  std::set<std::string> labels;
  for (const auto* list : {&bound_levels, &box_levels}) {
    for (const auto& level : *list) {
      if (!std::isfinite(level.energy)) {
        throw DomainError(fmt::format("level '{}' has non-finite energy", level.label));
      }
      if (!labels.insert(level.label).second) {
        throw DomainError(fmt::format("duplicate level label '{}'", level.label));
      }
    }
  }
  for (const auto& r : resonances) r.validate();
  if (background && background->kind() != DensityKind::Background) {
    throw DomainError("background table must be of kind Background");
  }
  if (complex_background && complex_background->kind() != DensityKind::ComplexBackground) {
    throw DomainError("complex background table must be of kind ComplexBackground");
  }
}

std::vector<Level> box_spectrum(double radius, int count, double mass_scale) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError(fmt::format("box radius must be positive, got {}", radius));
  }
  if (count < 1) throw DomainError(fmt::format("box level count must be positive, got {}", count));
  if (!(mass_scale > 0.0) || !std::isfinite(mass_scale)) {
    throw DomainError(fmt::format("mass scale must be positive, got {}", mass_scale));
  }
  std::vector<Level> levels;
  levels.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    const double momentum = k * std::numbers::pi / radius;
    levels.push_back({mass_scale * momentum * momentum, fmt::format("box{}", k)});
  }
  return levels;
}

double lorentzian_density(std::span<const Resonance> resonances, double energy) {
  double sum = 0.0;
  for (const auto& r : resonances) {
    const double half = 0.5 * r.width;
    const double offset = energy - r.position;
    sum += half / (offset * offset + half * half);
  }
  return sum / std::numbers::pi;
}

DensityTable split_density(const DensityTable& total, std::span<const Resonance> resonances) {
  if (total.kind() != DensityKind::Background) {
    throw DomainError("split_density expects a real Background table");
  }
  std::vector<Complex> values(total.values());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] -= lorentzian_density(resonances, total.grid()[k]);
  }
  return DensityTable(total.grid(), std::move(values), DensityKind::Background);
}

DensityTable box_histogram(std::span<const Level> levels, double width_fraction,
                           int points_per_sigma) {
  if (levels.empty()) throw DomainError("box_histogram needs at least one level");
  if (!(width_fraction > 0.0)) throw DomainError("width_fraction must be positive");
  if (points_per_sigma < 1) throw DomainError("points_per_sigma must be positive");
  std::vector<double> centers;
  for (const auto& l : levels) {
    if (!(l.energy > 0.0)) {
      throw DomainError(fmt::format("box level '{}' must have positive energy", l.label));
    }
    centers.push_back(l.energy);
  }
  std::sort(centers.begin(), centers.end());
  const std::size_t n = centers.size();
  std::vector<double> sigma(n);
  for (std::size_t k = 0; k < n; ++k) {
    double spacing;
    if (n == 1) {
      spacing = centers[0];
    } else if (k + 1 == n) {
      spacing = centers[k] - centers[k - 1];
    } else {
      const double below = k == 0 ? 0.0 : centers[k - 1];
      spacing = 0.5 * (centers[k + 1] - below);
    }
    if (!(spacing > 0.0)) throw DomainError("box levels must be distinct");
    sigma[k] = width_fraction * spacing;
  }

  constexpr double reach = 8.0;
  std::vector<double> grid;
  for (std::size_t k = 0; k < n; ++k) {
    const double step = sigma[k] / points_per_sigma;
    const double lo = std::max(centers[k] - reach * sigma[k], 0.5 * step);
    const double hi = centers[k] + reach * sigma[k];
    const auto first = static_cast<long>(std::ceil((lo - centers[k]) / step));
    const auto last = static_cast<long>(std::floor((hi - centers[k]) / step));
    for (long i = first; i <= last; ++i) grid.push_back(centers[k] + static_cast<double>(i) * step);
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> merged;
  for (double x : grid) {
    if (merged.empty() || x - merged.back() > 1e-9 * x) merged.push_back(x);
  }

  const double norm = 2.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<double> values(merged.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    // Fraction of the Gaussian above zero energy.
    const double kept = 0.5 * std::erfc(-centers[k] / (std::sqrt(2.0) * sigma[k]));
    const double amplitude = norm / (sigma[k] * kept);
    const auto lo = std::lower_bound(merged.begin(), merged.end(), centers[k] - 12.0 * sigma[k]);
    for (auto it = lo; it != merged.end() && *it <= centers[k] + 12.0 * sigma[k]; ++it) {
      const double z = (*it - centers[k]) / sigma[k];
      values[static_cast<std::size_t>(it - merged.begin())] += amplitude * std::exp(-0.5 * z * z);
    }
  }
  return DensityTable::background(std::move(merged), values);
}

}  // namespace rpsolve
