#pragma once

// Run configuration: JSON ingestion, CSV density tables and the problem
// objects a run needs.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rpsolve/continuum.hpp"
#include "rpsolve/errors.hpp"
#include "rpsolve/richardson.hpp"
#include "rpsolve/spectrum.hpp"

namespace rpsolve::cli {

/// Anything wrong with the input before a solve starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Mode { Discrete, Continuum, ComplexPole, ComplexFull, Verify, Sweep };
enum class SolverKind { Discrete, Continuum, ComplexPole, ComplexFull };

std::optional<Mode> parse_mode(std::string_view name);
std::string_view mode_name(Mode mode);
std::string_view solver_name(SolverKind kind);

struct StrengthSweep {
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  /// `steps` evenly spaced values from start to stop inclusive.
  std::vector<double> values() const;
};

struct RunConfig {
  Mode mode = Mode::Discrete;
  /// Equation set used for solves, sweeps and verification.
  SolverKind solver = SolverKind::Discrete;
  PairingProblem problem;
  /// Empty means the ground-state occupation.
  std::vector<int> occupation;
  std::variant<double, StrengthSweep> strength = 0.0;
  SolverSettings settings;
  double oracle_tolerance = 1e-8;
  std::optional<double> cutoff;
  int nodes_per_panel = kDefaultNodesPerPanel;

  std::vector<double> strengths() const;
};

/// Validates `doc` against the config schema and builds the run. `mode`
/// (from the command line) takes precedence over the document's "mode" key;
/// `base_dir` resolves relative CSV paths. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc, Mode mode,
                       const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path, Mode mode);

/// Numeric rows of a CSV file; blank lines, '#' comments and a non-numeric
/// header line are skipped. Every row must have `columns` fields.
std::vector<std::vector<double>> read_csv_table(const std::filesystem::path& path,
                                                std::size_t columns);

/// Continuum problem for the non-discrete solvers.
ContinuumProblem continuum_problem(const RunConfig& config, double strength);

/// Pair states in occupation index order for the configured solver.
std::vector<Complex> pair_states(const RunConfig& config);

/// The configured occupation, or the ground occupation when none was given.
std::vector<int> resolved_occupation(const RunConfig& config);

}  // namespace rpsolve::cli
