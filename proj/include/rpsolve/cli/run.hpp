#pragma once

// Subcommand dispatch, strength sweeps and result emission.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsolve/cli/config.hpp"
#include "rpsolve/oracle.hpp"

namespace rpsolve::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 2;
inline constexpr int kExitConfig = 3;

enum class OutputFormat { Json, Csv };

struct SweepRow {
  double g = 0.0;
  PairSolution solution;
};

/// Solves every configured strength in ascending order. Sequential runs seed
/// each point with the previous solution; `parallel` solves the points
/// independently from G = 0 on several threads.
std::vector<SweepRow> run_sweep(const RunConfig& config, bool parallel = false);

nlohmann::ordered_json sweep_json(const RunConfig& config, const std::vector<SweepRow>& rows,
                                  bool warm_start);

/// g, total_re, total_im, residual_norm, continuation_steps, then e_k re/im
/// pairs; 17 significant digits.
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct VerifyOutcome {
  std::vector<int> occupation;
  std::size_t dimension = 0;
  std::vector<std::pair<double, CompareReport>> checks;

  bool passed() const;
};

/// Discrete solves compared against exact diagonalization at every strength.
VerifyOutcome run_verify(const RunConfig& config);

nlohmann::ordered_json verify_json(const RunConfig& config, const VerifyOutcome& outcome);
std::string verify_csv(const VerifyOutcome& outcome);

nlohmann::ordered_json identities_json(const IdentityReport& report, std::uint64_t seed);
std::string identities_csv(const IdentityReport& report, std::uint64_t seed);

struct Invocation {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  OutputFormat format = OutputFormat::Json;
  bool parallel = false;
  bool quiet = false;
};

/// Runs one subcommand. Data goes to `out` (or the --out file), diagnostics
/// to `err`. Returns 0 on success, 2 on nonconvergence or a failed
/// verification, 3 on configuration errors.
int run(const Invocation& invocation, std::ostream& out, std::ostream& err);

}  // namespace rpsolve::cli
