#include "rpsolve/cli/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "rpsolve/cli/schema.hpp"

namespace rpsolve::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Prepared {
  PairSystem system;
  std::vector<Complex> occupied;
  std::optional<ContinuumProblem> continuum;
};

Prepared prepare(const RunConfig& config) {
  Prepared p;
  if (config.solver == SolverKind::Discrete) {
    p.system = make_discrete_system(config.problem);
  } else {
    p.continuum = continuum_problem(config, 0.0);
    p.system = make_pair_system(*p.continuum);
  }
  for (int index : resolved_occupation(config)) {
    p.occupied.push_back(p.system.poles[static_cast<std::size_t>(index)]);
  }
  return p;
}

PairSolution solve_point(const RunConfig& config, const Prepared& p, double g,
                         const SweepRow* previous) {
  BranchResult branch = previous && previous->g > 0.0
                            ? continue_branch(p.system, previous->solution.energies.values,
                                              previous->g, g, config.settings)
                            : solve_branch(p.system, p.occupied, g, config.settings);
  auto solution = make_solution(std::move(branch));
  if (p.continuum) {
    for (auto& note : contour_notes(*p.continuum, solution.energies.values)) {
      solution.notes.push_back(std::move(note));
    }
  }
  return solution;
}

bool complex_solver(SolverKind kind) {
  return kind == SolverKind::ComplexPole || kind == SolverKind::ComplexFull;
}

std::string number(double x) { return fmt::format("{:.17g}", x); }

void write_output(const Invocation& inv, std::ostream& out, const std::string& text) {
  if (!inv.out) {
    out << text;
    return;
  }
  std::ofstream file(*inv.out, std::ios::binary);
  if (!file) throw ConfigError(fmt::format("cannot write '{}'", inv.out->string()));
  file << text;
}

std::string render(const ordered_json& doc) { return doc.dump(2) + "\n"; }

void report_notes(const std::vector<SweepRow>& rows, std::ostream& err) {
  for (const auto& row : rows) {
    for (const auto& note : row.solution.notes) err << fmt::format("note: G = {}: {}\n", row.g, note);
  }
}

int run_identities(const Invocation& inv, std::ostream& out, std::ostream& err) {
  int trials = 1000;
  std::uint64_t seed = 20130701;
  if (inv.config) {
    std::ifstream in(*inv.config);
    if (!in) throw ConfigError(fmt::format("cannot open configuration '{}'", inv.config->string()));
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(fmt::format("{}: invalid JSON: {}", inv.config->string(), e.what()));
    }
    if (const auto violations = schema_violations(doc, identities_schema()); !violations.empty()) {
      std::string message = "configuration does not match the schema:";
      for (const auto& v : violations) message += "\n  " + v;
      throw ConfigError(message);
    }
    if (doc.contains("trials")) trials = static_cast<int>(doc["trials"].get<double>());
    if (doc.contains("seed")) seed = doc["seed"].get<std::uint64_t>();
  }
  const auto report = verify_identities(trials, seed);
  write_output(inv, out,
               inv.format == OutputFormat::Csv ? identities_csv(report, seed)
                                               : render(identities_json(report, seed)));
  if (!inv.quiet) {
    err << fmt::format("identities: {} trials, {} double-sum and {} partial-fraction failures\n",
                       trials, report.double_sum_failures, report.partial_fraction_failures);
  }
  return report.passed() ? kExitSuccess : kExitFailure;
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& config, bool parallel) {
  const auto prepared = prepare(config);
  auto strengths = config.strengths();
  std::vector<SweepRow> rows(strengths.size());
  if (!parallel) {
    for (std::size_t k = 0; k < strengths.size(); ++k) {
      rows[k].g = strengths[k];
      rows[k].solution = solve_point(config, prepared, strengths[k], k > 0 ? &rows[k - 1] : nullptr);
    }
    return rows;
  }

  std::vector<std::exception_ptr> failures(strengths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < strengths.size();) {
      rows[k].g = strengths[k];
      try {
        rows[k].solution = solve_point(config, prepared, strengths[k], nullptr);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  const auto count = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1,
                                              strengths.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  pool.clear();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return rows;
}

ordered_json sweep_json(const RunConfig& config, const std::vector<SweepRow>& rows, bool warm_start) {
  ordered_json doc;
  doc["mode"] = solver_name(config.solver);
  doc["pairs"] = config.problem.pairs;
  doc["occupation"] = resolved_occupation(config);
  if (config.solver != SolverKind::Discrete) {
    doc["cutoff"] = continuum_problem(config, 0.0).quadrature.upper_cutoff;
    doc["nodes_per_panel"] = config.nodes_per_panel;
  }
  doc["warm_start"] = warm_start;
  auto& results = doc["results"] = ordered_json::array();
  for (const auto& row : rows) {
    const auto& s = row.solution;
    ordered_json r;
    r["g"] = row.g;
    r["total_re"] = s.total.real();
    r["total_im"] = s.total.imag();
    r["residual_norm"] = s.residual_norm;
    r["continuation_steps"] = s.continuation_steps;
    r["iterations"] = s.iterations;
    if (complex_solver(config.solver)) r["pole_quality"] = std::abs(s.total.imag());
    auto& energies = r["energies"] = ordered_json::array();
    for (const auto& e : s.energies.values) energies.push_back({{"re", e.real()}, {"im", e.imag()}});
    r["notes"] = s.notes;
    results.push_back(std::move(r));
  }
  return doc;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "g,total_re,total_im,residual_norm,continuation_steps";
  const std::size_t pairs = rows.empty() ? 0 : rows.front().solution.energies.values.size();
  for (std::size_t k = 1; k <= pairs; ++k) out += fmt::format(",e{}_re,e{}_im", k, k);
  out += "\n";
  for (const auto& row : rows) {
    const auto& s = row.solution;
    out += fmt::format("{},{},{},{},{}", number(row.g), number(s.total.real()),
                       number(s.total.imag()), number(s.residual_norm), s.continuation_steps);
    for (const auto& e : s.energies.values) out += "," + number(e.real()) + "," + number(e.imag());
    out += "\n";
  }
  return out;
}

bool VerifyOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second.passed; });
}

VerifyOutcome run_verify(const RunConfig& config) {
  VerifyOutcome outcome;
  outcome.occupation = resolved_occupation(config);
  std::vector<Level> levels(config.problem.bound_levels);
  levels.insert(levels.end(), config.problem.box_levels.begin(), config.problem.box_levels.end());
  const auto basis = build_basis(static_cast<int>(levels.size()), config.problem.pairs);
  outcome.dimension = basis.size();
  if (basis.size() > kMaxEigenDimension) {
    throw CapacityError(fmt::format("oracle dimension {} exceeds the limit {}", basis.size(),
                                    kMaxEigenDimension));
  }
  const auto target = config.occupation.empty() ? CompareTarget::Ground : CompareTarget::Nearest;
  for (const auto& row : run_sweep(config)) {
    const auto h = build_hamiltonian(basis, levels, row.g);
    const auto spectrum = lowest_eigenvalues(h, basis.size());
    outcome.checks.emplace_back(row.g,
                                compare(row.solution, spectrum, config.oracle_tolerance, target));
  }
  return outcome;
}

ordered_json verify_json(const RunConfig& config, const VerifyOutcome& outcome) {
  ordered_json doc;
  doc["mode"] = "verify";
  doc["pairs"] = config.problem.pairs;
  doc["occupation"] = outcome.occupation;
  doc["dimension"] = outcome.dimension;
  doc["tolerance"] = config.oracle_tolerance;
  doc["passed"] = outcome.passed();
  auto& checks = doc["checks"] = ordered_json::array();
  for (const auto& [g, c] : outcome.checks) {
    checks.push_back({{"g", g},
                      {"total_re", c.total.real()},
                      {"total_im", c.total.imag()},
                      {"reference", c.reference},
                      {"reference_index", c.reference_index},
                      {"gap", c.gap},
                      {"passed", c.passed},
                      {"diagnostic", c.diagnostic}});
  }
  return doc;
}

std::string verify_csv(const VerifyOutcome& outcome) {
  std::string out = "g,total_re,total_im,reference,reference_index,gap,passed\n";
  for (const auto& [g, c] : outcome.checks) {
    out += fmt::format("{},{},{},{},{},{},{}\n", number(g), number(c.total.real()),
                       number(c.total.imag()), number(c.reference), c.reference_index,
                       number(c.gap), c.passed ? 1 : 0);
  }
  return out;
}

ordered_json identities_json(const IdentityReport& report, std::uint64_t seed) {
  ordered_json doc;
  doc["mode"] = "identities";
  doc["trials"] = report.trials;
  doc["seed"] = seed;
  doc["double_sum_failures"] = report.double_sum_failures;
  doc["partial_fraction_failures"] = report.partial_fraction_failures;
  doc["max_partial_fraction_error"] = report.max_partial_fraction_error;
  doc["passed"] = report.passed();
  return doc;
}

std::string identities_csv(const IdentityReport& report, std::uint64_t seed) {
  return fmt::format(
      "trials,seed,double_sum_failures,partial_fraction_failures,max_partial_fraction_error,"
      "passed\n{},{},{},{},{},{}\n",
      report.trials, seed, report.double_sum_failures, report.partial_fraction_failures,
      number(report.max_partial_fraction_error), report.passed() ? 1 : 0);
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    if (inv.command == "identities") return run_identities(inv, out, err);
    const auto mode = parse_mode(inv.command);
    if (!mode) throw ConfigError(fmt::format("unknown command '{}'", inv.command));
    if (!inv.config) throw ConfigError("--config is required");
    const auto config = load_config(*inv.config, *mode);

    if (*mode == Mode::Verify) {
      const auto outcome = run_verify(config);
      write_output(inv, out,
                   inv.format == OutputFormat::Csv ? verify_csv(outcome)
                                                   : render(verify_json(config, outcome)));
      for (const auto& [g, c] : outcome.checks) {
        if (!c.passed) err << fmt::format("verify: G = {}: {}\n", g, c.diagnostic);
      }
      if (!inv.quiet) {
        err << fmt::format("verify: {} of {} strengths match the oracle (dimension {})\n",
                           std::count_if(outcome.checks.begin(), outcome.checks.end(),
                                         [](const auto& c) { return c.second.passed; }),
                           outcome.checks.size(), outcome.dimension);
      }
      return outcome.passed() ? kExitSuccess : kExitFailure;
    }

    const auto rows = run_sweep(config, inv.parallel);
    write_output(inv, out,
                 inv.format == OutputFormat::Csv ? sweep_csv(rows)
                                                 : render(sweep_json(config, rows, !inv.parallel)));
    if (!inv.quiet) report_notes(rows, err);
    return kExitSuccess;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonConvergenceError& e) {
    err << fmt::format("error: {} (last converged G = {})\n", e.what(), e.last_good_strength());
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace rpsolve::cli
