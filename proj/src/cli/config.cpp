#include "rpsolve/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rpsolve/cli/schema.hpp"

namespace rpsolve::cli {

namespace {

using nlohmann::json;

constexpr std::pair<std::string_view, Mode> kModes[] = {
    {"discrete", Mode::Discrete},        {"continuum", Mode::Continuum},
    {"complex-pole", Mode::ComplexPole}, {"complex-full", Mode::ComplexFull},
    {"verify", Mode::Verify},            {"sweep", Mode::Sweep},
};

std::optional<SolverKind> solver_of(Mode mode) {
  switch (mode) {
    case Mode::Discrete: return SolverKind::Discrete;
    case Mode::Continuum: return SolverKind::Continuum;
    case Mode::ComplexPole: return SolverKind::ComplexPole;
    case Mode::ComplexFull: return SolverKind::ComplexFull;
    default: return std::nullopt;
  }
}

std::optional<double> parse_number(std::string_view field) {
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) {
    field.remove_prefix(1);
  }
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size()) return std::nullopt;
  return value;
}

std::vector<double> numbers(const json& array) {
  std::vector<double> out;
  for (const auto& x : array) out.push_back(x.get<double>());
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& file) {
  const std::filesystem::path p(file);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

DensityTable background_table(const json& table, const std::filesystem::path& base_dir) {
  if (table.contains("csv")) {
    const auto rows = read_csv_table(resolve(base_dir, table["csv"].get<std::string>()), 2);
    std::vector<double> grid, values;
    for (const auto& row : rows) {
      grid.push_back(row[0]);
      values.push_back(row[1]);
    }
    return DensityTable::background(std::move(grid), values);
  }
  return DensityTable::background(numbers(table["grid"]), numbers(table["values"]));
}

DensityTable complex_table(const json& table, const std::filesystem::path& base_dir) {
  std::vector<double> grid, re, im;
  if (table.contains("csv")) {
    for (const auto& row : read_csv_table(resolve(base_dir, table["csv"].get<std::string>()), 3)) {
      grid.push_back(row[0]);
      re.push_back(row[1]);
      im.push_back(row[2]);
    }
  } else {
    grid = numbers(table["grid"]);
    re = numbers(table["re"]);
    im = numbers(table["im"]);
  }
  if (re.size() != grid.size() || im.size() != grid.size()) {
    throw ConfigError("complex_background: grid, re and im must have equal length");
  }
  std::vector<Complex> values;
  for (std::size_t k = 0; k < grid.size(); ++k) values.emplace_back(re[k], im[k]);
  return DensityTable(std::move(grid), std::move(values), DensityKind::ComplexBackground);
}

ContinuumMode continuum_mode(SolverKind kind) {
  switch (kind) {
    case SolverKind::ComplexPole: return ContinuumMode::ComplexPole;
    case SolverKind::ComplexFull: return ContinuumMode::ComplexFull;
    default: return ContinuumMode::RealContinuum;
  }
}

void read_settings(const json& table, RunConfig& config) {
  auto& s = config.settings;
  if (table.contains("newton_tolerance")) s.newton_tolerance = table["newton_tolerance"];
  if (table.contains("max_newton_iterations")) {
    s.max_newton_iterations = static_cast<int>(table["max_newton_iterations"].get<double>());
  }
  if (table.contains("initial_g_step")) s.initial_g_step = table["initial_g_step"].get<double>();
  if (table.contains("min_g_step")) s.min_g_step = table["min_g_step"].get<double>();
  if (table.contains("collision_tolerance")) s.collision_tolerance = table["collision_tolerance"];
  if (table.contains("oracle_tolerance")) config.oracle_tolerance = table["oracle_tolerance"];
  if (table.contains("seed_offsets")) {
    for (const auto& z : table["seed_offsets"]) {
      s.seed_offsets.emplace_back(z["re"].get<double>(), z["im"].get<double>());
    }
  }
}

void build(const json& doc, RunConfig& config, const std::filesystem::path& base_dir) {
  auto& problem = config.problem;
  if (doc.contains("levels")) {
    std::size_t k = 0;
    for (const auto& level : doc["levels"]) {
      ++k;
      problem.bound_levels.push_back(
          {level["energy"].get<double>(), level.value("label", fmt::format("level{}", k))});
    }
  }
  if (doc.contains("box")) {
    const auto& box = doc["box"];
    problem.box_levels = box_spectrum(box["radius"].get<double>(),
                                      static_cast<int>(box["count"].get<double>()),
                                      box.value("mass_scale", 1.0));
  }
  if (doc.contains("resonances")) {
    for (const auto& r : doc["resonances"]) {
      problem.resonances.push_back({r["position"].get<double>(), r["width"].get<double>()});
    }
  }
  if (doc.contains("background")) problem.background = background_table(doc["background"], base_dir);
  if (doc.contains("complex_background")) {
    problem.complex_background = complex_table(doc["complex_background"], base_dir);
  }
  problem.pairs = static_cast<int>(doc["pairs"].get<double>());

  if (doc.contains("strength") && doc.contains("strength_sweep")) {
    throw ConfigError("give either \"strength\" or \"strength_sweep\", not both");
  }
  if (doc.contains("strength")) {
    config.strength = doc["strength"].get<double>();
  } else {
    const auto& sweep = doc["strength_sweep"];
    config.strength = StrengthSweep{sweep["start"].get<double>(), sweep["stop"].get<double>(),
                                    static_cast<int>(sweep["steps"].get<double>())};
  }

  if (doc.contains("settings")) read_settings(doc["settings"], config);
  if (doc.contains("quadrature")) {
    const auto& q = doc["quadrature"];
    if (q.contains("cutoff")) config.cutoff = q["cutoff"].get<double>();
    if (q.contains("nodes_per_panel")) {
      config.nodes_per_panel = static_cast<int>(q["nodes_per_panel"].get<double>());
    }
  }
  if (doc.contains("occupation") && doc["occupation"].is_array()) {
    for (const auto& index : doc["occupation"]) {
      config.occupation.push_back(static_cast<int>(index.get<double>()));
    }
  }
}

}  // namespace

std::optional<Mode> parse_mode(std::string_view name) {
  for (const auto& [key, mode] : kModes) {
    if (key == name) return mode;
  }
  return std::nullopt;
}

std::string_view mode_name(Mode mode) {
  for (const auto& [key, value] : kModes) {
    if (value == mode) return key;
  }
  return "unknown";
}

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Discrete: return "discrete";
    case SolverKind::Continuum: return "continuum";
    case SolverKind::ComplexPole: return "complex-pole";
    case SolverKind::ComplexFull: return "complex-full";
  }
  return "unknown";
}

std::vector<double> StrengthSweep::values() const {
  std::vector<double> out;
  if (steps == 1) return {start};
  for (int k = 0; k < steps; ++k) {
    out.push_back(k == steps - 1 ? stop : start + (stop - start) * k / (steps - 1));
  }
  return out;
}

std::vector<double> RunConfig::strengths() const {
  if (const auto* g = std::get_if<double>(&strength)) return {*g};
  return std::get<StrengthSweep>(strength).values();
}

std::vector<std::vector<double>> read_csv_table(const std::filesystem::path& path,
                                                std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open density table '{}'", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_number = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto x = parse_number(field);
      if (!x) {
        numeric = false;
        break;
      }
      row.push_back(*x);
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ConfigError(fmt::format("{}:{}: non-numeric field", path.string(), line_number));
    }
    header_allowed = false;
    if (row.size() != columns) {
      throw ConfigError(fmt::format("{}:{}: expected {} columns, found {}", path.string(),
                                    line_number, columns, row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RunConfig parse_config(const nlohmann::json& doc, Mode mode, const std::filesystem::path& base_dir) {
  if (const auto violations = schema_violations(doc, config_schema()); !violations.empty()) {
    std::string message = "configuration does not match the schema:";
    for (const auto& v : violations) message += "\n  " + v;
    throw ConfigError(message);
  }

  RunConfig config;
  config.mode = mode;
  std::optional<SolverKind> solver = solver_of(mode);
  if (doc.contains("mode")) {
    const auto declared = *parse_mode(doc["mode"].get<std::string>());
    const bool reusable = (mode == Mode::Verify || mode == Mode::Sweep) && solver_of(declared);
    if (declared != mode && !reusable) {
      throw ConfigError(fmt::format("configuration mode \"{}\" does not match the \"{}\" command",
                                    mode_name(declared), mode_name(mode)));
    }
    if (!solver) solver = solver_of(declared);
  }
  if (doc.contains("solver")) {
    const auto named = solver_of(*parse_mode(doc["solver"].get<std::string>()));
    if (solver && mode != Mode::Sweep && mode != Mode::Verify && named != solver) {
      throw ConfigError(fmt::format("\"solver\" conflicts with the \"{}\" command", mode_name(mode)));
    }
    if (mode == Mode::Sweep || mode == Mode::Verify) solver = named;
  }
  config.solver = solver.value_or(SolverKind::Discrete);
  if (mode == Mode::Verify && config.solver != SolverKind::Discrete) {
    throw ConfigError("verification compares against exact diagonalization and needs the discrete solver");
  }

  try {
    build(doc, config, base_dir);
    const auto& problem = config.problem;
    problem.validate();
    if (config.solver == SolverKind::Discrete) {
      if (problem.background || problem.complex_background) {
        throw ConfigError("the discrete solver takes no density tables");
      }
      if (!problem.resonances.empty()) {
        throw ConfigError("the discrete solver takes no resonances; use a complex-energy mode");
      }
    } else {
      continuum_problem(config, 0.0);
    }
    const auto states = pair_states(config);
    if (states.empty()) throw ConfigError("no pair states: give levels, a box or resonances");
    if (config.occupation.empty()) {
      ground_occupation(states, problem.pairs);
    } else {
      check_occupation(config.occupation, states.size(), problem.pairs);
    }
    for (double g : config.strengths()) config.settings.validate(g);
    if (config.settings.seed_offsets.size() > 0 &&
        config.settings.seed_offsets.size() != static_cast<std::size_t>(problem.pairs)) {
      throw ConfigError(fmt::format("settings.seed_offsets needs {} entries", problem.pairs));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path, Mode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open configuration '{}'", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  return parse_config(doc, mode, path.parent_path());
}

ContinuumProblem continuum_problem(const RunConfig& config, double strength) {
  auto base = config.problem;
  base.strength = strength;
  return make_continuum_problem(std::move(base), continuum_mode(config.solver), config.cutoff,
                                config.nodes_per_panel);
}

std::vector<Complex> pair_states(const RunConfig& config) {
  if (config.solver == SolverKind::Discrete) return discrete_pair_states(config.problem);
  ContinuumProblem shape;
  shape.base = config.problem;
  shape.mode = continuum_mode(config.solver);
  return continuum_pair_states(shape);
}

std::vector<int> resolved_occupation(const RunConfig& config) {
  if (!config.occupation.empty()) return config.occupation;
  return ground_occupation(pair_states(config), config.problem.pairs);
}

}  // namespace rpsolve::cli
