#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "rpsolve/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact pairing energies from the Richardson equations"};
  app.require_subcommand(1);

  rpsolve::cli::Invocation inv;
  std::string config;
  std::string out;
  const std::map<std::string, rpsolve::cli::OutputFormat> formats{
      {"json", rpsolve::cli::OutputFormat::Json}, {"csv", rpsolve::cli::OutputFormat::Csv}};

  const std::pair<const char*, const char*> commands[] = {
      {"discrete", "solve with discrete single-particle levels"},
      {"continuum", "solve with a real continuum density"},
      {"complex-pole", "solve in the pole approximation of the complex-energy representation"},
      {"complex-full", "solve with resonance poles and background integrals"},
      {"verify", "compare discrete solutions against exact diagonalization"},
      {"sweep", "solve over a range of pairing strengths"},
      {"identities", "check the algebraic identities behind the equations"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    auto* config_option = sub->add_option("--config", config, "JSON configuration file");
    if (std::string_view(name) != "identities") config_option->required();
    sub->add_option("--out", out, "write data here instead of stdout");
    sub->add_option("--format", inv.format, "json or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_flag("--parallel", inv.parallel, "solve sweep points independently on threads");
    sub->add_flag("--quiet", inv.quiet, "suppress notes on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rpsolve::cli::kExitConfig;
  }

  inv.command = app.get_subcommands().front()->get_name();
  if (!config.empty()) inv.config = config;
  if (!out.empty()) inv.out = out;
  return rpsolve::cli::run(inv, std::cout, std::cerr);
}
