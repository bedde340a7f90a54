#include "projfinsler/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  using namespace projfinsler::cli;
  CLI::App app{"Construct, verify and decompose projective Finsler metrics"};
  app.require_subcommand(1);

  RunOptions options;
  std::string config;
  std::string out;
  double tol = 0.0;
  int grid = 0;
  std::uint64_t seed = 0;
  const std::map<std::string, std::string> about{
      {"verify-projective", "Hamel residual report on a grid"},
      {"crofton", "Distance table of a hyperplane measure, optionally compared with a metric"},
      {"decompose", "Split a projective metric into a norm and an exact 1-form"},
      {"randers", "Co-disc translate test"},
      {"axioms", "Metric-axiom report on sampled triples"},
      {"plot-ball", "Unit ball and co-disc at a point"},
      {"plot-geodesics", "Integrated geodesic traces"},
      {"plot-residuals", "Hamel residual heatmap"},
  };
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config, "Job configuration (JSON)")->required();
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--tol", tol, "Tolerance (overrides the config)");
    sub->add_option("--grid", grid, "Grid resolution (overrides the config)");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_flag("--quiet", options.quiet, "Only report failures");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  options.config = config;
  if (sub->count("--out")) options.out = out;
  if (sub->count("--tol")) options.tol = tol;
  if (sub->count("--grid")) options.grid = grid;
  if (sub->count("--seed")) options.seed = seed;
  return run(sub->get_name(), options, std::cout, std::cerr);
}
