#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orlicz_elastica/cli.hpp"

namespace oe = orlicz_elastica;

int main(int argc, char** argv) {
  CLI::App app{"Finite-element solver for small-strain elasticity with an Orlicz-growth bulk potential"};
  app.require_subcommand(1);

  std::string config;
  std::string out, mesh, grid, extent, bc, suite;
  int levels = 0;
  // verify has its own defaults; sharing variables with solve would leak them into solve
  std::string verify_out = "out", verify_suite = "all";
  int verify_levels = 4;
  int coarsest = 8;
  double margin = 0.2;
  bool vtk = false;
  std::vector<std::string> cases;

  auto* solve = app.add_subcommand("solve", "solve one configured case, then run its verify.suite");
  solve->add_option("--config", config, "case file (key = value)")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "output directory (overrides output.dir)");
  solve->add_option("--mesh", mesh, "text mesh file")->check(CLI::ExistingFile);
  solve->add_option("--grid", grid, "structured grid nx,ny");
  solve->add_option("--extent", extent, "rectangle x0,x1,y0,y1");
  solve->add_option("--bc", bc, "boundary tags, e.g. left:D,right:N");
  solve->add_option("--suite", suite, "all|harmonic|curl|estimate|mms|none");
  solve->add_option("--levels", levels, "ladder levels");
  solve->add_flag("--vtk", vtk, "also write solution.vtk");

  auto* verify = app.add_subcommand("verify", "refinement ladders for manufactured cases or a config");
  verify->add_option("--config", config, "case file; its suite is replaced by --suite")->check(CLI::ExistingFile);
  verify->add_option("--case", cases, "manufactured case id (repeatable); default: the standard pair");
  verify->add_option("--suite", verify_suite, "all|harmonic|curl|estimate|mms")->capture_default_str();
  verify->add_option("--levels", verify_levels, "ladder levels")->capture_default_str();
  verify->add_option("--coarsest", coarsest, "coarsest grid")->default_val(8);
  verify->add_option("--margin", margin, "interior margin as a fraction of diam")->default_val(0.2);
  verify->add_option("--out", verify_out, "output directory")->capture_default_str();

  auto* list = app.add_subcommand("list-cases", "print the manufactured case registry");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    oe::cli::list_cases(std::cout);
    return oe::cli::ok;
  }

  if (verify->parsed()) {
    out = verify_out;
    suite = verify_suite;
    levels = verify_levels;
  }
  oe::cli::Overrides o;
  if (!out.empty()) o.out = out;
  if (!mesh.empty()) o.mesh = mesh;
  if (!grid.empty()) o.grid = grid;
  if (!extent.empty()) o.extent = extent;
  if (!bc.empty()) o.bc = bc;
  if (levels > 0) o.levels = levels;
  o.vtk = vtk;

  return oe::cli::guarded(std::cerr, [&]() -> int {
    if (!suite.empty()) o.suite = oe::parse_suite(suite);
    if (solve->parsed()) {
      oe::CaseConfig cfg = oe::load_config(config);
      oe::cli::apply(cfg, o);
      return oe::cli::run_case(cfg, std::cout);
    }
    if (!config.empty()) {
      if (!cases.empty()) throw oe::ConfigError("--case and --config are exclusive");
      oe::CaseConfig cfg = oe::load_config(config);
      cfg.coarsest = coarsest;
      cfg.margin = margin;
      oe::cli::apply(cfg, o);
      const auto v = oe::cli::verify_ladder(oe::cli::ladder_spec(cfg), cfg.suite, cfg.levels, cfg.coarsest,
                                            cfg.margin, cfg.solver);
      oe::cli::write_verify_outputs(cfg.out_dir, {v}, std::cout);
      return v.pass() ? oe::cli::ok : oe::cli::verification_failed;
    }
    if (cases.empty()) cases = oe::cli::default_verify_cases();
    oe::SolverConfig solver;
    return oe::cli::run_verify(cases, o.suite.value_or(oe::Suite::all), levels, coarsest, margin, solver, out,
                               std::cout);
  });
}
