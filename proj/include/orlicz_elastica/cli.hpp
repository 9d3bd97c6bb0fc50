#pragma once

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "expression.hpp"
#include "io.hpp"
#include "mesh.hpp"
#include "solver.hpp"
#include "tensorfield.hpp"
#include "verify.hpp"

namespace orlicz_elastica::cli {

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, not_converged = 3, verification_failed = 4 };

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::filesystem::path> mesh;
  std::optional<std::string> grid;
  std::optional<std::string> extent;
  std::optional<std::string> bc;
  std::optional<std::filesystem::path> out;
  std::optional<Suite> suite;
  std::optional<int> levels;
  bool vtk = false;
};

inline void apply(CaseConfig& cfg, const Overrides& o) {
  if (cfg.case_id && (o.extent || o.bc)) throw ConfigError("--extent and --bc cannot change a manufactured case");
  if (o.mesh) {
    cfg.mesh_file = *o.mesh;
  }
  if (o.grid) {
    std::tie(cfg.nx, cfg.ny) = parse_grid(*o.grid);
    cfg.mesh_file.reset();
  }
  if (o.extent) cfg.extent = parse_extent(*o.extent);
  if (o.bc) cfg.tags = parse_bc(*o.bc, cfg.tags);
  if (o.out) cfg.out_dir = *o.out;
  if (o.suite) cfg.suite = *o.suite;
  if (o.levels) cfg.levels = *o.levels;
  if (o.vtk) cfg.vtk = true;
  cfg.validate();
}

/// Problem from a config on an nx x ny grid (ignored when a mesh file is given).
inline Problem build_problem(const CaseConfig& cfg, int nx, int ny) {
  if (cfg.case_id) {
    const ManufacturedCase& mc = find_case(*cfg.case_id);
    if (nx != ny) throw ConfigError("manufactured cases need a square grid");
    return manufactured(mc, nx).first;
  }
  Mesh mesh = cfg.mesh_file ? load_mesh(*cfg.mesh_file) : generate_rectangle(nx, ny, cfg.extent, cfg.tags);
  NFunction phi = make_family(cfg.family, cfg.params);
  const Expression fxx = Expression::parse(cfg.load[0]);
  const Expression fxy = Expression::parse(cfg.load[1]);
  const Expression fyy = Expression::parse(cfg.load[2]);
  AnalyticTensor source = [fxx, fxy, fyy](double x, double y) {
    Tensor2 f;
    f << fxx(x, y), fxy(x, y), fxy(x, y), fyy(x, y);
    return f;
  };
  LoadTensor load = LoadTensor::sample(mesh, source);
  const Expression gx = Expression::parse(cfg.dirichlet[0]);
  const Expression gy = Expression::parse(cfg.dirichlet[1]);
  DisplacementField u0 =
      DisplacementField::interpolate(mesh, [gx, gy](double x, double y) { return std::array<double, 2>{gx(x, y), gy(x, y)}; });
  return Problem(std::move(mesh), cfg.mu, std::move(phi), std::move(load), std::move(u0));
}

inline Problem build_problem(const CaseConfig& cfg) { return build_problem(cfg, cfg.nx, cfg.ny); }

/// Refinement family of a config: grid n along x, aspect ratio of the configured grid kept.
inline LadderSpec ladder_spec(const CaseConfig& cfg) {
  if (cfg.case_id) return orlicz_elastica::ladder_spec(find_case(*cfg.case_id));
  if (cfg.mesh_file) throw ConfigError("refinement ladders need a generated grid, not mesh.file");
  const double aspect = static_cast<double>(cfg.ny) / cfg.nx;
  return {"config", [cfg, aspect](int n) {
            return build_problem(cfg, n, std::max(1, static_cast<int>(std::lround(n * aspect))));
          },
          std::nullopt};
}

struct CheckOutcome {
  std::string case_id;
  std::string check;
  double statistic = 0.0;  ///< fitted order, or growth slope for the estimate ledger
  std::string criterion;
  bool pass = false;
};

struct VerifyOutcome {
  std::vector<LadderColumn> columns;
  std::vector<CheckOutcome> checks;

  bool pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

inline bool wants(Suite s, Suite check) { return s == Suite::all || s == check; }

/// Runs the selected ladder checks for one refinement family. The H1 window is the first
/// `levels` grids; the interior checks use the last `levels`, one step finer, so the
/// interior margin keeps several test functions on every level.
inline VerifyOutcome verify_ladder(const LadderSpec& spec, Suite suite, int levels, int coarsest, double margin,
                                   const SolverConfig& solver) {
  VerifyOutcome out;
  if (suite == Suite::none) return out;
  const bool mms = wants(suite, Suite::mms) && spec.exact.has_value();
  const bool harmonic = wants(suite, Suite::harmonic);
  const bool curl = wants(suite, Suite::curl);
  const bool estimate = wants(suite, Suite::estimate);
  if (suite == Suite::mms && !spec.exact) throw ConfigError("suite mms needs a manufactured case");
  const bool shifted = harmonic || curl;

  LadderOptions opt;
  opt.levels = levels + (shifted ? 1 : 0);
  opt.coarsest = coarsest;
  opt.h1 = mms;
  opt.harmonic = harmonic;
  opt.curl = curl;
  opt.estimate = estimate;
  opt.margin_fraction = margin;
  opt.solver = solver;
  const LadderResult full = run_ladder(spec, opt);

  const auto lv = static_cast<std::size_t>(levels);
  const LadderResult first = full.slice(0, lv);
  const LadderResult last = full.slice(full.levels.size() - lv, lv);

  auto column = [&](const LadderResult& r, const std::string& check, const std::vector<double>& v) {
    LadderColumn c{spec.id, check, {}, r.h(), v};
    for (const auto& l : r.levels) c.n.push_back(l.n);
    out.columns.push_back(std::move(c));
  };
  std::ostringstream min_order;
  min_order << "order >= " << kMinimumOrder << ", non-increasing";
  if (mms) {
    column(first, "h1", first.h1_errors());
    out.checks.push_back({spec.id, "mms", first.h1_order(), min_order.str(), first.mms_pass()});
  }
  if (harmonic) {
    column(last, "harmonic", last.harmonic_defects());
    out.checks.push_back({spec.id, "harmonic", last.harmonic_order(), min_order.str(), last.harmonic_pass()});
  }
  if (curl) {
    column(last, "curl", last.curl_residuals());
    out.checks.push_back({spec.id, "curl", last.curl_order(), min_order.str(), last.curl_pass()});
  }
  if (estimate) {
    column(full, "estimate_ratio", full.estimate_ratios());
    std::ostringstream crit;
    crit << "growth <= " << kMaxRatioGrowth << ", estimate and J(u) <= J(lifting) on every level";
    out.checks.push_back({spec.id, "estimate", full.estimate_growth(), crit.str(), full.estimate_pass()});
  }
  if (!full.all_converged()) {
    out.checks.push_back({spec.id, "newton", 0.0, "every ladder solve converged", false});
  }
  return out;
}

inline void write_verify_outputs(const std::filesystem::path& dir, const std::vector<VerifyOutcome>& runs,
                                 std::ostream& log) {
  {
    auto f = open_output(dir / "ladder.csv");
    write_ladder_header(f);
    for (const auto& r : runs) {
      for (const auto& c : r.columns) write_ladder_rows(f, c);
    }
  }
  auto f = open_output(dir / "summary.csv");
  f << "case,check,statistic,criterion,pass\n";
  for (const auto& r : runs) {
    for (const auto& c : r.checks) {
      f << c.case_id << ',' << c.check << ',' << fmt(c.statistic) << ",\"" << c.criterion << "\"," << (c.pass ? 1 : 0)
        << '\n';
      log << (c.pass ? "PASS " : "FAIL ") << c.case_id << ' ' << c.check << "  statistic " << std::setprecision(4)
          << c.statistic << "  (" << c.criterion << ")\n";
    }
  }
}

/// Solve on the configured mesh, write outputs, then run the selected ladder checks.
inline int run_case(const CaseConfig& cfg, std::ostream& log) {
  const Problem prob = build_problem(cfg);
  SolveReport report;
  DisplacementField u(prob.mesh().num_nodes());
  try {
    std::tie(u, report) = solve(prob, cfg.solver, cfg.init);
  } catch (const LineSearchError& e) {
    log << "solve failed: " << e.what() << '\n';
    auto f = open_output(cfg.out_dir / "history.csv");
    write_history_csv(f, e.report());
    return not_converged;
  }
  report.estimate = estimate_A(prob, u);

  {
    auto f = open_output(cfg.out_dir / "solution.csv");
    write_solution_csv(f, prob.mesh(), u);
  }
  {
    auto f = open_output(cfg.out_dir / "report.csv");
    write_report_csv(f, report);
  }
  {
    auto f = open_output(cfg.out_dir / "history.csv");
    write_history_csv(f, report);
  }
  {
    auto f = open_output(cfg.out_dir / "energy.csv");
    write_energy_csv(f, report.final_energy);
  }
  if (cfg.vtk) {
    auto f = open_output(cfg.out_dir / "solution.vtk");
    write_vtk(f, prob.mesh(), u);
  }
  log << "solve: " << (report.converged ? "converged" : "NOT converged") << " after " << report.iterations
      << " Newton iteration(s), |r| = " << std::setprecision(3) << report.residual_history.back() << ", J = "
      << std::setprecision(10) << report.final_energy.total << '\n';
  if (!report.converged) return not_converged;

  if (cfg.suite == Suite::none) return ok;
  const VerifyOutcome v = verify_ladder(ladder_spec(cfg), cfg.suite, cfg.levels, cfg.coarsest, cfg.margin, cfg.solver);
  write_verify_outputs(cfg.out_dir, {v}, log);
  return v.pass() ? ok : verification_failed;
}

/// Ladder checks for several manufactured cases; no single solve.
inline int run_verify(const std::vector<std::string>& case_ids, Suite suite, int levels, int coarsest, double margin,
                      const SolverConfig& solver, const std::filesystem::path& out_dir, std::ostream& log) {
  std::vector<VerifyOutcome> runs;
  for (const auto& id : case_ids) {
    runs.push_back(verify_ladder(orlicz_elastica::ladder_spec(find_case(id)), suite, levels, coarsest, margin, solver));
  }
  write_verify_outputs(out_dir, runs, log);
  for (const auto& r : runs) {
    if (!r.pass()) return verification_failed;
  }
  return ok;
}

inline std::vector<std::string> default_verify_cases() {
  std::vector<std::string> ids;
  for (const auto& c : case_registry()) {
    if (c.default_ladder) ids.push_back(c.id);
  }
  return ids;
}

inline void list_cases(std::ostream& out) {
  for (const auto& c : case_registry()) out << c.id << "  " << c.description << '\n';
}

/// Maps library exceptions onto exit codes; `body` returns the exit code on success.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return config_error;
  } catch (const MeshError& e) {
    err << "mesh error: " << e.what() << '\n';
    return config_error;
  } catch (const InvalidParameter& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return config_error;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return not_converged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
}

inline int run_case(const std::filesystem::path& config, std::ostream& log, std::ostream& err,
                    const Overrides& o = {}) {
  return guarded(err, [&] {
    CaseConfig cfg = load_config(config);
    apply(cfg, o);
    return run_case(cfg, log);
  });
}

}  // namespace orlicz_elastica::cli
