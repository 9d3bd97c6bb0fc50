#pragma once

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>

#include "error.hpp"
#include "expression.hpp"
#include "mesh.hpp"
#include "nfunction.hpp"
#include "solver.hpp"

namespace orlicz_elastica {

enum class Suite { none, all, harmonic, curl, estimate, mms };

inline Suite parse_suite(const std::string& s) {
  if (s == "none") return Suite::none;
  if (s == "all") return Suite::all;
  if (s == "harmonic") return Suite::harmonic;
  if (s == "curl") return Suite::curl;
  if (s == "estimate") return Suite::estimate;
  if (s == "mms") return Suite::mms;
  throw ConfigError("unknown verification suite '" + s + "' (expected all|harmonic|curl|estimate|mms|none)");
}

inline std::string suite_name(Suite s) {
  switch (s) {
    case Suite::none: return "none";
    case Suite::all: return "all";
    case Suite::harmonic: return "harmonic";
    case Suite::curl: return "curl";
    case Suite::estimate: return "estimate";
    case Suite::mms: return "mms";
  }
  return "none";
}

/// Everything needed for one run. A manufactured case id fixes mu, the bulk potential,
/// the load, the Dirichlet data and the boundary tags; those keys are then rejected.
struct CaseConfig {
  std::optional<std::string> case_id;

  std::optional<std::filesystem::path> mesh_file;
  int nx = 16;
  int ny = 16;
  Extent extent;
  SideTags tags;

  double mu = 1.0;
  Family family = Family::quadratic;
  NFunctionParams params;

  std::array<std::string, 3> load{"0", "0", "0"};  ///< xx, xy, yy
  std::array<std::string, 2> dirichlet{"0", "0"};  ///< x, y

  SolverConfig solver;
  InitKind init = InitKind::zero;

  std::filesystem::path out_dir = "out";
  bool vtk = false;

  Suite suite = Suite::none;
  int levels = 4;
  int coarsest = 8;
  double margin = 0.2;

  void validate() const;
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v, int line) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

inline long long to_int(const std::string& key, const std::string& v, int line) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects true/false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::split(parts, v, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  return parts;
}

}  // namespace detail

/// "nx,ny"
inline std::pair<int, int> parse_grid(const std::string& v) {
  const auto parts = detail::split_list(v);
  if (parts.size() != 2) throw ConfigError("grid expects nx,ny, got '" + v + "'");
  const auto nx = detail::to_int("grid", parts[0], 0);
  const auto ny = detail::to_int("grid", parts[1], 0);
  if (nx < 1 || ny < 1) throw ConfigError("grid sizes must be >= 1");
  return {static_cast<int>(nx), static_cast<int>(ny)};
}

/// "x0,x1,y0,y1"
inline Extent parse_extent(const std::string& v) {
  const auto parts = detail::split_list(v);
  if (parts.size() != 4) throw ConfigError("extent expects x0,x1,y0,y1, got '" + v + "'");
  Extent e{detail::to_double("extent", parts[0], 0), detail::to_double("extent", parts[1], 0),
           detail::to_double("extent", parts[2], 0), detail::to_double("extent", parts[3], 0)};
  if (!(e.x1 > e.x0 && e.y1 > e.y0)) throw ConfigError("extent must have x1 > x0 and y1 > y0");
  return e;
}

/// "left:D,right:N,..." ; sides not listed keep their current tag.
inline SideTags parse_bc(const std::string& v, SideTags tags = {}) {
  for (const auto& item : detail::split_list(v)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("boundary spec '" + item + "' should look like side:D or side:N");
    std::string side = boost::trim_copy(item.substr(0, colon));
    std::string tag = boost::trim_copy(item.substr(colon + 1));
    BoundaryTag t;
    if (tag == "D") {
      t = BoundaryTag::dirichlet;
    } else if (tag == "N") {
      t = BoundaryTag::neumann;
    } else {
      throw ConfigError("boundary tag '" + tag + "' must be D or N");
    }
    if (side == "left") {
      tags.left = t;
    } else if (side == "right") {
      tags.right = t;
    } else if (side == "bottom") {
      tags.bottom = t;
    } else if (side == "top") {
      tags.top = t;
    } else {
      throw ConfigError("unknown side '" + side + "' (left, right, bottom, top)");
    }
  }
  return tags;
}

inline LinearSolverKind parse_linear_solver(const std::string& v) {
  if (v == "direct") return LinearSolverKind::direct;
  if (v == "cg") return LinearSolverKind::cg;
  throw ConfigError("solver.linear must be direct or cg, got '" + v + "'");
}

inline InitKind parse_init(const std::string& v) {
  if (v == "zero") return InitKind::zero;
  if (v == "random") return InitKind::random;
  throw ConfigError("solver.init must be zero or random, got '" + v + "'");
}

inline void CaseConfig::validate() const {
  if (mesh_file && !std::filesystem::exists(*mesh_file)) {
    throw ConfigError("mesh file '" + mesh_file->string() + "' does not exist");
  }
  if (case_id && mesh_file) throw ConfigError("manufactured cases use generated grids; drop mesh.file");
  if (levels < 2) throw ConfigError("verify.levels must be >= 2");
  if (coarsest < 1) throw ConfigError("verify.coarsest must be >= 1");
  if (!(margin >= 0.0 && margin < 0.5)) throw ConfigError("verify.margin must lie in [0, 0.5)");
  if (!case_id) {
    for (const auto& e : load) Expression::parse(e);
    for (const auto& e : dirichlet) Expression::parse(e);
  }
  try {
    solver.validate();
  } catch (const InvalidParameter& err) {
    throw ConfigError(err.what());
  }
}

/// Reads "key = value" lines; '#' starts a comment. Every key must be known and may
/// appear once. Relative mesh paths resolve against `base_dir`.
inline CaseConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  CaseConfig cfg;
  std::map<std::string, int> seen;
  bool nfunction_keys = false;
  bool problem_keys = false;
  std::string raw;
  int line = 0;
  auto where = [&](const std::string& key) { return "line " + std::to_string(line) + ": key '" + key + "'"; };

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string text = boost::trim_copy(raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = boost::trim_copy(text.substr(0, eq));
    const std::string value = boost::trim_copy(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    if (value.empty()) throw ConfigError(where(key) + " has no value");
    if (auto [it, fresh] = seen.emplace(key, line); !fresh) {
      throw ConfigError(where(key) + " repeats line " + std::to_string(it->second));
    }

    try {
      if (key == "case") {
        cfg.case_id = value;
      } else if (key == "mesh.file") {
        std::filesystem::path p(value);
        cfg.mesh_file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
      } else if (key == "mesh.grid") {
        std::tie(cfg.nx, cfg.ny) = parse_grid(value);
      } else if (key == "mesh.extent") {
        cfg.extent = parse_extent(value);
        problem_keys = true;
      } else if (key == "mesh.bc") {
        cfg.tags = parse_bc(value);
        problem_keys = true;
      } else if (key == "mu") {
        cfg.mu = detail::to_double(key, value, line);
        problem_keys = true;
      } else if (key == "nfunction.family") {
        cfg.family = parse_family(value);
        nfunction_keys = true;
      } else if (key == "nfunction.kappa") {
        cfg.params.kappa = detail::to_double(key, value, line);
        nfunction_keys = true;
      } else if (key == "nfunction.p") {
        cfg.params.p = detail::to_double(key, value, line);
        nfunction_keys = true;
      } else if (key == "nfunction.beta") {
        cfg.params.beta = detail::to_double(key, value, line);
        nfunction_keys = true;
      } else if (key == "nfunction.lambda_tilde") {
        cfg.params.lambda_tilde = detail::to_double(key, value, line);
        nfunction_keys = true;
      } else if (key == "load.xx") {
        cfg.load[0] = value;
        problem_keys = true;
      } else if (key == "load.xy") {
        cfg.load[1] = value;
        problem_keys = true;
      } else if (key == "load.yy") {
        cfg.load[2] = value;
        problem_keys = true;
      } else if (key == "dirichlet.x") {
        cfg.dirichlet[0] = value;
        problem_keys = true;
      } else if (key == "dirichlet.y") {
        cfg.dirichlet[1] = value;
        problem_keys = true;
      } else if (key == "solver.tol") {
        cfg.solver.tol_residual = detail::to_double(key, value, line);
      } else if (key == "solver.max_newton") {
        cfg.solver.max_newton = static_cast<int>(detail::to_int(key, value, line));
      } else if (key == "solver.linear") {
        cfg.solver.linear_solver = parse_linear_solver(value);
      } else if (key == "solver.cg_tol") {
        cfg.solver.cg_tolerance = detail::to_double(key, value, line);
      } else if (key == "solver.init") {
        cfg.init = parse_init(value);
      } else if (key == "solver.seed") {
        cfg.solver.seed = static_cast<std::uint64_t>(detail::to_int(key, value, line));
      } else if (key == "output.dir") {
        cfg.out_dir = value;
      } else if (key == "output.vtk") {
        cfg.vtk = detail::to_bool(key, value, line);
      } else if (key == "verify.suite") {
        cfg.suite = parse_suite(value);
      } else if (key == "verify.levels") {
        cfg.levels = static_cast<int>(detail::to_int(key, value, line));
      } else if (key == "verify.coarsest") {
        cfg.coarsest = static_cast<int>(detail::to_int(key, value, line));
      } else if (key == "verify.margin") {
        cfg.margin = detail::to_double(key, value, line);
      } else {
        throw ConfigError(where(key) + " is not recognized");
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw ConfigError(where(key) + ": " + msg);
    } catch (const Error& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }
  if (cfg.case_id && (nfunction_keys || problem_keys)) {
    throw ConfigError("case '" + *cfg.case_id +
                      "' fixes mu, nfunction, load, dirichlet, extent and bc; remove those keys");
  }
  cfg.validate();
  return cfg;
}

inline CaseConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

}  // namespace orlicz_elastica
