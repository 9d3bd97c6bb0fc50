#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "energy.hpp"
#include "error.hpp"

namespace orlicz_elastica {

enum class LinearSolverKind { direct, cg };

struct SolverConfig {
  double tol_residual = 1e-10;  ///< relative: stop when |r| <= tol (1 + |r(u_init)|)
  int max_newton = 50;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 40;
  LinearSolverKind linear_solver = LinearSolverKind::direct;
  double cg_tolerance = 1e-12;
  std::uint64_t seed = 1;
  double random_amplitude = 0.1;  ///< half-width of the uniform distribution for random starts

  void validate() const {
    if (!(tol_residual > 0.0) || !(armijo_c > 0.0 && armijo_c < 1.0) || !(backtrack > 0.0 && backtrack < 1.0) ||
        !(cg_tolerance > 0.0) || max_newton < 1 || max_halvings < 1 || !(random_amplitude >= 0.0)) {
      throw InvalidParameter("invalid solver configuration");
    }
  }
};

/// Data side of the a priori energy estimate: lhs <= C(mu, d) * (sum of data terms).
struct EstimateAReport {
  double lhs = 0.0;              ///< |D^d u|^2_L2 + int phi(div u)
  double dev_load = 0.0;         ///< |F^d|^2_L2
  double dev_lifting = 0.0;      ///< |D^d u0|^2_L2
  double conjugate_trace = 0.0;  ///< int phi*(tr F)
  double bulk_lifting = 0.0;     ///< int phi(div u0)
  double constant = 0.0;         ///< explicit C(mu, d)
  double energy_solution = 0.0;  ///< J(u)
  double energy_lifting = 0.0;   ///< J(u0) for the stored lifting u0
  double energy_zero_extension = 0.0;  ///< J of u0 on Dirichlet nodes, zero elsewhere

  double rhs_sum() const { return dev_load + dev_lifting + conjugate_trace + bulk_lifting; }
  double ratio() const { return lhs / (rhs_sum() + 1.0); }
  bool estimate_holds() const { return lhs <= constant * rhs_sum() * (1.0 + 1e-9) + 1e-14; }
  bool competitor_holds() const {
    return energy_solution <= energy_lifting + 1e-12 && energy_solution <= energy_zero_extension + 1e-12;
  }
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<double> energy_history;
  std::vector<double> step_history;  ///< accepted step length per Newton iteration
  EnergyBreakdown final_energy;
  std::optional<EstimateAReport> estimate;
  bool converged = false;
  double tolerance = 0.0;  ///< absolute residual target used for this solve
};

/// Line search failure; keeps the last iterate and the history for diagnosis.
class LineSearchError : public NumericalError {
 public:
  LineSearchError(const std::string& what, DisplacementField iterate, SolveReport report)
      : NumericalError(what), iterate_(std::move(iterate)), report_(std::move(report)) {}
  const DisplacementField& iterate() const { return iterate_; }
  const SolveReport& report() const { return report_; }

 private:
  DisplacementField iterate_;
  SolveReport report_;
};

enum class InitKind { zero, random };
using InitialGuess = std::variant<InitKind, DisplacementField>;

namespace detail {

// Uniform in [-1, 1) from the raw 64-bit stream; identical on every standard library.
inline double signed_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

inline DisplacementField initial_field(const Problem& prob, const SolverConfig& cfg, const InitialGuess& init) {
  if (const auto* field = std::get_if<DisplacementField>(&init)) {
    if (field->num_nodes() != prob.mesh().num_nodes()) throw ConstraintViolation("initial field does not match mesh");
    return apply_dirichlet_lifting(prob, extract_free_values(prob, *field));
  }
  Eigen::VectorXd free = Eigen::VectorXd::Zero(prob.dofs().num_free());
  if (std::get<InitKind>(init) == InitKind::random) {
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < free.size(); ++i) free[i] = cfg.random_amplitude * signed_unit(rng);
  }
  return apply_dirichlet_lifting(prob, free);
}

// Pure traction: three pinned dofs remove the rigid kernel from the Hessian. The
// residual annihilates rigid modes, so the pinned solve solves the full system.
inline std::vector<int> rigid_pins(const Mesh& mesh, const DofMap& dofs) {
  const int a = 0;
  int b = 0;
  double best = -1.0;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const double d = std::hypot(mesh.node(i)[0] - mesh.node(a)[0], mesh.node(i)[1] - mesh.node(a)[1]);
    if (d > best) {
      best = d;
      b = i;
    }
  }
  const double dx = mesh.node(b)[0] - mesh.node(a)[0];
  const double dy = mesh.node(b)[1] - mesh.node(a)[1];
  // rotation about a moves b along (-dy, dx)
  const int component = std::abs(dy) >= std::abs(dx) ? 0 : 1;
  return {dofs.dof(a, 0), dofs.dof(a, 1), dofs.dof(b, component)};
}

inline Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& h, const Eigen::VectorXd& rhs,
                                    const SolverConfig& cfg) {
  Eigen::VectorXd x;
  if (cfg.linear_solver == LinearSolverKind::direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(h);
    if (ldlt.info() != Eigen::Success) throw NumericalError("sparse LDLT factorization failed");
    x = ldlt.solve(rhs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(cfg.cg_tolerance);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * h.rows()));
    cg.compute(h);
    x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) {
      std::ostringstream os;
      os << "conjugate gradient did not converge (" << cg.iterations() << " iterations, error " << cg.error() << ")";
      throw NumericalError(os.str());
    }
  }
  if (!x.allFinite()) throw NumericalError("linear solve produced non-finite values");
  return x;
}

inline Eigen::VectorXd newton_direction(const Problem& prob, const DisplacementField& u, const Eigen::VectorXd& r,
                                        const SolverConfig& cfg) {
  Eigen::SparseMatrix<double> h = hessian(prob, u);
  for (int i = 0; i < h.rows(); ++i) {
    double& diag = h.coeffRef(i, i);
    if (diag < 1e-14) diag = 1e-14;
  }
  const auto& dofs = prob.dofs();
  if (!dofs.has_rigid_modes()) return solve_linear(h, -r, cfg);

  const auto pins = rigid_pins(prob.mesh(), dofs);
  std::vector<int> reduced(static_cast<std::size_t>(h.rows()), 0);
  for (int p : pins) reduced[static_cast<std::size_t>(p)] = -1;
  int next = 0;
  for (auto& idx : reduced) idx = (idx == -1) ? -1 : next++;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(h.nonZeros()));
  for (int col = 0; col < h.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, col); it; ++it) {
      const int rr = reduced[static_cast<std::size_t>(it.row())];
      const int cc = reduced[static_cast<std::size_t>(it.col())];
      if (rr >= 0 && cc >= 0) trip.emplace_back(rr, cc, it.value());
    }
  }
  Eigen::SparseMatrix<double> hr(next, next);
  hr.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs(next);
  for (int i = 0; i < h.rows(); ++i) {
    if (reduced[static_cast<std::size_t>(i)] >= 0) rhs[reduced[static_cast<std::size_t>(i)]] = -r[i];
  }
  const Eigen::VectorXd xr = solve_linear(hr, rhs, cfg);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(h.rows());
  for (int i = 0; i < h.rows(); ++i) {
    if (reduced[static_cast<std::size_t>(i)] >= 0) x[i] = xr[reduced[static_cast<std::size_t>(i)]];
  }
  // all dofs are free here, so free ordering equals dof ordering
  dofs.project_out_rigid(x);
  return x;
}

}  // namespace detail

/// Damped Newton minimization of J with Armijo backtracking on the energy.
inline std::pair<DisplacementField, SolveReport> solve(const Problem& prob, const SolverConfig& cfg = {},
                                                       const InitialGuess& init = InitKind::zero) {
  cfg.validate();
  DisplacementField u = detail::initial_field(prob, cfg, init);
  Eigen::VectorXd free = extract_free_values(prob, u);
  Eigen::VectorXd r = residual(prob, u);
  double energy = evaluate_energy(prob, u).total;

  SolveReport report;
  report.tolerance = cfg.tol_residual * (1.0 + r.norm());
  report.residual_history.push_back(r.norm());
  report.energy_history.push_back(energy);

  for (int it = 0; it < cfg.max_newton && r.norm() > report.tolerance; ++it) {
    const Eigen::VectorXd step = detail::newton_direction(prob, u, r, cfg);
    const double slope = r.dot(step);
    if (!(slope < 0.0)) {
      std::ostringstream os;
      os << "Newton direction is not a descent direction at iteration " << it << " (slope " << slope
         << ", |r| = " << r.norm() << ", J = " << energy << ")";
      throw LineSearchError(os.str(), u, report);
    }
    const double slack = 1e-14 * std::max(1.0, std::abs(energy));
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= cfg.max_halvings; ++k, alpha *= cfg.backtrack) {
      DisplacementField trial = apply_dirichlet_lifting(prob, free + alpha * step);
      const double trial_energy = evaluate_energy(prob, trial).total;
      if (std::isfinite(trial_energy) && trial_energy <= energy + cfg.armijo_c * alpha * slope + slack) {
        u = std::move(trial);
        energy = trial_energy;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "Armijo line search failed after " << cfg.max_halvings << " halvings at iteration " << it
         << " (|r| = " << r.norm() << ", J = " << energy << ", slope " << slope << ")";
      throw LineSearchError(os.str(), u, report);
    }
    free = extract_free_values(prob, u);
    r = residual(prob, u);
    report.iterations = it + 1;
    report.step_history.push_back(alpha);
    report.residual_history.push_back(r.norm());
    report.energy_history.push_back(energy);
  }
  report.converged = r.norm() <= report.tolerance;
  report.final_energy = evaluate_energy(prob, u);
  return {std::move(u), std::move(report)};
}

struct UniquenessReport {
  double max_distance = 0.0;   ///< max pairwise discrete H1 distance
  double solution_norm = 0.0;  ///< discrete H1 norm of the first solution
  bool advisory = false;       ///< phi not strictly convex on samples: uniqueness not implied
  std::vector<SolveReport> reports;

  double relative_distance() const { return max_distance / (1.0 + solution_norm); }
};

/// Solves from n_starts seeded random initial fields and measures how far apart the
/// results are.
inline UniquenessReport uniqueness_probe(const Problem& prob, const SolverConfig& cfg, int n_starts) {
  if (n_starts < 2) throw InvalidParameter("uniqueness_probe needs at least two starts");
  UniquenessReport out;
  out.advisory = !strictly_convex_on_samples(prob.phi());
  std::vector<DisplacementField> solutions;
  for (int k = 0; k < n_starts; ++k) {
    SolverConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(k);
    auto [u, rep] = solve(prob, c, InitKind::random);
    solutions.push_back(std::move(u));
    out.reports.push_back(std::move(rep));
  }
  out.solution_norm = discrete_h1_norm(prob.mesh(), prob.dofs(), solutions.front());
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < solutions.size(); ++j) {
      out.max_distance =
          std::max(out.max_distance, discrete_h1_distance(prob.mesh(), prob.dofs(), solutions[i], solutions[j]));
    }
  }
  return out;
}

}  // namespace orlicz_elastica
