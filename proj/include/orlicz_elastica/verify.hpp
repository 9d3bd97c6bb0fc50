#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "energy.hpp"
#include "error.hpp"
#include "mesh.hpp"
#include "nfunction.hpp"
#include "solver.hpp"
#include "tensorfield.hpp"

namespace orlicz_elastica {

// ---------------------------------------------------------------------------
// Scalar P1 machinery
// ---------------------------------------------------------------------------

/// Full P1 Laplace stiffness A_ij = int grad lambda_i . grad lambda_j over all nodes.
inline Eigen::SparseMatrix<double> laplace_stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * 9);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const auto& g = mesh.geometry(e);
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        const auto& gk = g.grad[static_cast<std::size_t>(k)];
        const auto& gl = g.grad[static_cast<std::size_t>(l)];
        trip.emplace_back(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(l)],
                          g.area * (gk[0] * gl[0] + gk[1] * gl[1]));
      }
    }
  }
  Eigen::SparseMatrix<double> a(mesh.num_nodes(), mesh.num_nodes());
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// P1 Poisson solve int grad w . grad v = rhs(v) with w = 0 on every boundary node.
inline Eigen::VectorXd solve_zero_dirichlet_poisson(const Mesh& mesh, const Eigen::VectorXd& rhs) {
  std::vector<int> index(static_cast<std::size_t>(mesh.num_nodes()), -1);
  int n = 0;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (!mesh.on_boundary(i)) index[static_cast<std::size_t>(i)] = n++;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.num_nodes());
  if (n == 0) return out;
  const Eigen::SparseMatrix<double> full = laplace_stiffness(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < full.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(full, col); it; ++it) {
      const int r = index[static_cast<std::size_t>(it.row())];
      const int c = index[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd b(n);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (index[static_cast<std::size_t>(i)] >= 0) b[index[static_cast<std::size_t>(i)]] = rhs[i];
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NumericalError("Poisson factorization failed");
  const Eigen::VectorXd x = ldlt.solve(b);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (index[static_cast<std::size_t>(i)] >= 0) out[i] = x[index[static_cast<std::size_t>(i)]];
  }
  return out;
}

/// Weak form of v -> int div F . grad v for piecewise-constant F: the distributional
/// divergence lives on interior edges as the jump [F] n, paired with the average of
/// grad v across the edge.
inline Eigen::VectorXd load_divergence_functional(const Mesh& mesh, const LoadTensor& load) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (const auto& edge : mesh.edges()) {
    if (edge.second == -1) continue;
    const Eigen::Vector2d n(edge.normal[0], edge.normal[1]);
    const Eigen::Vector2d jump = (load[edge.second] - load[edge.first]) * n;
    for (int side : {edge.first, edge.second}) {
      const auto& t = mesh.element(side);
      const auto& g = mesh.geometry(side);
      for (int k = 0; k < 3; ++k) {
        const auto& gk = g.grad[static_cast<std::size_t>(k)];
        b[t[static_cast<std::size_t>(k)]] += 0.5 * edge.length * (jump[0] * gk[0] + jump[1] * gk[1]);
      }
    }
  }
  return b;
}

/// Particular solution of Laplace g = div div F with zero boundary values.
inline Eigen::VectorXd solve_g(const Mesh& mesh, const LoadTensor& load) {
  if (load.num_elements() != mesh.num_elements()) throw ConstraintViolation("load tensor does not match mesh");
  return solve_zero_dirichlet_poisson(mesh, load_divergence_functional(mesh, load));
}

/// Interior nodes whose hat function is supported at distance >= margin from the boundary.
inline std::vector<int> interior_test_nodes(const Mesh& mesh, double margin) {
  std::vector<double> dist(static_cast<std::size_t>(mesh.num_nodes()));
  for (int i = 0; i < mesh.num_nodes(); ++i) dist[static_cast<std::size_t>(i)] = mesh.distance_to_boundary(mesh.node(i));
  std::vector<bool> ok(static_cast<std::size_t>(mesh.num_nodes()), true);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.on_boundary(i)) ok[static_cast<std::size_t>(i)] = false;
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    double closest = std::numeric_limits<double>::infinity();
    for (int v : t) closest = std::min(closest, dist[static_cast<std::size_t>(v)]);
    if (closest < margin) {
      for (int v : t) ok[static_cast<std::size_t>(v)] = false;
    }
  }
  std::vector<int> out;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (ok[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

/// ||grad lambda_i||_L1 and ||lambda_i||_L1 for every node.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> hat_norms(const Mesh& mesh) {
  Eigen::VectorXd grad_l1 = Eigen::VectorXd::Zero(mesh.num_nodes());
  Eigen::VectorXd l1 = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const auto& g = mesh.geometry(e);
    for (int k = 0; k < 3; ++k) {
      const auto& gk = g.grad[static_cast<std::size_t>(k)];
      grad_l1[t[static_cast<std::size_t>(k)]] += g.area * std::hypot(gk[0], gk[1]);
      l1[t[static_cast<std::size_t>(k)]] += g.area / 3.0;
    }
  }
  return {grad_l1, l1};
}

inline double default_margin(const Mesh& mesh) { return 0.2 * mesh.diameter(); }

// ---------------------------------------------------------------------------
// Harmonicity of the bulk quantity
// ---------------------------------------------------------------------------

struct HarmonicityReport {
  Eigen::VectorXd g_field;
  Eigen::VectorXd chi_field;
  double interior_defect = 0.0;  ///< max_i |int grad chi . grad v_i| / ||grad v_i||_L1
  double interior_laplacian = 0.0;  ///< same pairing scaled by ||v_i||_L1 (diagnostic only)
  double mesh_size = 0.0;
  int test_functions = 0;
};

/// Coefficient 2 mu (d-1)/d of div u in the harmonic bulk quantity.
inline double bulk_shear_coefficient(double mu) { return 2.0 * mu * (kDim - 1) / kDim; }

inline HarmonicityReport harmonicity_check(const Problem& prob, const DisplacementField& u, double margin) {
  const auto& mesh = prob.mesh();
  const auto nodes = interior_test_nodes(mesh, margin);
  if (nodes.empty()) throw InvalidParameter("harmonicity_check: no interior test functions at this margin");
  const ElementStrain strain = compute_strain(mesh, u);
  std::vector<double> div(strain.size());
  for (std::size_t e = 0; e < strain.size(); ++e) div[e] = strain[e].div;
  const Eigen::VectorXd div_nodes = element_to_nodes(mesh, div);

  HarmonicityReport rep;
  rep.g_field = solve_g(mesh, prob.load());
  rep.chi_field.resize(mesh.num_nodes());
  const double c = bulk_shear_coefficient(prob.mu());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    rep.chi_field[i] = c * div_nodes[i] + prob.phi().deriv(div_nodes[i]) - rep.g_field[i];
  }
  const Eigen::VectorXd pairing = laplace_stiffness(mesh) * rep.chi_field;
  const auto [grad_l1, l1] = hat_norms(mesh);
  for (int i : nodes) {
    rep.interior_defect = std::max(rep.interior_defect, std::abs(pairing[i]) / grad_l1[i]);
    rep.interior_laplacian = std::max(rep.interior_laplacian, std::abs(pairing[i]) / l1[i]);
  }
  rep.mesh_size = mesh.max_edge_length();
  rep.test_functions = static_cast<int>(nodes.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Curl equation  mu Laplace omega = d_k (d_2 F_1k - d_1 F_2k)
// ---------------------------------------------------------------------------

struct CurlReport {
  Eigen::VectorXd omega;  ///< d u_1/d x_2 - d u_2/d x_1 averaged to nodes
  double weak_residual = 0.0;
  double mesh_size = 0.0;
  int test_functions = 0;
};

/// Degree-2 interior quadrature on a triangle: barycentric points and weights per unit area.
inline constexpr std::array<std::array<double, 3>, 3> kTriangleQuadrature{{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
}};

inline Point quadrature_point(const Mesh& mesh, int e, const std::array<double, 3>& bary) {
  const auto& t = mesh.element(e);
  Point p{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    p[0] += bary[static_cast<std::size_t>(k)] * mesh.node(t[static_cast<std::size_t>(k)])[0];
    p[1] += bary[static_cast<std::size_t>(k)] * mesh.node(t[static_cast<std::size_t>(k)])[1];
  }
  return p;
}

/// Fourth-order central difference of an analytic tensor field along axis.
inline Tensor2 analytic_partial(const AnalyticTensor& f, double x, double y, int axis, double step) {
  auto at = [&](double s) { return axis == 0 ? f(x + s, y) : f(x, y + s); };
  return (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
}

/// Load functional v -> int sum_k (d_2 F_1k - d_1 F_2k) d_k v for every hat function.
/// `sign` exists only so the golden test can show the opposite convention fails.
inline Eigen::VectorXd curl_load_functional(const Mesh& mesh, const AnalyticTensor& source, double sign = 1.0) {
  const double step = 1e-4 * mesh.diameter();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& g = mesh.geometry(e);
    Eigen::Vector2d w = Eigen::Vector2d::Zero();  // int_K (d_2 F_1k - d_1 F_2k) e_k
    for (const auto& bary : kTriangleQuadrature) {
      const Point p = quadrature_point(mesh, e, bary);
      const Tensor2 dx = analytic_partial(source, p[0], p[1], 0, step);
      const Tensor2 dy = analytic_partial(source, p[0], p[1], 1, step);
      for (int k = 0; k < kDim; ++k) w[k] += g.area / 3.0 * (dy(0, k) - dx(1, k));
    }
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) {
      const auto& gk = g.grad[static_cast<std::size_t>(k)];
      b[t[static_cast<std::size_t>(k)]] += sign * (w[0] * gk[0] + w[1] * gk[1]);
    }
  }
  return b;
}

inline CurlReport curl_check(const Problem& prob, const DisplacementField& u, double margin) {
  const auto& mesh = prob.mesh();
  if (!prob.load().source()) throw InvalidParameter("curl_check requires an analytic load source");
  const auto nodes = interior_test_nodes(mesh, margin);
  if (nodes.empty()) throw InvalidParameter("curl_check: no interior test functions at this margin");
  const ElementStrain strain = compute_strain(mesh, u);
  std::vector<double> omega(strain.size());
  for (std::size_t e = 0; e < strain.size(); ++e) omega[e] = strain[e].grad(0, 1) - strain[e].grad(1, 0);

  CurlReport rep;
  rep.omega = element_to_nodes(mesh, omega);
  const Eigen::VectorXd lhs = prob.mu() * (laplace_stiffness(mesh) * rep.omega);
  const Eigen::VectorXd rhs = curl_load_functional(mesh, *prob.load().source());
  const auto [grad_l1, l1] = hat_norms(mesh);
  for (int i : nodes) rep.weak_residual = std::max(rep.weak_residual, std::abs(lhs[i] - rhs[i]) / grad_l1[i]);
  rep.mesh_size = mesh.max_edge_length();
  rep.test_functions = static_cast<int>(nodes.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Energy estimate ledger
// ---------------------------------------------------------------------------

/// Explicit constant in |D^d u|^2 + int phi(div u) <= C (|F^d|^2 + |D^d u0|^2 +
/// int phi*(tr F) + int phi(div u0)), valid for d >= 2; derivation in README.
inline double estimate_constant(double mu) {
  return std::max({1.0 / mu + 1.0, 2.0 * mu + 1.0, 4.0}) / std::min(mu, 1.0);
}

inline EstimateAReport estimate_A(const Problem& prob, const DisplacementField& u) {
  const auto& mesh = prob.mesh();
  const ElementStrain su = compute_strain(mesh, u);
  const ElementStrain s0 = compute_strain(mesh, prob.u0());
  const LoadDecomposition dec = decompose_load(prob.load());
  KahanSum lhs, dev_load, dev_lift, conj, bulk_lift;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto i = static_cast<std::size_t>(e);
    const double a = mesh.geometry(e).area;
    lhs += a * (su[i].dev.squaredNorm() + prob.phi().value(su[i].div));
    dev_load += a * dec.deviatoric[i].squaredNorm();
    dev_lift += a * s0[i].dev.squaredNorm();
    conj += a * conjugate(prob.phi(), dec.trace[i]);
    bulk_lift += a * prob.phi().value(s0[i].div);
  }
  EstimateAReport rep;
  rep.lhs = lhs.value();
  rep.dev_load = dev_load.value();
  rep.dev_lifting = dev_lift.value();
  rep.conjugate_trace = conj.value();
  rep.bulk_lifting = bulk_lift.value();
  rep.constant = estimate_constant(prob.mu());
  rep.energy_solution = evaluate_energy(prob, u).total;
  rep.energy_lifting = evaluate_energy(prob, prob.u0()).total;
  rep.energy_zero_extension =
      evaluate_energy(prob, apply_dirichlet_lifting(prob, Eigen::VectorXd::Zero(prob.dofs().num_free()))).total;
  return rep;
}

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

using VectorFn = std::function<std::array<double, 2>(double, double)>;
using GradientFn = std::function<Tensor2(double, double)>;

struct ManufacturedCase {
  std::string id;
  std::string description;
  double mu = 1.0;
  Family family = Family::quadratic;
  NFunctionParams params;
  SideTags tags;
  VectorFn exact;
  GradientFn exact_gradient;  ///< (i, j) = d u*_i / d x_j
  bool default_ladder = false;  ///< part of the default verification suite

  NFunction phi() const { return make_family(family, params); }

  /// F = 2 mu D^d u* + phi'(div u*) I, so u* satisfies the weak form pointwise.
  AnalyticTensor load() const {
    return [mu = mu, phi = phi(), grad = exact_gradient](double x, double y) {
      const StrainSample s = strain_from_gradient(grad(x, y));
      return Tensor2(2.0 * mu * s.dev + phi.deriv(s.div) * Tensor2::Identity());
    };
  }
};

inline const std::vector<ManufacturedCase>& case_registry() {
  using std::numbers::pi;
  static const std::vector<ManufacturedCase> cases = [] {
    std::vector<ManufacturedCase> c;
    {
      ManufacturedCase m;
      m.id = "quadratic_hooke";
      m.default_ladder = true;
      m.description = "linear Hooke law (phi = s^2), u* = (sin pi x sin pi y, 0), clamped unit square";
      m.family = Family::quadratic;
      m.params.lambda_tilde = 1.0;
      m.exact = [](double x, double y) { return std::array<double, 2>{std::sin(pi * x) * std::sin(pi * y), 0.0}; };
      m.exact_gradient = [](double x, double y) {
        Tensor2 g = Tensor2::Zero();
        g(0, 0) = pi * std::cos(pi * x) * std::sin(pi * y);
        g(0, 1) = pi * std::sin(pi * x) * std::cos(pi * y);
        return g;
      };
      c.push_back(std::move(m));
    }
    {
      ManufacturedCase m;
      m.id = "mms_p4";
      m.default_ladder = true;
      m.description = "power_shifted(kappa=1, p=4), u* = (sin pi x sin pi y, x(1-x)y(1-y)), clamped unit square";
      m.family = Family::power_shifted;
      m.params.kappa = 1.0;
      m.params.p = 4.0;
      m.exact = [](double x, double y) {
        return std::array<double, 2>{std::sin(pi * x) * std::sin(pi * y), x * (1 - x) * y * (1 - y)};
      };
      m.exact_gradient = [](double x, double y) {
        Tensor2 g;
        g(0, 0) = pi * std::cos(pi * x) * std::sin(pi * y);
        g(0, 1) = pi * std::sin(pi * x) * std::cos(pi * y);
        g(1, 0) = (1 - 2 * x) * y * (1 - y);
        g(1, 1) = x * (1 - x) * (1 - 2 * y);
        return g;
      };
      c.push_back(std::move(m));
    }
    {
      ManufacturedCase m;
      m.id = "mixed_log";
      m.description = "log_corrected(kappa=1, p=3, beta=1), clamped left/bottom, traction right/top";
      m.family = Family::log_corrected;
      m.params.kappa = 1.0;
      m.params.p = 3.0;
      m.params.beta = 1.0;
      m.tags = {BoundaryTag::dirichlet, BoundaryTag::neumann, BoundaryTag::dirichlet, BoundaryTag::neumann};
      m.exact = [](double x, double y) {
        return std::array<double, 2>{0.5 * std::sin(pi * x) * std::cos(pi * y), 0.25 * x * x * y};
      };
      m.exact_gradient = [](double x, double y) {
        Tensor2 g;
        g(0, 0) = 0.5 * pi * std::cos(pi * x) * std::cos(pi * y);
        g(0, 1) = -0.5 * pi * std::sin(pi * x) * std::sin(pi * y);
        g(1, 0) = 0.5 * x * y;
        g(1, 1) = 0.25 * x * x;
        return g;
      };
      c.push_back(std::move(m));
    }
    {
      ManufacturedCase m;
      m.id = "rigid_rotation";
      m.description = "u* = (-y, x) on a traction-free unit square (pure Neumann, zero load)";
      m.family = Family::power_shifted;
      m.params.kappa = 1.0;
      m.params.p = 4.0;
      m.tags = SideTags::all(BoundaryTag::neumann);
      m.exact = [](double x, double y) { return std::array<double, 2>{-y, x}; };
      m.exact_gradient = [](double, double) {
        Tensor2 g;
        g << 0.0, -1.0, 1.0, 0.0;
        return g;
      };
      c.push_back(std::move(m));
    }
    return c;
  }();
  return cases;
}

inline const ManufacturedCase& find_case(const std::string& id) {
  for (const auto& c : case_registry()) {
    if (c.id == id) return c;
  }
  throw InvalidParameter("unknown manufactured case '" + id + "'");
}

/// Problem on an n x n grid of the unit square together with its exact solution.
inline std::pair<Problem, ManufacturedCase> manufactured(const ManufacturedCase& mc, int n) {
  Mesh mesh = generate_rectangle(n, n, Extent{}, mc.tags);
  LoadTensor load = LoadTensor::sample(mesh, mc.load());
  DisplacementField u0 = DisplacementField::interpolate(mesh, mc.exact);
  Problem prob(std::move(mesh), mc.mu, mc.phi(), std::move(load), std::move(u0));
  return {std::move(prob), mc};
}

inline std::pair<Problem, ManufacturedCase> manufactured(const std::string& case_id, int n) {
  return manufactured(find_case(case_id), n);
}

/// H1 error against the exact solution with the degree-2 rule; pure traction problems
/// compare against the rigid-projected interpolant instead.
inline double h1_error(const Problem& prob, const DisplacementField& u, const ManufacturedCase& mc) {
  const auto& mesh = prob.mesh();
  if (prob.dofs().has_rigid_modes()) {
    DisplacementField exact = DisplacementField::interpolate(mesh, mc.exact);
    prob.dofs().project_out_rigid(exact.values());
    return discrete_h1_distance(mesh, prob.dofs(), u, exact);
  }
  KahanSum s;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const Tensor2 grad_h = element_gradient(mesh, u, e);
    for (const auto& bary : kTriangleQuadrature) {
      const Point p = quadrature_point(mesh, e, bary);
      const auto ue = mc.exact(p[0], p[1]);
      const Tensor2 ge = mc.exact_gradient(p[0], p[1]);
      double sq = (grad_h - ge).squaredNorm();
      for (int c = 0; c < kDim; ++c) {
        double uh = 0.0;
        for (int k = 0; k < 3; ++k) uh += bary[static_cast<std::size_t>(k)] * u(t[static_cast<std::size_t>(k)], c);
        sq += (uh - ue[static_cast<std::size_t>(c)]) * (uh - ue[static_cast<std::size_t>(c)]);
      }
      s += mesh.geometry(e).area / 3.0 * sq;
    }
  }
  return std::sqrt(s.value());
}

// ---------------------------------------------------------------------------
// Refinement ladders
// ---------------------------------------------------------------------------

/// Least-squares slope of log(value) against log(h).
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& value) {
  if (h.size() != value.size() || h.size() < 2) throw InvalidParameter("fitted_order needs >= 2 matching samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]);
    my += std::log(value[i]);
  }
  mx /= static_cast<double>(h.size());
  my /= static_cast<double>(h.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(value[i]) - my);
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  return sxy / sxx;
}

inline bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

/// Minimum fitted order for every decay check on a ladder.
inline constexpr double kMinimumOrder = 0.9;
/// Largest tolerated growth slope of log(estimate ratio) against log(1/h).
inline constexpr double kMaxRatioGrowth = 0.05;

struct LadderLevel {
  int n = 0;
  double h = 0.0;
  int iterations = 0;
  bool converged = false;
  double h1_error = std::numeric_limits<double>::quiet_NaN();
  double harmonic_defect = std::numeric_limits<double>::quiet_NaN();
  double curl_residual = std::numeric_limits<double>::quiet_NaN();
  EstimateAReport estimate;
};

struct LadderResult {
  std::string case_id;
  std::vector<LadderLevel> levels;

  /// Levels [first, first + count).
  LadderResult slice(std::size_t first, std::size_t count) const {
    if (first + count > levels.size()) throw InvalidParameter("ladder slice out of range");
    LadderResult out;
    out.case_id = case_id;
    out.levels.assign(levels.begin() + static_cast<std::ptrdiff_t>(first),
                      levels.begin() + static_cast<std::ptrdiff_t>(first + count));
    return out;
  }

  std::vector<double> h() const { return column([](const LadderLevel& l) { return l.h; }); }
  std::vector<double> h1_errors() const { return column([](const LadderLevel& l) { return l.h1_error; }); }
  std::vector<double> harmonic_defects() const { return column([](const LadderLevel& l) { return l.harmonic_defect; }); }
  std::vector<double> curl_residuals() const { return column([](const LadderLevel& l) { return l.curl_residual; }); }
  std::vector<double> estimate_ratios() const { return column([](const LadderLevel& l) { return l.estimate.ratio(); }); }

  bool all_converged() const {
    return std::all_of(levels.begin(), levels.end(), [](const LadderLevel& l) { return l.converged; });
  }
  double h1_order() const { return fitted_order(h(), h1_errors()); }
  double harmonic_order() const { return fitted_order(h(), harmonic_defects()); }
  double curl_order() const { return fitted_order(h(), curl_residuals()); }
  /// Slope of log(ratio + tiny) against log(1/h); positive means growth under refinement.
  double estimate_growth() const {
    std::vector<double> r = estimate_ratios();
    for (double& v : r) v += std::numeric_limits<double>::min();
    return -fitted_order(h(), r);
  }

  bool mms_pass() const { return decays(h1_errors()); }
  bool harmonic_pass() const { return decays(harmonic_defects()); }
  bool curl_pass() const { return decays(curl_residuals()); }
  bool estimate_pass() const {
    return all_converged() &&
           std::all_of(levels.begin(), levels.end(),
                       [](const LadderLevel& l) { return l.estimate.estimate_holds() && l.estimate.competitor_holds(); }) &&
           estimate_growth() <= kMaxRatioGrowth;
  }

 private:
  template <class F>
  std::vector<double> column(F f) const {
    std::vector<double> out;
    for (const auto& l : levels) out.push_back(f(l));
    return out;
  }
  bool decays(const std::vector<double>& v) const {
    return all_converged() && non_increasing(v) && fitted_order(h(), v) >= kMinimumOrder;
  }
};

/// A family of problems indexed by grid resolution, optionally with an exact solution.
struct LadderSpec {
  std::string id;
  std::function<Problem(int n)> build;
  std::optional<ManufacturedCase> exact;
};

inline LadderSpec ladder_spec(const ManufacturedCase& mc) {
  return {mc.id, [mc](int n) { return manufactured(mc, n).first; }, mc};
}

struct LadderOptions {
  int levels = 4;
  int coarsest = 8;
  bool h1 = true;
  bool harmonic = true;
  bool curl = true;
  bool estimate = true;
  double margin_fraction = 0.2;  ///< interior margin as a fraction of diam(Omega)
  SolverConfig solver;
};

/// Uniform refinement n = coarsest * 2^k, k < levels, solving and checking each level.
inline LadderResult run_ladder(const LadderSpec& spec, const LadderOptions& opt = {}) {
  if (opt.levels < 2) throw InvalidParameter("a ladder needs at least two levels");
  if (opt.coarsest < 1) throw InvalidParameter("coarsest grid must be >= 1");
  if (opt.h1 && !spec.exact) throw InvalidParameter("H1 convergence needs a manufactured case with an exact solution");
  LadderResult out;
  out.case_id = spec.id;
  for (int k = 0; k < opt.levels; ++k) {
    const int n = opt.coarsest << k;
    const Problem prob = spec.build(n);
    auto [u, rep] = solve(prob, opt.solver);
    LadderLevel lvl;
    lvl.n = n;
    lvl.h = 1.0 / n;
    lvl.iterations = rep.iterations;
    lvl.converged = rep.converged;
    if (opt.h1) lvl.h1_error = h1_error(prob, u, *spec.exact);
    const double margin = opt.margin_fraction * prob.mesh().diameter();
    // Coarse grids may have no hat function far enough inside; those levels stay NaN.
    const bool interior = !interior_test_nodes(prob.mesh(), margin).empty();
    if (opt.harmonic && interior) lvl.harmonic_defect = harmonicity_check(prob, u, margin).interior_defect;
    if (opt.curl && interior) lvl.curl_residual = curl_check(prob, u, margin).weak_residual;
    if (opt.estimate) lvl.estimate = estimate_A(prob, u);
    out.levels.push_back(lvl);
  }
  return out;
}

inline LadderResult run_ladder(const ManufacturedCase& mc, const LadderOptions& opt = {}) {
  return run_ladder(ladder_spec(mc), opt);
}

}  // namespace orlicz_elastica
