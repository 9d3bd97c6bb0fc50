#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "error.hpp"
#include "mesh.hpp"
#include "nfunction.hpp"
#include "parallel.hpp"
#include "tensorfield.hpp"

namespace orlicz_elastica {

/// Boundary value problem for the energy
///
///   J(u) = int mu |D^d u|^2 + phi(div u) - F : D u
///
/// over fields equal to u0 on the Dirichlet nodes. The shear potential is fixed to
/// mu s^2; only the bulk potential phi is nonlinear.
class Problem {
 public:
  Problem(Mesh mesh, double mu, NFunction phi, LoadTensor load, DisplacementField u0)
      : mesh_(std::move(mesh)),
        dofs_(mesh_),
        mu_(mu),
        phi_(std::move(phi)),
        load_(std::move(load)),
        u0_(std::move(u0)) {
    if (!(std::isfinite(mu_) && mu_ > 0.0)) throw InvalidParameter("shear modulus mu must be > 0");
    if (load_.num_elements() != mesh_.num_elements()) throw ConstraintViolation("load tensor does not match mesh");
    if (u0_.num_nodes() != mesh_.num_nodes()) throw ConstraintViolation("Dirichlet data does not match mesh");
    if (!u0_.all_finite()) throw ConstraintViolation("Dirichlet data has non-finite entries");
    if (!check_convexity(phi_)) throw InvalidParameter("bulk potential " + phi_.describe() + " failed the convexity check");
    if (dofs_.has_rigid_modes()) u0_.values().setZero();
  }

  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  double mu() const { return mu_; }
  const NFunction& phi() const { return phi_; }
  const LoadTensor& load() const { return load_; }
  const DisplacementField& u0() const { return u0_; }

 private:
  Mesh mesh_;
  DofMap dofs_;
  double mu_;
  NFunction phi_;
  LoadTensor load_;
  DisplacementField u0_;
};

struct EnergyBreakdown {
  double shear = 0.0;  ///< int mu |D^d u|^2
  double bulk = 0.0;   ///< int phi(div u)
  double load = 0.0;   ///< int F : D u
  double total = 0.0;  ///< shear + bulk - load
};

/// Dirichlet dofs of u must match u0 to 1e-10.
inline void check_dirichlet(const Problem& prob, const DisplacementField& u) {
  if (u.num_nodes() != prob.mesh().num_nodes()) throw ConstraintViolation("displacement field does not match mesh");
  const auto& dofs = prob.dofs();
  for (int d = 0; d < dofs.num_dofs(); ++d) {
    if (!dofs.is_dirichlet(d)) continue;
    const double gap = std::abs(u.values()[d] - prob.u0().values()[d]);
    if (!(gap <= 1e-10)) {
      std::ostringstream os;
      os << "Dirichlet constraint violated at dof " << d << " (|u - u0| = " << gap << ")";
      throw ConstraintViolation(os.str());
    }
  }
}

inline EnergyBreakdown evaluate_energy(const Problem& prob, const DisplacementField& u) {
  check_dirichlet(prob, u);
  const auto& mesh = prob.mesh();
  const auto n = static_cast<std::size_t>(mesh.num_elements());
  std::vector<std::array<double, 3>> parts(n);
  parallel_for(n, [&](std::size_t e) {
    const int el = static_cast<int>(e);
    const StrainSample s = strain_from_gradient(element_gradient(mesh, u, el));
    const double area = mesh.geometry(el).area;
    parts[e] = {area * prob.mu() * s.dev.squaredNorm(), area * prob.phi().value(s.div),
                area * frobenius<kDim>(prob.load()[el], s.sym)};
  });
  KahanSum shear, bulk, load;
  for (const auto& p : parts) {
    shear += p[0];
    bulk += p[1];
    load += p[2];
  }
  EnergyBreakdown out{shear.value(), bulk.value(), load.value(), 0.0};
  out.total = out.shear + out.bulk - out.load;
  return out;
}

/// First variation paired with every nodal basis function, over all dofs:
///   g[(node, c)] = sum_K |K| (sigma_K grad lambda_node)_c,
///   sigma = 2 mu D^d u + phi'(div u) I - F.
inline Eigen::VectorXd energy_gradient(const Problem& prob, const DisplacementField& u) {
  const auto& mesh = prob.mesh();
  const auto n = static_cast<std::size_t>(mesh.num_elements());
  std::vector<std::array<double, 3 * kDim>> local(n);
  parallel_for(n, [&](std::size_t e) {
    const int el = static_cast<int>(e);
    const StrainSample s = strain_from_gradient(element_gradient(mesh, u, el));
    const Tensor2 sigma =
        2.0 * prob.mu() * s.dev + prob.phi().deriv(s.div) * Tensor2::Identity() - prob.load()[el];
    const auto& g = mesh.geometry(el);
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d grad_k(g.grad[static_cast<std::size_t>(k)][0], g.grad[static_cast<std::size_t>(k)][1]);
      const Eigen::Vector2d t = g.area * (sigma * grad_k);
      for (int c = 0; c < kDim; ++c) local[e][static_cast<std::size_t>(k * kDim + c)] = t[c];
    }
  });
  const auto& dofs = prob.dofs();
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dofs.num_dofs());
  for (std::size_t e = 0; e < n; ++e) {
    const auto& t = mesh.element(static_cast<int>(e));
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < kDim; ++c) full[dofs.dof(t[static_cast<std::size_t>(k)], c)] += local[e][static_cast<std::size_t>(k * kDim + c)];
    }
  }
  return full;
}

/// Weak-form residual restricted to free dofs; orthogonalized against rigid modes when
/// the problem is pure traction.
inline Eigen::VectorXd residual(const Problem& prob, const DisplacementField& u) {
  check_dirichlet(prob, u);
  Eigen::VectorXd full = energy_gradient(prob, u);
  const auto& dofs = prob.dofs();
  dofs.project_dual_out_rigid(full);
  Eigen::VectorXd r(dofs.num_free());
  for (int i = 0; i < dofs.num_free(); ++i) r[i] = full[dofs.free_dofs()[static_cast<std::size_t>(i)]];
  return r;
}

/// Element stiffness of the second variation,
///   H[v, w] = int 2 mu D^d v : D^d w + phi''(div u) div v div w,
/// local index k * d + c for basis function lambda_k e_c.
inline Eigen::Matrix<double, 3 * kDim, 3 * kDim> element_hessian(const ElementGeometry& g, double mu, double phi2) {
  Eigen::Matrix<double, 3 * kDim, 3 * kDim> ke;
  for (int k = 0; k < 3; ++k) {
    const auto& gk = g.grad[static_cast<std::size_t>(k)];
    for (int l = 0; l < 3; ++l) {
      const auto& gl = g.grad[static_cast<std::size_t>(l)];
      const double dot = gk[0] * gl[0] + gk[1] * gl[1];
      for (int a = 0; a < kDim; ++a) {
        for (int b = 0; b < kDim; ++b) {
          const double ga = gk[static_cast<std::size_t>(a)] * gl[static_cast<std::size_t>(b)];
          const double sym_part = 0.5 * ((a == b ? dot : 0.0) + gk[static_cast<std::size_t>(b)] * gl[static_cast<std::size_t>(a)]);
          ke(k * kDim + a, l * kDim + b) = g.area * (2.0 * mu * (sym_part - ga / kDim) + phi2 * ga);
        }
      }
    }
  }
  return ke;
}

/// Second variation on the free dofs in compressed column storage.
inline Eigen::SparseMatrix<double> hessian(const Problem& prob, const DisplacementField& u) {
  check_dirichlet(prob, u);
  const auto& mesh = prob.mesh();
  const auto& dofs = prob.dofs();
  const auto n = static_cast<std::size_t>(mesh.num_elements());
  std::vector<Eigen::Matrix<double, 3 * kDim, 3 * kDim>> local(n);
  parallel_for(n, [&](std::size_t e) {
    const int el = static_cast<int>(e);
    const double div = element_gradient(mesh, u, el).trace();
    local[e] = element_hessian(mesh.geometry(el), prob.mu(), prob.phi().deriv2(div));
  });
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * 36);
  for (std::size_t e = 0; e < n; ++e) {
    const auto& t = mesh.element(static_cast<int>(e));
    for (int k = 0; k < 3; ++k) {
      for (int a = 0; a < kDim; ++a) {
        const int row = dofs.free_index(dofs.dof(t[static_cast<std::size_t>(k)], a));
        if (row < 0) continue;
        for (int l = 0; l < 3; ++l) {
          for (int b = 0; b < kDim; ++b) {
            const int col = dofs.free_index(dofs.dof(t[static_cast<std::size_t>(l)], b));
            if (col < 0) continue;
            triplets.emplace_back(row, col, local[e](k * kDim + a, l * kDim + b));
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> h(dofs.num_free(), dofs.num_free());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

/// Full field from free-dof values: u0 on Dirichlet dofs; rigid modes projected out
/// for pure traction problems.
inline DisplacementField apply_dirichlet_lifting(const Problem& prob, const Eigen::VectorXd& free_values) {
  const auto& dofs = prob.dofs();
  if (free_values.size() != dofs.num_free()) throw ConstraintViolation("free value vector has wrong length");
  DisplacementField u = prob.u0();
  for (int i = 0; i < dofs.num_free(); ++i) u.values()[dofs.free_dofs()[static_cast<std::size_t>(i)]] = free_values[i];
  dofs.project_out_rigid(u.values());
  return u;
}

inline Eigen::VectorXd extract_free_values(const Problem& prob, const DisplacementField& u) {
  const auto& dofs = prob.dofs();
  Eigen::VectorXd out(dofs.num_free());
  for (int i = 0; i < dofs.num_free(); ++i) out[i] = u.values()[dofs.free_dofs()[static_cast<std::size_t>(i)]];
  return out;
}

/// sqrt( sum_K |K| |grad w|^2 + (w, w)_lumped ) for the difference w of two P1 fields.
inline double discrete_h1_distance(const Mesh& mesh, const DofMap& dofs, const DisplacementField& a,
                                   const DisplacementField& b) {
  DisplacementField w(a.num_nodes(), a.values() - b.values());
  KahanSum s;
  for (int e = 0; e < mesh.num_elements(); ++e) s += mesh.geometry(e).area * element_gradient(mesh, w, e).squaredNorm();
  s += dofs.l2_inner(w.values(), w.values());
  return std::sqrt(s.value());
}

inline double discrete_h1_norm(const Mesh& mesh, const DofMap& dofs, const DisplacementField& a) {
  return discrete_h1_distance(mesh, dofs, a, DisplacementField(a.num_nodes()));
}

}  // namespace orlicz_elastica
