#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "tensor.hpp"

namespace orlicz_elastica {

using Tensor2 = Tensor<kDim>;

/// Nodal P1 vector field stored component-major, matching DofMap numbering.
class DisplacementField {
 public:
  explicit DisplacementField(int num_nodes) : num_nodes_(num_nodes), values_(Eigen::VectorXd::Zero(kDim * num_nodes)) {}
  DisplacementField(int num_nodes, Eigen::VectorXd values) : num_nodes_(num_nodes), values_(std::move(values)) {
    if (values_.size() != kDim * num_nodes_) throw ConstraintViolation("displacement vector has wrong length");
  }

  template <class Fn>
  static DisplacementField interpolate(const Mesh& mesh, Fn&& fn) {
    DisplacementField u(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      const Point p = mesh.node(i);
      const auto v = fn(p[0], p[1]);
      for (int c = 0; c < kDim; ++c) u(i, c) = v[static_cast<std::size_t>(c)];
    }
    return u;
  }

  int num_nodes() const { return num_nodes_; }
  double operator()(int node, int component) const { return values_[component * num_nodes_ + node]; }
  double& operator()(int node, int component) { return values_[component * num_nodes_ + node]; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  bool all_finite() const { return values_.allFinite(); }

 private:
  int num_nodes_;
  Eigen::VectorXd values_;
};

/// Constant-per-element kinematics of a P1 field.
struct StrainSample {
  Tensor2 grad = Tensor2::Zero();  ///< grad(i, j) = d u_i / d x_j
  Tensor2 sym = Tensor2::Zero();
  Tensor2 dev = Tensor2::Zero();
  double div = 0.0;
};

using ElementStrain = std::vector<StrainSample>;

inline Tensor2 element_gradient(const Mesh& mesh, const DisplacementField& u, int e) {
  const auto& t = mesh.element(e);
  const auto& g = mesh.geometry(e);
  Tensor2 grad = Tensor2::Zero();
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < kDim; ++c) {
      const double uc = u(t[static_cast<std::size_t>(k)], c);
      for (int j = 0; j < kDim; ++j) grad(c, j) += uc * g.grad[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    }
  }
  return grad;
}

inline StrainSample strain_from_gradient(const Tensor2& grad) {
  StrainSample s;
  s.grad = grad;
  s.sym = orlicz_elastica::sym<kDim>(grad);
  s.div = grad.trace();
  s.dev = deviatoric<kDim>(s.sym);
  return s;
}

inline ElementStrain compute_strain(const Mesh& mesh, const DisplacementField& u) {
  if (u.num_nodes() != mesh.num_nodes()) throw ConstraintViolation("displacement field does not match mesh");
  if (!u.all_finite()) throw ConstraintViolation("displacement field has non-finite entries");
  ElementStrain out(static_cast<std::size_t>(mesh.num_elements()));
  parallel_for(out.size(), [&](std::size_t e) {
    out[e] = strain_from_gradient(element_gradient(mesh, u, static_cast<int>(e)));
  });
  return out;
}

using AnalyticTensor = std::function<Tensor2(double x, double y)>;

/// Piecewise-constant symmetric load F. When built from an analytic source the source
/// is retained so refinement studies and derivative-based checks can resample it.
class LoadTensor {
 public:
  explicit LoadTensor(std::vector<Tensor2> values, std::optional<AnalyticTensor> source = std::nullopt)
      : values_(std::move(values)), source_(std::move(source)) {
    for (std::size_t e = 0; e < values_.size(); ++e) {
      if (!values_[e].allFinite()) throw ConstraintViolation("load tensor on element " + std::to_string(e) + " is not finite");
      if (asymmetry<kDim>(values_[e]) > 1e-12) {
        throw ConstraintViolation("load tensor on element " + std::to_string(e) + " is not symmetric");
      }
    }
  }

  static LoadTensor zero(const Mesh& mesh) {
    return LoadTensor(std::vector<Tensor2>(static_cast<std::size_t>(mesh.num_elements()), Tensor2::Zero()),
                      AnalyticTensor([](double, double) { return Tensor2::Zero().eval(); }));
  }

  static LoadTensor constant(const Mesh& mesh, const Tensor2& f) {
    return LoadTensor(std::vector<Tensor2>(static_cast<std::size_t>(mesh.num_elements()), f),
                      AnalyticTensor([f](double, double) { return f; }));
  }

  /// Samples the analytic source at element barycenters.
  static LoadTensor sample(const Mesh& mesh, AnalyticTensor source) {
    std::vector<Tensor2> values(static_cast<std::size_t>(mesh.num_elements()));
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const Point c = mesh.barycenter(e);
      values[static_cast<std::size_t>(e)] = source(c[0], c[1]);
    }
    return LoadTensor(std::move(values), std::move(source));
  }

  int num_elements() const { return static_cast<int>(values_.size()); }
  const Tensor2& operator[](int e) const { return values_[static_cast<std::size_t>(e)]; }
  const std::vector<Tensor2>& values() const { return values_; }
  const std::optional<AnalyticTensor>& source() const { return source_; }

 private:
  std::vector<Tensor2> values_;
  std::optional<AnalyticTensor> source_;
};

struct LoadDecomposition {
  std::vector<Tensor2> deviatoric;
  std::vector<double> trace;
};

/// F = F^d + (tr F / d) I per element.
inline LoadDecomposition decompose_load(const LoadTensor& load) {
  LoadDecomposition out;
  out.deviatoric.reserve(load.values().size());
  out.trace.reserve(load.values().size());
  for (const auto& f : load.values()) {
    out.deviatoric.push_back(orlicz_elastica::deviatoric<kDim>(f));
    out.trace.push_back(f.trace());
  }
  return out;
}

/// Element values averaged to nodes with area weights.
inline Eigen::VectorXd element_to_nodes(const Mesh& mesh, const std::vector<double>& element_values) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mesh.num_nodes());
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double a = mesh.geometry(e).area;
    for (int v : mesh.element(e)) {
      sum[v] += a * element_values[static_cast<std::size_t>(e)];
      weight[v] += a;
    }
  }
  return sum.cwiseQuotient(weight);
}

}  // namespace orlicz_elastica
