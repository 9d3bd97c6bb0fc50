#pragma once

#include <Eigen/Dense>

namespace orlicz_elastica {

/// d x d tensors. The algebra below is written for any dimension; the mesh layer fixes d = 2.
template <int Dim>
using Tensor = Eigen::Matrix<double, Dim, Dim>;

template <int Dim>
Tensor<Dim> sym(const Tensor<Dim>& t) {
  return 0.5 * (t + t.transpose());
}

/// Trace-free part t - (tr t / d) I.
template <int Dim>
Tensor<Dim> deviatoric(const Tensor<Dim>& t) {
  return t - (t.trace() / Dim) * Tensor<Dim>::Identity();
}

/// Frobenius product a : b.
template <int Dim>
double frobenius(const Tensor<Dim>& a, const Tensor<Dim>& b) {
  return (a.array() * b.array()).sum();
}

template <int Dim>
double asymmetry(const Tensor<Dim>& t) {
  return (t - t.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace orlicz_elastica
