#pragma once

// Independent reference computations used by the tests. Nothing here calls into the
// library's numerical kernels; only plain geometry accessors of Mesh are used.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "orlicz_elastica/mesh.hpp"
#include "orlicz_elastica/tensorfield.hpp"

namespace oracle {

namespace oe = orlicz_elastica;

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// sup_s (s t - phi(s)) by brute force over a uniform grid on [lo, hi] with local
/// parabolic refinement of the best sample.
inline double grid_conjugate(const std::function<double(double)>& phi, double t, double lo, double hi, int n) {
  double best = -INFINITY;
  int arg = 0;
  const double ds = (hi - lo) / n;
  for (int i = 0; i <= n; ++i) {
    const double s = lo + i * ds;
    const double v = s * t - phi(s);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (arg > 0 && arg < n) {
    const double s0 = lo + arg * ds;
    const double fm = (s0 - ds) * t - phi(s0 - ds), f0 = best, fp = (s0 + ds) * t - phi(s0 + ds);
    const double denom = fm - 2.0 * f0 + fp;
    if (denom < 0.0) best = f0 - 0.125 * (fp - fm) * (fp - fm) / denom;
  }
  return best;
}

/// Element matrices from the textbook Voigt form: strain (e_xx, e_yy, gamma_xy) = B u_e,
/// energy density mu |D^d u|^2 + lt (div u)^2 written as 1/2 e^T C e.
struct VoigtHooke {
  double mu;
  double lambda_tilde;

  Eigen::Matrix3d c() const {
    // mu (exx^2 + eyy^2 + gamma^2/2) + (lt - mu/2)(exx + eyy)^2
    const double l = lambda_tilde - 0.5 * mu;
    Eigen::Matrix3d m;
    m << 2.0 * mu + 2.0 * l, 2.0 * l, 0.0,  //
        2.0 * l, 2.0 * mu + 2.0 * l, 0.0,   //
        0.0, 0.0, mu;
    return m;
  }

  /// Local dofs ordered (u_x0, u_y0, u_x1, u_y1, u_x2, u_y2).
  static Eigen::Matrix<double, 3, 6> b(const oe::Mesh& mesh, int e) {
    const auto& t = mesh.element(e);
    const auto& p0 = mesh.node(t[0]);
    const auto& p1 = mesh.node(t[1]);
    const auto& p2 = mesh.node(t[2]);
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double bx[3] = {(p1[1] - p2[1]) / det, (p2[1] - p0[1]) / det, (p0[1] - p1[1]) / det};
    const double by[3] = {(p2[0] - p1[0]) / det, (p0[0] - p2[0]) / det, (p1[0] - p0[0]) / det};
    Eigen::Matrix<double, 3, 6> m = Eigen::Matrix<double, 3, 6>::Zero();
    for (int k = 0; k < 3; ++k) {
      m(0, 2 * k) = bx[k];
      m(1, 2 * k + 1) = by[k];
      m(2, 2 * k) = by[k];
      m(2, 2 * k + 1) = bx[k];
    }
    return m;
  }

  static double area(const oe::Mesh& mesh, int e) {
    const auto& t = mesh.element(e);
    const auto& p0 = mesh.node(t[0]);
    const auto& p1 = mesh.node(t[1]);
    const auto& p2 = mesh.node(t[2]);
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }

  /// Dense global stiffness in component-major numbering (c * N + node).
  Eigen::MatrixXd stiffness(const oe::Mesh& mesh) const {
    const int n = mesh.num_nodes();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const Eigen::Matrix3d cm = c();
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto bm = b(mesh, e);
      const Eigen::Matrix<double, 6, 6> ke = area(mesh, e) * bm.transpose() * cm * bm;
      const auto& t = mesh.element(e);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) k((i % 2) * n + t[i / 2], (j % 2) * n + t[j / 2]) += ke(i, j);
      }
    }
    return k;
  }

  /// int F : D v for every basis field, same numbering.
  static Eigen::VectorXd load(const oe::Mesh& mesh, const std::vector<oe::Tensor2>& f) {
    const int n = mesh.num_nodes();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const Eigen::Vector3d fv(f[e](0, 0), f[e](1, 1), f[e](0, 1));
      const Eigen::Matrix<double, 6, 1> fe = area(mesh, e) * b(mesh, e).transpose() * fv;
      const auto& t = mesh.element(e);
      for (int i = 0; i < 6; ++i) out((i % 2) * n + t[i / 2]) += fe(i);
    }
    return out;
  }
};

/// Minimizer of 1/2 u^T K u - f^T u with u fixed on the `fixed` dofs, by dense Cholesky.
inline Eigen::VectorXd constrained_quadratic_minimizer(const Eigen::MatrixXd& k, const Eigen::VectorXd& f,
                                                       const std::vector<bool>& fixed, const Eigen::VectorXd& u0) {
  std::vector<int> free;
  for (int i = 0; i < static_cast<int>(fixed.size()); ++i) {
    if (!fixed[i]) free.push_back(i);
  }
  const int m = static_cast<int>(free.size());
  Eigen::MatrixXd kff(m, m);
  Eigen::VectorXd rhs(m);
  for (int a = 0; a < m; ++a) {
    rhs[a] = f[free[a]];
    for (int j = 0; j < k.cols(); ++j) {
      if (fixed[j]) rhs[a] -= k(free[a], j) * u0[j];
    }
    for (int b = 0; b < m; ++b) kff(a, b) = k(free[a], free[b]);
  }
  const Eigen::VectorXd x = kff.llt().solve(rhs);
  Eigen::VectorXd u = u0;
  for (int a = 0; a < m; ++a) u[free[a]] = x[a];
  return u;
}

/// 5-point finite differences for Laplace w = rhs on the unit square grid with spacing
/// 1/n and w = 0 on the boundary. Returns values at the (n+1)^2 grid points, row-major in y.
inline Eigen::VectorXd fd_poisson(int n, const std::function<double(double, double)>& rhs) {
  const int m = n - 1;
  const double h = 1.0 / n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m * m, m * m);
  Eigen::VectorXd b(m * m);
  auto id = [m](int i, int j) { return (j - 1) * m + (i - 1); };
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      const int r = id(i, j);
      a(r, r) = -4.0 / (h * h);
      if (i > 1) a(r, id(i - 1, j)) = 1.0 / (h * h);
      if (i < n - 1) a(r, id(i + 1, j)) = 1.0 / (h * h);
      if (j > 1) a(r, id(i, j - 1)) = 1.0 / (h * h);
      if (j < n - 1) a(r, id(i, j + 1)) = 1.0 / (h * h);
      b[r] = rhs(i * h, j * h);
    }
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  Eigen::VectorXd out = Eigen::VectorXd::Zero((n + 1) * (n + 1));
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) out[j * (n + 1) + i] = x[id(i, j)];
  }
  return out;
}

/// Least-squares slope of log(err) against log(eps).
inline double loglog_slope(const std::vector<double>& eps, const std::vector<double>& err) {
  double mx = 0, my = 0;
  const auto n = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    mx += std::log(eps[i]) / n;
    my += std::log(err[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sxy += (std::log(eps[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(eps[i]) - mx) * (std::log(eps[i]) - mx);
  }
  return sxy / sxx;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double amplitude) {
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace oracle
