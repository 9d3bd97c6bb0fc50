#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/rational.hpp>

#include "error.hpp"

namespace orlicz_elastica::exact {

using Rational = boost::rational<long long>;

/// Multivariate polynomial in Dim variables with exact rational coefficients.
template <int Dim>
class Polynomial {
 public:
  using Exponent = std::array<int, Dim>;

  Polynomial() = default;

  static Polynomial monomial(const Exponent& e, Rational c) {
    Polynomial p;
    p.add_term(e, c);
    return p;
  }

  void add_term(const Exponent& e, Rational c) {
    if (c.numerator() == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second.numerator() == 0) terms_.erase(it);
    }
  }

  Polynomial derivative(int var) const {
    Polynomial out;
    for (const auto& [e, c] : terms_) {
      if (e[static_cast<std::size_t>(var)] == 0) continue;
      Exponent f = e;
      f[static_cast<std::size_t>(var)] -= 1;
      out.add_term(f, c * Rational(e[static_cast<std::size_t>(var)]));
    }
    return out;
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(Rational s) {
    if (s.numerator() == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Rational s, Polynomial a) { return a *= s; }

  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponent, Rational>& terms() const { return terms_; }

  /// Largest absolute coefficient.
  Rational max_abs_coefficient() const {
    Rational m(0);
    for (const auto& [e, c] : terms_) m = std::max(m, boost::abs(c));
    return m;
  }

 private:
  std::map<Exponent, Rational> terms_;
};

template <int Dim>
using VectorPolynomial = std::array<Polynomial<Dim>, static_cast<std::size_t>(Dim)>;

inline constexpr int kMaxIdentityDegree = 3;

/// Both sides of div div D^d f = ((d-1)/d) Laplace div f.
template <int Dim>
struct IdentitySides {
  Polynomial<Dim> lhs;
  Polynomial<Dim> rhs;
};

template <int Dim>
IdentitySides<Dim> deviatoric_identity_sides(const VectorPolynomial<Dim>& f) {
  for (const auto& c : f) {
    if (c.degree() > kMaxIdentityDegree) throw InvalidParameter("polynomial_identity_check: degree overflow (max 3)");
  }
  const Rational inv_d(1, Dim);
  Polynomial<Dim> div;
  for (int i = 0; i < Dim; ++i) div += f[static_cast<std::size_t>(i)].derivative(i);

  IdentitySides<Dim> sides;
  for (int i = 0; i < Dim; ++i) {
    for (int j = 0; j < Dim; ++j) {
      // (D^d f)_ij = (d_j f_i + d_i f_j)/2 - delta_ij div f / d
      Polynomial<Dim> entry = Rational(1, 2) * (f[static_cast<std::size_t>(i)].derivative(j) +
                                                f[static_cast<std::size_t>(j)].derivative(i));
      if (i == j) entry -= inv_d * div;
      sides.lhs += entry.derivative(i).derivative(j);
    }
  }
  Polynomial<Dim> laplace_div;
  for (int k = 0; k < Dim; ++k) laplace_div += div.derivative(k).derivative(k);
  sides.rhs = Rational(Dim - 1, Dim) * laplace_div;
  return sides;
}

/// Max absolute coefficient of lhs - rhs, computed in exact arithmetic. Zero for every
/// polynomial field of degree <= 3.
template <int Dim>
double polynomial_identity_check(const VectorPolynomial<Dim>& f) {
  const auto sides = deviatoric_identity_sides(f);
  const Rational r = (sides.lhs - sides.rhs).max_abs_coefficient();
  return boost::rational_cast<double>(r);
}

}  // namespace orlicz_elastica::exact
