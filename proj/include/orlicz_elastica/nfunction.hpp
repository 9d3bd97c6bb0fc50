#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "error.hpp"

namespace orlicz_elastica {

enum class Family { power_kappa, power_shifted, log_corrected, quadratic, custom };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::power_kappa: return "power_kappa";
    case Family::power_shifted: return "power_shifted";
    case Family::log_corrected: return "log_corrected";
    case Family::quadratic: return "quadratic";
    case Family::custom: return "custom";
  }
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  for (Family f : {Family::power_kappa, Family::power_shifted, Family::log_corrected, Family::quadratic,
                   Family::custom}) {
    if (family_name(f) == name) return f;
  }
  throw InvalidParameter("unknown N-function family '" + std::string(name) + "'");
}

struct NFunctionParams {
  double kappa = 0.0;
  double p = 2.0;
  double beta = 0.0;
  double lambda_tilde = 1.0;
};

/// Smallest argument at which deriv2 is evaluated; p < 2 families have a singular
/// second derivative at the origin.
inline constexpr double kDeriv2Floor = 1e-12;

/// Even N-function phi together with phi' and phi''. The profile callables act on
/// t >= 0; value and deriv2 are extended evenly, deriv oddly. Immutable after
/// construction.
class NFunction {
 public:
  using Profile = std::function<double(double)>;

  NFunction(Family family, NFunctionParams params, Profile value, Profile deriv, Profile deriv2)
      : family_(family),
        params_(params),
        value_(std::move(value)),
        deriv_(std::move(deriv)),
        deriv2_(std::move(deriv2)) {}

  /// User-supplied N-function. No structural checks happen here; run check_convexity
  /// and friends on the result.
  static NFunction custom(Profile value, Profile deriv, Profile deriv2) {
    return NFunction(Family::custom, {}, std::move(value), std::move(deriv), std::move(deriv2));
  }

  double value(double t) const { return value_(std::abs(t)); }
  double deriv(double t) const {
    const double d = deriv_(std::abs(t));
    return t < 0.0 ? -d : d;
  }
  double deriv2(double t) const { return deriv2_(std::max(std::abs(t), kDeriv2Floor)); }

  Family family() const { return family_; }
  const NFunctionParams& params() const { return params_; }

  std::string describe() const {
    std::ostringstream os;
    os << family_name(family_);
    switch (family_) {
      case Family::power_kappa:
      case Family::power_shifted:
        os << "(kappa=" << params_.kappa << ", p=" << params_.p << ")";
        break;
      case Family::log_corrected:
        os << "(kappa=" << params_.kappa << ", p=" << params_.p << ", beta=" << params_.beta << ")";
        break;
      case Family::quadratic:
        os << "(lambda_tilde=" << params_.lambda_tilde << ")";
        break;
      case Family::custom:
        break;
    }
    return os.str();
  }

 private:
  Family family_;
  NFunctionParams params_;
  Profile value_;
  Profile deriv_;
  Profile deriv2_;
};

namespace detail {

// (kappa + s^2)^((p-2)/2). With kappa = 0 the power is taken of s itself, since s^2
// underflows for the tiny abscissae quadrature rules probe.
inline double shifted_weight(double kappa, double p, double s) {
  if (kappa == 0.0) return std::pow(s, p - 2.0);
  return std::pow(kappa + s * s, 0.5 * (p - 2.0));
}

inline double shifted_weight_derivative_factor(double kappa, double p, double s) {
  // d/ds [(kappa+s^2)^((p-2)/2) s] = (kappa+s^2)^((p-4)/2) (kappa + (p-1) s^2)
  if (kappa == 0.0) return (p - 1.0) * std::pow(s, p - 2.0);
  return std::pow(kappa + s * s, 0.5 * (p - 4.0)) * (kappa + (p - 1.0) * s * s);
}

}  // namespace detail

/// Built-in N-function families:
///   power_kappa    phi'(s) = (kappa + s^(p-2)) s
///   power_shifted  phi'(s) = (kappa + s^2)^((p-2)/2) s
///   log_corrected  phi'(s) = (kappa + s^2)^((p-2)/2) s ln^beta(e + s)
///   quadratic      phi(s)  = lambda_tilde s^2
inline NFunction make_family(Family tag, double kappa, double p, double beta, double lambda_tilde) {
  const NFunctionParams params{kappa, p, beta, lambda_tilde};
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidParameter(msg);
  };
  if (tag == Family::quadratic) {
    require(std::isfinite(lambda_tilde) && lambda_tilde > 0.0, "quadratic family requires lambda_tilde > 0");
    return NFunction(
        tag, params, [lt = lambda_tilde](double t) { return lt * t * t; },
        [lt = lambda_tilde](double t) { return 2.0 * lt * t; }, [lt = lambda_tilde](double) { return 2.0 * lt; });
  }
  require(tag != Family::custom, "custom N-functions are built with NFunction::custom");
  require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be >= 0");
  require(std::isfinite(p) && p > 1.0, "p must be > 1");

  switch (tag) {
    case Family::power_kappa:
      return NFunction(
          tag, params, [kappa, p](double t) { return 0.5 * kappa * t * t + std::pow(t, p) / p; },
          [kappa, p](double s) { return kappa * s + std::pow(s, p - 1.0); },
          [kappa, p](double s) { return kappa + (p - 1.0) * std::pow(s, p - 2.0); });
    case Family::power_shifted:
      return NFunction(
          tag, params,
          [kappa, p](double t) {
            if (kappa == 0.0) return std::pow(t, p) / p;
            // ((kappa + t^2)^(p/2) - kappa^(p/2)) / p without cancellation at small t.
            return std::pow(kappa, 0.5 * p) * std::expm1(0.5 * p * std::log1p(t * t / kappa)) / p;
          },
          [kappa, p](double s) { return s == 0.0 ? 0.0 : detail::shifted_weight(kappa, p, s) * s; },
          [kappa, p](double s) { return detail::shifted_weight_derivative_factor(kappa, p, s); });
    case Family::log_corrected: {
      require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0");
      auto deriv = [kappa, p, beta](double s) {
        if (s == 0.0) return 0.0;
        return detail::shifted_weight(kappa, p, s) * s * std::pow(std::log(std::numbers::e + s), beta);
      };
      auto deriv2 = [kappa, p, beta](double s) {
        const double log_term = std::log(std::numbers::e + s);
        double out = detail::shifted_weight_derivative_factor(kappa, p, s) * std::pow(log_term, beta);
        if (beta != 0.0) {
          out += detail::shifted_weight(kappa, p, s) * s * beta * std::pow(log_term, beta - 1.0) /
                 (std::numbers::e + s);
        }
        return out;
      };
      // No closed form for general (kappa, p, beta): integrate phi' with double-exponential
      // quadrature, which tolerates the s^(p-1) endpoint behaviour for p < 2.
      auto value = [deriv](double t) {
        if (t == 0.0) return 0.0;
        static thread_local boost::math::quadrature::tanh_sinh<double> integrator(10);
        double error = 0.0;
        return integrator.integrate(deriv, 0.0, t, 1e-13, &error);
      };
      return NFunction(tag, params, value, deriv, deriv2);
    }
    default:
      break;
  }
  throw InvalidParameter("unsupported family");
}

inline NFunction make_family(Family tag, const NFunctionParams& p) {
  return make_family(tag, p.kappa, p.p, p.beta, p.lambda_tilde);
}

/// Convex conjugate phi*(t) = sup_s (s t - phi(s)), by golden-section maximization
/// of the concave objective on a bracket found from the monotonicity of phi'.
/// For log_corrected, whose phi is itself a quadrature, the objective inside the
/// bracket [h/2, h] is compared through int phi' with a 10-point Gauss rule (phi' is
/// analytic there), so phi is evaluated once.
inline double conjugate(const NFunction& phi, double t) {
  if (!std::isfinite(t)) throw InvalidParameter("conjugate: argument must be finite");
  const double a = std::abs(t);  // phi even => phi* even
  if (a == 0.0) return 0.0;

  double hi = 1.0;
  int steps = 0;
  while (phi.deriv(hi) < a) {
    hi *= 2.0;
    if (++steps > 2000 || !std::isfinite(hi) || !std::isfinite(phi.deriv(hi))) {
      std::ostringstream os;
      os << "conjugate: could not bracket maximizer for t=" << t << " (" << phi.describe()
         << ", last s=" << hi << ", phi'(s)=" << phi.deriv(hi) << ")";
      throw NumericalError(os.str());
    }
  }
  double lo = hi / 2.0;
  if (steps == 0) {
    while (phi.deriv(lo) >= a && lo > 1e-300) {
      hi = lo;
      lo /= 2.0;
    }
    if (lo <= 1e-300) lo = 0.0;
  }

  const double anchor = phi.family() == Family::log_corrected ? lo : 0.0;
  const auto deriv = [&](double s) { return phi.deriv(s); };
  // objective up to the constant phi(anchor)
  auto objective = [&](double s) {
    if (anchor == 0.0) return a * s - phi.value(s);
    return a * s - boost::math::quadrature::gauss<double, 10>::integrate(deriv, anchor, s);
  };

  constexpr double inv_phi = 0.6180339887498948482;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int iter = 0; hi - lo > 1e-10 * std::max(1.0, hi); ++iter) {
    if (iter > 500 || !std::isfinite(f1) || !std::isfinite(f2)) {
      std::ostringstream os;
      os << "conjugate: golden-section search failed for t=" << t << " (" << phi.describe() << ", bracket [" << lo
         << ", " << hi << "], f=" << f1 << ", " << f2 << ")";
      throw NumericalError(os.str());
    }
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  const double mid = 0.5 * (lo + hi);
  double s_best = mid;
  double best = objective(mid);
  if (f1 > best) {
    best = f1;
    s_best = x1;
  }
  if (f2 > best) {
    best = f2;
    s_best = x2;
  }
  return std::max(0.0, a * s_best - phi.value(s_best));
}

/// Log-spaced sample grid from 1e-6 to t_max.
inline std::vector<double> log_grid(double t_max, int samples) {
  if (!(t_max > 1e-6) || samples < 2) throw InvalidParameter("log_grid: need t_max > 1e-6 and samples >= 2");
  std::vector<double> grid(static_cast<std::size_t>(samples));
  const double lo = std::log10(1e-6);
  const double hi = std::log10(t_max);
  for (int i = 0; i < samples; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, lo + (hi - lo) * i / (samples - 1));
  return grid;
}

namespace detail {

// Least-squares slope of log(ratio) against log(t) over the top decade of the grid.
// Non-finite ratios count as unbounded growth.
inline double top_decade_slope(const std::vector<double>& grid, const std::vector<double>& ratio) {
  const double t_max = grid.back();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= t_max / 10.0 * (1 - 1e-12)) pts.emplace_back(std::log(grid[i]), std::log(ratio[i]));
  }
  if (pts.size() < 2) {
    pts.clear();
    for (std::size_t i = grid.size() - 2; i < grid.size(); ++i) pts.emplace_back(std::log(grid[i]), std::log(ratio[i]));
  }
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    if (!std::isfinite(y)) return std::numeric_limits<double>::infinity();
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

inline double max_ratio(const std::vector<double>& ratio) {
  double c = 0.0;
  for (double r : ratio) {
    if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    c = std::max(c, r);
  }
  return c;
}

}  // namespace detail

/// A ratio sequence counts as bounded when its log grows with slope at most this
/// much (per unit log t) over the top decade of the sample grid.
inline constexpr double kBoundedSlope = 0.05;

struct Delta2Report {
  bool satisfied = false;
  double C_observed = 0.0;
  double top_decade_slope = 0.0;
};

/// Sampled doubling condition phi(2t) <= C (phi(t) + 1). A diagnostic, not a proof.
inline Delta2Report check_delta2(const NFunction& phi, double t_max = 1e6, int samples = 241) {
  const auto grid = log_grid(t_max, samples);
  std::vector<double> ratio;
  ratio.reserve(grid.size());
  for (double t : grid) ratio.push_back(phi.value(2.0 * t) / (phi.value(t) + 1.0));
  Delta2Report r;
  r.C_observed = detail::max_ratio(ratio);
  r.top_decade_slope = detail::top_decade_slope(grid, ratio);
  r.satisfied = std::isfinite(r.C_observed) && r.top_decade_slope <= kBoundedSlope;
  return r;
}

struct GoodPhiPrimeReport {
  bool lower_ok = false;
  double C_observed = 0.0;
  bool bounded = false;  ///< false flags an unbounded trend of t phi'(t) / (phi(t) + 1)
  double top_decade_slope = 0.0;
};

/// Sampled check of phi(t) <= t phi'(t) <= C (phi(t) + 1).
inline GoodPhiPrimeReport check_good_phi_prime(const NFunction& phi, double t_max = 1e6, int samples = 241) {
  const auto grid = log_grid(t_max, samples);
  GoodPhiPrimeReport r;
  r.lower_ok = true;
  std::vector<double> ratio;
  ratio.reserve(grid.size());
  for (double t : grid) {
    const double v = phi.value(t);
    const double tdv = t * phi.deriv(t);
    if (!(v <= tdv * (1.0 + 1e-12) + 1e-300) && !(std::isinf(v) && std::isinf(tdv))) r.lower_ok = false;
    ratio.push_back(tdv / (v + 1.0));
  }
  r.C_observed = detail::max_ratio(ratio);
  r.top_decade_slope = detail::top_decade_slope(grid, ratio);
  r.bounded = std::isfinite(r.C_observed) && r.top_decade_slope <= kBoundedSlope;
  return r;
}

/// Midpoint convexity on random pairs (a, b, (a+b)/2) plus monotonicity of phi' on a
/// sorted grid of [0, 1e3].
inline bool check_convexity(const NFunction& phi, int samples = 2000, std::uint64_t seed = 20240601) {
  if (samples < 3) throw InvalidParameter("check_convexity: samples must be >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> exponent(-3.0, 3.0);
  std::bernoulli_distribution sign(0.5);
  auto draw = [&] { return (sign(rng) ? -1.0 : 1.0) * std::pow(10.0, exponent(rng)); };
  for (int i = 0; i < samples; ++i) {
    const double a = draw();
    const double b = draw();
    const double mid = phi.value(0.5 * (a + b));
    const double avg = 0.5 * (phi.value(a) + phi.value(b));
    if (!(mid <= avg + 1e-12 * (1.0 + std::abs(avg)))) return false;
  }
  double prev = phi.deriv(0.0);
  for (int i = 1; i < samples; ++i) {
    const double t = 1e3 * static_cast<double>(i) / (samples - 1);
    const double d = phi.deriv(t);
    if (!(d >= prev - 1e-12 * (1.0 + std::abs(prev)))) return false;
    prev = d;
  }
  return true;
}

/// phi'' > 0 on a log grid of [1e-6, t_max]; used to decide whether uniqueness applies.
inline bool strictly_convex_on_samples(const NFunction& phi, double t_max = 1e3, int samples = 241) {
  for (double t : log_grid(t_max, samples)) {
    if (!(phi.deriv2(t) > 0.0)) return false;
  }
  return true;
}

}  // namespace orlicz_elastica
