#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mhs {

namespace detail {

inline constexpr double kExpintCrossover = 1.0;

// E1(x) = -gamma - ln(x) - sum_{k>=1} (-x)^k / (k * k!), used for 0 < x <= 1.
inline double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;  // (-x)^k / k!
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double contrib = term / k;
    sum += contrib;
    if (std::abs(contrib) < std::abs(sum) * 1e-17) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

// e^x E1(x) by modified Lentz evaluation of
//   E1(x) = e^-x (1/(x+1-) 1/(x+3-) 4/(x+5-) ...), used for x > 1.
inline double e1_scaled_cf(double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return h;
}

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw std::domain_error(std::string(what) + ": argument must be positive");
}

}  // namespace detail

/// Exponential integral E1(x) = integral_x^inf e^-t / t dt, for x > 0.
///
/// Power series up to x = 1, continued fraction beyond.
inline double exp_integral_e1(double x) {
  detail::require_positive(x, "exp_integral_e1");
  if (x <= detail::kExpintCrossover) return detail::e1_series(x);
  return std::exp(-x) * detail::e1_scaled_cf(x);
}

/// e^x * E1(x). Stays finite where e^x alone would overflow.
inline double exp_scaled_e1(double x) {
  detail::require_positive(x, "exp_scaled_e1");
  if (x <= detail::kExpintCrossover) return std::exp(x) * detail::e1_series(x);
  return detail::e1_scaled_cf(x);
}

}  // namespace mhs
