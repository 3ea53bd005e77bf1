#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "odflow/error.hpp"

namespace odflow {

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw Error(ErrorCode::InsufficientData, "mean of empty vector");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Variance with divisor (n - ddof).  ddof=1 gives the sample variance.
inline double variance(const std::vector<double>& x, int ddof = 1) {
  const auto n = static_cast<long>(x.size());
  if (n - ddof <= 0)
    throw Error(ErrorCode::InsufficientData, "variance needs more observations");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(n - ddof);
}

inline double sdev(const std::vector<double>& x, int ddof = 1) {
  return std::sqrt(variance(x, ddof));
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::DomainError, "pearson: length mismatch");
  if (x.size() < 2)
    throw Error(ErrorCode::InsufficientData, "pearson needs at least 2 points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::UndefinedCorrelation,
                "pearson undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

// Round to 12 significant digits by formatting with %.12g and parsing back.
// Used for every number that ends up in a report so that reruns are
// byte-identical and platform FP noise below the 12th digit is discarded.
inline double round_sig12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

// The %.12g rendering itself, for CSV/DOT output.
inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Inverse standard-normal CDF (Acklam's rational approximation, |err| < 1.2e-9),
// for theoretical quantiles in residual Q-Q output.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::DomainError, "normal_quantile needs p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// digamma(x) for x > 0: recurrence to push the argument above 6, then the
// asymptotic series.
inline double digamma(double x) {
  if (x <= 0.0) throw Error(ErrorCode::DomainError, "digamma needs x > 0");
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + std::log(x) - 0.5 / x -
         f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (1.0 / 240.0 - f / 132.0))));
}

// trigamma(x) = d/dx digamma(x), same scheme.
inline double trigamma(double x) {
  if (x <= 0.0) throw Error(ErrorCode::DomainError, "trigamma needs x > 0");
  double r = 0.0;
  while (x < 6.0) {
    r += 1.0 / (x * x);
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + 1.0 / x + f / 2.0 +
         f / x * (1.0 / 6.0 - f * (1.0 / 30.0 - f * (1.0 / 42.0 - f / 30.0)));
}

}  // namespace odflow
