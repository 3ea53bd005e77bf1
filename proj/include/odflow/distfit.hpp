#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "odflow/error.hpp"
#include "odflow/random.hpp"
#include "odflow/stats.hpp"

namespace odflow {

struct ModelFit {
  std::map<std::string, double> params;
  double log_likelihood = 0.0;
  double aic = 0.0;  // 2k - 2 logL with k = 2 for every model here
};

struct DistFitResult {
  std::map<std::string, ModelFit> models;  // normal, lognormal, gamma, weibull
  std::string best_model;
  double skewness = 0.0;
  double kurtosis = 0.0;  // plain (not excess) kurtosis
  double skewness_bootstrap_sd = 0.0;
  double kurtosis_bootstrap_sd = 0.0;
  std::vector<std::pair<double, double>> bootstrap;  // (skewness, kurtosis)
};

namespace detail {

// Central-moment skewness m3/m2^1.5 and kurtosis m4/m2^2 (divisor n).
// A degenerate resample with zero spread maps to (0, 0).
inline std::pair<double, double> moment_shape(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (const double v : x) m += v;
  m /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) return {0.0, 0.0};
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

// Safeguarded Newton for a monotone function with a bracketing fallback.
// The initial bracket [lo, hi] is widened geometrically until it straddles
// the root; steps that leave the bracket or fail to shrink it become
// bisection steps.
template <class F, class DF>
inline double safeguarded_newton(F f, DF df, double x0, double lo, double hi,
                                 const char* what) {
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 200 && flo * fhi > 0.0; ++i) {
    if (std::abs(flo) < std::abs(fhi)) {
      lo /= 2.0;
      flo = f(lo);
    } else {
      hi *= 2.0;
      fhi = f(hi);
    }
  }
  if (flo * fhi > 0.0)
    throw Error(ErrorCode::Unconverged,
                std::string(what) + ": could not bracket the root");

  double x = std::clamp(x0, lo, hi);
  std::vector<double> trace;
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    // keep the bracket valid
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    const double dfx = df(x);
    double next = dfx != 0.0 ? x - fx / dfx : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    trace.push_back(x);
    if (step <= 1e-10 * std::max(1.0, std::abs(x))) return x;
  }
  std::string msg = std::string(what) + ": no convergence; last iterates:";
  for (std::size_t i = trace.size() > 8 ? trace.size() - 8 : 0;
       i < trace.size(); ++i)
    msg += " " + std::to_string(trace[i]);
  throw Error(ErrorCode::Unconverged, msg);
}

inline ModelFit fit_normal(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mu = mean(x);
  double ss = 0.0;
  for (const double v : x) ss += (v - mu) * (v - mu);
  const double var = ss / n;  // MLE variance
  ModelFit m;
  m.params = {{"mu", mu}, {"sigma", std::sqrt(var)}};
  m.log_likelihood =
      -0.5 * n * (std::log(2.0 * 3.14159265358979323846 * var) + 1.0);
  m.aic = 4.0 - 2.0 * m.log_likelihood;
  return m;
}

inline ModelFit fit_lognormal(const std::vector<double>& x) {
  std::vector<double> logs(x.size());
  double sum_log = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    logs[i] = std::log(x[i]);
    sum_log += logs[i];
  }
  ModelFit m = fit_normal(logs);  // same mu/sigma, density gains a 1/x factor
  m.log_likelihood -= sum_log;
  m.aic = 4.0 - 2.0 * m.log_likelihood;
  return m;
}

inline ModelFit fit_gamma(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double sum = 0.0, sum_log = 0.0;
  for (const double v : x) {
    sum += v;
    sum_log += std::log(v);
  }
  const double xbar = sum / n;
  const double s = std::log(xbar) - sum_log / n;  // > 0 unless constant
  const double k0 = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) /
                    (12.0 * s);
  const auto f = [s](double k) { return std::log(k) - digamma(k) - s; };
  const auto fd = [](double k) { return 1.0 / k - trigamma(k); };
  const double k = safeguarded_newton(f, fd, k0, k0 / 2.0, k0 * 2.0, "gamma mle");
  const double theta = xbar / k;
  ModelFit m;
  m.params = {{"shape", k}, {"scale", theta}};
  m.log_likelihood = (k - 1.0) * sum_log - sum / theta -
                     n * k * std::log(theta) - n * std::lgamma(k);
  m.aic = 4.0 - 2.0 * m.log_likelihood;
  return m;
}

inline ModelFit fit_weibull(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double c = *std::max_element(x.begin(), x.end());
  std::vector<double> u(x.size()), lx(x.size());
  double mean_log = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = x[i] / c;  // in (0,1]: u^k cannot overflow for any k
    lx[i] = std::log(x[i]);
    mean_log += lx[i];
  }
  mean_log /= n;
  double sd_log = 0.0;
  for (const double v : lx) sd_log += (v - mean_log) * (v - mean_log);
  sd_log = std::sqrt(sd_log / n);

  const auto sums = [&](double k, double& s0, double& s1, double& s2) {
    s0 = s1 = s2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double p = std::pow(u[i], k);
      s0 += p;
      s1 += p * lx[i];
      s2 += p * lx[i] * lx[i];
    }
  };
  const auto g = [&](double k) {
    double s0, s1, s2;
    sums(k, s0, s1, s2);
    return s1 / s0 - 1.0 / k - mean_log;
  };
  const auto gd = [&](double k) {
    double s0, s1, s2;
    sums(k, s0, s1, s2);
    return (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
  };
  const double k0 = 1.28254983016186409554 / sd_log;  // pi / sqrt(6) / sd
  const double k =
      safeguarded_newton(g, gd, k0, k0 / 2.0, k0 * 2.0, "weibull mle");
  double s0, s1, s2;
  sums(k, s0, s1, s2);
  const double lambda = c * std::pow(s0 / n, 1.0 / k);
  ModelFit m;
  m.params = {{"shape", k}, {"scale", lambda}};
  double pow_sum = 0.0;
  for (const double v : x) pow_sum += std::pow(v / lambda, k);
  m.log_likelihood = n * std::log(k) - n * k * std::log(lambda) +
                     (k - 1.0) * (mean_log * n) - pow_sum;
  m.aic = 4.0 - 2.0 * m.log_likelihood;
  return m;
}

}  // namespace detail

// MLE fits of the four candidate models with AIC selection, plus
// moment-shape (skewness, kurtosis) point estimates and seeded bootstrap
// resamples of the same pair.
inline DistFitResult fit_distributions(const std::vector<double>& sample,
                                       int bootstrap_n, std::uint64_t seed) {
  if (sample.size() < 10)
    throw Error(ErrorCode::InsufficientData,
                "need >= 10 observations, got " + std::to_string(sample.size()));
  if (bootstrap_n < 0)
    throw Error(ErrorCode::DomainError, "bootstrap_n must be >= 0");
  for (const double v : sample)
    if (!(v > 0.0))
      throw Error(ErrorCode::DomainError,
                  "sample values must be positive, got " + std::to_string(v));
  const double first = sample.front();
  bool constant = true;
  for (const double v : sample) constant &= (v == first);
  if (constant)
    throw Error(ErrorCode::ZeroVariance, "sample has zero variance");

  DistFitResult r;
  r.models["normal"] = detail::fit_normal(sample);
  r.models["lognormal"] = detail::fit_lognormal(sample);
  r.models["gamma"] = detail::fit_gamma(sample);
  r.models["weibull"] = detail::fit_weibull(sample);
  for (const char* name : {"normal", "lognormal", "gamma", "weibull"}) {
    if (r.best_model.empty() ||
        r.models[name].aic < r.models[r.best_model].aic)
      r.best_model = name;
  }

  const auto shape = detail::moment_shape(sample);
  r.skewness = shape.first;
  r.kurtosis = shape.second;

  Rng rng(seed);
  std::vector<double> resample(sample.size());
  r.bootstrap.reserve(static_cast<std::size_t>(bootstrap_n));
  for (int b = 0; b < bootstrap_n; ++b) {
    for (double& v : resample) v = sample[rng.index(sample.size())];
    r.bootstrap.push_back(detail::moment_shape(resample));
  }
  if (bootstrap_n > 1) {
    std::vector<double> sk, ku;
    sk.reserve(r.bootstrap.size());
    ku.reserve(r.bootstrap.size());
    for (const auto& [a, b] : r.bootstrap) {
      sk.push_back(a);
      ku.push_back(b);
    }
    r.skewness_bootstrap_sd = sdev(sk);
    r.kurtosis_bootstrap_sd = sdev(ku);
  }
  return r;
}

}  // namespace odflow
