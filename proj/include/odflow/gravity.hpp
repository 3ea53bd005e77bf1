#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "odflow/core.hpp"
#include "odflow/error.hpp"
#include "odflow/random.hpp"
#include "odflow/regression.hpp"
#include "odflow/simplex.hpp"

namespace odflow {

enum class GravityMethod { LogLinear, Minimax, NullModel };

inline const char* gravity_method_name(GravityMethod m) {
  switch (m) {
    case GravityMethod::LogLinear: return "loglinear";
    case GravityMethod::Minimax: return "minimax";
    case GravityMethod::NullModel: return "null";
  }
  return "unknown";
}

// Calibrated gravity model ln G_ij = X_i + X_j - beta ln d_ij + ln k.
// Attractions are reported in the sum-zero gauge (the shift freedom between
// the X_i and k is fixed by sum X_i = 0, with the displaced constant absorbed
// into k).  Null-model fits estimate beta only; their attraction map is empty.
struct GravityFit {
  GravityMethod method = GravityMethod::LogLinear;
  double beta = 0.0;
  std::map<std::string, double> attractions;  // city -> X_i
  double k_constant = 1.0;
  // R^2 for LogLinear and NullModel; the optimal max |log deviation| M for
  // Minimax.
  double fit_metric = 0.0;
  int excluded_zero_flows = 0;
};

namespace detail {

struct GravityObservations {
  std::vector<std::size_t> origin, dest;
  std::vector<double> log_flow;  // b_ij = ln G_ij
  std::vector<double> log_dist;  // a_ij = ln d_ij
  int excluded_zero_flows = 0;
};

// Off-diagonal pairs with positive flow, in log space.  Zero flows cannot
// enter a log fit; they are counted instead.
inline GravityObservations gravity_observations(const FlowMatrix& flows,
                                                const DistanceMatrix& dist,
                                                std::size_t min_cities) {
  if (flows.cities != dist.cities)
    throw Error(ErrorCode::DomainError,
                "flow and distance matrices cover different cities");
  const std::size_t n = flows.size();
  if (n < min_cities)
    throw Error(ErrorCode::InsufficientData,
                "gravity fit needs >= " + std::to_string(min_cities) +
                    " cities, got " + std::to_string(n));
  GravityObservations obs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double g = flows.at(i, j);
      if (g < 0.0)
        throw Error(ErrorCode::ValidationError, "negative flow volume");
      if (g == 0.0) {
        ++obs.excluded_zero_flows;
        continue;
      }
      const double d = dist.at(i, j);
      if (!(d > 0.0))
        throw Error(ErrorCode::ValidationError,
                    "missing or non-positive distance " + flows.cities[i] +
                        "-" + flows.cities[j]);
      obs.origin.push_back(i);
      obs.dest.push_back(j);
      obs.log_flow.push_back(std::log(g));
      obs.log_dist.push_back(std::log(d));
    }
  if (obs.log_flow.empty())
    throw Error(ErrorCode::InsufficientData, "all intercity flows are zero");
  return obs;
}

}  // namespace detail

// Dummy-variable least squares for Eq.-style ln G = X_i + X_j - beta ln d + ln k.
// The sum-zero gauge is built into the design: city columns are indicators
// relative to the last city (X_last = -sum of the others), so the intercept
// is exactly ln k.
inline GravityFit fit_loglinear(const FlowMatrix& flows,
                                const DistanceMatrix& dist) {
  const auto obs = detail::gravity_observations(flows, dist, 4);
  const std::size_t n = flows.size();
  const std::size_t rows = obs.log_flow.size();

  DesignMatrix d;
  d.response_name = "ln_flow";
  for (std::size_t c = 0; c + 1 < n; ++c)
    d.predictor_names.push_back("X_" + flows.cities[c]);
  d.predictor_names.push_back("neg_ln_d");
  d.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                              static_cast<Eigen::Index>(n));
  d.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (const std::size_t city : {obs.origin[r], obs.dest[r]}) {
      if (city + 1 < n)
        d.X(row, static_cast<Eigen::Index>(city)) += 1.0;
      else  // reference city: subtract from every other indicator
        for (std::size_t c = 0; c + 1 < n; ++c)
          d.X(row, static_cast<Eigen::Index>(c)) -= 1.0;
    }
    d.X(row, static_cast<Eigen::Index>(n - 1)) = -obs.log_dist[r];
    d.y[row] = obs.log_flow[r];
  }

  const RegressionReport report = fit_ols(d);
  GravityFit fit;
  fit.method = GravityMethod::LogLinear;
  fit.excluded_zero_flows = obs.excluded_zero_flows;
  fit.beta = report.coefficients[static_cast<Eigen::Index>(n - 1)];
  double last = 0.0;
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double x = report.coefficients[static_cast<Eigen::Index>(c)];
    fit.attractions[flows.cities[c]] = x;
    last -= x;
  }
  fit.attractions[flows.cities[n - 1]] = last;
  fit.k_constant = std::exp(report.intercept);
  fit.fit_metric = report.r_squared;
  return fit;
}

// MINIMAX calibration: minimize the largest absolute log-space deviation M
// over X_i, beta >= 0 with the deviation split into D1 - D2 and bounded by
// M >= D1 + D2.  The LP has no intercept, so attractions come back in an
// arbitrary gauge; they are re-normalized to sum zero with the shift moved
// into k for comparability with fit_loglinear.
inline GravityFit fit_minimax(const FlowMatrix& flows,
                              const DistanceMatrix& dist) {
  const auto obs = detail::gravity_observations(flows, dist, 4);
  const std::size_t n = flows.size();
  const std::size_t rows = obs.log_flow.size();

  // Variables: X_0..X_{n-1}, beta, M, then D1/D2 per observation.
  const std::size_t vbeta = n, vm = n + 1, vpair = n + 2;
  const std::size_t nvars = vpair + 2 * rows;
  lp::Problem p;
  p.objective.assign(nvars, 0.0);
  p.objective[vm] = 1.0;
  p.names.resize(nvars);
  for (std::size_t c = 0; c < n; ++c) p.names[c] = "X_" + flows.cities[c];
  p.names[vbeta] = "beta";
  p.names[vm] = "M";
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string tag =
        flows.cities[obs.origin[r]] + "_" + flows.cities[obs.dest[r]];
    p.names[vpair + 2 * r] = "D1_" + tag;
    p.names[vpair + 2 * r + 1] = "D2_" + tag;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    lp::Constraint balance;  // X_i + X_j - a.beta - D1 + D2 = b
    balance.coeffs.assign(nvars, 0.0);
    balance.coeffs[obs.origin[r]] += 1.0;
    balance.coeffs[obs.dest[r]] += 1.0;
    balance.coeffs[vbeta] = -obs.log_dist[r];
    balance.coeffs[vpair + 2 * r] = -1.0;
    balance.coeffs[vpair + 2 * r + 1] = 1.0;
    balance.rel = lp::Relation::Eq;
    balance.rhs = obs.log_flow[r];
    p.constraints.push_back(std::move(balance));

    lp::Constraint bound;  // M - D1 - D2 >= 0
    bound.coeffs.assign(nvars, 0.0);
    bound.coeffs[vm] = 1.0;
    bound.coeffs[vpair + 2 * r] = -1.0;
    bound.coeffs[vpair + 2 * r + 1] = -1.0;
    bound.rel = lp::Relation::GreaterEq;
    bound.rhs = 0.0;
    p.constraints.push_back(std::move(bound));
  }

  const lp::Solution sol = lp::solve_lp(p);
  if (sol.status != lp::Status::Optimal)
    throw Error(ErrorCode::LpFailure,
                std::string("minimax LP ended ") + lp::status_name(sol.status));

  GravityFit fit;
  fit.method = GravityMethod::Minimax;
  fit.excluded_zero_flows = obs.excluded_zero_flows;
  fit.beta = sol.x[vbeta];
  fit.fit_metric = sol.objective;
  double shift = 0.0;
  for (std::size_t c = 0; c < n; ++c) shift += sol.x[c];
  shift /= static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c)
    fit.attractions[flows.cities[c]] = sol.x[c] - shift;
  fit.k_constant = std::exp(2.0 * shift);
  return fit;
}

// Distance-free expected flows G^null_ij = W_i W_j F / N; the decay exponent
// is the negated slope of ln(G/G^null) on ln d (or of the raw ratio on d
// when log_space is off).
inline GravityFit fit_nullmodel(const FlowMatrix& flows,
                                const DistanceMatrix& dist,
                                bool log_space = true) {
  const auto obs = detail::gravity_observations(flows, dist, 3);
  const std::size_t n = flows.size();

  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) w[i] += flows.at(i, j);
  std::size_t active = 0;
  double f_total = 0.0;
  for (const double wi : w) {
    if (wi > 0.0) ++active;
    f_total += wi;
  }
  if (active < 3)
    throw Error(ErrorCode::InsufficientData,
                "null model needs >= 3 cities with positive total flow");
  double n_total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) n_total += w[i] * w[j];

  std::vector<double> xs, ys;  // regression sample
  for (std::size_t r = 0; r < obs.log_flow.size(); ++r) {
    const double null_flow =
        w[obs.origin[r]] * w[obs.dest[r]] * f_total / n_total;
    if (!(null_flow > 0.0)) continue;
    const double ratio = std::exp(obs.log_flow[r]) / null_flow;
    if (log_space) {
      xs.push_back(obs.log_dist[r]);
      ys.push_back(std::log(ratio));
    } else {
      xs.push_back(std::exp(obs.log_dist[r]));
      ys.push_back(ratio);
    }
  }
  if (xs.size() < 2)
    throw Error(ErrorCode::InsufficientData,
                "null model has fewer than 2 usable flow pairs");
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0)
    throw Error(ErrorCode::InsufficientVariation,
                "all usable pairs share one distance");

  GravityFit fit;
  fit.method = GravityMethod::NullModel;
  fit.excluded_zero_flows = obs.excluded_zero_flows;
  // The ratios are derived quantities, so a constant signal still carries
  // rounding noise; treat a spread below ~1e-12 relative as no signal.
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  if (*ymax - *ymin <= 1e-12 * std::max(1.0, std::fabs(my))) {
    fit.beta = 0.0;
    fit.fit_metric = 0.0;
    return fit;
  }
  const double slope = sxy / sxx;
  fit.beta = -slope;
  fit.fit_metric = (sxy * sxy) / (sxx * syy);  // R^2 of the slope fit
  return fit;
}

// Synthetic flows G_ij = P_i P_j / d_ij^beta * exp(eps), eps ~ N(0, sigma^2),
// zero diagonal, deterministic per seed.
inline FlowMatrix generate_gravity(const std::vector<double>& attractions,
                                   double beta, const DistanceMatrix& dist,
                                   double noise_sigma, std::uint64_t seed,
                                   int year = 0,
                                   VehicleClass vclass = VehicleClass::CarsBuses) {
  const std::size_t n = dist.size();
  if (n < 2)
    throw Error(ErrorCode::InsufficientData, "need >= 2 cities");
  if (attractions.size() != n)
    throw Error(ErrorCode::DomainError,
                "attractions size != city count");
  for (const double p : attractions)
    if (!(p > 0.0))
      throw Error(ErrorCode::DomainError, "attractions must be positive");
  if (noise_sigma < 0.0)
    throw Error(ErrorCode::DomainError, "noise sigma must be >= 0");

  FlowMatrix m = make_flow_matrix(year, vclass, dist.cities);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = dist.at(i, j);
      if (!(d > 0.0))
        throw Error(ErrorCode::ValidationError,
                    "missing distance " + dist.cities[i] + "-" + dist.cities[j]);
      double g = attractions[i] * attractions[j] * std::pow(d, -beta);
      if (noise_sigma > 0.0) g *= std::exp(noise_sigma * rng.normal());
      m.at(i, j) = g;
    }
  return m;
}

}  // namespace odflow
