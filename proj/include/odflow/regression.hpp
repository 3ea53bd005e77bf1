#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "odflow/error.hpp"
#include "odflow/stats.hpp"

namespace odflow {

// Predictors only; the intercept column is added by the fitters.
struct DesignMatrix {
  std::vector<std::string> predictor_names;
  Eigen::MatrixXd X;  // rows = observations, cols = predictors
  Eigen::VectorXd y;
  std::string response_name = "y";

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
};

struct RegressionReport {
  std::string method;  // "ols", "log_glm", "ridge", "lasso"
  std::vector<std::string> predictors;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // per predictor, original units
  std::vector<double> standardized_coefficients;
  double r_squared = 0.0;
  double rmse = 0.0;
  std::vector<double> vif;  // empty when < 2 predictors
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  std::vector<double> standardized_residuals;  // OLS-family only
  std::vector<double> leverage;                // OLS-family only
  std::vector<std::string> selected_features;  // lasso only
  std::optional<double> lambda;                // regularized fits only
  int sweeps = 0;                              // lasso coordinate-descent sweeps
  std::vector<double> objective_path;          // lasso objective per sweep

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    return (X * coefficients).array() + intercept;
  }
};

struct DiagnosticsBundle {
  std::vector<std::pair<double, double>> residual_vs_fitted;
  // (theoretical normal quantile, sorted standardized residual)
  std::vector<std::pair<double, double>> qq;
  std::vector<std::pair<double, double>> scale_location;  // (fitted, sqrt|std res|)
  std::vector<double> leverage;
  std::vector<std::string> correlation_names;  // predictors + "residual"
  std::vector<std::vector<double>> correlation;
};

namespace detail {

inline void check_design(const DesignMatrix& d) {
  if (d.X.rows() != d.y.size())
    throw Error(ErrorCode::DomainError, "design rows != response length");
  if (static_cast<std::size_t>(d.X.cols()) != d.predictor_names.size())
    throw Error(ErrorCode::DomainError, "design cols != predictor names");
  for (std::size_t i = 0; i < d.predictor_names.size(); ++i)
    for (std::size_t j = i + 1; j < d.predictor_names.size(); ++j)
      if (d.predictor_names[i] == d.predictor_names[j])
        throw Error(ErrorCode::DomainError,
                    "duplicate predictor name " + d.predictor_names[i]);
  if (!d.X.allFinite() || !d.y.allFinite())
    throw Error(ErrorCode::DomainError, "design contains undefined entries");
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

// 1 - SSE/SST; a constant response fitted exactly counts as R^2 = 1.
inline double r_squared_of(const Eigen::VectorXd& y,
                           const Eigen::VectorXd& residuals) {
  const double sse = residuals.squaredNorm();
  const Eigen::VectorXd centered = y.array() - y.mean();
  const double sst = centered.squaredNorm();
  if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
  return 1.0 - sse / sst;
}

inline double rmse_of(const Eigen::VectorXd& residuals) {
  return std::sqrt(residuals.squaredNorm() /
                   static_cast<double>(residuals.size()));
}

inline std::vector<double> sdevs(const Eigen::MatrixXd& X) {
  std::vector<double> out(X.cols());
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    out[j] = std::sqrt((X.col(j).array() - m).square().sum() / (n - 1.0));
  }
  return out;
}

// Leverage = squared row norms of the thin Q factor of [1 X].
inline std::vector<double> leverage_of(const Eigen::MatrixXd& A) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  std::vector<double> h(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    h[i] = thin_q.row(i).squaredNorm();
  return h;
}

}  // namespace detail

// b'_j = b_j * S_{X_j} / S_y, one per predictor.
inline std::vector<double> standardize_coefficients(
    const RegressionReport& report, const DesignMatrix& design) {
  detail::check_design(design);
  if (report.coefficients.size() != design.X.cols())
    throw Error(ErrorCode::DomainError,
                "report does not match design column count");
  const std::vector<double> sx = detail::sdevs(design.X);
  const double n = static_cast<double>(design.y.size());
  const double sy = std::sqrt(
      (design.y.array() - design.y.mean()).square().sum() / (n - 1.0));
  if (sy == 0.0)
    throw Error(ErrorCode::ZeroVarianceResponse, "constant response");
  std::vector<double> out(sx.size());
  for (std::size_t j = 0; j < sx.size(); ++j) {
    if (sx[j] == 0.0)
      throw Error(ErrorCode::ZeroVariancePredictor,
                  "constant predictor " + design.predictor_names[j]);
    out[j] = report.coefficients[static_cast<Eigen::Index>(j)] * sx[j] / sy;
  }
  return out;
}

// VIF_k = 1/(1 - R^2_k) from regressing predictor k on the others (with
// intercept).  Perfect collinearity yields +infinity, not an exception.
inline std::vector<double> vif(const DesignMatrix& design) {
  detail::check_design(design);
  const Eigen::Index p = design.X.cols();
  if (p < 2)
    throw Error(ErrorCode::InsufficientData, "vif needs >= 2 predictors");
  std::vector<double> out(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    Eigen::MatrixXd rest(design.X.rows(), p);  // intercept + others
    rest.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index j = 0; j < p; ++j)
      if (j != k) rest.col(c++) = design.X.col(j);
    const Eigen::VectorXd target = design.X.col(k);
    const Eigen::VectorXd beta =
        rest.colPivHouseholderQr().solve(target);
    const double sse = (target - rest * beta).squaredNorm();
    const double sst = (target.array() - target.mean()).square().sum();
    if (sst == 0.0) {  // constant predictor: collinear with the intercept
      out[k] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double r2 = std::clamp(1.0 - sse / sst, 0.0, 1.0);
    out[k] = r2 >= 1.0 ? std::numeric_limits<double>::infinity()
                       : 1.0 / (1.0 - r2);
  }
  return out;
}

inline RegressionReport fit_ols(const DesignMatrix& design) {
  detail::check_design(design);
  const Eigen::Index n = design.X.rows(), p = design.X.cols();
  if (n <= p + 1)
    throw Error(ErrorCode::InsufficientData,
                "ols needs rows > predictors + 1 (" + std::to_string(n) +
                    " rows, " + std::to_string(p) + " predictors)");
  const Eigen::MatrixXd A = detail::with_intercept(design.X);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < A.cols()) {
    // Pivot order puts the dependent columns last; name them.
    const auto perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index i = qr.rank(); i < A.cols(); ++i) {
      const Eigen::Index col = perm[i];
      if (!names.empty()) names += ", ";
      names += col == 0 ? "intercept"
                        : design.predictor_names[static_cast<std::size_t>(col - 1)];
    }
    throw Error(ErrorCode::SingularDesign,
                "rank-deficient design; dependent columns: " + names);
  }
  const Eigen::VectorXd b = qr.solve(design.y);

  RegressionReport r;
  r.method = "ols";
  r.predictors = design.predictor_names;
  r.intercept = b[0];
  r.coefficients = b.tail(p);
  r.fitted = A * b;
  r.residuals = design.y - r.fitted;
  r.r_squared = detail::r_squared_of(design.y, r.residuals);
  r.rmse = detail::rmse_of(r.residuals);
  r.leverage = detail::leverage_of(A);

  const double dof = static_cast<double>(n - p - 1);
  const double s2 = r.residuals.squaredNorm() / dof;
  r.standardized_residuals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = std::sqrt(s2 * std::max(1.0 - r.leverage[i], 0.0));
    r.standardized_residuals[i] = denom > 0.0 ? r.residuals[i] / denom : 0.0;
  }
  r.standardized_coefficients = standardize_coefficients(r, design);
  if (p >= 2) r.vif = vif(design);
  return r;
}

// OLS on ln(y); metrics are on the log scale.
inline RegressionReport fit_log_glm(const DesignMatrix& design) {
  for (Eigen::Index i = 0; i < design.y.size(); ++i)
    if (!(design.y[i] > 0.0))
      throw Error(ErrorCode::NonPositiveResponse,
                  "response[" + std::to_string(i) +
                      "] = " + std::to_string(design.y[i]));
  DesignMatrix logd = design;
  logd.y = design.y.array().log();
  logd.response_name = "ln_" + design.response_name;
  RegressionReport r = fit_ols(logd);
  r.method = "log_glm";
  return r;
}

namespace detail {

struct Standardized {
  Eigen::MatrixXd Z;        // z-scored predictors (ddof = 1)
  Eigen::VectorXd yc;       // centered response
  std::vector<double> mu;   // predictor means
  std::vector<double> sd;   // predictor standard deviations
  double ybar = 0.0;
};

inline Standardized standardize(const DesignMatrix& d) {
  Standardized s;
  s.Z = d.X;
  s.mu.resize(d.X.cols());
  s.sd = sdevs(d.X);
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
    s.mu[j] = d.X.col(j).mean();
    if (s.sd[j] == 0.0)
      throw Error(ErrorCode::ZeroVariancePredictor,
                  "constant predictor " + d.predictor_names[j]);
    s.Z.col(j) = (d.X.col(j).array() - s.mu[j]) / s.sd[j];
  }
  s.ybar = d.y.mean();
  s.yc = d.y.array() - s.ybar;
  return s;
}

// Shared tail for ridge/lasso: back-transform standardized slopes and fill in
// original-scale metrics.
inline RegressionReport finish_regularized(const DesignMatrix& d,
                                           const Standardized& s,
                                           const Eigen::VectorXd& b_std,
                                           const std::string& method,
                                           double lambda) {
  RegressionReport r;
  r.method = method;
  r.predictors = d.predictor_names;
  r.lambda = lambda;
  r.coefficients.resize(d.X.cols());
  for (Eigen::Index j = 0; j < d.X.cols(); ++j)
    r.coefficients[j] = b_std[j] / s.sd[j];
  r.intercept = s.ybar;
  for (Eigen::Index j = 0; j < d.X.cols(); ++j)
    r.intercept -= r.coefficients[j] * s.mu[j];
  r.fitted = r.predict(d.X);
  r.residuals = d.y - r.fitted;
  r.r_squared = r_squared_of(d.y, r.residuals);
  r.rmse = rmse_of(r.residuals);
  r.standardized_coefficients = standardize_coefficients(r, d);
  return r;
}

}  // namespace detail

// Slopes minimize SSE + lambda * sum b_j^2 on z-scored predictors; the
// intercept is unpenalized.  Solved as the augmented least-squares system
// [Z; sqrt(lambda) I] b = [y - ybar; 0].
inline RegressionReport fit_ridge(const DesignMatrix& design, double lambda) {
  detail::check_design(design);
  if (lambda < 0.0)
    throw Error(ErrorCode::DomainError, "ridge lambda must be >= 0");
  if (design.X.rows() < 2)
    throw Error(ErrorCode::InsufficientData, "ridge needs >= 2 rows");
  const detail::Standardized s = detail::standardize(design);
  const Eigen::Index n = design.X.rows(), p = design.X.cols();
  Eigen::MatrixXd A(n + p, p);
  A.topRows(n) = s.Z;
  A.bottomRows(p) =
      std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p);
  rhs.head(n) = s.yc;
  const Eigen::VectorXd b_std = A.colPivHouseholderQr().solve(rhs);
  return detail::finish_regularized(design, s, b_std, "ridge", lambda);
}

// Smallest lambda at which the lasso solution is identically zero, under the
// objective (1/2) SSE + lambda * sum |b_j| on z-scored predictors.
inline double lasso_lambda_max(const DesignMatrix& design) {
  detail::check_design(design);
  const detail::Standardized s = detail::standardize(design);
  return (s.Z.transpose() * s.yc).cwiseAbs().maxCoeff();
}

// Cyclic coordinate descent for (1/2) SSE + lambda * sum |b_j| on z-scored
// predictors.  Soft-thresholding produces exact zeros, which define
// selected_features.
inline RegressionReport fit_lasso(const DesignMatrix& design, double lambda) {
  detail::check_design(design);
  if (lambda < 0.0)
    throw Error(ErrorCode::DomainError, "lasso lambda must be >= 0");
  if (design.X.rows() < 2)
    throw Error(ErrorCode::InsufficientData, "lasso needs >= 2 rows");
  const detail::Standardized s = detail::standardize(design);
  const Eigen::Index p = design.X.cols();

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = s.yc;
  std::vector<double> colsq(p);
  for (Eigen::Index j = 0; j < p; ++j) colsq[j] = s.Z.col(j).squaredNorm();

  constexpr double kTol = 1e-8;
  constexpr int kMaxSweeps = 100000;
  std::vector<double> objective_path;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double old = b[j];
      const double rho = s.Z.col(j).dot(resid) + old * colsq[j];
      const double mag = std::abs(rho) - lambda;
      const double next = mag > 0.0 ? std::copysign(mag, rho) / colsq[j] : 0.0;
      if (next != old) {
        resid += s.Z.col(j) * (old - next);
        b[j] = next;
      }
      max_delta = std::max(max_delta, std::abs(next - old));
    }
    objective_path.push_back(0.5 * resid.squaredNorm() +
                             lambda * b.cwiseAbs().sum());
    if (max_delta < kTol) break;
  }
  if (sweep == kMaxSweeps)
    throw Error(ErrorCode::Unconverged,
                "lasso did not converge in " + std::to_string(kMaxSweeps) +
                    " sweeps (lambda=" + std::to_string(lambda) + ")");

  RegressionReport r =
      detail::finish_regularized(design, s, b, "lasso", lambda);
  r.sweeps = sweep + 1;
  r.objective_path = std::move(objective_path);
  for (Eigen::Index j = 0; j < p; ++j)
    if (b[j] != 0.0) r.selected_features.push_back(design.predictor_names[j]);
  return r;
}

enum class PenaltyKind { Ridge, Lasso };

struct LambdaCalibration {
  double lambda = 0.0;
  std::vector<double> cv_scores;  // LOO RMSE per grid entry, input order
};

// Leave-one-out cross-validation over the grid; ties go to the larger lambda.
inline LambdaCalibration calibrate_lambda(const DesignMatrix& design,
                                          PenaltyKind kind,
                                          const std::vector<double>& grid) {
  detail::check_design(design);
  if (grid.empty())
    throw Error(ErrorCode::DomainError, "empty lambda grid");
  for (const double l : grid)
    if (l < 0.0) throw Error(ErrorCode::DomainError, "negative lambda in grid");
  const Eigen::Index n = design.X.rows();
  if (n < 3)
    throw Error(ErrorCode::InsufficientData,
                "cross-validation needs >= 3 observations");

  LambdaCalibration out;
  out.cv_scores.reserve(grid.size());
  for (const double lambda : grid) {
    double sq = 0.0;
    for (Eigen::Index hold = 0; hold < n; ++hold) {
      DesignMatrix fold;
      fold.predictor_names = design.predictor_names;
      fold.X.resize(n - 1, design.X.cols());
      fold.y.resize(n - 1);
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i == hold) continue;
        fold.X.row(r) = design.X.row(i);
        fold.y[r] = design.y[i];
        ++r;
      }
      const RegressionReport fit = kind == PenaltyKind::Ridge
                                       ? fit_ridge(fold, lambda)
                                       : fit_lasso(fold, lambda);
      const double pred =
          fit.intercept + design.X.row(hold).dot(fit.coefficients);
      sq += (design.y[hold] - pred) * (design.y[hold] - pred);
    }
    out.cv_scores.push_back(std::sqrt(sq / static_cast<double>(n)));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (out.cv_scores[i] < out.cv_scores[best] ||
        (out.cv_scores[i] == out.cv_scores[best] && grid[i] > grid[best]))
      best = i;
  }
  out.lambda = grid[best];
  return out;
}

// Residual plots, Q-Q data, leverage, and the predictor/residual correlation
// matrix.  Zero-variance series (exact fits) get correlation 0 rather than an
// error so the bundle is always emittable.
inline DiagnosticsBundle diagnostics(const RegressionReport& report,
                                     const DesignMatrix& design) {
  detail::check_design(design);
  if (report.residuals.size() != design.X.rows())
    throw Error(ErrorCode::DomainError, "report does not match design rows");
  DiagnosticsBundle d;
  const Eigen::Index n = design.X.rows(), p = design.X.cols();
  d.residual_vs_fitted.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d.residual_vs_fitted.emplace_back(report.fitted[i], report.residuals[i]);

  std::vector<double> std_res = report.standardized_residuals;
  if (std_res.empty()) {
    std_res.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) std_res[i] = report.residuals[i];
  }
  std::vector<double> sorted = std_res;
  std::sort(sorted.begin(), sorted.end());
  d.qq.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double prob =
        (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    d.qq.emplace_back(normal_quantile(prob), sorted[static_cast<std::size_t>(i)]);
  }
  d.scale_location.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d.scale_location.emplace_back(
        report.fitted[i], std::sqrt(std::abs(std_res[static_cast<std::size_t>(i)])));

  d.leverage = report.leverage.empty()
                   ? detail::leverage_of(detail::with_intercept(design.X))
                   : report.leverage;

  d.correlation_names = design.predictor_names;
  d.correlation_names.push_back("residual");
  std::vector<std::vector<double>> cols(p + 1);
  for (Eigen::Index j = 0; j < p; ++j)
    cols[j].assign(design.X.col(j).data(), design.X.col(j).data() + n);
  cols[p].assign(report.residuals.data(), report.residuals.data() + n);
  d.correlation.assign(p + 1, std::vector<double>(p + 1, 0.0));
  for (std::size_t a = 0; a <= static_cast<std::size_t>(p); ++a)
    for (std::size_t b = 0; b <= static_cast<std::size_t>(p); ++b) {
      if (a == b) {
        d.correlation[a][b] = 1.0;
        continue;
      }
      try {
        d.correlation[a][b] = pearson(cols[a], cols[b]);
      } catch (const Error&) {
        d.correlation[a][b] = 0.0;
      }
    }
  return d;
}

}  // namespace odflow
