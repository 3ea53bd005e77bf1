#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "odflow/core.hpp"
#include "odflow/error.hpp"

namespace odflow {

// PCA of the origin x destination flow matrix.  Rows are origins (one
// observation per origin city), columns are destination features.
struct PcaResult {
  std::vector<std::string> cities;  // row/column labels (same set)
  Eigen::MatrixXd loadings;         // destinations x components, orthonormal
  Eigen::MatrixXd scores;           // origins x components, unit variance
  std::vector<double> explained_variance_ratio;  // non-increasing
  std::vector<double> component_sdev;
  bool standardized = true;
  bool diagonal_included = false;

  std::size_t components() const {
    return static_cast<std::size_t>(loadings.cols());
  }
};

// Columns are centered (and z-scored when standardize is set); components by
// SVD; min(n-1, m) components kept.  Each component's sign is fixed by making
// its largest-magnitude loading positive, so output is deterministic.
// Intracity (diagonal) flows are zeroed unless include_diagonal is set.
inline PcaResult pca_flows(const FlowMatrix& flows, bool standardize = true,
                           bool include_diagonal = false) {
  const std::size_t n = flows.size();
  if (n < 2)
    throw Error(ErrorCode::InsufficientData,
                "pca needs >= 2 origins and >= 2 destinations");

  Eigen::MatrixXd f(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (i == j && !include_diagonal) ? 0.0 : flows.at(i, j);

  const auto rows = static_cast<Eigen::Index>(n);
  const double nd = static_cast<double>(n);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const double mu = f.col(j).mean();
    f.col(j).array() -= mu;
    if (standardize) {
      const double sd = std::sqrt(f.col(j).squaredNorm() / (nd - 1.0));
      if (sd == 0.0)
        throw Error(ErrorCode::ZeroVarianceColumn,
                    "destination column " + flows.cities[static_cast<std::size_t>(j)] +
                        " has zero variance");
      f.col(j) /= sd;
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      f, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const auto keep = static_cast<Eigen::Index>(
      std::min(n - 1, static_cast<std::size_t>(sigma.size())));

  double total_var = 0.0;
  for (Eigen::Index l = 0; l < sigma.size(); ++l)
    total_var += sigma[l] * sigma[l];

  PcaResult r;
  r.cities = flows.cities;
  r.standardized = standardize;
  r.diagonal_included = include_diagonal;
  r.loadings = svd.matrixV().leftCols(keep);
  r.scores = svd.matrixU().leftCols(keep) * std::sqrt(nd - 1.0);
  r.explained_variance_ratio.resize(static_cast<std::size_t>(keep));
  r.component_sdev.resize(static_cast<std::size_t>(keep));
  for (Eigen::Index l = 0; l < keep; ++l) {
    r.explained_variance_ratio[static_cast<std::size_t>(l)] =
        total_var > 0.0 ? sigma[l] * sigma[l] / total_var : 0.0;
    r.component_sdev[static_cast<std::size_t>(l)] =
        sigma[l] / std::sqrt(nd - 1.0);
    Eigen::Index peak = 0;
    r.loadings.col(l).cwiseAbs().maxCoeff(&peak);
    if (r.loadings(peak, l) < 0.0) {
      r.loadings.col(l) = -r.loadings.col(l);
      r.scores.col(l) = -r.scores.col(l);
    }
  }
  return r;
}

struct SubNetwork {
  int component_index = 1;  // 1-based
  double loading_threshold = 0.3;
  double score_threshold = 1.0;
  std::set<std::string> origins;
  std::set<std::string> destinations;
  struct Edge {
    std::string origin, dest;
    double flow;
  };
  std::vector<Edge> edges;
};

// Dominant sub-network of one component: destinations pass the loading
// threshold, origins pass the standardized-score threshold, and every
// retained origin links to every retained destination it actually sends
// flow to.  Thresholds compare magnitudes unless signed_thresholds is set.
inline SubNetwork extract_subnetwork(const PcaResult& pca,
                                     const FlowMatrix& flows, int component,
                                     double loading_threshold = 0.3,
                                     double score_threshold = 1.0,
                                     bool signed_thresholds = false) {
  if (component < 1 || static_cast<std::size_t>(component) > pca.components())
    throw Error(ErrorCode::DomainError,
                "component " + std::to_string(component) + " out of range");
  if (flows.cities != pca.cities)
    throw Error(ErrorCode::DomainError,
                "flow matrix cities do not match pca cities");
  const Eigen::Index c = component - 1;
  SubNetwork sub;
  sub.component_index = component;
  sub.loading_threshold = loading_threshold;
  sub.score_threshold = score_threshold;
  const auto passes = [&](double v, double threshold) {
    return (signed_thresholds ? v : std::abs(v)) > threshold;
  };
  for (std::size_t j = 0; j < pca.cities.size(); ++j)
    if (passes(pca.loadings(static_cast<Eigen::Index>(j), c), loading_threshold))
      sub.destinations.insert(pca.cities[j]);
  for (std::size_t i = 0; i < pca.cities.size(); ++i)
    if (passes(pca.scores(static_cast<Eigen::Index>(i), c), score_threshold))
      sub.origins.insert(pca.cities[i]);
  for (const auto& o : sub.origins)
    for (const auto& d : sub.destinations) {
      if (o == d) continue;
      const auto oi = static_cast<std::size_t>(flows.index(o));
      const auto di = static_cast<std::size_t>(flows.index(d));
      const double v = flows.at(oi, di);
      if (v > 0.0) sub.edges.push_back({o, d, v});
    }
  return sub;
}

}  // namespace odflow
