// End-to-end acceptance checks.  Each criterion prints one [PASS]/[FAIL]
// line; the process exits nonzero if any criterion fails or overruns its
// time budget.  Reference values come from independent oracle
// implementations (normal equations, vertex enumeration, exhaustive path
// search, dense power iteration) or from planted synthetic ground truth.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "odflow/io.hpp"
#include "odflow/pipeline.hpp"
#include "oracles.hpp"

using namespace odflow;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

void require_close(double got, double want, double tol, const std::string& what) {
  if (!(std::fabs(got - want) <= tol))
    throw Failure(what + ": got " + std::to_string(got) + ", want " +
                  std::to_string(want) + " within " + std::to_string(tol));
}

// ---------------------------------------------------------------------------
// shared fixtures

DesignMatrix planted_design(std::uint64_t seed, double noise_sigma,
                            Eigen::VectorXd* truth, double* intercept) {
  Rng rng(seed);
  const Eigen::Index n = 56, p = 8;
  DesignMatrix d;
  for (Eigen::Index k = 0; k < p; ++k)
    d.predictor_names.push_back("x" + std::to_string(k + 1));
  d.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < p; ++k) d.X(i, k) = rng.uniform(0.0, 10.0);
  Eigen::VectorXd b(p);
  b << 3.0, -2.0, 1.5, 0.7, -0.2, 2.2, -1.1, 0.5;
  const double b0 = 12.5;
  d.y = (d.X * b).array() + b0;
  if (noise_sigma > 0.0)
    for (Eigen::Index i = 0; i < n; ++i) d.y[i] += noise_sigma * rng.normal();
  if (truth) *truth = b;
  if (intercept) *intercept = b0;
  return d;
}

DistanceMatrix ring(std::size_t n, double radius = 250.0) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "C" + std::to_string(i);
    if (i < 10) id = "C0" + std::to_string(i);
    ids.push_back(id);
  }
  DistanceMatrix m = make_distance_matrix(ids);
  constexpr double pi = 3.14159265358979323846;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      m.set(i, j, 2.0 * radius * std::sin(pi * static_cast<double>(j - i) / n));
  return m;
}

std::vector<double> gauge(const std::vector<double>& p) {
  std::vector<double> x(p.size());
  double m = 0.0;
  for (const double v : p) m += std::log(v);
  m /= static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = std::log(p[i]) - m;
  return x;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// criterion 1: least squares recovers planted coefficients and matches the
// normal equations on noisy data

void criterion1() {
  Eigen::VectorXd b;
  double b0 = 0.0;
  const DesignMatrix exact = planted_design(101, 0.0, &b, &b0);
  const RegressionReport r1 = fit_ols(exact);
  require_close(r1.intercept, b0, 1e-8, "noise-free intercept");
  for (Eigen::Index k = 0; k < b.size(); ++k)
    require_close(r1.coefficients[k], b[k], 1e-8,
                  "noise-free coefficient " + exact.predictor_names[k]);
  require(r1.r_squared > 1.0 - 1e-12, "noise-free fit is exact");

  const DesignMatrix noisy = planted_design(101, 0.5, nullptr, nullptr);
  const RegressionReport r2 = fit_ols(noisy);
  const Eigen::MatrixXd A = [&] {
    Eigen::MatrixXd m(noisy.X.rows(), noisy.X.cols() + 1);
    m.col(0).setOnes();
    m.rightCols(noisy.X.cols()) = noisy.X;
    return m;
  }();
  const Eigen::VectorXd want = oracles::ols_normal_equations(A, noisy.y);
  require_close(r2.intercept, want[0], 1e-10, "noisy intercept vs oracle");
  for (Eigen::Index k = 0; k < noisy.X.cols(); ++k)
    require_close(r2.coefficients[k], want[k + 1], 1e-10,
                  "noisy coefficient vs oracle");
  const Eigen::VectorXd grad = A.transpose() * r2.residuals;
  require(grad.cwiseAbs().maxCoeff() <= 1e-8 * noisy.y.norm(),
          "residuals orthogonal to the design");
}

// ---------------------------------------------------------------------------
// criterion 2: ridge and lasso paths behave as the penalties dictate

void criterion2() {
  const DesignMatrix d = planted_design(102, 0.5, nullptr, nullptr);

  const RegressionReport ols = fit_ols(d);
  const RegressionReport ridge0 = fit_ridge(d, 0.0);
  require_close(ridge0.intercept, ols.intercept, 1e-10, "ridge(0) intercept");
  for (Eigen::Index k = 0; k < d.X.cols(); ++k)
    require_close(ridge0.coefficients[k], ols.coefficients[k], 1e-10,
                  "ridge(0) coefficient");

  const double lmax = lasso_lambda_max(d);
  const RegressionReport dead = fit_lasso(d, lmax);
  require(dead.selected_features.empty(), "lasso at lambda_max selects nothing");
  for (Eigen::Index k = 0; k < d.X.cols(); ++k)
    require(dead.coefficients[k] == 0.0, "lasso at lambda_max zeroes slopes");

  const std::vector<double> sd = [&] {
    std::vector<double> out(static_cast<std::size_t>(d.X.cols()));
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
      const double mu = d.X.col(j).mean();
      out[static_cast<std::size_t>(j)] = std::sqrt(
          (d.X.col(j).array() - mu).square().sum() /
          static_cast<double>(d.X.rows() - 1));
    }
    return out;
  }();
  double prev = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 20; ++g) {
    const double lambda = std::pow(10.0, -3.0 + 8.0 * g / 19.0);
    const RegressionReport r = fit_ridge(d, lambda);
    double norm = 0.0;
    for (Eigen::Index k = 0; k < d.X.cols(); ++k) {
      const double z = r.coefficients[k] * sd[static_cast<std::size_t>(k)];
      norm += z * z;
    }
    require(norm <= prev + 1e-9, "ridge shrinkage is monotone in lambda");
    prev = norm;
  }

  const RegressionReport lasso = fit_lasso(d, lmax / 100.0);
  require(!lasso.objective_path.empty(), "lasso records its objective path");
  require(lasso.sweeps == static_cast<int>(lasso.objective_path.size()),
          "one objective value per sweep");
  for (std::size_t i = 1; i < lasso.objective_path.size(); ++i)
    require(lasso.objective_path[i] <= lasso.objective_path[i - 1] + 1e-9,
            "lasso objective is non-increasing");
}

// ---------------------------------------------------------------------------
// criterion 3: variance inflation factors match independent aux regressions

void criterion3() {
  const DesignMatrix d = planted_design(103, 0.5, nullptr, nullptr);
  const std::vector<double> got = vif(d);
  for (Eigen::Index k = 0; k < d.X.cols(); ++k) {
    Eigen::MatrixXd A(d.X.rows(), d.X.cols());
    A.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j)
      if (j != k) A.col(c++) = d.X.col(j);
    const Eigen::VectorXd target = d.X.col(k);
    const Eigen::VectorXd beta = oracles::ols_normal_equations(A, target);
    const Eigen::VectorXd resid = target - A * beta;
    const Eigen::VectorXd centered = target.array() - target.mean();
    const double r2 = 1.0 - resid.squaredNorm() / centered.squaredNorm();
    const double want = 1.0 / (1.0 - r2);
    require(std::fabs(got[static_cast<std::size_t>(k)] - want) <=
                1e-9 * std::max(1.0, want),
            "vif matches aux regression for " + d.predictor_names[k]);
  }

  // Mutually orthogonal centered columns must all sit at the floor of 1.
  Rng rng(104);
  Eigen::MatrixXd X(30, 5);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    X.col(j).array() -= X.col(j).mean();
    for (Eigen::Index q = 0; q < j; ++q)
      X.col(j) -= X.col(q) * (X.col(q).dot(X.col(j)) / X.col(q).squaredNorm());
  }
  DesignMatrix od;
  for (int j = 0; j < 5; ++j) od.predictor_names.push_back("o" + std::to_string(j));
  od.X = X;
  od.y = Eigen::VectorXd::LinSpaced(30, 0.0, 1.0);
  for (const double v : vif(od))
    require_close(v, 1.0, 1e-10, "orthogonal design vif");
}

// ---------------------------------------------------------------------------
// criterion 4: distance-decay exponents survive a round trip through all
// three estimators

void criterion4() {
  const DistanceMatrix dm = ring(10);
  const std::vector<double> betas = {0.85, 1.03, 1.11, 2.0};
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    const double beta = betas[bi];
    Rng rng(200 + bi);
    std::vector<double> p(10);
    for (auto& v : p) v = std::exp(rng.uniform(0.5, 2.5));
    const std::vector<double> x = gauge(p);
    const FlowMatrix fm = generate_gravity(p, beta, dm, 0.0, 300 + bi);

    const GravityFit ll = fit_loglinear(fm, dm);
    require_close(ll.beta, beta, 1e-6, "log-linear beta");
    for (std::size_t i = 0; i < 10; ++i)
      require_close(ll.attractions.at(dm.cities[i]), x[i], 1e-6,
                    "log-linear attraction " + dm.cities[i]);

    const GravityFit mm = fit_minimax(fm, dm);
    require(mm.fit_metric <= 1e-7, "minimax deviation is zero at zero noise");
    require_close(mm.beta, beta, 1e-6, "minimax beta");
    for (std::size_t i = 0; i < 10; ++i)
      require_close(mm.attractions.at(dm.cities[i]), x[i], 1e-6,
                    "minimax attraction " + dm.cities[i]);

    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      Rng prng(1000 * (bi + 1) + static_cast<std::uint64_t>(s));
      std::vector<double> ps(10);
      for (auto& v : ps) v = std::exp(prng.uniform(0.5, 2.5));
      const FlowMatrix noisy = generate_gravity(
          ps, beta, dm, 0.1, 7777 + static_cast<std::uint64_t>(s));
      const GravityFit nf = fit_nullmodel(noisy, dm);
      worst = std::max(worst, std::fabs(nf.beta - beta));
    }
    require(worst <= 0.2, "null-model beta within 0.2 over 100 noisy draws "
                          "(worst " + std::to_string(worst) + ")");
  }
}

// ---------------------------------------------------------------------------
// criterion 5: a planted year-over-year decline in the decay exponent is
// preserved by every estimator

void criterion5() {
  SynthOptions opt;
  opt.flow_sigma = 0.0;
  opt.gdp_sigma = 0.0;
  const std::vector<int> years = {2015, 2016, 2017, 2018};
  const SynthResult synth =
      synth_dataset(10, years, {2.0, 1.9, 1.8, 1.7}, 77, opt);
  const DistanceMatrix dm = synth.dataset.distance_matrix();
  for (const char* method : {"loglinear", "minimax", "null"}) {
    double prev = std::numeric_limits<double>::infinity();
    for (const int year : years) {
      const FlowMatrix fm =
          synth.dataset.flow_matrix(year, VehicleClass::CarsBuses);
      GravityFit fit;
      if (std::string(method) == "loglinear") fit = fit_loglinear(fm, dm);
      else if (std::string(method) == "minimax") fit = fit_minimax(fm, dm);
      else fit = fit_nullmodel(fm, dm);
      require(fit.beta < prev,
              std::string(method) + " beta decreases through " +
                  std::to_string(year));
      prev = fit.beta;
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 6: the simplex solver agrees with exhaustive vertex enumeration

void criterion6() {
  Rng rng(106);
  for (int t = 0; t < 20; ++t) {
    const std::size_t nv = 2 + static_cast<std::size_t>(t % 7);  // 2..8 vars
    lp::Problem p;
    p.objective.resize(nv);
    for (auto& c : p.objective) c = rng.uniform(-5.0, 5.0);
    std::vector<double> x0(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      lp::Constraint box;
      box.coeffs.assign(nv, 0.0);
      box.coeffs[v] = 1.0;
      box.rel = lp::Relation::LessEq;
      box.rhs = rng.uniform(1.0, 10.0);
      x0[v] = box.rhs / 2.0;
      p.constraints.push_back(std::move(box));
    }
    const int extras = 1 + static_cast<int>(rng.index(3));
    for (int e = 0; e < extras; ++e) {
      lp::Constraint c;
      c.coeffs.resize(nv);
      double lhs = 0.0;
      for (std::size_t v = 0; v < nv; ++v) {
        c.coeffs[v] = rng.uniform(-3.0, 3.0);
        lhs += c.coeffs[v] * x0[v];
      }
      if (rng.uniform(0.0, 1.0) < 0.5) {
        c.rel = lp::Relation::LessEq;
        c.rhs = lhs + rng.uniform(0.1, 2.0);
      } else {
        c.rel = lp::Relation::GreaterEq;
        c.rhs = lhs - rng.uniform(0.1, 2.0);
      }
      p.constraints.push_back(std::move(c));
    }
    const lp::Solution sol = lp::solve_lp(p);
    require(sol.status == lp::Status::Optimal,
            "random boxed problem " + std::to_string(t) + " solves");
    const oracles::VertexOptimum best = oracles::lp_enumerate(p);
    require(best.feasible, "vertex enumeration finds the region");
    require_close(sol.objective, best.objective, 1e-8,
                  "objective vs enumeration on problem " + std::to_string(t));
  }

  // A classic cycling example: must terminate at the optimum.
  lp::Problem beale;
  beale.objective = {-0.75, 150.0, -0.02, 6.0};
  beale.constraints = {
      {{0.25, -60.0, -1.0 / 25.0, 9.0}, lp::Relation::LessEq, 0.0},
      {{0.5, -90.0, -1.0 / 50.0, 3.0}, lp::Relation::LessEq, 0.0},
      {{0.0, 0.0, 1.0, 0.0}, lp::Relation::LessEq, 1.0}};
  const lp::Solution sol = lp::solve_lp(beale);
  require(sol.status == lp::Status::Optimal, "degenerate problem terminates");
  require_close(sol.objective, -0.05, 1e-9, "degenerate problem optimum");
}

// ---------------------------------------------------------------------------
// criterion 7: centrality scores agree with brute-force references

void criterion7() {
  for (int t = 0; t < 5; ++t) {
    WeightedGraph g;
    for (int i = 0; i < 7; ++i) g.nodes.push_back("N" + std::to_string(i));
    g.directed = false;
    g.weight_kind = WeightKind::DistanceKm;
    Rng rng(400 + static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = i + 1; j < 7; ++j)
        g.add_edge(i, j, rng.uniform(1.0, 10.0));

    const auto bw = betweenness(g);
    const auto bw_want = oracles::exhaustive_betweenness(g);
    for (std::size_t i = 0; i < 7; ++i)
      require_close(bw.at(g.nodes[i]), bw_want[i], 1e-10,
                    "betweenness on undirected graph " + std::to_string(t));

    const auto cl = closeness(g);
    const auto sp = oracles::floyd_warshall(oracles::length_matrix(g));
    for (std::size_t i = 0; i < 7; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < 7; ++j) total += sp[i][j];
      require_close(cl.at(g.nodes[i]), 1.0 / total, 1e-10,
                    "closeness on undirected graph " + std::to_string(t));
    }
  }

  for (int t = 0; t < 5; ++t) {
    WeightedGraph g;
    for (int i = 0; i < 7; ++i) g.nodes.push_back("N" + std::to_string(i));
    g.directed = true;
    g.weight_kind = WeightKind::FlowVolume;
    Rng rng(500 + static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j)
        if (i != j && rng.uniform(0.0, 1.0) < 0.55)
          g.add_edge(i, j, rng.uniform(1.0, 10.0));

    const auto bw = betweenness(g);
    const auto bw_want = oracles::exhaustive_betweenness(g);
    for (std::size_t i = 0; i < 7; ++i)
      require_close(bw.at(g.nodes[i]), bw_want[i], 1e-10,
                    "betweenness on directed graph " + std::to_string(t));

    const auto pr = pagerank(g);
    const auto pr_want = oracles::pagerank_dense(g, 0.85);
    double sum = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      require_close(pr.at(g.nodes[i]), pr_want[i], 1e-9,
                    "pagerank on directed graph " + std::to_string(t));
      sum += pr.at(g.nodes[i]);
    }
    require_close(sum, 1.0, 1e-9, "pagerank mass conservation");

    WeightedGraph scaled = g;
    for (auto& e : scaled.edges) e.w *= 41.5;
    const auto pr2 = pagerank(scaled);
    for (std::size_t i = 0; i < 7; ++i)
      require_close(pr2.at(g.nodes[i]), pr.at(g.nodes[i]), 1e-12,
                    "pagerank scale invariance");
  }

  WeightedGraph complete;
  for (int i = 0; i < 6; ++i) complete.nodes.push_back("N" + std::to_string(i));
  complete.directed = false;
  complete.weight_kind = WeightKind::DistanceKm;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) complete.add_edge(i, j, 2.5);
  for (const auto& [node, score] : pagerank(complete))
    require_close(score, 1.0 / 6.0, 1e-12, "uniform pagerank on " + node);
}

// ---------------------------------------------------------------------------
// criterion 8: flow components are orthonormal, reconstructive, and select
// the planted dominant sub-network

void criterion8() {
  FlowMatrix m = make_flow_matrix(2015, VehicleClass::CarsBuses,
                                  {"N0", "N1", "N2", "N3", "N4", "N5", "N6", "N7"});
  Rng rng(108);
  for (auto& v : m.volume) v = rng.uniform(1.0, 100.0);
  const PcaResult r = pca_flows(m);
  const auto k = static_cast<Eigen::Index>(r.components());

  const Eigen::MatrixXd gram = r.loadings.transpose() * r.loadings;
  require((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-9,
          "loadings are orthonormal");

  Eigen::MatrixXd z(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j)
      z(i, j) = i == j ? 0.0
                       : m.at(static_cast<std::size_t>(i),
                              static_cast<std::size_t>(j));
  for (Eigen::Index j = 0; j < 8; ++j) {
    z.col(j).array() -= z.col(j).mean();
    z.col(j) /= std::sqrt(z.col(j).squaredNorm() / 7.0);
  }
  Eigen::VectorXd sdev(k);
  for (Eigen::Index l = 0; l < k; ++l)
    sdev[l] = r.component_sdev[static_cast<std::size_t>(l)];
  const Eigen::MatrixXd rebuilt =
      r.scores * sdev.asDiagonal() * r.loadings.transpose();
  require((rebuilt - z).cwiseAbs().maxCoeff() <= 1e-9,
          "components reconstruct the standardized flows");

  FlowMatrix rank1 = make_flow_matrix(2015, VehicleClass::CarsBuses,
                                      {"A", "B", "C", "D", "E"});
  const double u[5] = {1, 2, 3, 4, 5}, v[5] = {2, 1, 3, 5, 4};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) rank1.at(i, j) = u[i] * v[j];
  const PcaResult r1 = pca_flows(rank1, true, true);
  require_close(r1.explained_variance_ratio[0], 1.0, 1e-9,
                "rank-one flows concentrate on one component");

  FlowMatrix block = make_flow_matrix(2015, VehicleClass::CarsBuses,
                                      {"A", "B", "C", "D", "E", "F"});
  const double g1[6] = {20, 20, 5, 5, 5, 5};
  const double g2[6] = {3, 9, 3, 9, 3, 9};
  const double g3[6] = {9, 3, 9, 3, 9, 3};
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 4; ++j) block.at(i, j) = g1[i];
    block.at(i, 4) = g2[i];
    block.at(i, 5) = g3[i];
  }
  const PcaResult rb = pca_flows(block, true, true);
  const SubNetwork sub = extract_subnetwork(rb, block, 1, 0.3, 1.0);
  require(sub.destinations == std::set<std::string>{"A", "B", "C", "D"},
          "planted destinations recovered");
  require(sub.origins == std::set<std::string>{"A", "B"},
          "planted origins recovered");
  require(sub.edges.size() == 6, "planted sub-network edges recovered");
}

// ---------------------------------------------------------------------------
// criterion 9: model selection identifies a log-normal sample, with exact
// aic bookkeeping and a full bootstrap

void criterion9() {
  Rng rng(7);
  std::vector<double> x(10000);
  for (auto& v : x) v = std::exp(1.0 + 0.5 * rng.normal());
  const DistFitResult r = fit_distributions(x, 1000, 1);
  require(r.best_model == "lognormal", "log-normal sample wins selection");
  for (const auto& [name, fit] : r.models)
    require(fit.aic == 4.0 - 2.0 * fit.log_likelihood,
            "aic identity for " + name);

  std::vector<double> logs(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    logs[i] = std::log(x[i]);
    sum += logs[i];
  }
  const double mu = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (const double v : logs) ss += (v - mu) * (v - mu);
  const double sigma = std::sqrt(ss / static_cast<double>(x.size()));
  require_close(r.models.at("lognormal").params.at("mu"), mu, 1e-12,
                "lognormal mu equals the log-sample mean");
  require_close(r.models.at("lognormal").params.at("sigma"), sigma, 1e-12,
                "lognormal sigma equals the log-sample sd");

  require(r.bootstrap.size() == 1000, "bootstrap draw count");
  require(r.skewness_bootstrap_sd > 0.0, "skewness spread is positive");
  require(r.kurtosis_bootstrap_sd > 0.0, "kurtosis spread is positive");
}

// ---------------------------------------------------------------------------
// criterion 10: the full pipeline is complete, accurate against planted
// ground truth, and byte-identical across reruns

void criterion10() {
  const fs::path base = "acceptance_tmp";
  fs::remove_all(base);
  const std::string data = (base / "data").string();
  SynthOptions opt;
  // Noise-free flows would be symmetric and make inflow/outflow collinear;
  // mild flow noise keeps the design full rank while gdp remains an exact
  // function of the realized features.
  opt.flow_sigma = 0.05;
  opt.gdp_sigma = 0.0;
  const std::vector<int> years = {2015, 2016, 2017, 2018};
  const SynthResult synth =
      synth_dataset(13, years, {2.0, 1.8, 1.6, 1.4}, 42, opt);
  write_dataset(synth.dataset, data);

  PipelineConfig cfg;
  cfg.set_data_dir(data);
  cfg.bootstrap_n = 200;
  cfg.out_dir = (base / "out1").string();
  std::ostringstream log1;
  require(run_pipeline(cfg, log1) == 0, "pipeline run 1 succeeds: " + log1.str());
  cfg.out_dir = (base / "out2").string();
  std::ostringstream log2;
  require(run_pipeline(cfg, log2) == 0, "pipeline run 2 succeeds: " + log2.str());

  const std::string out1 = (base / "out1").string();
  for (const char* name :
       {"features.json", "regression.json", "regression_diagnostics.json",
        "gravity.json", "network.json", "pca.json", "distfit.json"})
    require(fs::exists(fs::path(out1) / name), std::string(name) + " written");
  for (const int year : years) {
    require(fs::exists(fs::path(out1) / ("network_correlations_" +
                                         std::to_string(year) + ".csv")),
            "correlation csv for " + std::to_string(year));
    for (const char* cls : {"carbus", "truck"}) {
      const std::string stem =
          "pca_subnetwork_" + std::to_string(year) + "_" + cls;
      require(fs::exists(fs::path(out1) / (stem + ".dot")), stem + ".dot");
      require(fs::exists(fs::path(out1) / (stem + ".geojson")),
              stem + ".geojson");
    }
  }
  require(fs::exists(fs::path(out1) / "distfit_bootstrap.csv"),
          "bootstrap csv written");

  const Json reg = Json::parse(read_file(out1 + "/regression.json"));
  require(reg.at("coefficients").size() == 8, "eight regression coefficients");
  require(reg.at("r_squared").get<double>() > 0.999999,
          "planted gdp fits exactly");
  const Json& want = synth.ground_truth.at("gdp_coefficients");
  require_close(reg.at("intercept").get<double>(),
                want.at("intercept").get<double>(),
                1e-8 * std::max(1.0, std::fabs(want.at("intercept").get<double>())),
                "planted intercept recovered");
  for (const auto& name : kFeatureNames) {
    const double got = reg.at("coefficients").at(name).get<double>();
    const double expect = want.at(name).get<double>();
    require(std::fabs(got - expect) <= 1e-8 * std::max(1.0, std::fabs(expect)),
            std::string("planted coefficient recovered for ") + name +
                " (got " + std::to_string(got) + ", want " +
                std::to_string(expect) + ")");
  }

  const Json gravity = Json::parse(read_file(out1 + "/gravity.json"));
  const std::vector<double> betas = {2.0, 1.8, 1.6, 1.4};
  for (std::size_t t = 0; t < years.size(); ++t)
    for (const char* cls : {"carbus", "truck"}) {
      const Json& cell = gravity.at(std::to_string(years[t])).at(cls);
      for (const char* method : {"loglinear", "minimax", "null"})
        require_close(cell.at(method).at("beta").get<double>(), betas[t], 0.2,
                      std::string("pipeline ") + method + " beta for " +
                          std::to_string(years[t]) + "/" + cls);
    }

  const Json network = Json::parse(read_file(out1 + "/network.json"));
  require(network.at("distance").at("betweenness").size() == 13,
          "distance betweenness covers every city");
  require(network.at("years").at("2015").contains("gdp_correlations"),
          "gdp correlations present");

  const Json pca = Json::parse(read_file(out1 + "/pca.json"));
  require(pca.at("2015").at("carbus").at("pca")
              .at("explained_variance_ratio").size() == 12,
          "pca keeps n-1 components");

  const Json fit = Json::parse(read_file(out1 + "/distfit.json"));
  require(fit.at("models").size() == 4, "four candidate models");
  require(fit.at("bootstrap_n").get<int>() == 200, "bootstrap count");

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    const std::string name = entry.path().filename().string();
    const fs::path other = base / "out2" / name;
    require(fs::exists(other), name + " exists in the rerun");
    require(read_file(entry.path().string()) == read_file(other.string()),
            name + " is byte-identical across reruns");
    ++compared;
  }
  require(compared >= 20, "every report compared");
  fs::remove_all(base);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    double budget_seconds;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "least squares recovers planted coefficients and matches the normal equations", 1.0, criterion1},
      {2, "ridge and lasso shrinkage paths are monotone with exact zero-crossings", 5.0, criterion2},
      {3, "variance inflation factors match independent auxiliary regressions", 5.0, criterion3},
      {4, "distance-decay exponents round-trip through all three estimators", 30.0, criterion4},
      {5, "a planted yearly decline in the decay exponent is preserved", 10.0, criterion5},
      {6, "simplex optima agree with exhaustive vertex enumeration", 10.0, criterion6},
      {7, "centrality scores agree with brute-force references", 10.0, criterion7},
      {8, "flow components are orthonormal, reconstructive, and select the planted sub-network", 5.0, criterion8},
      {9, "model selection identifies a log-normal sample with exact aic bookkeeping", 10.0, criterion9},
      {10, "pipeline reports are complete, accurate, and byte-identical across reruns", 60.0, criterion10},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && seconds > c.budget_seconds)
      error = "exceeded " + std::to_string(c.budget_seconds) + "s budget";
    if (error.empty()) {
      std::printf("[PASS] criterion %d: %s (%.2fs)\n", c.id, c.label, seconds);
    } else {
      std::printf("[FAIL] criterion %d: %s (%.2fs): %s\n", c.id, c.label,
                  seconds, error.c_str());
      ++failures;
    }
  }
  if (failures > 0)
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  else
    std::printf("all %zu criteria passed\n", criteria.size());
  return failures == 0 ? 0 : 1;
}
