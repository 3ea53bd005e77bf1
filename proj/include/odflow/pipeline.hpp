#pragma once

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "odflow/io.hpp"

namespace odflow {

inline const std::vector<std::string> kPipelineStages = {
    "features", "regression", "gravity", "network", "pca", "distfit"};

struct PipelineConfig {
  std::string cities_csv, flows_csv, distances_csv, gdp_csv;
  std::string out_dir = "reports";
  std::vector<int> years;          // empty: every year carrying both classes
  std::vector<std::string> stages; // empty: all, always in canonical order

  std::string regression_method = "ols";  // ols|glm|ridge|lasso
  double lambda = -1.0;                   // < 0: calibrate by LOO CV

  std::vector<std::string> gravity_methods = {"loglinear", "minimax", "null"};
  bool null_log_space = true;

  double damping = 0.85;

  int pca_component = 1;
  double pca_loading_threshold = 0.3;
  double pca_score_threshold = 1.0;
  bool pca_standardize = true;
  bool pca_include_diagonal = false;
  bool pca_signed_thresholds = false;

  int bootstrap_n = 1000;
  std::uint64_t seed = 1;

  // Point the four inputs at conventionally named files in one directory.
  void set_data_dir(const std::string& dir) {
    cities_csv = dir + "/cities.csv";
    flows_csv = dir + "/flows.csv";
    distances_csv = dir + "/distances.csv";
    gdp_csv = dir + "/gdp.csv";
  }
};

inline PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  if (j.contains("data_dir")) c.set_data_dir(j.at("data_dir").get<std::string>());
  if (j.contains("cities_csv")) c.cities_csv = j.at("cities_csv");
  if (j.contains("flows_csv")) c.flows_csv = j.at("flows_csv");
  if (j.contains("distances_csv")) c.distances_csv = j.at("distances_csv");
  if (j.contains("gdp_csv")) c.gdp_csv = j.at("gdp_csv");
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir");
  if (j.contains("years")) c.years = j.at("years").get<std::vector<int>>();
  if (j.contains("stages"))
    c.stages = j.at("stages").get<std::vector<std::string>>();
  if (j.contains("regression_method")) c.regression_method = j.at("regression_method");
  if (j.contains("lambda")) c.lambda = j.at("lambda");
  if (j.contains("gravity_methods"))
    c.gravity_methods = j.at("gravity_methods").get<std::vector<std::string>>();
  if (j.contains("null_log_space")) c.null_log_space = j.at("null_log_space");
  if (j.contains("damping")) c.damping = j.at("damping");
  if (j.contains("pca_component")) c.pca_component = j.at("pca_component");
  if (j.contains("pca_loading_threshold"))
    c.pca_loading_threshold = j.at("pca_loading_threshold");
  if (j.contains("pca_score_threshold"))
    c.pca_score_threshold = j.at("pca_score_threshold");
  if (j.contains("pca_standardize")) c.pca_standardize = j.at("pca_standardize");
  if (j.contains("pca_include_diagonal"))
    c.pca_include_diagonal = j.at("pca_include_diagonal");
  if (j.contains("pca_signed_thresholds"))
    c.pca_signed_thresholds = j.at("pca_signed_thresholds");
  if (j.contains("bootstrap_n")) c.bootstrap_n = j.at("bootstrap_n");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

namespace detail {

inline void check_config(const PipelineConfig& c) {
  const auto bad = [](const std::string& what) {
    throw Error(ErrorCode::ValidationError, "config: " + what);
  };
  for (const auto& s : c.stages)
    if (std::find(kPipelineStages.begin(), kPipelineStages.end(), s) ==
        kPipelineStages.end())
      bad("unknown stage '" + s + "'");
  if (c.regression_method != "ols" && c.regression_method != "glm" &&
      c.regression_method != "ridge" && c.regression_method != "lasso")
    bad("unknown regression method '" + c.regression_method + "'");
  for (const auto& m : c.gravity_methods)
    if (m != "loglinear" && m != "minimax" && m != "null")
      bad("unknown gravity method '" + m + "'");
  if (c.pca_loading_threshold < 0.0 || c.pca_score_threshold < 0.0)
    bad("pca thresholds must be >= 0");
  if (c.pca_component < 1) bad("pca component must be >= 1");
  if (c.bootstrap_n < 0) bad("bootstrap_n must be >= 0");
  if (!(c.damping > 0.0 && c.damping < 1.0)) bad("damping must be in (0,1)");
}

// Years that carry flow matrices for both vehicle classes.
inline std::vector<int> resolve_years(const RegionDataset& ds,
                                      const PipelineConfig& cfg) {
  std::vector<int> years;
  if (cfg.years.empty()) {
    for (const int y : ds.flow_years()) {
      bool both = true;
      for (const VehicleClass vc : kVehicleClasses)
        both &= ds.has_flow(y, vc);
      if (both) years.push_back(y);
    }
    if (years.empty())
      throw Error(ErrorCode::InsufficientData,
                  "no year carries flows for both vehicle classes");
  } else {
    years = cfg.years;
    for (const VehicleClass vc : kVehicleClasses)
      for (const int y : years)
        if (!ds.has_flow(y, vc))
          throw Error(ErrorCode::NoSuchYear,
                      std::string("no ") + vehicle_class_code(vc) +
                          " flows for year " + std::to_string(y));
  }
  return years;
}

// One regression design from the pooled feature rows; rows with an undefined
// ratio or a missing GDP value are dropped.
inline DesignMatrix build_design(const RegionDataset& ds,
                                 const std::vector<int>& years,
                                 int* dropped = nullptr) {
  std::vector<std::array<double, 8>> rows;
  std::vector<double> gdp;
  int skipped = 0;
  for (const int year : years) {
    const FeatureTable t = extract_features(ds, year);
    for (const auto& row : t.rows) {
      const auto g = ds.gdp_of(row.city, year);
      bool defined = g.has_value();
      for (const double v : row.values) defined &= feature_defined(v);
      if (!defined) {
        ++skipped;
        continue;
      }
      rows.push_back(row.values);
      gdp.push_back(*g);
    }
  }
  if (dropped) *dropped = skipped;
  DesignMatrix d;
  d.predictor_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  d.response_name = "gdp";
  d.X.resize(static_cast<Eigen::Index>(rows.size()), 8);
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < 8; ++k)
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][k];
    d.y[static_cast<Eigen::Index>(i)] = gdp[i];
  }
  return d;
}

inline GravityFit fit_gravity(const std::string& method, const FlowMatrix& fm,
                              const DistanceMatrix& dm, bool null_log_space) {
  if (method == "loglinear") return fit_loglinear(fm, dm);
  if (method == "minimax") return fit_minimax(fm, dm);
  return fit_nullmodel(fm, dm, null_log_space);
}

inline void write_report(const std::string& out_dir, const std::string& name,
                         const Json& j) {
  write_file_atomic(out_dir + "/" + name, j.dump(2) + "\n");
}

}  // namespace detail

// Runs the selected stages in canonical order over the loaded dataset,
// writing one JSON report per stage plus CSV/DOT/GeoJSON side outputs.
// Returns 0 on success, 1 on a data problem, 2 on a numerical failure.
inline int run_pipeline(const PipelineConfig& cfg,
                        std::ostream& log = std::cerr) {
  try {
    detail::check_config(cfg);
    const RegionDataset ds =
        load_dataset(cfg.cities_csv, cfg.flows_csv, cfg.distances_csv,
                     cfg.gdp_csv);
    const std::vector<int> years = detail::resolve_years(ds, cfg);
    std::set<std::string> stages(cfg.stages.begin(), cfg.stages.end());
    if (stages.empty())
      stages.insert(kPipelineStages.begin(), kPipelineStages.end());

    if (stages.count("features")) {
      FeatureTable merged;
      for (const int year : years) {
        FeatureTable t = extract_features(ds, year);
        merged.rows.insert(merged.rows.end(), t.rows.begin(), t.rows.end());
        merged.undefined_ratios.insert(merged.undefined_ratios.end(),
                                       t.undefined_ratios.begin(),
                                       t.undefined_ratios.end());
      }
      detail::write_report(cfg.out_dir, "features.json", to_json(merged));
    }

    if (stages.count("regression")) {
      int dropped = 0;
      const DesignMatrix design = detail::build_design(ds, years, &dropped);
      RegressionReport report;
      Json extra;
      if (cfg.regression_method == "ols") {
        report = fit_ols(design);
      } else if (cfg.regression_method == "glm") {
        report = fit_log_glm(design);
      } else {
        const PenaltyKind kind = cfg.regression_method == "ridge"
                                     ? PenaltyKind::Ridge
                                     : PenaltyKind::Lasso;
        double lambda = cfg.lambda;
        if (lambda < 0.0) {
          const double top = lasso_lambda_max(design);
          std::vector<double> grid = {0.0};
          for (int k = -12; k <= 0; ++k)
            grid.push_back(top * std::pow(10.0, k / 3.0));
          const LambdaCalibration cal = calibrate_lambda(design, kind, grid);
          lambda = cal.lambda;
          extra["lambda_grid"] = Json::array();
          extra["cv_rmse"] = Json::array();
          for (std::size_t i = 0; i < grid.size(); ++i) {
            extra["lambda_grid"].push_back(j12(grid[i]));
            extra["cv_rmse"].push_back(j12(cal.cv_scores[i]));
          }
        }
        report = kind == PenaltyKind::Ridge ? fit_ridge(design, lambda)
                                            : fit_lasso(design, lambda);
      }
      Json j = to_json(report);
      j["dropped_rows"] = dropped;
      j["years"] = years;
      for (auto& [k, v] : extra.items()) j[k] = v;
      detail::write_report(cfg.out_dir, "regression.json", j);
      detail::write_report(cfg.out_dir, "regression_diagnostics.json",
                           to_json(diagnostics(report, design)));
    }

    if (stages.count("gravity")) {
      const DistanceMatrix dm = ds.distance_matrix();
      Json j;
      for (const int year : years)
        for (const VehicleClass vc : kVehicleClasses) {
          const FlowMatrix fm = ds.flow_matrix(year, vc);
          for (const auto& method : cfg.gravity_methods)
            j[std::to_string(year)][vehicle_class_code(vc)][method] = to_json(
                detail::fit_gravity(method, fm, dm, cfg.null_log_space));
        }
      detail::write_report(cfg.out_dir, "gravity.json", j);
    }

    if (stages.count("network")) {
      const DistanceMatrix dm = ds.distance_matrix();
      const WeightedGraph gd = build_distance_graph(dm);
      const NetworkMetrics md = compute_metrics(gd, cfg.damping);
      Json j;
      j["distance"] = to_json(md);
      for (const int year : years) {
        const NetworkMetrics mc = compute_metrics(
            build_flow_graph(ds.flow_matrix(year, VehicleClass::CarsBuses)),
            cfg.damping);
        const NetworkMetrics mk = compute_metrics(
            build_flow_graph(ds.flow_matrix(year, VehicleClass::Trucks)),
            cfg.damping);
        std::map<std::string, double> gdp;
        for (const auto& c : ds.cities) {
          const auto g = ds.gdp_of(c.id, year);
          if (g) gdp[c.id] = *g;
        }
        Json y;
        y["carbus"] = to_json(mc);
        y["truck"] = to_json(mk);
        if (gdp.size() == ds.cities.size()) {
          const auto rounded = [](const std::map<std::string, double>& m) {
            Json r;
            for (const auto& [k, v] : m) r[k] = j12(v);
            return r;
          };
          y["gdp_correlations"]["distance"] = rounded(correlate_with_gdp(md, gdp));
          y["gdp_correlations"]["carbus"] = rounded(correlate_with_gdp(mc, gdp));
          y["gdp_correlations"]["truck"] = rounded(correlate_with_gdp(mk, gdp));

          std::vector<std::string> names = {"GDP",          "Betw(D)",
                                            "Closeness(D)", "Closeness(C)",
                                            "Closeness(K)", "PageRank(C)",
                                            "PageRank(K)"};
          std::vector<std::vector<double>> series(names.size());
          for (const auto& c : ds.cities) {
            series[0].push_back(gdp.at(c.id));
            series[1].push_back(md.betweenness.at(c.id));
            series[2].push_back(md.closeness.at(c.id));
            series[3].push_back(mc.closeness.at(c.id));
            series[4].push_back(mk.closeness.at(c.id));
            series[5].push_back(mc.pagerank.at(c.id));
            series[6].push_back(mk.pagerank.at(c.id));
          }
          write_file_atomic(
              cfg.out_dir + "/network_correlations_" + std::to_string(year) +
                  ".csv",
              correlation_matrix_csv(names, series));
        }
        j["years"][std::to_string(year)] = std::move(y);
      }
      detail::write_report(cfg.out_dir, "network.json", j);
    }

    if (stages.count("pca")) {
      bool coords = !ds.cities.empty();
      for (const auto& c : ds.cities) coords &= c.lon && c.lat;
      Json j;
      for (const int year : years)
        for (const VehicleClass vc : kVehicleClasses) {
          const FlowMatrix fm = ds.flow_matrix(year, vc);
          const PcaResult pca =
              pca_flows(fm, cfg.pca_standardize, cfg.pca_include_diagonal);
          const SubNetwork sub = extract_subnetwork(
              pca, fm, cfg.pca_component, cfg.pca_loading_threshold,
              cfg.pca_score_threshold, cfg.pca_signed_thresholds);
          Json cell;
          cell["pca"] = to_json(pca);
          cell["subnetwork"] = to_json(sub);
          j[std::to_string(year)][vehicle_class_code(vc)] = std::move(cell);
          const std::string base = cfg.out_dir + "/pca_subnetwork_" +
                                   std::to_string(year) + "_" +
                                   vehicle_class_code(vc);
          write_file_atomic(base + ".dot", to_dot(sub));
          if (coords)
            write_file_atomic(base + ".geojson",
                              to_geojson(sub, ds).dump(2) + "\n");
        }
      detail::write_report(cfg.out_dir, "pca.json", j);
    }

    if (stages.count("distfit")) {
      std::vector<double> sample;
      for (const auto& g : ds.gdp)
        if (std::find(years.begin(), years.end(), g.year) != years.end())
          sample.push_back(g.gdp);
      const DistFitResult fit =
          fit_distributions(sample, cfg.bootstrap_n, cfg.seed);
      detail::write_report(cfg.out_dir, "distfit.json", to_json(fit));
      write_file_atomic(cfg.out_dir + "/distfit_bootstrap.csv",
                        bootstrap_csv(fit));
    }
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.is_data_error() ? 1 : 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace odflow
