// Command-line front end: one subcommand per analysis stage plus dataset
// validation, synthetic data generation, and the full pipeline runner.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odflow/pipeline.hpp"

namespace {

using odflow::Error;
using odflow::ErrorCode;
using odflow::Json;
using odflow::RegionDataset;
using odflow::VehicleClass;

struct DataArgs {
  std::string dir, cities, flows, distances, gdp;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", dir,
                    "Directory holding cities.csv, flows.csv, distances.csv "
                    "and gdp.csv");
    cmd->add_option("--cities", cities, "cities.csv (overrides --data)");
    cmd->add_option("--flows", flows, "flows.csv (overrides --data)");
    cmd->add_option("--distances", distances, "distances.csv (overrides --data)");
    cmd->add_option("--gdp", gdp, "gdp.csv (overrides --data)");
  }

  void fill(odflow::PipelineConfig* cfg) const {
    if (!dir.empty()) cfg->set_data_dir(dir);
    if (!cities.empty()) cfg->cities_csv = cities;
    if (!flows.empty()) cfg->flows_csv = flows;
    if (!distances.empty()) cfg->distances_csv = distances;
    if (!gdp.empty()) cfg->gdp_csv = gdp;
    if (cfg->cities_csv.empty() || cfg->flows_csv.empty() ||
        cfg->distances_csv.empty() || cfg->gdp_csv.empty())
      throw Error(ErrorCode::ValidationError,
                  "missing input: pass --data DIR or all of "
                  "--cities/--flows/--distances/--gdp");
  }

  RegionDataset load(bool reject_invalid = true) const {
    odflow::PipelineConfig cfg;
    fill(&cfg);
    return odflow::load_dataset(cfg.cities_csv, cfg.flows_csv,
                                cfg.distances_csv, cfg.gdp_csv, reject_invalid);
  }
};

void emit(const Json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    odflow::write_file_atomic(out, j.dump(2) + "\n");
}

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty())
    std::cout << text;
  else
    odflow::write_file_atomic(out, text);
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_data_error() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional GDP and highway origin-destination flow analysis"};
  app.require_subcommand(1);
  int rc = 0;

  // --- validate ------------------------------------------------------------
  auto* validate = app.add_subcommand(
      "validate", "Check a dataset for referential and value problems");
  auto vd = std::make_shared<DataArgs>();
  auto v_out = std::make_shared<std::string>();
  vd->attach(validate);
  validate->add_option("--out", *v_out, "Write the report here (default stdout)");
  validate->callback([&rc, vd, v_out] {
    rc = guarded([&] {
      const RegionDataset ds = vd->load(/*reject_invalid=*/false);
      const odflow::ValidationReport report = odflow::validate(ds);
      emit(odflow::to_json(report), *v_out);
      return report.ok() ? 0 : 1;
    });
  });

  // --- features ------------------------------------------------------------
  auto* features = app.add_subcommand(
      "features", "Extract per-city flow features for one year");
  auto fd = std::make_shared<DataArgs>();
  auto f_year = std::make_shared<int>(0);
  auto f_out = std::make_shared<std::string>();
  fd->attach(features);
  features->add_option("--year", *f_year, "Flow year")->required();
  features->add_option("--out", *f_out, "Write the table here (default stdout)");
  features->callback([&rc, fd, f_year, f_out] {
    rc = guarded([&] {
      emit(odflow::to_json(odflow::extract_features(fd->load(), *f_year)),
           *f_out);
      return 0;
    });
  });

  // --- regress -------------------------------------------------------------
  auto* regress = app.add_subcommand(
      "regress", "Regress GDP on the eight flow features");
  auto rd = std::make_shared<DataArgs>();
  auto r_years = std::make_shared<std::vector<int>>();
  auto r_method = std::make_shared<std::string>("ols");
  auto r_lambda = std::make_shared<double>(-1.0);
  auto r_diag = std::make_shared<bool>(false);
  auto r_out = std::make_shared<std::string>();
  rd->attach(regress);
  regress->add_option("--year", *r_years,
                      "Year(s) to pool (default: all with both classes)");
  regress->add_option("--method", *r_method, "ols|glm|ridge|lasso")
      ->check(CLI::IsMember({"ols", "glm", "ridge", "lasso"}));
  regress->add_option("--lambda", *r_lambda,
                      "Penalty weight; omit to calibrate by leave-one-out CV");
  regress->add_flag("--diagnostics", *r_diag, "Include residual diagnostics");
  regress->add_option("--out", *r_out, "Write the report here (default stdout)");
  regress->callback([&rc, rd, r_years, r_method, r_lambda, r_diag, r_out] {
    rc = guarded([&] {
      const RegionDataset ds = rd->load();
      odflow::PipelineConfig cfg;
      cfg.years = *r_years;
      const std::vector<int> years = odflow::detail::resolve_years(ds, cfg);
      const odflow::DesignMatrix design = odflow::detail::build_design(ds, years);
      odflow::RegressionReport report;
      if (*r_method == "ols") {
        report = odflow::fit_ols(design);
      } else if (*r_method == "glm") {
        report = odflow::fit_log_glm(design);
      } else {
        const odflow::PenaltyKind kind = *r_method == "ridge"
                                             ? odflow::PenaltyKind::Ridge
                                             : odflow::PenaltyKind::Lasso;
        double lambda = *r_lambda;
        if (lambda < 0.0) {
          const double top = odflow::lasso_lambda_max(design);
          std::vector<double> grid = {0.0};
          for (int k = -12; k <= 0; ++k)
            grid.push_back(top * std::pow(10.0, k / 3.0));
          lambda = odflow::calibrate_lambda(design, kind, grid).lambda;
        }
        report = kind == odflow::PenaltyKind::Ridge
                     ? odflow::fit_ridge(design, lambda)
                     : odflow::fit_lasso(design, lambda);
      }
      Json j = odflow::to_json(report);
      j["years"] = years;
      if (*r_diag)
        j["diagnostics"] = odflow::to_json(odflow::diagnostics(report, design));
      emit(j, *r_out);
      return 0;
    });
  });

  // --- gravity -------------------------------------------------------------
  auto* gravity = app.add_subcommand(
      "gravity", "Fit gravity models to one year/class flow matrix");
  auto gd = std::make_shared<DataArgs>();
  auto g_year = std::make_shared<int>(0);
  auto g_class = std::make_shared<std::string>();
  auto g_methods = std::make_shared<std::vector<std::string>>();
  auto g_raw = std::make_shared<bool>(false);
  auto g_out = std::make_shared<std::string>();
  gd->attach(gravity);
  gravity->add_option("--year", *g_year, "Flow year")->required();
  gravity->add_option("--class", *g_class, "carbus|truck")
      ->required()
      ->check(CLI::IsMember({"carbus", "truck"}));
  gravity->add_option("--method", *g_methods,
                      "loglinear|minimax|null (repeatable; default all)")
      ->check(CLI::IsMember({"loglinear", "minimax", "null"}));
  gravity->add_flag("--raw-distance", *g_raw,
                    "Null model: regress flow ratios on raw distance");
  gravity->add_option("--out", *g_out, "Write the fits here (default stdout)");
  gravity->callback([&rc, gd, g_year, g_class, g_methods, g_raw, g_out] {
    rc = guarded([&] {
      const RegionDataset ds = gd->load();
      const odflow::FlowMatrix fm =
          ds.flow_matrix(*g_year, odflow::parse_vehicle_class(*g_class));
      const odflow::DistanceMatrix dm = ds.distance_matrix();
      std::vector<std::string> methods = *g_methods;
      if (methods.empty()) methods = {"loglinear", "minimax", "null"};
      Json j;
      for (const auto& m : methods)
        j[m] = odflow::to_json(
            odflow::detail::fit_gravity(m, fm, dm, !*g_raw));
      emit(j, *g_out);
      return 0;
    });
  });

  // --- network -------------------------------------------------------------
  auto* network = app.add_subcommand(
      "network", "Centrality metrics on distance and flow graphs");
  auto nd = std::make_shared<DataArgs>();
  auto n_year = std::make_shared<int>(0);
  auto n_damping = std::make_shared<double>(0.85);
  auto n_out = std::make_shared<std::string>();
  nd->attach(network);
  network->add_option("--year", *n_year, "Flow year")->required();
  network->add_option("--damping", *n_damping, "PageRank damping (default 0.85)");
  network->add_option("--out", *n_out, "Write the metrics here (default stdout)");
  network->callback([&rc, nd, n_year, n_damping, n_out] {
    rc = guarded([&] {
      const RegionDataset ds = nd->load();
      const odflow::NetworkMetrics md = odflow::compute_metrics(
          odflow::build_distance_graph(ds.distance_matrix()), *n_damping);
      const odflow::NetworkMetrics mc = odflow::compute_metrics(
          odflow::build_flow_graph(
              ds.flow_matrix(*n_year, VehicleClass::CarsBuses)),
          *n_damping);
      const odflow::NetworkMetrics mk = odflow::compute_metrics(
          odflow::build_flow_graph(ds.flow_matrix(*n_year, VehicleClass::Trucks)),
          *n_damping);
      Json j;
      j["distance"] = odflow::to_json(md);
      j["carbus"] = odflow::to_json(mc);
      j["truck"] = odflow::to_json(mk);
      std::map<std::string, double> gdp;
      for (const auto& c : ds.cities) {
        const auto g = ds.gdp_of(c.id, *n_year);
        if (g) gdp[c.id] = *g;
      }
      if (gdp.size() == ds.cities.size()) {
        j["gdp_correlations"]["distance"] = odflow::correlate_with_gdp(md, gdp);
        j["gdp_correlations"]["carbus"] = odflow::correlate_with_gdp(mc, gdp);
        j["gdp_correlations"]["truck"] = odflow::correlate_with_gdp(mk, gdp);
      }
      emit(j, *n_out);
      return 0;
    });
  });

  // --- pca -----------------------------------------------------------------
  auto* pca = app.add_subcommand(
      "pca", "Principal components of one year/class flow matrix");
  auto pd = std::make_shared<DataArgs>();
  auto p_year = std::make_shared<int>(0);
  auto p_class = std::make_shared<std::string>();
  auto p_component = std::make_shared<int>(1);
  auto p_lt = std::make_shared<double>(0.3);
  auto p_st = std::make_shared<double>(1.0);
  auto p_signed = std::make_shared<bool>(false);
  auto p_nostd = std::make_shared<bool>(false);
  auto p_diag = std::make_shared<bool>(false);
  auto p_out = std::make_shared<std::string>();
  auto p_dot = std::make_shared<std::string>();
  auto p_geo = std::make_shared<std::string>();
  pd->attach(pca);
  pca->add_option("--year", *p_year, "Flow year")->required();
  pca->add_option("--class", *p_class, "carbus|truck")
      ->required()
      ->check(CLI::IsMember({"carbus", "truck"}));
  pca->add_option("--component", *p_component,
                  "Component for subnetwork extraction (1-based, default 1)");
  pca->add_option("--loading-threshold", *p_lt, "Destination cut (default 0.3)");
  pca->add_option("--score-threshold", *p_st, "Origin cut (default 1.0)");
  pca->add_flag("--signed", *p_signed,
                "Threshold signed values instead of magnitudes");
  pca->add_flag("--no-standardize", *p_nostd, "Skip unit-variance scaling");
  pca->add_flag("--include-diagonal", *p_diag, "Keep intra-city flows");
  pca->add_option("--out", *p_out, "Write the result here (default stdout)");
  pca->add_option("--dot", *p_dot, "Also write the subnetwork as Graphviz DOT");
  pca->add_option("--geojson", *p_geo, "Also write the subnetwork as GeoJSON");
  pca->callback([&rc, pd, p_year, p_class, p_component, p_lt, p_st, p_signed,
                 p_nostd, p_diag, p_out, p_dot, p_geo] {
    rc = guarded([&] {
      const RegionDataset ds = pd->load();
      const odflow::FlowMatrix fm =
          ds.flow_matrix(*p_year, odflow::parse_vehicle_class(*p_class));
      const odflow::PcaResult result =
          odflow::pca_flows(fm, !*p_nostd, *p_diag);
      const odflow::SubNetwork sub = odflow::extract_subnetwork(
          result, fm, *p_component, *p_lt, *p_st, *p_signed);
      Json j;
      j["pca"] = odflow::to_json(result);
      j["subnetwork"] = odflow::to_json(sub);
      emit(j, *p_out);
      if (!p_dot->empty()) emit_text(odflow::to_dot(sub), *p_dot);
      if (!p_geo->empty())
        emit_text(odflow::to_geojson(sub, ds).dump(2) + "\n", *p_geo);
      return 0;
    });
  });

  // --- distfit -------------------------------------------------------------
  auto* distfit = app.add_subcommand(
      "distfit", "Fit candidate distributions to the GDP sample");
  auto dd = std::make_shared<DataArgs>();
  auto d_years = std::make_shared<std::vector<int>>();
  auto d_boot = std::make_shared<int>(1000);
  auto d_seed = std::make_shared<std::uint64_t>(1);
  auto d_out = std::make_shared<std::string>();
  auto d_csv = std::make_shared<std::string>();
  dd->attach(distfit);
  distfit->add_option("--year", *d_years,
                      "Year(s) to pool (default: every GDP year)");
  distfit->add_option("--bootstrap", *d_boot,
                      "Bootstrap resamples for moment spread (default 1000)");
  distfit->add_option("--seed", *d_seed, "Bootstrap RNG seed (default 1)");
  distfit->add_option("--out", *d_out, "Write the fits here (default stdout)");
  distfit->add_option("--bootstrap-csv", *d_csv,
                      "Also write bootstrap skewness/kurtosis draws as CSV");
  distfit->callback([&rc, dd, d_years, d_boot, d_seed, d_out, d_csv] {
    rc = guarded([&] {
      const RegionDataset ds = dd->load();
      std::vector<double> sample;
      for (const auto& g : ds.gdp)
        if (d_years->empty() ||
            std::find(d_years->begin(), d_years->end(), g.year) !=
                d_years->end())
          sample.push_back(g.gdp);
      const odflow::DistFitResult fit =
          odflow::fit_distributions(sample, *d_boot, *d_seed);
      emit(odflow::to_json(fit), *d_out);
      if (!d_csv->empty()) emit_text(odflow::bootstrap_csv(fit), *d_csv);
      return 0;
    });
  });

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic dataset with known ground truth");
  auto s_cities = std::make_shared<int>(13);
  auto s_years = std::make_shared<std::vector<int>>();
  auto s_betas = std::make_shared<std::vector<double>>();
  auto s_seed = std::make_shared<std::uint64_t>(1);
  auto s_fsigma = std::make_shared<double>(0.15);
  auto s_gsigma = std::make_shared<double>(0.0);
  auto s_out = std::make_shared<std::string>();
  synth->add_option("--cities", *s_cities, "City count (default 13, min 4)");
  synth->add_option("--year", *s_years, "Dataset year (repeatable)")->required();
  synth->add_option("--beta", *s_betas,
                    "Distance-decay exponent per year (repeatable)")
      ->required();
  synth->add_option("--seed", *s_seed, "RNG seed (default 1)");
  synth->add_option("--flow-sigma", *s_fsigma,
                    "Log-normal flow noise (default 0.15)");
  synth->add_option("--gdp-sigma", *s_gsigma, "GDP noise (default 0)");
  synth->add_option("--out", *s_out, "Output directory")->required();
  synth->callback([&rc, s_cities, s_years, s_betas, s_seed, s_fsigma, s_gsigma,
                   s_out] {
    rc = guarded([&] {
      odflow::SynthOptions opt;
      opt.flow_sigma = *s_fsigma;
      opt.gdp_sigma = *s_gsigma;
      const odflow::SynthResult res =
          odflow::synth_dataset(*s_cities, *s_years, *s_betas, *s_seed, opt);
      odflow::write_dataset(res.dataset, *s_out);
      odflow::write_file_atomic(*s_out + "/ground_truth.json",
                                res.ground_truth.dump(2) + "\n");
      return 0;
    });
  });

  // --- run -----------------------------------------------------------------
  auto* run = app.add_subcommand(
      "run", "Run every analysis stage and write reports to a directory");
  auto ud = std::make_shared<DataArgs>();
  auto u_config = std::make_shared<std::string>();
  auto u_outdir = std::make_shared<std::string>();
  auto u_years = std::make_shared<std::vector<int>>();
  auto u_stages = std::make_shared<std::vector<std::string>>();
  auto u_method = std::make_shared<std::string>();
  auto u_lambda = std::make_shared<double>(-1.0);
  auto u_seed = std::make_shared<std::uint64_t>(0);
  auto u_boot = std::make_shared<int>(-1);
  auto u_damping = std::make_shared<double>(-1.0);
  ud->attach(run);
  run->add_option("--config", *u_config, "Pipeline configuration JSON");
  run->add_option("--out-dir", *u_outdir, "Report directory (default reports)");
  run->add_option("--year", *u_years, "Year(s) to analyse (repeatable)");
  run->add_option("--stage", *u_stages,
                  "Stage(s) to run: features regression gravity network pca "
                  "distfit (repeatable; default all)");
  run->add_option("--method", *u_method, "Regression method ols|glm|ridge|lasso");
  run->add_option("--lambda", *u_lambda, "Regression penalty weight");
  run->add_option("--seed", *u_seed, "Bootstrap RNG seed");
  run->add_option("--bootstrap", *u_boot, "Bootstrap resamples");
  run->add_option("--damping", *u_damping, "PageRank damping");
  run->callback([&rc, run, ud, u_config, u_outdir, u_years, u_stages, u_method,
                 u_lambda, u_seed, u_boot, u_damping] {
    rc = guarded([&] {
      odflow::PipelineConfig cfg;
      if (!u_config->empty()) cfg = odflow::config_from_json(load_json_file(*u_config));
      ud->fill(&cfg);
      if (!u_outdir->empty()) cfg.out_dir = *u_outdir;
      if (!u_years->empty()) cfg.years = *u_years;
      if (!u_stages->empty()) cfg.stages = *u_stages;
      if (!u_method->empty()) cfg.regression_method = *u_method;
      if (run->count("--lambda")) cfg.lambda = *u_lambda;
      if (run->count("--seed")) cfg.seed = *u_seed;
      if (*u_boot >= 0) cfg.bootstrap_n = *u_boot;
      if (*u_damping > 0.0) cfg.damping = *u_damping;
      return odflow::run_pipeline(cfg);
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
