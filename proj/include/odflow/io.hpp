#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odflow/core.hpp"
#include "odflow/csv.hpp"
#include "odflow/distfit.hpp"
#include "odflow/error.hpp"
#include "odflow/gravity.hpp"
#include "odflow/network.hpp"
#include "odflow/pca.hpp"
#include "odflow/random.hpp"
#include "odflow/regression.hpp"
#include "odflow/stats.hpp"

namespace odflow {

using Json = nlohmann::json;

// Every number that reaches a report goes through this: 12 significant
// digits, so identical runs produce identical bytes on any platform.
inline double j12(double v) { return round_sig12(v); }

inline void write_file_atomic(const std::string& path,
                              const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush())
      throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Dataset loading

namespace detail {

inline std::string csv_where(const CsvTable& t, std::size_t row,
                             const std::string& column) {
  // +2: one for the header line, one for 1-based numbering.
  return t.path + ":" + std::to_string(row + 2) + ": " + column;
}

inline std::optional<double> optional_field(const CsvTable& t, int col,
                                            std::size_t row) {
  if (col < 0) return std::nullopt;
  const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
  if (s.empty()) return std::nullopt;
  return parse_double(s, csv_where(t, row, t.header[static_cast<std::size_t>(col)]));
}

// Translate validate()'s record-indexed locations ("flows[3]") into
// file:line references for load-time rejection messages.
inline std::string locate(const std::string& location,
                          const std::map<std::string, const CsvTable*>& tables) {
  const auto open = location.find('[');
  if (open == std::string::npos) return location;
  const std::string kind = location.substr(0, open);
  const auto it = tables.find(kind);
  if (it == tables.end()) return location;
  const std::size_t row = std::stoul(location.substr(open + 1));
  return it->second->path + ":" + std::to_string(row + 2);
}

}  // namespace detail

// Reads and cross-validates the four CSVs; throws on the first schema,
// parse, or validation problem with a file:line message.
inline RegionDataset load_dataset(const std::string& cities_csv,
                                  const std::string& flows_csv,
                                  const std::string& distances_csv,
                                  const std::string& gdp_csv,
                                  bool reject_invalid = true) {
  const CsvTable cities = read_csv(cities_csv);
  const CsvTable flows = read_csv(flows_csv);
  const CsvTable distances = read_csv(distances_csv);
  const CsvTable gdp = read_csv(gdp_csv);

  RegionDataset ds;

  {
    const int id = cities.require_column("city_id");
    const int name = cities.require_column("name");
    const int lon = cities.column("lon");
    const int lat = cities.column("lat");
    for (std::size_t r = 0; r < cities.rows.size(); ++r) {
      City c;
      c.id = cities.rows[r][static_cast<std::size_t>(id)];
      c.name = cities.rows[r][static_cast<std::size_t>(name)];
      c.lon = detail::optional_field(cities, lon, r);
      c.lat = detail::optional_field(cities, lat, r);
      ds.cities.push_back(std::move(c));
    }
    std::sort(ds.cities.begin(), ds.cities.end(),
              [](const City& a, const City& b) { return a.id < b.id; });
  }

  {
    const int city = gdp.require_column("city_id");
    const int year = gdp.require_column("year");
    const int value = gdp.require_column("gdp_billion_cny");
    for (std::size_t r = 0; r < gdp.rows.size(); ++r) {
      GdpRecord g;
      g.city = gdp.rows[r][static_cast<std::size_t>(city)];
      g.year = static_cast<int>(parse_long(
          gdp.rows[r][static_cast<std::size_t>(year)],
          detail::csv_where(gdp, r, "year")));
      g.gdp = parse_double(gdp.rows[r][static_cast<std::size_t>(value)],
                           detail::csv_where(gdp, r, "gdp_billion_cny"));
      ds.gdp.push_back(std::move(g));
    }
  }

  {
    const int origin = distances.require_column("origin");
    const int dest = distances.require_column("dest");
    const int km = distances.require_column("km");
    for (std::size_t r = 0; r < distances.rows.size(); ++r) {
      DistanceRecord d;
      d.origin = distances.rows[r][static_cast<std::size_t>(origin)];
      d.dest = distances.rows[r][static_cast<std::size_t>(dest)];
      d.km = parse_double(distances.rows[r][static_cast<std::size_t>(km)],
                          detail::csv_where(distances, r, "km"));
      ds.distances.push_back(std::move(d));
    }
  }

  {
    const int year = flows.require_column("year");
    const int vclass = flows.require_column("vehicle_class");
    const int origin = flows.require_column("origin");
    const int dest = flows.require_column("dest");
    const int vehicles = flows.require_column("vehicles");
    const int payload = flows.column("payload");
    for (std::size_t r = 0; r < flows.rows.size(); ++r) {
      FlowRecord f;
      f.year = static_cast<int>(
          parse_long(flows.rows[r][static_cast<std::size_t>(year)],
                     detail::csv_where(flows, r, "year")));
      try {
        f.vclass =
            parse_vehicle_class(flows.rows[r][static_cast<std::size_t>(vclass)]);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError,
                    detail::csv_where(flows, r, "vehicle_class") + ": " +
                        e.what());
      }
      f.origin = flows.rows[r][static_cast<std::size_t>(origin)];
      f.dest = flows.rows[r][static_cast<std::size_t>(dest)];
      const std::string vwhere = detail::csv_where(flows, r, "vehicles");
      f.vehicles =
          parse_double(flows.rows[r][static_cast<std::size_t>(vehicles)], vwhere);
      if (f.vehicles < 0.0)
        throw Error(ErrorCode::ParseError, vwhere + ": negative volume");
      f.payload = detail::optional_field(flows, payload, r);
      if (f.payload && *f.payload < 0.0)
        throw Error(ErrorCode::ParseError,
                    detail::csv_where(flows, r, "payload") + ": negative payload");
      ds.flows.push_back(std::move(f));
    }
  }

  const ValidationReport report = validate(ds);
  if (reject_invalid && !report.ok()) {
    const std::map<std::string, const CsvTable*> tables = {
        {"cities", &cities},
        {"gdp", &gdp},
        {"distances", &distances},
        {"flows", &flows}};
    std::string msg = "dataset rejected:";
    for (const auto& v : report.violations)
      msg += "\n  " + detail::locate(v.location, tables) + ": " + v.message;
    throw Error(ErrorCode::ValidationError, msg);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Dataset writing

inline void write_dataset(const RegionDataset& ds, const std::string& dir) {
  std::string cities = "city_id,name,lon,lat\n";
  for (const auto& c : ds.cities) {
    cities += c.id + "," + c.name + ",";
    if (c.lon) cities += fmt12(*c.lon);
    cities += ",";
    if (c.lat) cities += fmt12(*c.lat);
    cities += "\n";
  }
  write_file_atomic(dir + "/cities.csv", cities);

  std::string gdp = "city_id,year,gdp_billion_cny\n";
  for (const auto& g : ds.gdp)
    gdp += g.city + "," + std::to_string(g.year) + "," + fmt12(g.gdp) + "\n";
  write_file_atomic(dir + "/gdp.csv", gdp);

  std::string distances = "origin,dest,km\n";
  for (const auto& d : ds.distances)
    distances += d.origin + "," + d.dest + "," + fmt12(d.km) + "\n";
  write_file_atomic(dir + "/distances.csv", distances);

  bool any_payload = false;
  for (const auto& f : ds.flows) any_payload |= f.payload.has_value();
  std::string flows = any_payload ? "year,vehicle_class,origin,dest,vehicles,payload\n"
                                  : "year,vehicle_class,origin,dest,vehicles\n";
  for (const auto& f : ds.flows) {
    flows += std::to_string(f.year) + "," + vehicle_class_code(f.vclass) + "," +
             f.origin + "," + f.dest + "," + fmt12(f.vehicles);
    if (any_payload) {
      flows += ",";
      if (f.payload) flows += fmt12(*f.payload);
    }
    flows += "\n";
  }
  write_file_atomic(dir + "/flows.csv", flows);
}

// ---------------------------------------------------------------------------
// Synthetic dataset with planted ground truth

struct SynthOptions {
  double flow_sigma = 0.15;  // log-normal noise on every intercity flow
  double gdp_sigma = 0.0;    // additive noise on planted GDP, billion CNY
  double carbus_scale = 2.0e4;
  double truck_scale = 8.0e3;
};

struct SynthResult {
  RegionDataset dataset;
  Json ground_truth;
};

// Cities sit evenly on a circle (chord distances), attractions are random
// per vehicle class, flows follow the gravity law with the planted per-year
// decay, and GDP is a planted positive linear function of the eight realized
// features.  Everything the acceptance tests need to check recovery lands in
// the ground-truth sidecar.  All emitted values are pre-rounded to 12
// significant digits so a write/read round trip is exact.
inline SynthResult synth_dataset(int n_cities, const std::vector<int>& years,
                                 const std::vector<double>& beta_per_year,
                                 std::uint64_t seed,
                                 const SynthOptions& opt = {}) {
  if (n_cities < 4)
    throw Error(ErrorCode::DomainError, "synth needs >= 4 cities");
  if (years.empty() || years.size() != beta_per_year.size())
    throw Error(ErrorCode::DomainError,
                "years and beta_per_year must align and be non-empty");
  if (std::set<int>(years.begin(), years.end()).size() != years.size())
    throw Error(ErrorCode::DomainError, "duplicate years");

  const auto n = static_cast<std::size_t>(n_cities);
  RegionDataset ds;

  // Ring layout: radius 250 km around (108.9 E, 34.2 N), chords as road
  // distances.  Equal spacing keeps every city's distance profile identical,
  // which is the cleanest geometry for distance-decay recovery.
  const double radius_km = 250.0;
  const double km_per_deg = 111.19;
  const double lon0 = 108.9, lat0 = 34.2;
  std::vector<double> angle(n);
  for (std::size_t i = 0; i < n; ++i) {
    angle[i] = 2.0 * 3.14159265358979323846 * static_cast<double>(i) /
               static_cast<double>(n);
    City c;
    char id[16];
    std::snprintf(id, sizeof(id), "C%02zu", i + 1);
    c.id = id;
    c.name = std::string("City ") + (id + 1);
    const double x = radius_km * std::cos(angle[i]);
    const double y = radius_km * std::sin(angle[i]);
    c.lon = j12(lon0 + x / (km_per_deg *
                            std::cos(lat0 * 3.14159265358979323846 / 180.0)));
    c.lat = j12(lat0 + y / km_per_deg);
    ds.cities.push_back(std::move(c));
  }
  DistanceMatrix dist = make_distance_matrix(ds.city_ids());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double chord =
          2.0 * radius_km * std::abs(std::sin((angle[i] - angle[j]) / 2.0));
      dist.set(i, j, j12(chord));
      ds.distances.push_back({dist.cities[i], dist.cities[j], dist.at(i, j)});
    }

  Rng master(seed);
  std::map<VehicleClass, std::vector<double>> attraction;
  for (const VehicleClass vc : kVehicleClasses) {
    auto& p = attraction[vc];
    p.resize(n);
    for (double& v : p) v = std::exp(master.uniform(0.5, 2.5));
  }
  // Positive planted coefficients keep GDP positive at zero noise.
  const double gdp_base = 500.0;
  std::array<double, 8> raw_coef{};
  for (double& c : raw_coef) c = master.uniform(0.5, 1.5);

  const std::map<VehicleClass, double> scale = {
      {VehicleClass::CarsBuses, opt.carbus_scale},
      {VehicleClass::Trucks, opt.truck_scale}};
  const std::map<VehicleClass, double> occupancy = {
      {VehicleClass::CarsBuses, 2.5},   // passengers per vehicle
      {VehicleClass::Trucks, 7.0}};     // tonnes per vehicle

  for (std::size_t t = 0; t < years.size(); ++t) {
    for (const VehicleClass vc : kVehicleClasses) {
      const std::uint64_t flow_seed = master.next_u64();
      const std::uint64_t diag_seed = master.next_u64();
      std::vector<double> p = attraction[vc];
      const double s = std::sqrt(scale.at(vc));
      for (double& v : p) v *= s;
      FlowMatrix m = generate_gravity(p, beta_per_year[t], dist,
                                      opt.flow_sigma, flow_seed, years[t], vc);
      Rng diag(diag_seed);
      for (std::size_t i = 0; i < n; ++i) {
        double g = p[i] * p[i] * std::pow(50.0, -beta_per_year[t]);
        if (opt.flow_sigma > 0.0)
          g *= std::exp(opt.flow_sigma * diag.normal());
        m.at(i, i) = g;
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          FlowRecord rec;
          rec.year = years[t];
          rec.vclass = vc;
          rec.origin = m.cities[i];
          rec.dest = m.cities[j];
          rec.vehicles = j12(m.at(i, j));
          rec.payload = j12(rec.vehicles * occupancy.at(vc));
          ds.flows.push_back(std::move(rec));
        }
    }
  }

  // Features need both classes in place; coefficients are scaled so each
  // feature contributes the same order of magnitude to GDP.
  std::array<double, 8> feature_mean{};
  std::size_t rows = 0;
  for (const int year : years) {
    const FeatureTable table = extract_features(ds, year);
    for (const auto& row : table.rows) {
      for (std::size_t k = 0; k < 8; ++k) feature_mean[k] += row.values[k];
      ++rows;
    }
  }
  for (double& v : feature_mean) v /= static_cast<double>(rows);
  std::array<double, 8> coef{};
  for (std::size_t k = 0; k < 8; ++k)
    coef[k] = raw_coef[k] * gdp_base / (8.0 * feature_mean[k]);

  const std::uint64_t gdp_seed = master.next_u64();
  Rng gdp_noise(gdp_seed);
  for (const int year : years) {
    const FeatureTable table = extract_features(ds, year);
    for (const auto& row : table.rows) {
      double g = gdp_base;
      for (std::size_t k = 0; k < 8; ++k) g += coef[k] * row.values[k];
      if (opt.gdp_sigma > 0.0) g += opt.gdp_sigma * gdp_noise.normal();
      ds.gdp.push_back({row.city, year, j12(g)});
    }
  }

  SynthResult out;
  out.dataset = std::move(ds);
  Json& gt = out.ground_truth;
  gt["seed"] = seed;
  gt["n_cities"] = n_cities;
  gt["years"] = years;
  gt["flow_sigma"] = j12(opt.flow_sigma);
  gt["gdp_sigma"] = j12(opt.gdp_sigma);
  for (std::size_t t = 0; t < years.size(); ++t)
    gt["beta"][std::to_string(years[t])] = j12(beta_per_year[t]);
  for (const VehicleClass vc : kVehicleClasses) {
    const auto& p = attraction[vc];
    double mean_log = 0.0;
    for (const double v : p) mean_log += std::log(v);
    mean_log /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      gt["attractions"][vehicle_class_code(vc)]
        [out.dataset.cities[i].id] = j12(std::log(p[i]) - mean_log);
    gt["flow_scale"][vehicle_class_code(vc)] = j12(scale.at(vc));
  }
  gt["gdp_coefficients"]["intercept"] = j12(gdp_base);
  for (std::size_t k = 0; k < 8; ++k)
    gt["gdp_coefficients"][kFeatureNames[k]] = j12(coef[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization

inline Json to_json(const ValidationReport& r) {
  Json j;
  j["ok"] = r.ok();
  j["violations"] = Json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back({{"location", v.location}, {"message", v.message}});
  j["warnings"] = Json::array();
  for (const auto& v : r.warnings)
    j["warnings"].push_back({{"location", v.location}, {"message", v.message}});
  return j;
}

inline Json to_json(const FeatureTable& t) {
  Json j;
  j["rows"] = Json::array();
  for (const auto& r : t.rows) {
    Json row;
    row["city"] = r.city;
    row["year"] = r.year;
    for (std::size_t k = 0; k < 8; ++k)
      row[kFeatureNames[k]] = feature_defined(r.values[k])
                                  ? Json(j12(r.values[k]))
                                  : Json();  // undefined ratio -> null
    j["rows"].push_back(std::move(row));
  }
  j["undefined_ratios"] = t.undefined_ratios;
  return j;
}

inline Json to_json(const RegressionReport& r) {
  Json j;
  j["method"] = r.method;
  j["intercept"] = j12(r.intercept);
  for (std::size_t k = 0; k < r.predictors.size(); ++k) {
    j["coefficients"][r.predictors[k]] =
        j12(r.coefficients[static_cast<Eigen::Index>(k)]);
    if (!r.standardized_coefficients.empty())
      j["standardized_coefficients"][r.predictors[k]] =
          j12(r.standardized_coefficients[k]);
    if (!r.vif.empty()) j["vif"][r.predictors[k]] = j12(r.vif[k]);
  }
  j["r_squared"] = j12(r.r_squared);
  j["rmse"] = j12(r.rmse);
  j["n_observations"] = r.residuals.size();
  j["residuals"] = Json::array();
  for (Eigen::Index i = 0; i < r.residuals.size(); ++i)
    j["residuals"].push_back(j12(r.residuals[i]));
  j["fitted"] = Json::array();
  for (Eigen::Index i = 0; i < r.fitted.size(); ++i)
    j["fitted"].push_back(j12(r.fitted[i]));
  if (!r.standardized_residuals.empty()) {
    j["standardized_residuals"] = Json::array();
    for (const double v : r.standardized_residuals)
      j["standardized_residuals"].push_back(j12(v));
  }
  if (!r.leverage.empty()) {
    j["leverage"] = Json::array();
    for (const double v : r.leverage) j["leverage"].push_back(j12(v));
  }
  if (r.lambda) j["lambda"] = j12(*r.lambda);
  if (r.method == "lasso") {
    j["selected_features"] = r.selected_features;
    j["sweeps"] = r.sweeps;
  }
  return j;
}

inline Json to_json(const DiagnosticsBundle& d) {
  Json j;
  const auto pairs = [](const std::vector<std::pair<double, double>>& v) {
    Json a = Json::array();
    for (const auto& [x, y] : v) a.push_back({j12(x), j12(y)});
    return a;
  };
  j["residual_vs_fitted"] = pairs(d.residual_vs_fitted);
  j["qq"] = pairs(d.qq);
  j["scale_location"] = pairs(d.scale_location);
  j["leverage"] = Json::array();
  for (const double v : d.leverage) j["leverage"].push_back(j12(v));
  j["correlation_names"] = d.correlation_names;
  j["correlation"] = Json::array();
  for (const auto& row : d.correlation) {
    Json a = Json::array();
    for (const double v : row) a.push_back(j12(v));
    j["correlation"].push_back(std::move(a));
  }
  return j;
}

inline Json to_json(const GravityFit& f) {
  Json j;
  j["method"] = gravity_method_name(f.method);
  j["beta"] = j12(f.beta);
  j["attractions"] = Json::object();
  for (const auto& [city, x] : f.attractions) j["attractions"][city] = j12(x);
  j["k_constant"] = j12(f.k_constant);
  j["fit_metric"] = j12(f.fit_metric);
  j["excluded_zero_flows"] = f.excluded_zero_flows;
  return j;
}

inline Json to_json(const NetworkMetrics& m) {
  Json j;
  for (const auto& [city, v] : m.betweenness) j["betweenness"][city] = j12(v);
  for (const auto& [city, v] : m.closeness) j["closeness"][city] = j12(v);
  for (const auto& [city, v] : m.pagerank) j["pagerank"][city] = j12(v);
  j["unreachable_pairs"] = m.unreachable_pairs;
  return j;
}

inline Json to_json(const PcaResult& p) {
  Json j;
  j["standardized"] = p.standardized;
  j["diagonal_included"] = p.diagonal_included;
  j["cities"] = p.cities;
  j["explained_variance_ratio"] = Json::array();
  for (const double v : p.explained_variance_ratio)
    j["explained_variance_ratio"].push_back(j12(v));
  j["component_sdev"] = Json::array();
  for (const double v : p.component_sdev) j["component_sdev"].push_back(j12(v));
  for (std::size_t i = 0; i < p.cities.size(); ++i) {
    Json load = Json::array(), score = Json::array();
    for (std::size_t c = 0; c < p.components(); ++c) {
      load.push_back(j12(p.loadings(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(c))));
      score.push_back(j12(p.scores(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(c))));
    }
    j["loadings"][p.cities[i]] = std::move(load);
    j["scores"][p.cities[i]] = std::move(score);
  }
  return j;
}

inline Json to_json(const SubNetwork& s) {
  Json j;
  j["component"] = s.component_index;
  j["loading_threshold"] = j12(s.loading_threshold);
  j["score_threshold"] = j12(s.score_threshold);
  j["origins"] = Json::array();
  for (const auto& c : s.origins) j["origins"].push_back(c);
  j["destinations"] = Json::array();
  for (const auto& c : s.destinations) j["destinations"].push_back(c);
  j["edges"] = Json::array();
  for (const auto& e : s.edges)
    j["edges"].push_back(
        {{"origin", e.origin}, {"dest", e.dest}, {"flow", j12(e.flow)}});
  return j;
}

inline Json to_json(const DistFitResult& r) {
  Json j;
  for (const auto& [name, fit] : r.models) {
    Json m;
    for (const auto& [p, v] : fit.params) m["params"][p] = j12(v);
    m["log_likelihood"] = j12(fit.log_likelihood);
    m["aic"] = j12(fit.aic);
    j["models"][name] = std::move(m);
  }
  j["best_model"] = r.best_model;
  j["skewness"] = j12(r.skewness);
  j["kurtosis"] = j12(r.kurtosis);
  j["skewness_bootstrap_sd"] = j12(r.skewness_bootstrap_sd);
  j["kurtosis_bootstrap_sd"] = j12(r.kurtosis_bootstrap_sd);
  j["bootstrap_n"] = r.bootstrap.size();
  return j;
}

inline std::string bootstrap_csv(const DistFitResult& r) {
  std::string out = "skewness,kurtosis\n";
  for (const auto& [s, k] : r.bootstrap)
    out += fmt12(s) + "," + fmt12(k) + "\n";
  return out;
}

inline std::string to_dot(const SubNetwork& s) {
  std::string out = "digraph component_" + std::to_string(s.component_index) + " {\n";
  for (const auto& c : s.origins) out += "  \"" + c + "\";\n";
  for (const auto& c : s.destinations)
    if (!s.origins.count(c)) out += "  \"" + c + "\";\n";
  for (const auto& e : s.edges)
    out += "  \"" + e.origin + "\" -> \"" + e.dest + "\" [label=\"" +
           fmt12(e.flow) + "\"];\n";
  out += "}\n";
  return out;
}

// LineString features in WGS84; requires coordinates for every city the
// sub-network touches.
inline Json to_geojson(const SubNetwork& s, const RegionDataset& ds) {
  const auto coords = [&](const std::string& id) {
    const City* c = ds.find_city(id);
    if (!c || !c->lon || !c->lat)
      throw Error(ErrorCode::DomainError,
                  "city " + id + " lacks coordinates for geojson");
    return Json::array({j12(*c->lon), j12(*c->lat)});
  };
  Json j;
  j["type"] = "FeatureCollection";
  j["features"] = Json::array();
  for (const auto& e : s.edges) {
    Json f;
    f["type"] = "Feature";
    f["geometry"]["type"] = "LineString";
    f["geometry"]["coordinates"] = Json::array({coords(e.origin), coords(e.dest)});
    f["properties"] = {{"origin", e.origin},
                       {"dest", e.dest},
                       {"flow", j12(e.flow)},
                       {"component", s.component_index}};
    j["features"].push_back(std::move(f));
  }
  return j;
}

// Correlation matrix across cities for one year: GDP, distance-graph
// betweenness and closeness, flow-graph closeness and PageRank per class.
inline std::string correlation_matrix_csv(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& series) {
  const auto cell = [&](std::size_t i, std::size_t k) {
    if (i == k) return 1.0;
    try {
      return pearson(series[i], series[k]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UndefinedCorrelation)
        return std::numeric_limits<double>::quiet_NaN();  // printed as nan
      throw;
    }
  };
  std::string out = "variable";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += names[i];
    for (std::size_t k = 0; k < names.size(); ++k)
      out += "," + fmt12(cell(i, k));
    out += "\n";
  }
  return out;
}

}  // namespace odflow
