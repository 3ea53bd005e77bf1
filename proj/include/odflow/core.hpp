#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odflow/error.hpp"

namespace odflow {

enum class VehicleClass { CarsBuses, Trucks };

inline const char* vehicle_class_code(VehicleClass c) {
  return c == VehicleClass::CarsBuses ? "carbus" : "truck";
}

// Feature-name suffix: C for cars & buses, K for trucks.
inline char vehicle_class_suffix(VehicleClass c) {
  return c == VehicleClass::CarsBuses ? 'C' : 'K';
}

inline VehicleClass parse_vehicle_class(const std::string& s) {
  if (s == "carbus") return VehicleClass::CarsBuses;
  if (s == "truck") return VehicleClass::Trucks;
  throw Error(ErrorCode::ParseError,
              "unknown vehicle class '" + s + "' (expected carbus|truck)");
}

inline constexpr std::array<VehicleClass, 2> kVehicleClasses = {
    VehicleClass::CarsBuses, VehicleClass::Trucks};

struct City {
  std::string id;
  std::string name;
  std::optional<double> lon;
  std::optional<double> lat;
};

struct GdpRecord {
  std::string city;
  int year = 0;
  double gdp = 0.0;  // billion CNY
};

struct DistanceRecord {
  std::string origin;
  std::string dest;
  double km = 0.0;
};

struct FlowRecord {
  int year = 0;
  VehicleClass vclass = VehicleClass::CarsBuses;
  std::string origin;
  std::string dest;
  double vehicles = 0.0;
  std::optional<double> payload;  // passengers (carbus) or tonnes (truck)
};

// Dense symmetric city-to-city distances, kilometers.  Row/column order is
// the `cities` vector.
struct DistanceMatrix {
  std::vector<std::string> cities;
  std::vector<double> km;  // n*n, symmetric, zero diagonal

  std::size_t size() const { return cities.size(); }
  double at(std::size_t i, std::size_t j) const { return km[i * size() + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    km[i * size() + j] = v;
    km[j * size() + i] = v;
  }
  int index(const std::string& id) const {
    const auto it = std::lower_bound(cities.begin(), cities.end(), id);
    if (it == cities.end() || *it != id) return -1;
    return static_cast<int>(it - cities.begin());
  }
};

inline DistanceMatrix make_distance_matrix(std::vector<std::string> cities) {
  std::sort(cities.begin(), cities.end());
  DistanceMatrix m;
  m.km.assign(cities.size() * cities.size(), 0.0);
  m.cities = std::move(cities);
  return m;
}

// Dense origin x destination volumes for one (year, vehicle class) slice.
struct FlowMatrix {
  int year = 0;
  VehicleClass vclass = VehicleClass::CarsBuses;
  std::vector<std::string> cities;
  std::vector<double> volume;   // n*n, row = origin, column = destination
  std::vector<double> payload;  // empty, or n*n with NaN for absent entries

  std::size_t size() const { return cities.size(); }
  double at(std::size_t o, std::size_t d) const {
    return volume[o * size() + d];
  }
  double& at(std::size_t o, std::size_t d) { return volume[o * size() + d]; }
  int index(const std::string& id) const {
    const auto it = std::lower_bound(cities.begin(), cities.end(), id);
    if (it == cities.end() || *it != id) return -1;
    return static_cast<int>(it - cities.begin());
  }
};

inline FlowMatrix make_flow_matrix(int year, VehicleClass vclass,
                                   std::vector<std::string> cities) {
  std::sort(cities.begin(), cities.end());
  FlowMatrix m;
  m.year = year;
  m.vclass = vclass;
  m.volume.assign(cities.size() * cities.size(), 0.0);
  m.cities = std::move(cities);
  return m;
}

// Record-level dataset.  Keeping raw records (rather than only derived
// matrices) lets validate() describe malformed inputs — unknown city ids,
// asymmetric distances — that a dense indexed matrix could not even hold.
struct RegionDataset {
  std::vector<City> cities;  // sorted by id
  std::vector<GdpRecord> gdp;
  std::vector<DistanceRecord> distances;
  std::vector<FlowRecord> flows;

  std::vector<std::string> city_ids() const {
    std::vector<std::string> ids;
    ids.reserve(cities.size());
    for (const auto& c : cities) ids.push_back(c.id);
    return ids;
  }

  const City* find_city(const std::string& id) const {
    const auto it = std::lower_bound(
        cities.begin(), cities.end(), id,
        [](const City& c, const std::string& s) { return c.id < s; });
    if (it == cities.end() || it->id != id) return nullptr;
    return &*it;
  }

  std::vector<int> flow_years() const {
    std::set<int> ys;
    for (const auto& f : flows) ys.insert(f.year);
    return {ys.begin(), ys.end()};
  }

  std::vector<int> gdp_years() const {
    std::set<int> ys;
    for (const auto& g : gdp) ys.insert(g.year);
    return {ys.begin(), ys.end()};
  }

  bool has_flow(int year, VehicleClass vclass) const {
    for (const auto& f : flows)
      if (f.year == year && f.vclass == vclass) return true;
    return false;
  }

  std::optional<double> gdp_of(const std::string& city, int year) const {
    for (const auto& g : gdp)
      if (g.year == year && g.city == city) return g.gdp;
    return std::nullopt;
  }

  // Dense symmetric distances over the dataset's cities.  Records may give
  // one or both directions; conflicting duplicates are a validation issue
  // and throw here.
  DistanceMatrix distance_matrix() const {
    DistanceMatrix m = make_distance_matrix(city_ids());
    std::vector<bool> seen(m.km.size(), false);
    for (const auto& r : distances) {
      const int i = m.index(r.origin), j = m.index(r.dest);
      if (i < 0 || j < 0)
        throw Error(ErrorCode::ValidationError,
                    "distance references unknown city " +
                        (i < 0 ? r.origin : r.dest));
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      if (seen[a * m.size() + b] && m.at(a, b) != r.km)
        throw Error(ErrorCode::ValidationError,
                    "conflicting distances for " + r.origin + "-" + r.dest);
      m.set(a, b, r.km);
      seen[a * m.size() + b] = true;
      seen[b * m.size() + a] = true;
    }
    return m;
  }

  FlowMatrix flow_matrix(int year, VehicleClass vclass) const {
    bool year_seen = false;
    for (const auto& f : flows) year_seen |= (f.year == year);
    if (!year_seen)
      throw Error(ErrorCode::NoSuchYear,
                  "no flows for year " + std::to_string(year));
    if (!has_flow(year, vclass))
      throw Error(ErrorCode::NoSuchVehicleClass,
                  std::string("no ") + vehicle_class_code(vclass) +
                      " flows for year " + std::to_string(year));
    FlowMatrix m = make_flow_matrix(year, vclass, city_ids());
    bool any_payload = false;
    for (const auto& r : flows)
      if (r.year == year && r.vclass == vclass && r.payload) any_payload = true;
    if (any_payload)
      m.payload.assign(m.volume.size(),
                       std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : flows) {
      if (r.year != year || r.vclass != vclass) continue;
      const int o = m.index(r.origin), d = m.index(r.dest);
      if (o < 0 || d < 0)
        throw Error(ErrorCode::ValidationError,
                    "flow references unknown city " +
                        (o < 0 ? r.origin : r.dest));
      const auto uo = static_cast<std::size_t>(o), ud = static_cast<std::size_t>(d);
      m.at(uo, ud) += r.vehicles;
      if (r.payload && any_payload) {
        double& p = m.payload[uo * m.size() + ud];
        p = std::isnan(p) ? *r.payload : p + *r.payload;
      }
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Feature extraction

// Column order of the eight per-city features: inflow, outflow, intracity
// flow, and in/out ratio for cars & buses (C) then trucks (K).
inline constexpr std::array<const char*, 8> kFeatureNames = {
    "I_C", "O_C", "N_C", "R_C", "I_K", "O_K", "N_K", "R_K"};

struct FeatureRow {
  std::string city;
  int year = 0;
  // R_C / R_K hold NaN when the outflow denominator is zero.
  std::array<double, 8> values{};
};

struct FeatureTable {
  std::vector<FeatureRow> rows;
  // "city/year/R_C"-style tags for rows whose ratio is undefined; such rows
  // are excluded from regression designs.
  std::vector<std::string> undefined_ratios;

  const FeatureRow* find(const std::string& city, int year) const {
    for (const auto& r : rows)
      if (r.city == city && r.year == year) return &r;
    return nullptr;
  }
};

inline bool feature_defined(double v) { return !std::isnan(v); }

// Per-city flow features for one year: I = intercity inflow, O = intercity
// outflow, N = intracity (diagonal) flow, R = I/O, separately per class.
inline FeatureTable extract_features(const RegionDataset& dataset, int year) {
  FeatureTable table;
  const FlowMatrix car = dataset.flow_matrix(year, VehicleClass::CarsBuses);
  const FlowMatrix truck = dataset.flow_matrix(year, VehicleClass::Trucks);
  const std::size_t n = car.size();
  table.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    table.rows[i].city = car.cities[i];
    table.rows[i].year = year;
  }
  for (const VehicleClass vc : kVehicleClasses) {
    const FlowMatrix& m = vc == VehicleClass::CarsBuses ? car : truck;
    const std::size_t base = vc == VehicleClass::CarsBuses ? 0 : 4;
    for (std::size_t i = 0; i < n; ++i) {
      double in = 0.0, out = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        in += m.at(j, i);
        out += m.at(i, j);
      }
      auto& v = table.rows[i].values;
      v[base + 0] = in;
      v[base + 1] = out;
      v[base + 2] = m.at(i, i);
      if (out > 0.0) {
        v[base + 3] = in / out;
      } else {
        v[base + 3] = std::numeric_limits<double>::quiet_NaN();
        table.undefined_ratios.push_back(m.cities[i] + "/" +
                                         std::to_string(year) + "/R_" +
                                         vehicle_class_suffix(vc));
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue {
  std::string location;  // e.g. "gdp[3]" or "flows[12]"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> violations;  // dataset must be rejected
  std::vector<ValidationIssue> warnings;    // usable, but rows may be skipped

  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const RegionDataset& dataset) {
  ValidationReport report;
  const auto violation = [&](std::string where, std::string what) {
    report.violations.push_back({std::move(where), std::move(what)});
  };

  std::set<std::string> ids;
  for (std::size_t i = 0; i < dataset.cities.size(); ++i) {
    const auto& c = dataset.cities[i];
    const std::string where = "cities[" + std::to_string(i) + "]";
    if (c.id.empty()) violation(where, "empty city id");
    if (!ids.insert(c.id).second) violation(where, "duplicate city id " + c.id);
    if (c.lon.has_value() != c.lat.has_value())
      violation(where, "city " + c.id + " has only one of lon/lat");
  }

  std::set<std::pair<std::string, int>> gdp_keys;
  for (std::size_t i = 0; i < dataset.gdp.size(); ++i) {
    const auto& g = dataset.gdp[i];
    const std::string where = "gdp[" + std::to_string(i) + "]";
    if (!ids.count(g.city)) violation(where, "unknown city " + g.city);
    if (!(g.gdp > 0.0))
      violation(where, "non-positive gdp for " + g.city + "/" +
                           std::to_string(g.year));
    if (!gdp_keys.insert({g.city, g.year}).second)
      violation(where, "duplicate gdp record for " + g.city + "/" +
                           std::to_string(g.year));
  }

  // Distances: known cities, positive off-diagonal, symmetric when both
  // directions are present, no missing city pair.
  std::map<std::pair<std::string, std::string>, double> dist;
  for (std::size_t i = 0; i < dataset.distances.size(); ++i) {
    const auto& d = dataset.distances[i];
    const std::string where = "distances[" + std::to_string(i) + "]";
    if (!ids.count(d.origin)) violation(where, "unknown city " + d.origin);
    if (!ids.count(d.dest)) violation(where, "unknown city " + d.dest);
    if (d.origin == d.dest) {
      if (d.km != 0.0)
        violation(where, "nonzero self-distance for " + d.origin);
      continue;
    }
    if (!(d.km > 0.0))
      violation(where,
                "non-positive distance " + d.origin + "-" + d.dest);
    const auto key = std::minmax(d.origin, d.dest);
    const auto it = dist.find({key.first, key.second});
    if (it == dist.end()) {
      dist[{key.first, key.second}] = d.km;
    } else if (it->second != d.km) {
      violation(where, "asymmetric distance " + d.origin + "-" + d.dest +
                           ": " + std::to_string(d.km) + " vs " +
                           std::to_string(it->second));
    }
  }
  for (const auto& a : dataset.cities)
    for (const auto& b : dataset.cities) {
      if (a.id >= b.id) continue;
      if (!dist.count({a.id, b.id}))
        violation("distances", "missing distance " + a.id + "-" + b.id);
    }

  for (std::size_t i = 0; i < dataset.flows.size(); ++i) {
    const auto& f = dataset.flows[i];
    const std::string where = "flows[" + std::to_string(i) + "]";
    if (!ids.count(f.origin)) violation(where, "unknown city " + f.origin);
    if (!ids.count(f.dest)) violation(where, "unknown city " + f.dest);
    if (f.vehicles < 0.0) violation(where, "negative volume");
    if (f.payload && *f.payload < 0.0) violation(where, "negative payload");
  }

  if (!dataset.gdp.empty() && !dataset.flows.empty()) {
    const auto fy = dataset.flow_years();
    const auto gy = dataset.gdp_years();
    std::vector<int> common;
    std::set_intersection(fy.begin(), fy.end(), gy.begin(), gy.end(),
                          std::back_inserter(common));
    if (common.empty())
      violation("dataset", "gdp and flow years do not overlap");
  }

  // Undefined in/out ratios are not violations: the rows load fine but are
  // excluded from regression designs.
  if (report.violations.empty()) {
    for (const int year : dataset.flow_years()) {
      bool both = true;
      for (const VehicleClass vc : kVehicleClasses)
        both &= dataset.has_flow(year, vc);
      if (!both) continue;
      const FeatureTable t = extract_features(dataset, year);
      for (const auto& tag : t.undefined_ratios)
        report.warnings.push_back(
            {"features", "undefined in/out ratio " + tag});
    }
  }
  return report;
}

}  // namespace odflow
