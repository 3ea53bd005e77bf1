#include <catch2/catch_amalgamated.hpp>

#include "odflow/core.hpp"
#include "odflow/csv.hpp"
#include "odflow/random.hpp"

using namespace odflow;

namespace {

void add_flow(RegionDataset& ds, int year, VehicleClass vc,
              const std::string& o, const std::string& d, double v) {
  FlowRecord f;
  f.year = year;
  f.vclass = vc;
  f.origin = o;
  f.dest = d;
  f.vehicles = v;
  ds.flows.push_back(f);
}

void add_pair(RegionDataset& ds, const std::string& a, const std::string& b,
              double km) {
  ds.distances.push_back({a, b, km});
}

RegionDataset two_city() {
  RegionDataset ds;
  ds.cities = {{"A", "Alpha", {}, {}}, {"B", "Beta", {}, {}}};
  ds.gdp = {{"A", 2015, 100.0}, {"B", 2015, 50.0}};
  add_pair(ds, "A", "B", 120.0);
  add_flow(ds, 2015, VehicleClass::CarsBuses, "A", "B", 10.0);
  add_flow(ds, 2015, VehicleClass::CarsBuses, "B", "A", 4.0);
  add_flow(ds, 2015, VehicleClass::CarsBuses, "A", "A", 7.0);
  add_flow(ds, 2015, VehicleClass::Trucks, "A", "B", 0.0);
  return ds;
}

// Fully populated n-city dataset with random flows for both classes.
RegionDataset random_dataset(std::size_t n, std::uint64_t seed,
                             bool with_diagonal = true) {
  RegionDataset ds;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "C" + std::to_string(i);
    ds.cities.push_back({id, "City " + std::to_string(i), {}, {}});
    ds.gdp.push_back({id, 2015, rng.uniform(100.0, 900.0)});
  }
  std::sort(ds.cities.begin(), ds.cities.end(),
            [](const City& a, const City& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      add_pair(ds, ds.cities[i].id, ds.cities[j].id, rng.uniform(30.0, 500.0));
  for (const VehicleClass vc : kVehicleClasses)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j && !with_diagonal) continue;
        add_flow(ds, 2015, vc, ds.cities[i].id, ds.cities[j].id,
                 rng.uniform(1.0, 2000.0));
      }
  return ds;
}

double feature(const FeatureTable& t, const std::string& city,
               const std::string& name) {
  const auto it =
      std::find(kFeatureNames.begin(), kFeatureNames.end(), std::string(name));
  REQUIRE(it != kFeatureNames.end());
  for (const auto& row : t.rows)
    if (row.city == city)
      return row.values[static_cast<std::size_t>(it - kFeatureNames.begin())];
  FAIL("no feature row for " + city);
  return 0.0;
}

}  // namespace

TEST_CASE("vehicle class codes") {
  CHECK(std::string(vehicle_class_code(VehicleClass::CarsBuses)) == "carbus");
  CHECK(std::string(vehicle_class_code(VehicleClass::Trucks)) == "truck");
  CHECK(vehicle_class_suffix(VehicleClass::CarsBuses) == 'C');
  CHECK(vehicle_class_suffix(VehicleClass::Trucks) == 'K');
  CHECK(parse_vehicle_class("carbus") == VehicleClass::CarsBuses);
  CHECK(parse_vehicle_class("truck") == VehicleClass::Trucks);
  CHECK_THROWS_AS(parse_vehicle_class("bike"), Error);
}

TEST_CASE("two-city feature sums") {
  const FeatureTable t = extract_features(two_city(), 2015);
  CHECK(feature(t, "A", "I_C") == 4.0);
  CHECK(feature(t, "A", "O_C") == 10.0);
  CHECK(feature(t, "A", "N_C") == 7.0);
  CHECK(feature(t, "A", "R_C") == Catch::Approx(0.4));
  CHECK(feature(t, "B", "I_C") == 10.0);
  CHECK(feature(t, "B", "O_C") == 4.0);
  CHECK(feature(t, "B", "N_C") == 0.0);
  CHECK(feature(t, "B", "R_C") == Catch::Approx(2.5));
  // trucks carry no volume anywhere: ratios undefined, rows flagged
  CHECK_FALSE(feature_defined(feature(t, "A", "R_K")));
  REQUIRE_FALSE(t.undefined_ratios.empty());
  bool mentions_a = false;
  for (const auto& tag : t.undefined_ratios)
    mentions_a |= tag.find('A') != std::string::npos &&
                  tag.find("R_K") != std::string::npos;
  CHECK(mentions_a);
}

TEST_CASE("all-zero flows give zero features and undefined ratios") {
  RegionDataset ds = two_city();
  for (auto& f : ds.flows) f.vehicles = 0.0;
  const FeatureTable t = extract_features(ds, 2015);
  for (const auto& row : t.rows)
    for (std::size_t k = 0; k < 8; ++k) {
      if (kFeatureNames[k][0] == 'R')
        CHECK_FALSE(feature_defined(row.values[k]));
      else
        CHECK(row.values[k] == 0.0);
    }
  CHECK(t.undefined_ratios.size() == 4);  // two cities x two classes
}

TEST_CASE("features match brute-force accumulation") {
  const RegionDataset ds = random_dataset(6, 77);
  const FeatureTable t = extract_features(ds, 2015);
  for (const VehicleClass vc : kVehicleClasses) {
    const FlowMatrix m = ds.flow_matrix(2015, vc);
    const std::size_t base = vc == VehicleClass::CarsBuses ? 0 : 4;
    for (std::size_t c = 0; c < m.size(); ++c) {
      double in = 0.0, out = 0.0;
      for (std::size_t o = 0; o < m.size(); ++o)
        if (o != c) in += m.at(o, c);
      for (std::size_t d = 0; d < m.size(); ++d)
        if (d != c) out += m.at(c, d);
      const auto* row = t.find(m.cities[c], 2015);
      REQUIRE(row != nullptr);
      CHECK(row->values[base + 0] == Catch::Approx(in).epsilon(1e-14));
      CHECK(row->values[base + 1] == Catch::Approx(out).epsilon(1e-14));
      CHECK(row->values[base + 2] == m.at(c, c));
      CHECK(row->values[base + 3] == Catch::Approx(in / out).epsilon(1e-14));
    }
  }
}

TEST_CASE("feature sum invariants") {
  const RegionDataset ds = random_dataset(7, 13);
  const FeatureTable t = extract_features(ds, 2015);
  for (const VehicleClass vc : kVehicleClasses) {
    const FlowMatrix m = ds.flow_matrix(2015, vc);
    const std::size_t base = vc == VehicleClass::CarsBuses ? 0 : 4;
    double sum_in = 0.0, sum_out = 0.0;
    for (std::size_t c = 0; c < m.size(); ++c) {
      const auto* row = t.find(m.cities[c], 2015);
      REQUIRE(row != nullptr);
      double col = 0.0, rowsum = 0.0;
      for (std::size_t k = 0; k < m.size(); ++k) {
        col += m.at(k, c);
        rowsum += m.at(c, k);
      }
      // I + N = column sum, O + N = row sum
      CHECK(row->values[base + 0] + row->values[base + 2] ==
            Catch::Approx(col).epsilon(1e-14));
      CHECK(row->values[base + 1] + row->values[base + 2] ==
            Catch::Approx(rowsum).epsilon(1e-14));
      sum_in += row->values[base + 0];
      sum_out += row->values[base + 1];
    }
    CHECK(sum_in == Catch::Approx(sum_out).epsilon(1e-12));
  }
}

TEST_CASE("feature extraction is permutation invariant") {
  const RegionDataset ds = random_dataset(5, 99);
  // Rename cities so their sort order reverses; flows move with the names.
  const auto rename = [](const std::string& id) {
    return std::string("Z") + char('9' - (id[1] - '0'));
  };
  RegionDataset rev = ds;
  for (auto& c : rev.cities) c.id = rename(c.id);
  for (auto& g : rev.gdp) g.city = rename(g.city);
  for (auto& d : rev.distances) {
    d.origin = rename(d.origin);
    d.dest = rename(d.dest);
  }
  for (auto& f : rev.flows) {
    f.origin = rename(f.origin);
    f.dest = rename(f.dest);
  }
  std::sort(rev.cities.begin(), rev.cities.end(),
            [](const City& a, const City& b) { return a.id < b.id; });
  const FeatureTable t1 = extract_features(ds, 2015);
  const FeatureTable t2 = extract_features(rev, 2015);
  for (const auto& row : t1.rows) {
    const auto* other = t2.find(rename(row.city), 2015);
    REQUIRE(other != nullptr);
    // Sums accumulate in city order, so only reassociation noise may differ.
    for (std::size_t k = 0; k < 8; ++k)
      CHECK(row.values[k] == Catch::Approx(other->values[k]).epsilon(1e-13));
  }
}

TEST_CASE("missing year or class raises the specific error") {
  const RegionDataset ds = two_city();
  try {
    extract_features(ds, 1999);
    FAIL("expected NoSuchYear");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSuchYear);
    CHECK(std::string(e.what()).find("1999") != std::string::npos);
  }
  RegionDataset no_truck = ds;
  no_truck.flows.erase(
      std::remove_if(no_truck.flows.begin(), no_truck.flows.end(),
                     [](const FlowRecord& f) {
                       return f.vclass == VehicleClass::Trucks;
                     }),
      no_truck.flows.end());
  try {
    extract_features(no_truck, 2015);
    FAIL("expected NoSuchVehicleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSuchVehicleClass);
  }
}

TEST_CASE("well-formed dataset validates clean") {
  const ValidationReport r = validate(random_dataset(4, 5));
  CHECK(r.ok());
  CHECK(r.violations.empty());
}

TEST_CASE("validation catches the classic problems") {
  SECTION("asymmetric distances") {
    RegionDataset ds = two_city();
    add_pair(ds, "B", "A", 60.0);  // A->B is 120
    const ValidationReport r = validate(ds);
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const auto& v : r.violations)
      found |= v.message.find("asymmetric") != std::string::npos ||
               v.message.find("conflict") != std::string::npos;
    CHECK(found);
  }
  SECTION("unknown city in flows") {
    RegionDataset ds = two_city();
    add_flow(ds, 2015, VehicleClass::CarsBuses, "Z", "A", 1.0);
    const ValidationReport r = validate(ds);
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const auto& v : r.violations)
      found |= v.message.find("Z") != std::string::npos;
    CHECK(found);
  }
  SECTION("negative volume") {
    RegionDataset ds = two_city();
    add_flow(ds, 2015, VehicleClass::CarsBuses, "A", "B", -5.0);
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("non-positive gdp") {
    RegionDataset ds = two_city();
    ds.gdp.push_back({"A", 2016, -1.0});
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("duplicate gdp record") {
    RegionDataset ds = two_city();
    ds.gdp.push_back({"A", 2015, 100.0});
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("nonzero self distance") {
    RegionDataset ds = two_city();
    add_pair(ds, "A", "A", 3.0);
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("missing distance pair") {
    RegionDataset ds = two_city();
    ds.distances.clear();
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("duplicate city id") {
    RegionDataset ds = two_city();
    ds.cities.push_back({"A", "Alpha again", {}, {}});
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("lon without lat") {
    RegionDataset ds = two_city();
    ds.cities[0].lon = 108.0;
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("no common gdp/flow year") {
    RegionDataset ds = two_city();
    for (auto& g : ds.gdp) g.year = 1990;
    CHECK_FALSE(validate(ds).ok());
  }
  SECTION("undefined ratios surface as warnings, not violations") {
    const ValidationReport r = validate(two_city());
    CHECK(r.ok());
    CHECK_FALSE(r.warnings.empty());
  }
}

TEST_CASE("distance matrix symmetrizes one-directional records") {
  const RegionDataset ds = two_city();
  const DistanceMatrix m = ds.distance_matrix();
  CHECK(m.at(0, 1) == 120.0);
  CHECK(m.at(1, 0) == 120.0);
  CHECK(m.at(0, 0) == 0.0);

  RegionDataset dup = ds;
  add_pair(dup, "B", "A", 77.0);
  CHECK_THROWS_AS(dup.distance_matrix(), Error);
}

TEST_CASE("flow matrix accumulates duplicate records") {
  RegionDataset ds = two_city();
  add_flow(ds, 2015, VehicleClass::CarsBuses, "A", "B", 2.5);
  const FlowMatrix m = ds.flow_matrix(2015, VehicleClass::CarsBuses);
  CHECK(m.at(0, 1) == 12.5);
  CHECK(m.payload.empty());
}

TEST_CASE("flow matrix payload sums and marks absent cells") {
  RegionDataset ds = two_city();
  ds.flows[0].payload = 25.0;  // A->B carbus
  ds.flows[1].payload = 8.0;   // B->A carbus
  add_flow(ds, 2015, VehicleClass::CarsBuses, "A", "B", 1.0);
  ds.flows.back().payload = 5.0;
  const FlowMatrix m = ds.flow_matrix(2015, VehicleClass::CarsBuses);
  REQUIRE(m.payload.size() == 4);
  CHECK(m.payload[0 * 2 + 1] == 30.0);
  CHECK(m.payload[1 * 2 + 0] == 8.0);
  CHECK(std::isnan(m.payload[0]));  // A->A had no payload column value
}

TEST_CASE("csv parsing handles quoting and reports malformed rows") {
  const CsvTable t = read_csv_string(
      "id,name,note\n"
      "1,\"Xi'an, ancient\",plain\n"
      "2,\"say \"\"hi\"\"\",x\n",
      "mem.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "Xi'an, ancient");
  CHECK(t.rows[1][1] == "say \"hi\"");
  CHECK(t.require_column("note") == 2);
  CHECK(t.column("absent") == -1);
  CHECK_THROWS_AS(t.require_column("absent"), Error);

  try {
    read_csv_string("a,b\n1\n", "mem.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("mem.csv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_csv_string("", "mem.csv"), Error);
  CHECK_THROWS_AS(read_csv_string("a,b\n\"open,2\n", "mem.csv"), Error);
  CHECK_THROWS_AS(parse_double("12x", "mem.csv:2"), Error);
  CHECK(parse_double(" 3.5 ", "loc") == 3.5);
  CHECK(parse_long("42", "loc") == 42);
}
