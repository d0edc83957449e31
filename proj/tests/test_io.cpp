#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "resite/cep_io.hpp"
#include "resite/csv.hpp"
#include "resite/rng.hpp"
#include "resite/siting_io.hpp"
#include "support.hpp"

using namespace resite;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "resite_io_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST(Csv, SeriesRoundTripIsExact) {
  const auto dir = scratch_dir("series");
  Xoshiro256 rng(3);
  SeriesTable t;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> v(50);
    for (auto& x : v) x = rng.normal() * 1e3 + rng.unit() * 1e-7;
    t.ids.push_back("col" + std::to_string(c));
    t.series.emplace_back(v, 3.0, "2018-01-01T00");
  }
  write_series(dir / "s.csv", t);
  const auto back = read_series(dir / "s.csv");
  EXPECT_EQ(back.ids, t.ids);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(back.series[c], t.series[c]);
  write_series(dir / "s2.csv", back);
  EXPECT_EQ(slurp(dir / "s.csv"), slurp(dir / "s2.csv"));
}

TEST(Csv, ErrorsCarryLineNumbers) {
  const auto dir = scratch_dir("errors");
  std::ofstream(dir / "bad.csv") << "# resolution_hours=1\na,b\n1,2\n3,x\n";
  try {
    read_series(dir / "bad.csv");
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:4"), std::string::npos) << e.what();
  }
  std::ofstream(dir / "short.csv") << "a,b\n1\n";
  EXPECT_THROW(read_series(dir / "short.csv"), InvalidInput);
  std::ofstream(dir / "nan.csv") << "a\nnan\n";
  EXPECT_THROW(read_series(dir / "nan.csv"), InvalidInput);
  EXPECT_THROW(read_series(dir / "missing.csv"), IoError);
}

TEST(Csv, ParseDoubleAcceptsWhitespaceAndPlus) {
  EXPECT_EQ(csv::parse_double(" +1.5\r", ""), 1.5);
  EXPECT_THROW(csv::parse_double("1.5x", ""), InvalidInput);
  EXPECT_FALSE(csv::parse_optional("  ", ""));
  EXPECT_EQ(csv::split("a, b ,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
}

TEST(Csv, CatalogJoinSetsLegacyFlag) {
  const auto dir = scratch_dir("catalog");
  std::vector<CatalogRow> rows{{"s1", 2.5, 54.0, "DK", 150.0, 1000.0},
                               {"s2", 3.0, 55.5, "DK", 0.0, 800.0},
                               {"s3", -1.0, 50.0, "UK", 99.9, 500.0}};
  write_catalog_rows(dir / "cat.csv", rows);
  const auto back = read_catalog_rows(dir / "cat.csv");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[2].lon, -1.0);
  EXPECT_EQ(back[0].partition, "DK");
  SeriesTable cf;
  for (const auto& r : rows) {
    cf.ids.push_back(r.id);
    cf.series.emplace_back(std::vector<double>{0.1, 0.5});
  }
  const auto cat = make_catalog(back, cf);
  EXPECT_TRUE(cat.site(0).is_legacy);
  EXPECT_FALSE(cat.site(1).is_legacy);
  EXPECT_FALSE(cat.site(2).is_legacy);
  cf.ids[1] = "other";
  EXPECT_THROW(make_catalog(back, cf), InvalidInput);
}

TEST(Csv, PowerCurveRoundTrip) {
  const auto dir = scratch_dir("curve");
  const auto c = PowerCurve::linear_ramp(3.5, 12.0, 25.0);
  write_power_curve(dir / "c.csv", c);
  const auto back = read_power_curve(dir / "c.csv");
  EXPECT_EQ(back.cut_in(), 3.5);
  EXPECT_EQ(back.rated_speed(), 12.0);
  for (double v = 0; v < 30; v += 0.37) EXPECT_EQ(back.evaluate(v), c.evaluate(v));
}

TEST(Csv, HydroParamsWithBlanks) {
  const auto dir = scratch_dir("hydro");
  std::ofstream(dir / "h.csv")
      << "country,flood_threshold,flow_multiplier,head_m,ror_capacity_MW,sto_capacity_MW,"
         "sto_energy_MWh,yearly_energy_MWh,phs_power_MW,phs_energy_MWh,phs_duration_h\n"
         "NO,,279.3,,100,200,3000,5000,1300,472600,\n"
         "DE,,,2,50,,,,,,\n";
  const auto h = read_hydro_params(dir / "h.csv");
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].params.flood_threshold, 0.9);
  EXPECT_EQ(h[0].params.flow_multiplier, 279.3);
  EXPECT_EQ(h[0].phs_energy_mwh, 472600.0);
  EXPECT_FALSE(h[0].phs_duration_h);
  EXPECT_EQ(h[1].params.flood_threshold, 0.7);
  EXPECT_FALSE(h[1].params.flow_multiplier);
  EXPECT_EQ(h[1].params.head_m, 2.0);
}

TEST(Csv, RunoffGridReadsSharedSeriesFile) {
  const auto dir = scratch_dir("runoff");
  std::ofstream(dir / "ro.csv") << "# resolution_hours=1\nc1,c2\n0.1,0.2\n0.3,0.4\n";
  std::ofstream(dir / "grid.csv") << "cell,country,area_km2,series\nc2,NO,5,ro.csv\nc1,SE,3,ro.csv\n";
  const auto g = read_runoff_grid(dir / "grid.csv");
  ASSERT_EQ(g.cells().size(), 2u);
  EXPECT_EQ(g.cells()[0].id, "c1");
  EXPECT_EQ(g.cells()[0].country, "SE");
  EXPECT_EQ(g.cells()[1].runoff[1], 0.4);
  EXPECT_EQ(g.cells()[1].area_km2, 5.0);
}

TEST(SitingIo, JsonRoundTrip) {
  Xoshiro256 rng(4);
  const auto cat = testkit::random_catalog(rng, 8, 2, 10, 0.3);
  SitingSolution s;
  s.selected = {1, 4, 6};
  s.partition_counts = count_by_partition(cat, s.selected);
  s.objective = 17;
  s.scheme = Scheme::comp;
  s.rng_seed = 99;
  const auto j = to_json(s, cat);
  EXPECT_EQ(j.at("sites")[0], "s1");
  EXPECT_EQ(siting_from_json(Json::parse(j.dump()), cat), s);
  auto bad = j;
  bad["scheme"] = "best";
  EXPECT_THROW(siting_from_json(bad, cat), InvalidInput);
  bad = j;
  bad["sites"].push_back("nope");
  EXPECT_THROW(siting_from_json(bad, cat), InvalidInput);
  const auto g = to_geojson(s, cat);
  EXPECT_EQ(g.at("features").size(), 3u);
}

TEST(CepIo, LoadsDocumentAndProrates) {
  const auto dir = scratch_dir("cep");
  std::ofstream(dir / "demand.csv") << "# resolution_hours=2\nA,B\n1,2\n3,4\n5,6\n7,8\n";
  std::ofstream(dir / "avail.csv") << "# resolution_hours=2\nw\n0.1\n0.3\n0.5\n0.7\n";
  std::ofstream(dir / "cep.json") << R"({
    "demand": "demand.csv",
    "buses": [{"id": "A", "reserve_margin": 0.1}, {"id": "B"}],
    "technologies": {
      "gas": {"kind": "dispatchable", "capex": 1000, "lifetime": 25, "discount_rate": 0,
              "fixed_om": 8.76, "fuel_cost": 20, "efficiency": 0.5, "firm": true},
      "nuke": {"kind": "dispatchable", "capex": null},
      "wind": {"kind": "res", "capex_annuity": 87.6},
      "offshore": {"kind": "sited_res", "capex_annuity": 1}
    },
    "plants": [{"bus": "A", "technology": "gas"},
               {"bus": "B", "technology": "wind", "availability": {"file": "avail.csv", "column": "w"}},
               {"bus": "B", "technology": "nuke", "legacy": 3}],
    "lines": [{"id": "AB", "from": "A", "to": "B", "capex_per_km": 2, "length_km": 100,
               "lifetime": 10, "discount_rate": 0}],
    "co2_budget": {"reduction": 0.8, "reference": 50},
    "shedding_penalty": 3000,
    "sited": {"technology": "offshore", "bus_of_partition": {"DK": "B"}}
  })";
  const auto doc = load_cep_document(dir / "cep.json", 2);
  const auto& inst = doc.instance;
  ASSERT_EQ(inst.buses.size(), 2u);
  EXPECT_EQ(inst.horizon(), 2u);
  EXPECT_EQ(inst.resolution_hours(), 4.0);
  EXPECT_EQ(inst.buses[0].demand[1], 6.0);
  EXPECT_EQ(inst.buses[0].reserve_margin, 0.1);
  EXPECT_FALSE(inst.buses[1].reserve_margin);
  // 8 hours of a year
  const double f = 8.0 / 8760.0;
  EXPECT_DOUBLE_EQ(inst.technologies.at("gas").capex_annuity, 40.0 * f);
  EXPECT_DOUBLE_EQ(inst.technologies.at("gas").fixed_om, 8.76 * f);
  EXPECT_FALSE(inst.technologies.at("nuke").expandable);
  EXPECT_TRUE(inst.technologies.at("wind").expandable);
  EXPECT_DOUBLE_EQ(inst.lines[0].capex_annuity, 20.0 * f);
  EXPECT_NEAR(*inst.co2_budget, 10.0, 1e-12);
  EXPECT_EQ((*inst.plants[1].availability)[0], 0.2);
  EXPECT_EQ(doc.sited_technology, "offshore");

  auto d2 = doc;
  std::vector<Site> sites{testkit::site("x", "DK", 500, {0.4, 0.6}), testkit::site("y", "B", 400, {0.2, 0.9})};
  for (auto& s : sites) s.capacity_factors = TimeSeries({0.4, 0.6}, 4.0);
  SiteCatalog cat(sites);
  const std::vector<std::size_t> sel{0, 1};
  attach_sites(d2, cat, sel);
  ASSERT_EQ(d2.instance.sited.size(), 2u);
  EXPECT_EQ(d2.instance.sited[0].bus, "B");
  EXPECT_EQ(d2.instance.sited[1].bus, "B");
  const auto sol = solve_cep(d2.instance);
  EXPECT_LE(max_balance_residual(d2.instance, sol), 1e-6);
  const auto report = cep_report(d2.instance, sol).str();
  EXPECT_NE(report.find("total,total"), std::string::npos);
  EXPECT_NEAR(cep_summary(sol).at("costs").at("total").get<double>(), sol.objective, 1e-6);
}

TEST(CepIo, NoProrateKeepsYearlyCosts) {
  const auto dir = scratch_dir("cep2");
  std::ofstream(dir / "demand.csv") << "A\n1\n";
  std::ofstream(dir / "cep.json")
      << R"({"demand": "demand.csv", "buses": [{"id": "A"}], "prorate": false,
             "technologies": {"gas": {"kind": "dispatchable", "capex_annuity": 5}}})";
  EXPECT_EQ(load_cep_document(dir / "cep.json").instance.technologies.at("gas").capex_annuity, 5.0);
}

TEST(CepIo, BadDocuments) {
  const auto dir = scratch_dir("cep3");
  std::ofstream(dir / "demand.csv") << "A\n1\n";
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_cep_document(dir / "broken.json"), InvalidInput);
  EXPECT_THROW(load_cep_document(dir / "absent.json"), IoError);
  std::ofstream(dir / "kind.json")
      << R"({"demand": "demand.csv", "buses": [{"id": "A"}],
             "technologies": {"gas": {"kind": "magic"}}})";
  EXPECT_THROW(load_cep_document(dir / "kind.json"), InvalidInput);
  std::ofstream(dir / "named.json")
      << R"({"demand": "demand.csv", "buses": [{"id": "A"}],
             "technologies": {"ror": {"kind": "res"}},
             "plants": [{"bus": "A", "technology": "ror", "availability": {"hydro_ror": "NO"}}]})";
  EXPECT_THROW(load_cep_document(dir / "named.json"), InvalidInput);
  const auto ok = load_cep_document(dir / "named.json", 1, [](const Json& spec) {
    EXPECT_EQ(spec.at("hydro_ror"), "NO");
    return TimeSeries({0.5});
  });
  EXPECT_EQ((*ok.instance.plants[0].availability)[0], 0.5);
}
