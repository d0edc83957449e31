#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "resite/pipeline.hpp"
#include "resite/synthetic.hpp"
#include "support.hpp"

#ifndef RESITE_CLI
#define RESITE_CLI "resite_cli"
#endif

using namespace resite;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "resite_pipeline_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
  const auto o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string(RESITE_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(o), slurp(e)};
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

// one offshore site on bus Z1, a firm gas unit, flat 1000 MW demand over two hours
fs::path write_toy(const fs::path& dir, bool gas_expandable = true) {
  std::ofstream(dir / "catalog.csv") << "id,lon,lat,partition,legacy_MW,potential_MW\nS1,1,55,Z1,0,500\n";
  std::ofstream(dir / "cf.csv") << "S1\n0.4\n0.6\n";
  std::ofstream(dir / "demand.csv") << "Z1\n1000\n1000\n";
  Json cep = {{"demand", "demand.csv"},
              {"buses", {{{"id", "Z1"}, {"reserve_margin", 0.2}}}},
              {"technologies",
               {{"offshore", {{"kind", "sited_res"}, {"capex_annuity", 1e9}}},
                {"gas",
                 {{"kind", "dispatchable"},
                  {"capex_annuity", gas_expandable ? Json(100.0) : Json(nullptr)},
                  {"variable_om", 5.0},
                  {"firm", true}}}}},
              {"plants", {{{"bus", "Z1"}, {"technology", "gas"}}}},
              {"sited", {{"technology", "offshore"}}},
              {"prorate", false}};
  write_text(dir / "cep.json", cep.dump(2));
  Json cfg = {{"seed", 1},
              {"paths",
               {{"catalog", "catalog.csv"},
                {"capacity_factors", "cf.csv"},
                {"demand", "demand.csv"},
                {"cep", "cep.json"},
                {"output", "out"}}},
              {"siting", {{"scheme", "prod"}, {"counts", {{"Z1", 1}}}}}};
  write_text(dir / "config.json", cfg.dump(2));
  return dir / "config.json";
}

fs::path synthetic(const std::string& name, std::uint64_t seed = 42) {
  const auto dir = scratch_dir(name);
  SyntheticSpec spec;
  spec.seed = seed;
  generate_synthetic(spec, dir);
  return dir;
}

}  // namespace

TEST(Synthetic, SameSeedSameBytes) {
  const auto a = synthetic("syn_a"), b = synthetic("syn_b");
  const auto ta = tree(a), tb = tree(b);
  EXPECT_EQ(ta, tb);
  EXPECT_GE(ta.size(), 10u);
  const auto c = synthetic("syn_c", 43);
  EXPECT_NE(tree(c).at("wind.csv"), ta.at("wind.csv"));
}

TEST(Synthetic, EvenSplitAndUnitCapacityFactors) {
  const auto dir = synthetic("syn_split");
  const auto rows = read_catalog_rows(dir / "catalog.csv");
  ASSERT_EQ(rows.size(), 8u);
  std::map<std::string, int> per;
  for (const auto& r : rows) ++per[r.partition];
  EXPECT_EQ(per, (std::map<std::string, int>{{"Z1", 4}, {"Z2", 4}}));
  const auto cfg = load_config(dir / "config.json");
  const auto res = load_resource(cfg);
  for (std::size_t l = 0; l < res.catalog.size(); ++l)
    for (double v : res.catalog.site(l).capacity_factors.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  for (const auto& s : read_series(dir / "res_profiles.csv").series)
    for (double v : s.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
}

TEST(Pipeline, ConfigValidation) {
  const auto dir = synthetic("cfg");
  auto raw = read_json(dir / "config.json");
  raw["paths"]["catalog"] = "nope.csv";
  write_text(dir / "bad1.json", raw.dump());
  EXPECT_THROW(load_config(dir / "bad1.json"), IoError);
  raw = read_json(dir / "config.json");
  raw["siting"]["varsigma"] = 1.5;
  write_text(dir / "bad2.json", raw.dump());
  EXPECT_THROW(load_config(dir / "bad2.json"), InvalidInput);
  raw = read_json(dir / "config.json");
  raw["siting"]["scheme"] = "magic";
  write_text(dir / "bad3.json", raw.dump());
  EXPECT_THROW(load_config(dir / "bad3.json"), InvalidInput);
  // the hash ignores where outputs go but follows the seed
  const auto a = load_config(dir / "config.json");
  const auto b = load_config(dir / "config.json", std::nullopt, dir / "elsewhere");
  const auto c = load_config(dir / "config.json", 7);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
}

TEST(Pipeline, ProdMatchesLibraryCall) {
  const auto dir = synthetic("prod");
  auto raw = read_json(dir / "config.json");
  raw["siting"]["scheme"] = "prod";
  write_text(dir / "prod.json", raw.dump());
  const auto cfg = load_config(dir / "prod.json");
  const auto run = run_siting(cfg);
  const auto direct = solve_prod(run.working, run.plan);
  EXPECT_EQ(run.solution.selected, direct.selected);
  EXPECT_EQ(run.solution.objective, direct.objective);
}

TEST(Pipeline, ZeroIterationsKeepsGreedy) {
  const auto dir = synthetic("greedy");
  auto raw = read_json(dir / "config.json");
  raw["siting"]["anneal"]["iterations"] = 0;
  write_text(dir / "greedy.json", raw.dump());
  const auto cfg = load_config(dir / "greedy.json");
  const auto run = run_siting(cfg);
  const auto g = greedy_init(run.matrix, run.working, run.plan);
  EXPECT_EQ(run.solution.selected, g.selected);
  write_siting_outputs(cfg, run);
  const auto back = siting_from_json(read_json(cfg.output / "solution.json"), run.working);
  EXPECT_EQ(back.selected, g.selected);
}

TEST(Pipeline, UnpartitionedCoverageDominates) {
  const auto dir = synthetic("b1");
  auto raw = read_json(dir / "config.json");
  const auto part = run_siting(load_config(dir / "config.json"));
  raw["siting"]["partitioned"] = false;
  write_text(dir / "b1.json", raw.dump());
  const auto merged = run_siting(load_config(dir / "b1.json"));
  EXPECT_EQ(merged.plan.total(), part.plan.total());
  EXPECT_GE(merged.coverage, part.coverage);
  // exhaustive optimum over the merged partition
  std::size_t best = 0;
  testkit::for_each_subset(merged.working.size(), merged.plan.total(),
                           [&](const std::vector<std::size_t>& s) {
                             if (is_feasible(merged.working, merged.plan, s))
                               best = std::max(best, testkit::naive_coverage(merged.matrix, s));
                           });
  EXPECT_EQ(merged.coverage, best);
}

TEST(Pipeline, ThreadCountDoesNotChangeOutputs) {
  const auto dir = synthetic("threads");
  auto cfg1 = load_config(dir / "config.json", std::nullopt, dir / "o1");
  auto cfg8 = load_config(dir / "config.json", std::nullopt, dir / "o8");
  const auto r1 = run_siting(cfg1, 1), r8 = run_siting(cfg8, 8);
  EXPECT_EQ(r1.solution, r8.solution);
  write_siting_outputs(cfg1, r1);
  write_siting_outputs(cfg8, r8);
  run_cep(cfg1, r1);
  run_cep(cfg8, r8);
  EXPECT_EQ(tree(dir / "o1"), tree(dir / "o8"));
}

TEST(Pipeline, HydroSeriesAndCalibration) {
  const auto dir = synthetic("hydro");
  const auto cfg = load_config(dir / "config.json");
  const auto siting = run_siting(cfg);
  write_siting_outputs(cfg, siting);
  const auto run = run_cep(cfg, siting);
  ASSERT_TRUE(run.solution);
  ASSERT_EQ(run.flow_multipliers.count("NO"), 1u);
  EXPECT_GT(run.flow_multipliers.at("NO").value, 0.0);
  EXPECT_LE(max_balance_residual(run.document.instance, *run.solution), 1e-6);
  const auto csv = slurp(cfg.output / "flow_multipliers.csv");
  EXPECT_NE(csv.find("config_hash=" + cfg.hash), std::string::npos);
  for (const char* f : {"solution.json", "solution.geojson", "residual.csv", "residual_stats.csv",
                        "cep_report.csv", "cep_summary.json", "cep_dispatch.csv"})
    EXPECT_NE(slurp(cfg.output / f).find(cfg.hash), std::string::npos) << f;
}

TEST(Cli, ToyReportHasReserveCapacity) {
  const auto dir = scratch_dir("toy");
  const auto config = write_toy(dir);
  const auto r = cli("pipeline " + config.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = slurp(dir / "out" / "cep_report.csv");
  EXPECT_NE(report.find("\ngas,dispatchable,0,1200,1200,0,2000,"), std::string::npos) << report;
  const auto summary = read_json(dir / "out" / "cep_summary.json");
  EXPECT_NEAR(summary.at("objective").get<double>(), 1200 * 100.0 + 2000 * 5.0, 1e-6);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("codes");
  EXPECT_EQ(cli("", dir).code, 1);
  EXPECT_EQ(cli("frobnicate", dir).code, 1);
  EXPECT_EQ(cli("site", dir).code, 1);
  const auto config = write_toy(dir);
  EXPECT_EQ(cli("site " + config.string() + " --threads 0", dir).code, 1);

  auto r = cli("site " + (dir / "missing.json").string(), dir);
  EXPECT_EQ(r.code, 2);
  const auto err = Json::parse(r.err);
  EXPECT_EQ(err.at("exit_code"), 2);
  EXPECT_TRUE(err.contains("message"));

  r = cli("cep " + config.string(), dir);
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("not found"), std::string::npos);

  r = cli("site " + config.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out).at("sites"), 1);
  r = cli("cep " + config.string(), dir);
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, SolverFailureIsExitThree) {
  const auto dir = scratch_dir("infeasible");
  const auto config = write_toy(dir, false);
  const auto r = cli("pipeline " + config.string(), dir);
  EXPECT_EQ(r.code, 3);
  const auto err = Json::parse(r.err);
  EXPECT_EQ(err.at("error"), "solver");
  EXPECT_EQ(err.at("status"), "infeasible");
}

TEST(Cli, ExportMpsSkipsSolve) {
  const auto dir = scratch_dir("mps");
  const auto config = write_toy(dir);
  ASSERT_EQ(cli("site " + config.string(), dir).code, 0);
  auto r = cli("export-mps " + config.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "cep.mps"));
  EXPECT_FALSE(fs::exists(dir / "out" / "cep_summary.json"));
  EXPECT_EQ(slurp(dir / "out" / "cep.mps").rfind("* config_hash=", 0), 0u);
  const auto lp = import_mps((dir / "out" / "cep.mps").string());
  EXPECT_EQ(lp.objective_name, "COST");

  r = cli("export-mps --mir " + config.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "siting_mir.mps"));

  auto raw = read_json(config);
  raw["cep"] = {{"solver", "mps-export"}};
  write_text(dir / "export.json", raw.dump());
  r = cli("pipeline " + (dir / "export.json").string() + " --out " + (dir / "ex").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "ex" / "cep.mps"));
  EXPECT_FALSE(fs::exists(dir / "ex" / "cep_report.csv"));
}

TEST(Cli, SynthAndSeedOverride) {
  const auto dir = scratch_dir("synth_cli");
  auto r = cli("synth --out " + (dir / "d").string() + " --seed 5 --sites 6 --partitions 3", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_catalog_rows(dir / "d" / "catalog.csv").size(), 6u);
  r = cli("synth --out " + (dir / "e").string() + " --sites 2 --partitions 3", dir);
  EXPECT_EQ(r.code, 2);
  r = cli("site " + (dir / "d" / "config.json").string() + " --seed 9 --out " + (dir / "o").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(dir / "o" / "solution.json").at("seed"), 9);
}
