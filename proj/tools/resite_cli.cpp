#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "resite.hpp"

namespace fs = std::filesystem;
using resite::Json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

int fail(int code, const std::string& kind, const std::string& message,
         const std::string& status = {}) {
  Json j{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!status.empty()) j["status"] = status;
  std::cerr << j.dump() << "\n";
  return code;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;

  resite::PipelineConfig load() const {
    std::optional<fs::path> o;
    if (!out.empty()) o = fs::path(out);
    return resite::load_config(config, seed, o);
  }
};

void add_common(CLI::App* app, Common& c, bool with_config = true) {
  if (with_config) app->add_option("config", c.config, "pipeline config (JSON)")->required();
  app->add_option("--seed", c.seed, "seed, overrides the config");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app->add_option("--out", c.out, "output directory");
}

Json siting_summary(const resite::PipelineConfig& cfg, const resite::SitingRun& run) {
  return {{"stage", "site"},
          {"config_hash", cfg.hash},
          {"objective", run.solution.objective},
          {"coverage", run.coverage},
          {"windows", run.matrix.windows()},
          {"sites", run.solution.selected.size()},
          {"output", cfg.output.string()}};
}

Json cep_line(const resite::PipelineConfig& cfg, const resite::CepRun& run) {
  Json j{{"stage", "cep"}, {"config_hash", cfg.hash}, {"output", cfg.output.string()}};
  if (run.solution) {
    j["objective"] = run.solution->objective;
    j["shed_energy"] = run.solution->shed_energy;
  } else {
    j["mps"] = run.mps.string();
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offshore wind siting and capacity expansion planning"};
  app.require_subcommand(1);

  Common site_opt, cep_opt, pipe_opt, mps_opt;
  std::string cep_siting, mps_siting;
  bool mps_mir = false;
  resite::SyntheticSpec synth;
  std::string synth_out;

  auto* site = app.add_subcommand("site", "select sites and write the siting outputs");
  add_common(site, site_opt);
  auto* cep = app.add_subcommand("cep", "size the system for a stored siting solution");
  add_common(cep, cep_opt);
  cep->add_option("--siting", cep_siting, "siting solution (default <out>/solution.json)");
  auto* pipeline = app.add_subcommand("pipeline", "run siting and capacity expansion");
  add_common(pipeline, pipe_opt);
  auto* mps = app.add_subcommand("export-mps", "write the CEP (or the siting MIR) as MPS");
  add_common(mps, mps_opt);
  mps->add_option("--siting", mps_siting, "siting solution (default <out>/solution.json)");
  mps->add_flag("--mir", mps_mir, "export the siting relaxation instead of the CEP");
  auto* syn = app.add_subcommand("synth", "generate a synthetic dataset");
  syn->add_option("--out", synth_out, "dataset directory")->required();
  syn->add_option("--seed", synth.seed, "generator seed");
  syn->add_option("--sites", synth.sites, "number of candidate sites");
  syn->add_option("--partitions", synth.partitions, "number of partitions (buses)");
  syn->add_option("--hours", synth.hours, "hourly horizon length");
  syn->add_option("--cells", synth.runoff_cells, "runoff grid cells");
  syn->add_option("--resample", synth.resample_factor, "resample factor written to the config");
  unsigned syn_threads = 1;
  syn->add_option("--threads", syn_threads, "accepted for symmetry; generation is sequential");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (*syn) {
      resite::generate_synthetic(synth, synth_out);
      std::cout << Json{{"stage", "synth"}, {"output", synth_out}, {"seed", synth.seed}}.dump()
                << "\n";
    } else if (*site) {
      const auto cfg = site_opt.load();
      const auto run = resite::run_siting(cfg, site_opt.threads);
      resite::write_siting_outputs(cfg, run);
      std::cout << siting_summary(cfg, run).dump() << "\n";
    } else if (*cep) {
      const auto cfg = cep_opt.load();
      const fs::path sol = cep_siting.empty() ? cfg.output / "solution.json" : fs::path(cep_siting);
      const auto siting = resite::load_siting(cfg, sol, cep_opt.threads);
      const auto run = resite::run_cep(cfg, siting);
      std::cout << cep_line(cfg, run).dump() << "\n";
    } else if (*pipeline) {
      const auto cfg = pipe_opt.load();
      const auto siting = resite::run_siting(cfg, pipe_opt.threads);
      resite::write_siting_outputs(cfg, siting);
      std::cout << siting_summary(cfg, siting).dump() << "\n";
      const auto run = resite::run_cep(cfg, siting);
      std::cout << cep_line(cfg, run).dump() << "\n";
    } else if (*mps) {
      auto cfg = mps_opt.load();
      fs::create_directories(cfg.output);
      if (mps_mir) {
        const auto run = resite::prepare_siting(cfg, mps_opt.threads);
        const auto lp = resite::build_comp_mir(run.matrix, run.working, run.plan);
        const auto path = cfg.output / "siting_mir.mps";
        resite::export_mps(lp, path.string(), {"config_hash=" + cfg.hash});
        std::cout << Json{{"stage", "export-mps"}, {"mps", path.string()}}.dump() << "\n";
      } else {
        const fs::path sol =
            mps_siting.empty() ? cfg.output / "solution.json" : fs::path(mps_siting);
        const auto siting = resite::load_siting(cfg, sol, mps_opt.threads);
        const auto doc = resite::build_cep_document(cfg, siting);
        const auto model = resite::build_lp(doc.instance);
        const auto path = cfg.output / "cep.mps";
        resite::export_mps(model.lp, path.string(), {"config_hash=" + cfg.hash});
        std::cout << Json{{"stage", "export-mps"}, {"mps", path.string()}}.dump() << "\n";
      }
    }
  } catch (const resite::SolverError& e) {
    return fail(kSolver, "solver", e.what(), e.status());
  } catch (const resite::IoError& e) {
    return fail(kData, "io", e.what());
  } catch (const resite::InvalidInput& e) {
    return fail(kData, "data", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kData, "io", e.what());
  } catch (const std::exception& e) {
    return fail(kData, "data", e.what());
  }
  return kOk;
}
