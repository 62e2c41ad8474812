// xtalbench: generate the corpus, run the SE/CE protocols against a model
// endpoint, score the run logs and emit the report tables.

#include "xtalbench/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace fs = std::filesystem;
using namespace xtalbench;

namespace {

void print_generate(const GenerateResult& r, const fs::path& out) {
  if (r.skipped) {
    fmt::print("dataset at {} is up to date ({} pose entries); nothing to do\n", out.string(), r.entries);
    return;
  }
  fmt::print("wrote {} pose entries for {} supercells to {}\n", r.entries, r.manifest.supercells.size(), out.string());
  for (const auto& s : r.manifest.supercells) {
    fmt::print("  {:<12} R={:<4} {:>4} atoms  S=diag({},{},{}){}\n", s.material, radius_label(s.radius_nm), s.n_atoms,
               s.multiplicity[0], s.multiplicity[1], s.multiplicity[2],
               s.atom_count_in_range ? "" : "  [outside published atom-count range]");
  }
  fmt::print("corpus {}\n", r.manifest.corpus_hash);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystallographic stress-test benchmark for multimodal models"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // generate
  GenerateOptions gen;
  gen.root = "dataset";
  int width = 64, height = 64;
  std::optional<double> blur;
  auto* generate = app.add_subcommand("generate", "Build supercells, renders, annotations and the manifest");
  generate->add_option("--out", gen.root, "Dataset directory")->capture_default_str();
  generate->add_option("--materials", gen.materials, "Materials to include (default: all)")->delimiter(',');
  generate->add_option("--radii", gen.radii_nm, "Supercell radii in nm")->delimiter(',')->capture_default_str();
  generate->add_option("--poses", gen.pose_count, "Poses per supercell (1-10)")->capture_default_str();
  generate->add_option("--width", width, "Image width in pixels")->capture_default_str();
  generate->add_option("--height", height, "Image height in pixels")->capture_default_str();
  generate->add_option("--blur-sigma", blur, "Gaussian edge sigma in pixels (default: scaled with disk size)");
  generate->add_flag("--force", gen.force, "Regenerate even when the manifest is current");

  // run
  RunConfig run;
  run.dataset = "dataset";
  std::string protocol = "both";
  std::size_t stop_after = 0;
  auto* run_cmd = app.add_subcommand("run", "Query an endpoint on the SE and/or CE instances");
  run_cmd->add_option("--dataset", run.dataset, "Dataset directory")->capture_default_str();
  run_cmd->add_option("--endpoint", run.endpoint, "Endpoint name (mock-oracle, mock-scaled, mock-null, "
                                                   "mock-garbage, mock-noisy or one from --endpoints)")
      ->required();
  run_cmd->add_option("--endpoints", run.endpoints_file, "Endpoint configuration file (JSON)");
  run_cmd->add_option("--protocol", protocol, "se, ce or both")
      ->check(CLI::IsMember({"se", "ce", "both"}))
      ->capture_default_str();
  run_cmd->add_option("--log", run.log, "Run log path (default: runs/<endpoint>.jsonl)");
  run_cmd->add_flag("--resume", run.resume, "Continue an existing log, skipping completed instances");
  run_cmd->add_flag("--force", run.force, "Replace an existing log");
  run_cmd->add_option("--seed", run.seed, "Seed for stochastic mocks")->capture_default_str();
  run_cmd->add_option("--stop-after", stop_after, "Stop after this many results (interrupt simulation)")
      ->group("");

  // score / report
  std::vector<fs::path> logs;
  fs::path dataset = "dataset";
  fs::path out = "reports";
  auto* score = app.add_subcommand("score", "Score run logs into scores.jsonl and a summary");
  auto* report = app.add_subcommand("report", "Write every report table (CSV and text)");
  for (auto* sub : {score, report}) {
    sub->add_option("--log", logs, "Run log(s)")->required();
    sub->add_option("--dataset", dataset, "Dataset directory")->capture_default_str();
    sub->add_option("--out", out, "Output directory")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*generate) {
      gen.render.width = width;
      gen.render.height = height;
      gen.render.blur_sigma = blur;
      print_generate(cmd_generate(gen), gen.root);
      return kExitOk;
    }
    if (*run_cmd) {
      run.protocols = protocol_selection_from_string(protocol);
      if (stop_after > 0) run.stop_after = stop_after;
      const auto s = cmd_run(run);
      fmt::print("{}: {} instances, {} already logged, {} queried, {} without a usable response\n", s.log.string(),
                 s.instances, s.skipped, s.queried, s.failed);
      return s.failed > 0 ? kExitPartial : kExitOk;
    }
    if (*score) {
      const auto scores = cmd_score(logs, dataset, out);
      fmt::print("scored {} results into {}\n", scores.size(), out.string());
      return kExitOk;
    }
    if (*report) {
      const auto files = cmd_report(logs, dataset, out);
      fmt::print("wrote {} report files to {}\n", files.size(), out.string());
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const LoadError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const LookupError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const ArgumentError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitHard;
  }
  return kExitOk;
}
