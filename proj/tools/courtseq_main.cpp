// courtseq command line: synth | run | embed | report
//
// Every subcommand takes --config (JSON) plus a few direct flags that
// override their config keys; --seed and --out work everywhere. Exit code 0
// on success, 1 with a stage-tagged message otherwise.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "courtseq/kernels.hpp"
#include "courtseq/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool dump_series = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--out", args.out_dir, "output directory (overrides paths.out_dir)");
  cmd->add_option("--seed", args.seed, "global seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_flag("--dump-series", args.dump_series,
                "also write the micro-event dump and per-cell embedding CSVs");
}

courtseq::PipelineConfig resolve_config(const CommonArgs& args) {
  courtseq::PipelineConfig cfg = args.config_path.empty()
                                     ? courtseq::default_pipeline_config()
                                     : courtseq::load_pipeline_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed_set) {
    cfg.seed = args.seed;
    cfg.synth.seed = courtseq::derive_seed(cfg.seed, courtseq::Subsystem::Synth);
  }
  if (args.dump_series) cfg.dump_series = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"player-tracking micro-event representation pipeline"};
  app.require_subcommand(1);

  CommonArgs synth_args, run_args, report_args;

  auto* synth = app.add_subcommand("synth", "generate a synthetic tracking + play-by-play pair");
  add_common(synth, synth_args);
  std::int64_t events_per_class = -1;
  double noise_sigma = -1.0;
  synth->add_option("--events-per-class", events_per_class, "events per outcome class");
  synth->add_option("--noise", noise_sigma, "positional noise sigma in feet");

  auto* run = app.add_subcommand("run", "execute the full pipeline and emit the report bundle");
  add_common(run, run_args);
  std::string tracking_path, pbp_path;
  run->add_option("--tracking", tracking_path, "tracking file (overrides paths.tracking)");
  run->add_option("--pbp", pbp_path, "play-by-play file (overrides paths.pbp)");

  auto* embed = app.add_subcommand("embed", "embed a micro-event dump with a trained checkpoint");
  std::string checkpoint_path, dump_path, embed_out;
  embed->add_option("--checkpoint", checkpoint_path, "encoder checkpoint")->required();
  embed->add_option("--series", dump_path, "micro-event dump CSV")->required();
  embed->add_option("--out", embed_out, "output embedding CSV")->required();

  auto* report = app.add_subcommand("report", "classifier grid over precomputed embeddings");
  add_common(report, report_args);
  std::string embeddings_csv;
  report->add_option("--embeddings", embeddings_csv, "embedding CSV from run or embed")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      courtseq::PipelineConfig cfg = resolve_config(synth_args);
      if (events_per_class == 0) {
        std::fprintf(stderr, "[synth] --events-per-class must be >= 1\n");
        return 1;
      }
      if (events_per_class > 0) {
        cfg.synth.n_events_per_class = static_cast<std::size_t>(events_per_class);
      }
      if (noise_sigma >= 0.0) cfg.synth.noise_sigma = noise_sigma;
      courtseq::cmd_synth(cfg);
      std::printf("wrote %s/tracking.jsonl and %s/pbp.csv\n", cfg.out_dir.c_str(),
                  cfg.out_dir.c_str());
    } else if (run->parsed()) {
      courtseq::PipelineConfig cfg = resolve_config(run_args);
      if (!tracking_path.empty()) cfg.tracking_path = tracking_path;
      if (!pbp_path.empty()) cfg.pbp_path = pbp_path;
      const courtseq::RunSummary summary = courtseq::cmd_run(cfg);
      std::printf("kernels: %s\n",
                  courtseq::kern::backend_name(courtseq::kern::active_backend()).c_str());
      std::printf("events: %zu, micro-events: %zu\n", summary.n_events,
                  summary.n_micro_events);
      for (const auto& cell : summary.cells) {
        std::printf("fraction %.4g (%s): accuracy %.6f\n", cell.fraction,
                    courtseq::setup_letter(cfg.setup).c_str(), cell.accuracy);
      }
      std::printf("report bundle in %s\n", cfg.out_dir.c_str());
    } else if (embed->parsed()) {
      courtseq::cmd_embed(checkpoint_path, dump_path, embed_out);
      std::printf("wrote %s\n", embed_out.c_str());
    } else if (report->parsed()) {
      courtseq::PipelineConfig cfg = resolve_config(report_args);
      const courtseq::RunSummary summary = courtseq::cmd_report(cfg, embeddings_csv);
      for (const auto& cell : summary.cells) {
        std::printf("fraction %.4g (a): accuracy %.6f\n", cell.fraction, cell.accuracy);
      }
      std::printf("report bundle in %s\n", cfg.out_dir.c_str());
    }
  } catch (const courtseq::StageError& e) {
    std::fprintf(stderr, "[%s] %s\n", e.stage.c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
