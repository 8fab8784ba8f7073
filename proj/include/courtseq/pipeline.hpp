#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "courtseq/classify.hpp"
#include "courtseq/court.hpp"
#include "courtseq/encoder.hpp"
#include "courtseq/fuzzy.hpp"
#include "courtseq/ingest.hpp"
#include "courtseq/segmentation.hpp"
#include "courtseq/triplet.hpp"

namespace courtseq {

/// Everything a run needs, loadable from one JSON file. CLI flags override
/// individual keys after loading. The global seed fans out into per-stage
/// streams via derive_seed, so runs are reproducible end to end.
struct PipelineConfig {
  std::string tracking_path;
  std::string pbp_path;
  std::string out_dir = "out";
  std::string kernel_bank_path;  // empty: stock bank

  CourtSpec court;
  WindowConfig window;
  bool fuzzify_enabled = true;
  bool flip_attack_direction = false;

  EncoderConfig encoder;
  TripletConfig triplet;  // its seed field is ignored; derived from the global seed

  ClassifierConfig classifier;
  ExperimentSetup setup = ExperimentSetup::EncoderEqualsClassifier;
  std::vector<double> fractions = {0.8, 0.65, 0.4, 0.25, 0.1, 0.05};
  double encoder_fraction = 0.8;
  SplitMode split_mode = SplitMode::MicroEvent;

  std::uint64_t seed = 1;
  bool dump_series = false;  // also write the fuzzified dump + embedding CSVs

  SynthConfig synth;  // used by the synth command

  void validate() const;
};

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig default_pipeline_config();

std::string setup_letter(ExperimentSetup s);  // "a" / "b"

/// Stage-tagged failure; the CLI maps it to "[stage] message".
struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string stage_, const std::string& message)
      : std::runtime_error(message), stage(std::move(stage_)) {}
};

/// Writes tracking.jsonl + pbp.csv under out_dir.
void cmd_synth(const PipelineConfig& cfg);

struct RunSummary {
  Census micro_census;
  std::size_t n_events = 0;
  std::size_t n_micro_events = 0;
  std::vector<ExperimentCell> cells;
};

/// The full batch workflow: parse, align, filter, window, fuzzify, split,
/// train, embed, classify, and emit the report bundle under out_dir.
RunSummary cmd_run(const PipelineConfig& cfg);

/// Re-embeds a micro-event dump with a trained checkpoint.
void cmd_embed(const std::string& checkpoint_path, const std::string& dump_path,
               const std::string& out_csv);

/// Classifier grid over precomputed embeddings (the fixed-encoder setup);
/// writes accuracy.csv, confusion CSVs and report.json under out_dir.
RunSummary cmd_report(const PipelineConfig& cfg, const std::string& embeddings_csv);

// --- dump / embedding CSV formats (shared by run, embed, report) -----------

struct SeriesDump {
  std::size_t window = 0;
  std::vector<Series> series;
  std::vector<ActionClass> labels;
  std::vector<std::size_t> event_ids;
  std::vector<std::size_t> offsets;
};

void write_series_dump(const std::string& path, const SeriesDump& dump);
SeriesDump read_series_dump(const std::string& path);

struct EmbeddingTable {
  Mat values;  // n x dim
  std::vector<ActionClass> labels;
};

void write_embedding_csv(const std::string& path, const EmbeddingTable& table);
EmbeddingTable read_embedding_csv(const std::string& path);

}  // namespace courtseq
