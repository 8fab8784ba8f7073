#include "courtseq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "courtseq/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace courtseq {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fraction_pct(double f) { return std::to_string(std::llround(f * 100.0)); }

class AtomicWriter {
 public:
  explicit AtomicWriter(const std::string& path)
      : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + tmp_);
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + tmp_);
    fs::rename(tmp_, path_);
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
};

void atomic_write(const std::string& path, const std::string& content) {
  AtomicWriter w(path);
  w.stream() << content;
  w.commit();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void PipelineConfig::validate() const {
  court.validate();
  window.validate();
  encoder.validate();
  triplet.validate();
  const std::size_t expected = fuzzify_enabled ? kFuzzyChannels : kRawChannels;
  if (encoder.in_channels != expected) {
    throw std::invalid_argument("config: encoder.in_channels must be " +
                                std::to_string(expected) +
                                (fuzzify_enabled ? " when fuzzify is on" : " when fuzzify is off"));
  }
  if (fractions.empty()) throw std::invalid_argument("config: fractions must be nonempty");
  for (const double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("config: fractions must lie in (0,1)");
  }
  if (!(encoder_fraction > 0.0 && encoder_fraction < 1.0)) {
    throw std::invalid_argument("config: encoder_fraction must lie in (0,1)");
  }
  if (classifier.kind != "knn" && classifier.kind != "svm") {
    throw std::invalid_argument("config: classifier.kind must be knn or svm");
  }
}

PipelineConfig default_pipeline_config() { return PipelineConfig{}; }

namespace {

PipelineConfig config_from_json(const ordered_json& j) {
  PipelineConfig cfg;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    cfg.tracking_path = p.value("tracking", cfg.tracking_path);
    cfg.pbp_path = p.value("pbp", cfg.pbp_path);
    cfg.out_dir = p.value("out_dir", cfg.out_dir);
    cfg.kernel_bank_path = p.value("kernel_bank", cfg.kernel_bank_path);
  }
  if (j.contains("court")) {
    const auto& c = j.at("court");
    cfg.court.length_x = c.value("length_x", cfg.court.length_x);
    cfg.court.width_y = c.value("width_y", cfg.court.width_y);
    cfg.court.frame_rate = c.value("frame_rate", cfg.court.frame_rate);
  }
  if (j.contains("window")) {
    const auto& w = j.at("window");
    cfg.window.window_seconds = w.value("window_seconds", cfg.window.window_seconds);
    cfg.window.stride_seconds = w.value("stride_seconds", cfg.window.stride_seconds);
    cfg.window.min_event_seconds = w.value("min_event_seconds", cfg.window.min_event_seconds);
  }
  if (j.contains("features")) {
    const auto& f = j.at("features");
    cfg.fuzzify_enabled = f.value("fuzzify", cfg.fuzzify_enabled);
    cfg.flip_attack_direction = f.value("flip_attack_direction", cfg.flip_attack_direction);
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    cfg.encoder.in_channels = e.value("in_channels", cfg.encoder.in_channels);
    cfg.encoder.hidden_channels = e.value("hidden_channels", cfg.encoder.hidden_channels);
    cfg.encoder.depth = e.value("depth", cfg.encoder.depth);
    cfg.encoder.kernel_size = e.value("kernel_size", cfg.encoder.kernel_size);
    cfg.encoder.out_dim = e.value("out_dim", cfg.encoder.out_dim);
    cfg.encoder.leaky_slope = e.value("leaky_slope", cfg.encoder.leaky_slope);
    cfg.encoder.residual = e.value("residual", cfg.encoder.residual);
  }
  if (j.contains("triplet")) {
    const auto& t = j.at("triplet");
    cfg.triplet.k_negatives = t.value("k_negatives", cfg.triplet.k_negatives);
    cfg.triplet.fixed_length = t.value("fixed_length", cfg.triplet.fixed_length);
    cfg.triplet.epochs = t.value("epochs", cfg.triplet.epochs);
    cfg.triplet.batch_size = t.value("batch_size", cfg.triplet.batch_size);
    cfg.triplet.adam.lr = t.value("lr", cfg.triplet.adam.lr);
    cfg.triplet.adam.beta1 = t.value("beta1", cfg.triplet.adam.beta1);
    cfg.triplet.adam.beta2 = t.value("beta2", cfg.triplet.adam.beta2);
    cfg.triplet.adam.eps = t.value("eps", cfg.triplet.adam.eps);
  }
  if (j.contains("classifier")) {
    const auto& c = j.at("classifier");
    cfg.classifier.kind = c.value("kind", cfg.classifier.kind);
    cfg.classifier.knn_k = c.value("knn_k", cfg.classifier.knn_k);
    if (c.contains("svm")) {
      const auto& s = c.at("svm");
      cfg.classifier.svm.epochs = s.value("epochs", cfg.classifier.svm.epochs);
      cfg.classifier.svm.lr = s.value("lr", cfg.classifier.svm.lr);
      cfg.classifier.svm.reg = s.value("reg", cfg.classifier.svm.reg);
    }
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    const std::string setup = e.value("setup", std::string("b"));
    if (setup == "a") {
      cfg.setup = ExperimentSetup::EncoderFixed;
    } else if (setup == "b") {
      cfg.setup = ExperimentSetup::EncoderEqualsClassifier;
    } else {
      throw std::invalid_argument("config: experiment.setup must be \"a\" or \"b\"");
    }
    if (e.contains("fractions")) cfg.fractions = e.at("fractions").get<std::vector<double>>();
    cfg.encoder_fraction = e.value("encoder_fraction", cfg.encoder_fraction);
    const std::string mode = e.value("split_mode", std::string("micro"));
    if (mode == "micro") {
      cfg.split_mode = SplitMode::MicroEvent;
    } else if (mode == "event") {
      cfg.split_mode = SplitMode::Event;
    } else {
      throw std::invalid_argument("config: experiment.split_mode must be \"micro\" or \"event\"");
    }
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    cfg.synth.n_events_per_class = s.value("n_events_per_class", cfg.synth.n_events_per_class);
    cfg.synth.duration_min = s.value("duration_min", cfg.synth.duration_min);
    cfg.synth.duration_max = s.value("duration_max", cfg.synth.duration_max);
    cfg.synth.noise_sigma = s.value("noise_sigma", cfg.synth.noise_sigma);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.dump_series = j.value("dump_series", cfg.dump_series);
  cfg.synth.seed = derive_seed(cfg.seed, Subsystem::Synth);
  cfg.synth.spec = cfg.court;
  return cfg;
}

ordered_json config_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["paths"] = {{"tracking", cfg.tracking_path},
                {"pbp", cfg.pbp_path},
                {"out_dir", cfg.out_dir},
                {"kernel_bank", cfg.kernel_bank_path}};
  j["court"] = {{"length_x", cfg.court.length_x},
                {"width_y", cfg.court.width_y},
                {"frame_rate", cfg.court.frame_rate}};
  j["window"] = {{"window_seconds", cfg.window.window_seconds},
                 {"stride_seconds", cfg.window.stride_seconds},
                 {"min_event_seconds", cfg.window.min_event_seconds}};
  j["features"] = {{"fuzzify", cfg.fuzzify_enabled},
                   {"flip_attack_direction", cfg.flip_attack_direction}};
  j["encoder"] = {{"in_channels", cfg.encoder.in_channels},
                  {"hidden_channels", cfg.encoder.hidden_channels},
                  {"depth", cfg.encoder.depth},
                  {"kernel_size", cfg.encoder.kernel_size},
                  {"out_dim", cfg.encoder.out_dim},
                  {"leaky_slope", cfg.encoder.leaky_slope},
                  {"residual", cfg.encoder.residual}};
  j["triplet"] = {{"k_negatives", cfg.triplet.k_negatives},
                  {"fixed_length", cfg.triplet.fixed_length},
                  {"epochs", cfg.triplet.epochs},
                  {"batch_size", cfg.triplet.batch_size},
                  {"lr", cfg.triplet.adam.lr},
                  {"beta1", cfg.triplet.adam.beta1},
                  {"beta2", cfg.triplet.adam.beta2},
                  {"eps", cfg.triplet.adam.eps}};
  j["classifier"] = {{"kind", cfg.classifier.kind},
                     {"knn_k", cfg.classifier.knn_k},
                     {"svm",
                      {{"epochs", cfg.classifier.svm.epochs},
                       {"lr", cfg.classifier.svm.lr},
                       {"reg", cfg.classifier.svm.reg}}}};
  j["experiment"] = {{"setup", setup_letter(cfg.setup)},
                     {"fractions", cfg.fractions},
                     {"encoder_fraction", cfg.encoder_fraction},
                     {"split_mode", cfg.split_mode == SplitMode::Event ? "event" : "micro"}};
  j["synth"] = {{"n_events_per_class", cfg.synth.n_events_per_class},
                {"duration_min", cfg.synth.duration_min},
                {"duration_max", cfg.synth.duration_max},
                {"noise_sigma", cfg.synth.noise_sigma}};
  j["seed"] = cfg.seed;
  j["dump_series"] = cfg.dump_series;
  return j;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config file not found: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string setup_letter(ExperimentSetup s) {
  return s == ExperimentSetup::EncoderFixed ? "a" : "b";
}

// ---------------------------------------------------------------------------
// Dump / embedding CSV

void write_series_dump(const std::string& path, const SeriesDump& dump) {
  AtomicWriter w(path);
  auto& out = w.stream();
  const std::size_t channels = dump.series.empty() ? 0 : dump.series.front().channels;
  out << "# courtseq-series channels=" << channels << " window=" << dump.window << "\n";
  for (std::size_t i = 0; i < dump.series.size(); ++i) {
    out << dump.event_ids[i] << ',' << dump.offsets[i] << ',' << to_string(dump.labels[i]);
    const Series& s = dump.series[i];
    for (std::size_t c = 0; c < s.channels; ++c) {
      for (std::size_t t = 0; t < s.samples; ++t) out << ',' << fmt_double(s.at(c, t));
    }
    out << '\n';
  }
  w.commit();
}

SeriesDump read_series_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("series dump not found: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::size_t channels = 0;
  SeriesDump dump;
  if (std::sscanf(line.c_str(), "# courtseq-series channels=%zu window=%zu", &channels,
                  &dump.window) != 2) {
    throw std::runtime_error(path + ": missing series dump header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    auto next = [&](const char* what) {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing " + what);
      }
      return field;
    };
    dump.event_ids.push_back(std::stoul(next("event_id")));
    dump.offsets.push_back(std::stoul(next("offset")));
    const auto label = parse_action_class(next("label"));
    if (!label) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad label");
    dump.labels.push_back(*label);
    Series s(channels, dump.window);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < dump.window; ++t) s.at(c, t) = std::stod(next("value"));
    }
    dump.series.push_back(std::move(s));
  }
  return dump;
}

void write_embedding_csv(const std::string& path, const EmbeddingTable& table) {
  AtomicWriter w(path);
  auto& out = w.stream();
  out << "# courtseq-embeddings dim=" << table.values.cols << "\n";
  for (std::size_t i = 0; i < table.values.rows; ++i) {
    out << i << ',' << to_string(table.labels[i]);
    for (std::size_t j = 0; j < table.values.cols; ++j) {
      out << ',' << fmt_double(table.values.at(i, j));
    }
    out << '\n';
  }
  w.commit();
}

EmbeddingTable read_embedding_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("embedding csv not found: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::size_t dim = 0;
  if (std::sscanf(line.c_str(), "# courtseq-embeddings dim=%zu", &dim) != 1) {
    throw std::runtime_error(path + ": missing embeddings header");
  }
  std::vector<std::vector<double>> rows;
  EmbeddingTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    auto next = [&](const char* what) {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing " + what);
      }
      return field;
    };
    next("id");
    const auto label = parse_action_class(next("label"));
    if (!label) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad label");
    table.labels.push_back(*label);
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) row[j] = std::stod(next("value"));
    rows.push_back(std::move(row));
  }
  table.values = Mat(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), table.values.row(i));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_synth(const PipelineConfig& cfg) {
  cfg.synth.validate();
  fs::create_directories(cfg.out_dir);
  const SynthData data = generate_synthetic(cfg.synth);
  const std::string tracking = (fs::path(cfg.out_dir) / "tracking.jsonl").string();
  const std::string pbp = (fs::path(cfg.out_dir) / "pbp.csv").string();
  write_tracking_file(tracking + ".tmp", data.frames);
  fs::rename(tracking + ".tmp", tracking);
  write_pbp_file(pbp + ".tmp", data.actions);
  fs::rename(pbp + ".tmp", pbp);
}

namespace {

struct CellLog {
  std::string name;  // file suffix, e.g. "b_80"
  std::vector<double> mean_loss;
  std::vector<double> wall_seconds;
};

void write_training_log(const std::string& path, const CellLog& log) {
  AtomicWriter w(path);
  auto& out = w.stream();
  out << "epoch,mean_loss,wall_seconds\n";
  for (std::size_t e = 0; e < log.mean_loss.size(); ++e) {
    out << e << ',' << fmt_double(log.mean_loss[e]) << ',' << fmt_double(log.wall_seconds[e])
        << '\n';
  }
  w.commit();
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& m) {
  AtomicWriter w(path);
  auto& out = w.stream();
  out << "class,Shot,Foul,LostBall\n";
  const char* names[] = {"Shot", "Foul", "LostBall"};
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    out << names[r];
    for (std::size_t c = 0; c < kNumClasses; ++c) out << ',' << m.counts[r][c];
    out << '\n';
  }
  w.commit();
}

void write_accuracy_csv(const std::string& path, const std::vector<ExperimentCell>& cells,
                        ExperimentSetup setup) {
  AtomicWriter w(path);
  auto& out = w.stream();
  out << "fraction,setup,accuracy\n";
  for (const ExperimentCell& cell : cells) {
    out << fmt_double(cell.fraction) << ',' << setup_letter(setup) << ','
        << fmt_double(cell.accuracy) << '\n';
  }
  w.commit();
}

ordered_json census_to_json(const Census& c) {
  ordered_json j;
  j["total"] = c.total;
  ordered_json per_class;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    per_class[to_string(static_cast<ActionClass>(i))] = c.per_class[i];
  }
  j["per_class"] = per_class;
  ordered_json per_tag;
  for (std::size_t i = 0; i < kNumTags; ++i) {
    per_tag[to_string(static_cast<ActionTag>(i))] = c.per_tag[i];
  }
  j["per_tag"] = per_tag;
  return j;
}

ordered_json cells_to_json(const std::vector<ExperimentCell>& cells, ExperimentSetup setup) {
  ordered_json arr = ordered_json::array();
  for (const ExperimentCell& cell : cells) {
    ordered_json j;
    j["fraction"] = cell.fraction;
    j["setup"] = setup_letter(setup);
    j["accuracy"] = cell.accuracy;
    j["split_seed"] = cell.split_seed;
    ordered_json m = ordered_json::array();
    for (std::size_t r = 0; r < kNumClasses; ++r) {
      m.push_back(std::vector<std::size_t>(cell.matrix.counts[r].begin(),
                                           cell.matrix.counts[r].end()));
    }
    j["confusion"] = m;
    arr.push_back(j);
  }
  return arr;
}

void write_report_json(const std::string& path, const PipelineConfig& cfg,
                       const RunSummary& summary, const std::vector<CellLog>& logs) {
  ordered_json j;
  j["config"] = config_to_json(cfg);
  ordered_json seeds;
  seeds["global"] = cfg.seed;
  seeds["synth"] = derive_seed(cfg.seed, Subsystem::Synth);
  ordered_json cell_seeds = ordered_json::array();
  for (const ExperimentCell& cell : summary.cells) cell_seeds.push_back(cell.split_seed);
  seeds["classifier_splits"] = cell_seeds;
  j["seeds"] = seeds;
  j["events"] = summary.n_events;
  j["micro_events"] = summary.n_micro_events;
  j["census"] = census_to_json(summary.micro_census);
  j["cells"] = cells_to_json(summary.cells, cfg.setup);
  ordered_json loss;
  for (const CellLog& log : logs) loss[log.name] = log.mean_loss;
  j["training_loss"] = loss;
  atomic_write(path, j.dump(2) + "\n");
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

RunSummary cmd_run(const PipelineConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    if (!fs::exists(cfg.tracking_path)) {
      throw std::runtime_error("missing tracking file: " + cfg.tracking_path);
    }
    if (!fs::exists(cfg.pbp_path)) {
      throw std::runtime_error("missing pbp file: " + cfg.pbp_path);
    }
    if (!cfg.kernel_bank_path.empty() && !fs::exists(cfg.kernel_bank_path)) {
      throw std::runtime_error("missing kernel bank file: " + cfg.kernel_bank_path);
    }
    const std::size_t w = cfg.window.window_frames(cfg.court);
    if (receptive_field(cfg.encoder) < w) {
      std::fprintf(stderr,
                   "warning: receptive field %zu is smaller than the %zu-frame window\n",
                   receptive_field(cfg.encoder), w);
    }
    return 0;
  });

  // ingest
  auto events = stage("ingest", [&] {
    const TrackingData tracking = parse_tracking_file(cfg.tracking_path, cfg.court);
    const PbpData pbp = parse_pbp_file(cfg.pbp_path);
    for (const auto& wmsg : tracking.warnings) std::fprintf(stderr, "warning: %s\n", wmsg.c_str());
    for (const auto& wmsg : pbp.warnings) std::fprintf(stderr, "warning: %s\n", wmsg.c_str());
    AlignResult aligned = align(tracking, pbp.actions, cfg.court);
    for (const auto& wmsg : aligned.warnings) std::fprintf(stderr, "warning: %s\n", wmsg.c_str());
    return std::move(aligned.events);
  });

  // segmentation
  auto micro = stage("segmentation", [&] {
    if (cfg.flip_attack_direction) {
      for (Event& e : events) {
        // crude possession-direction proxy: net ball regression means the
        // attack ran toward low x, so mirror it
        if (!e.frames.empty() && e.frames.back().ball.x < e.frames.front().ball.x) {
          flip_event_x(e, cfg.court);
        }
      }
    }
    const std::vector<Event> kept = filter_events(events, cfg.window, cfg.court);
    return slide_all(kept, cfg.window, cfg.court);
  });

  RunSummary summary;
  summary.n_events = events.size();
  summary.n_micro_events = micro.size();
  summary.micro_census = census(micro);

  // features
  struct FeatureData {
    std::vector<Series> series;
    std::vector<ActionClass> labels;
    std::vector<std::size_t> event_of;
    std::vector<std::size_t> offsets;
  };
  auto data = stage("features", [&] {
    FeatureData d;
    const KernelBank bank = cfg.kernel_bank_path.empty() ? KernelBank{}
                                                         : load_kernel_bank(cfg.kernel_bank_path);
    bank.validate();
    d.series.reserve(micro.size());
    for (std::size_t i = 0; i < micro.size(); ++i) {
      if (cfg.fuzzify_enabled) {
        d.series.push_back(fuzzify(micro[i], bank, i).values);
      } else {
        d.series.push_back(micro[i].series);
      }
      d.labels.push_back(micro[i].label);
      d.event_of.push_back(micro[i].source_event_id);
      d.offsets.push_back(micro[i].offset_frames);
    }
    return d;
  });
  if (data.series.empty()) {
    throw StageError("features", "no micro-events survived segmentation");
  }

  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);

  if (cfg.dump_series) {
    stage("features", [&] {
      SeriesDump dump;
      dump.window = data.series.front().samples;
      dump.series = data.series;
      dump.labels = data.labels;
      dump.event_ids = data.event_of;
      dump.offsets = data.offsets;
      write_series_dump((out_dir / "microevents.csv").string(), dump);
      return 0;
    });
  }

  // train + classify via the experiment grid
  std::vector<CellLog> logs;
  stage("train", [&] {
    GridSpec grid;
    grid.setup = cfg.setup;
    grid.fractions = cfg.fractions;
    grid.encoder_fraction = cfg.encoder_fraction;
    grid.seed = cfg.seed;
    grid.classifier = cfg.classifier;
    grid.split_mode = cfg.split_mode;

    const EmbedFn embed = [&](const std::vector<std::size_t>& train_ids,
                              std::size_t cell) -> Mat {
      const bool encoder_cell = cell == static_cast<std::size_t>(-1);
      const std::size_t idx = encoder_cell ? 0 : cell;
      std::vector<Series> train_series;
      train_series.reserve(train_ids.size());
      for (const std::size_t id : train_ids) train_series.push_back(data.series[id]);

      TripletConfig tcfg = cfg.triplet;
      tcfg.seed = derive_seed(cfg.seed, Subsystem::TripletSample, idx);
      const std::uint64_t init_seed = derive_seed(cfg.seed, Subsystem::EncoderInit, idx);
      TrainResult tr = train(train_series, cfg.encoder, tcfg, init_seed);

      const std::string suffix =
          setup_letter(cfg.setup) +
          (encoder_cell ? "" : "_" + fraction_pct(cfg.fractions[cell]));
      logs.push_back(CellLog{suffix, tr.epoch_mean_loss, tr.epoch_wall_seconds});
      write_training_log((out_dir / ("training_log_" + suffix + ".csv")).string(),
                         logs.back());
      const std::string ckpt = (out_dir / ("checkpoint_" + suffix + ".ckpt")).string();
      save_checkpoint(tr.params, ckpt + ".tmp");
      fs::rename(ckpt + ".tmp", ckpt);

      Mat emb(data.series.size(), cfg.encoder.out_dim);
      for (std::size_t i = 0; i < data.series.size(); ++i) {
        const std::vector<double> e = encode(tr.params, data.series[i]);
        std::copy(e.begin(), e.end(), emb.row(i));
      }
      if (cfg.dump_series) {
        EmbeddingTable table;
        table.values = emb;
        table.labels = data.labels;
        write_embedding_csv((out_dir / ("embeddings_" + suffix + ".csv")).string(), table);
      }
      return emb;
    };

    const GridResult grid_result =
        run_experiment_grid(embed, data.labels, data.event_of, grid);
    summary.cells = grid_result.cells;
    return 0;
  });

  // report bundle
  stage("report", [&] {
    write_accuracy_csv((out_dir / "accuracy.csv").string(), summary.cells, cfg.setup);
    for (const ExperimentCell& cell : summary.cells) {
      const std::string name =
          "confusion_" + setup_letter(cfg.setup) + "_" + fraction_pct(cell.fraction) + ".csv";
      write_confusion_csv((out_dir / name).string(), cell.matrix);
    }
    write_report_json((out_dir / "report.json").string(), cfg, summary, logs);
    return 0;
  });

  return summary;
}

void cmd_embed(const std::string& checkpoint_path, const std::string& dump_path,
               const std::string& out_csv) {
  const EncoderParams params = load_checkpoint(checkpoint_path);
  const SeriesDump dump = read_series_dump(dump_path);
  if (dump.series.empty()) throw std::runtime_error("embed: empty dump");
  const std::size_t dump_channels = dump.series.front().channels;
  if (dump_channels != params.cfg.in_channels) {
    std::string msg = "embed: checkpoint expects " + std::to_string(params.cfg.in_channels) +
                      " channels but dump has " + std::to_string(dump_channels);
    if (dump_channels * kRegionsPerAxis == params.cfg.in_channels) msg += "; fuzzify first";
    throw std::runtime_error(msg);
  }
  EmbeddingTable table;
  table.values = Mat(dump.series.size(), params.cfg.out_dim);
  table.labels = dump.labels;
  for (std::size_t i = 0; i < dump.series.size(); ++i) {
    const std::vector<double> e = encode(params, dump.series[i]);
    std::copy(e.begin(), e.end(), table.values.row(i));
  }
  write_embedding_csv(out_csv, table);
}

RunSummary cmd_report(const PipelineConfig& cfg, const std::string& embeddings_csv) {
  if (cfg.split_mode == SplitMode::Event) {
    throw StageError("report",
                     "event-level splits need event provenance; report works on micro splits");
  }
  const EmbeddingTable table = stage("report", [&] { return read_embedding_csv(embeddings_csv); });

  RunSummary summary;
  summary.n_micro_events = table.values.rows;
  stage("classify", [&] {
    GridSpec grid;
    grid.setup = ExperimentSetup::EncoderFixed;  // embeddings are fixed by construction
    grid.fractions = cfg.fractions;
    grid.encoder_fraction = cfg.encoder_fraction;
    grid.seed = cfg.seed;
    grid.classifier = cfg.classifier;
    grid.split_mode = SplitMode::MicroEvent;
    const EmbedFn embed = [&](const std::vector<std::size_t>&, std::size_t) {
      return table.values;
    };
    std::vector<std::size_t> event_of(table.values.rows);
    for (std::size_t i = 0; i < event_of.size(); ++i) event_of[i] = i;
    summary.cells = run_experiment_grid(embed, table.labels, event_of, grid).cells;
    return 0;
  });

  stage("report", [&] {
    fs::create_directories(cfg.out_dir);
    const fs::path out_dir(cfg.out_dir);
    write_accuracy_csv((out_dir / "accuracy.csv").string(), summary.cells,
                       ExperimentSetup::EncoderFixed);
    for (const ExperimentCell& cell : summary.cells) {
      const std::string name = "confusion_a_" + fraction_pct(cell.fraction) + ".csv";
      write_confusion_csv((out_dir / name).string(), cell.matrix);
    }
    write_report_json((out_dir / "report.json").string(), cfg, summary, {});
    return 0;
  });
  return summary;
}

}  // namespace courtseq
