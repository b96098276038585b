#include "hhn/cli.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "hhn/errors.hpp"
#include "hhn/ingest.hpp"
#include "hhn/kernels.hpp"
#include "hhn/report.hpp"

namespace hhn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Kind { integer, number, text, boolean };

struct Key {
  const char* name;
  Kind kind;
  const char* help;
};

// Every setting accepted from a config file; flags are the kebab-cased names.
const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"seed", Kind::integer, "base seed for data, graphs and training"},
      {"repeats", Kind::integer, "train with seeds seed..seed+repeats-1"},
      {"data", Kind::text, "dataset directory or manifest file"},
      {"out", Kind::text, "output directory"},
      {"checkpoint", Kind::text, "checkpoint file"},
      {"sweep", Kind::text, "sweep axis: strategy, r-min, modality, ablation"},
      {"limit", Kind::integer, "build-graph: export only the first N samples (0 = all)"},
      {"r_min", Kind::integer, "minimum window radius"},
      {"alpha", Kind::number, "entropy scaling of the window radius"},
      {"hyperedge_size", Kind::integer, "members per hyperedge, center included"},
      {"hop", Kind::integer, "stride of temporal distance inside the window"},
      {"strategy", Kind::text, "max-diff, min-diff or random"},
      {"layers", Kind::integer, "HHN layers"},
      {"hidden_dim", Kind::integer, "hidden width"},
      {"head", Kind::text, "multilabel_sigmoid or singlelabel_softmax"},
      {"semantic_topk", Kind::integer, "extra cross-modal links per node by cosine similarity (0 = off)"},
      {"weighting", Kind::text, "cross-edge weighting: source or interval"},
      {"cross_modal", Kind::boolean, "build cross-modal edges"},
      {"modality", Kind::text, "combined, seq-only or video-only"},
      {"activation", Kind::text, "elu, leaky_relu, sigmoid or identity"},
      {"classes", Kind::integer, "class count"},
      {"lr", Kind::number, "base learning rate"},
      {"iterations", Kind::integer, "optimizer steps"},
      {"warmup", Kind::integer, "linear warmup steps"},
      {"batch_size", Kind::integer, "samples per step"},
      {"decay", Kind::number, "step decay factor"},
      {"decay_every", Kind::integer, "steps between decays"},
      {"eval_every", Kind::integer, "steps between validation passes"},
      {"val_fraction", Kind::number, "tail of the training split used for validation"},
      {"samples", Kind::integer, "synth: training samples"},
      {"test_samples", Kind::integer, "synth: test samples"},
      {"seq_nodes", Kind::integer, "synth: sequence nodes per sample"},
      {"video_nodes", Kind::integer, "synth: video nodes per sample"},
      {"seq_dim", Kind::integer, "sequence feature dim"},
      {"video_dim", Kind::integer, "video feature dim"},
      {"mode", Kind::text, "synth: seq_only, video_only, xor_crossmodal or entropy_burst"},
      {"sigma", Kind::number, "synth: noise standard deviation"},
      {"signal_strength", Kind::number, "synth: planted pattern amplitude"},
      {"burst_fraction", Kind::number, "synth: share of burst nodes"},
  };
  return k;
}

std::string kebab(std::string_view snake) {
  std::string s(snake);
  for (char& c : s)
    if (c == '_') c = '-';
  return s;
}

std::size_t as_count(const json& v, std::string_view key) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  throw ConfigError("'" + std::string(key) + "' must be a non-negative integer, got " + v.dump());
}

double as_number(const json& v, std::string_view key) {
  if (!v.is_number()) throw ConfigError("'" + std::string(key) + "' must be a number, got " + v.dump());
  return v.get<double>();
}

std::string as_text(const json& v, std::string_view key) {
  if (!v.is_string()) throw ConfigError("'" + std::string(key) + "' must be a string, got " + v.dump());
  return v.get<std::string>();
}

bool as_bool(const json& v, std::string_view key) {
  if (!v.is_boolean()) throw ConfigError("'" + std::string(key) + "' must be true or false, got " + v.dump());
  return v.get<bool>();
}

json flag_value(const Key& key, const std::string& raw) {
  const std::string flag = "--" + kebab(key.name);
  switch (key.kind) {
    case Kind::integer: {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ConfigError(flag + ": expected a non-negative integer, got '" + raw + "'");
      return v;
    }
    case Kind::number: {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(raw, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != raw.size() || raw.empty()) throw ConfigError(flag + ": expected a number, got '" + raw + "'");
      return v;
    }
    case Kind::boolean:
      if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
      if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
      throw ConfigError(flag + ": expected true or false, got '" + raw + "'");
    case Kind::text: return raw;
  }
  return raw;
}

void log(const std::string& msg) { std::cerr << "[hhn] " << msg << '\n'; }

fs::path manifest_path(const fs::path& data, std::string_view split) {
  if (fs::is_directory(data)) return data / (std::string(split) + ".ndjson");
  return data;
}

std::vector<Sample> load_samples(const fs::path& manifest) {
  if (!fs::exists(manifest)) throw ValidationError("manifest not found: '" + manifest.string() + "'");
  const auto manifests = load_manifest(manifest);
  std::vector<Sample> out(manifests.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads()) if (manifests.size() > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(manifests.size()); ++i) {
    try {
      out[static_cast<std::size_t>(i)] = assemble_sample(manifests[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(hhn_cli_load)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Classes and feature dims come from the data.
void adopt_data_shape(HHNConfig& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw ValidationError("dataset is empty");
  model.classes = samples.front().labels.size();
  model.seq_dim = samples.front().sequence.dim();
  model.video_dim = samples.front().video.dim();
  for (const auto& s : samples) {
    if (s.sequence.dim() != model.seq_dim || s.video.dim() != model.video_dim)
      throw ValidationError("sample '" + s.sample_id + "' has feature dims (" + std::to_string(s.sequence.dim()) +
                            ", " + std::to_string(s.video.dim()) + "), expected (" +
                            std::to_string(model.seq_dim) + ", " + std::to_string(model.video_dim) + ")");
  }
}

json config_for_report(const RunConfig& cfg) {
  json j = run_config_to_json(cfg);
  for (const char* k : {"data", "out", "checkpoint"}) j.erase(k);
  return j;
}

fs::path sidecar(const fs::path& checkpoint) { return fs::path(checkpoint.string() + ".json"); }

struct RunOutcome {
  json metrics;
  std::optional<double> val_map;
  std::optional<double> test_map;
  std::optional<double> test_auc;
};

RunOutcome train_once(const RunConfig& cfg, std::uint64_t seed, const std::vector<Sample>& train,
                      const std::vector<Sample>& test, const fs::path& out_dir) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  const GraphConfig gc = cfg.model.graph_config(seed);
  log("building graphs for " + std::to_string(train.size()) + " training samples (seed " + std::to_string(seed) + ")");
  const auto train_graphs = build_hybrid_graphs(train, gc);
  const auto test_graphs = test.empty() ? std::vector<HybridGraph>{} : build_hybrid_graphs(test, gc);

  const TrainResult result = train_loop(train_graphs, tc, cfg.model, [&](const TrainProgress& p) {
    if (p.val_map) {
      std::ostringstream os;
      os << "iter " << p.iteration + 1 << " loss " << p.loss << " lr " << p.lr << " val mAP " << *p.val_map;
      log(os.str());
    }
  });

  RunOutcome o;
  o.val_map = result.validation.map;
  json test_json = nullptr;
  if (!test_graphs.empty()) {
    const MetricsReport tm = evaluate(test_graphs, result.state, cfg.model);
    o.test_map = tm.map;
    o.test_auc = tm.macro_auc;
    test_json = metrics_to_json(tm);
  }
  RunConfig shown = cfg;
  shown.seed = seed;
  o.metrics = {{"schema", kMetricsSchema},
               {"seed", seed},
               {"config", config_for_report(shown)},
               {"train_samples", result.train_samples},
               {"val_samples", result.val_samples},
               {"test_samples", test_graphs.size()},
               {"best_iteration", result.best_iteration},
               {"validation", metrics_to_json(result.validation)},
               {"test", std::move(test_json)}};

  fs::create_directories(out_dir);
  const fs::path ckpt = out_dir / "model.hhnm";
  write_checkpoint(result.state, ckpt);
  write_json(sidecar(ckpt), {{"schema", "hhn.model/1"}, {"graph_seed", seed}, {"config", model_config_to_json(cfg.model)}});
  write_json(out_dir / "metrics.json", o.metrics);
  write_loss_csv(out_dir / "loss.csv", result.validation.loss_curve, tc);
  return o;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> mean_of(const std::vector<std::optional<double>>& xs) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& x : xs)
    if (x) {
      s += *x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("synth: --out is required");
  SynthSpec spec = cfg.synth;
  log("generating " + std::to_string(spec.n_samples) + " train + " + std::to_string(spec.n_test) + " test samples (" +
      signal_mode_name(spec.mode) + ")");
  generate_dataset(spec, cfg.out);
  json doc = {{"schema", "hhn.synth/1"},
              {"mode", signal_mode_name(spec.mode)},
              {"train_samples", spec.n_samples},
              {"test_samples", spec.n_test},
              {"classes", spec.classes},
              {"seq_nodes", spec.seq_nodes},
              {"video_nodes", spec.video_nodes},
              {"seq_dim", spec.seq_dim},
              {"video_dim", spec.video_dim},
              {"sigma", spec.sigma},
              {"signal_strength", spec.signal_strength},
              {"burst_fraction", spec.burst_fraction},
              {"seed", spec.seed}};
  write_json(cfg.out / "synth.json", doc);
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_build_graph(RunConfig cfg) {
  if (cfg.data.empty()) throw ConfigError("build-graph: --data is required");
  const fs::path out = cfg.out.empty() ? fs::path("graphs") : cfg.out;
  auto samples = load_samples(manifest_path(cfg.data, "train"));
  if (cfg.limit > 0 && samples.size() > cfg.limit) samples.resize(cfg.limit);
  adopt_data_shape(cfg.model, samples);
  const auto graphs = build_hybrid_graphs(std::move(samples), cfg.model.graph_config(cfg.seed));
  fs::create_directories(out);
  for (const auto& g : graphs) {
    write_json(out / (g.sample_id + ".json"), graph_to_json(g));
    std::ofstream dot(out / (g.sample_id + ".dot"), std::ios::trunc);
    if (!dot) throw IoError("cannot open '" + (out / (g.sample_id + ".dot")).string() + "' for writing");
    dot << graph_to_dot(g);
  }
  const json diag = diagnostics_to_json(diagnose(graphs));
  write_json(out / "diagnostics.json", diag);
  log("exported " + std::to_string(graphs.size()) + " graphs to '" + out.string() + "'");
  std::cout << diag.dump(2) << '\n';
  return 0;
}

int cmd_train(RunConfig cfg) {
  if (cfg.data.empty()) throw ConfigError("train: --data is required");
  const fs::path out = cfg.out.empty() ? fs::path("run") : cfg.out;
  const auto train = load_samples(manifest_path(cfg.data, "train"));
  std::vector<Sample> test;
  const fs::path test_path = manifest_path(cfg.data, "test");
  if (fs::is_directory(cfg.data) && fs::exists(test_path)) test = load_samples(test_path);
  adopt_data_shape(cfg.model, train);
  cfg.model.validate();

  std::vector<std::pair<std::string, RunConfig>> variants;
  if (cfg.sweep.empty()) variants.emplace_back("", cfg);
  else variants = sweep_variants(cfg);

  json summary = {{"schema", "hhn.sweep/1"}, {"axis", cfg.sweep}, {"repeats", cfg.repeats}, {"variants", json::array()}};
  json single;
  for (const auto& [label, variant] : variants) {
    json runs = json::array();
    std::vector<std::optional<double>> maps, aucs;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const std::uint64_t seed = cfg.seed + r;
      fs::path dir = out;
      if (!label.empty()) dir /= label;
      if (cfg.repeats > 1) dir /= "seed-" + std::to_string(seed);
      if (!label.empty()) log("variant " + label);
      const RunOutcome o = train_once(variant, seed, train, test, dir);
      runs.push_back({{"seed", seed}, {"val_map", opt_json(o.val_map)}, {"test_map", opt_json(o.test_map)},
                      {"test_macro_auc", opt_json(o.test_auc)}});
      maps.push_back(o.test_map);
      aucs.push_back(o.test_auc);
      single = o.metrics;
    }
    summary["variants"].push_back({{"label", label.empty() ? "default" : label},
                                   {"runs", std::move(runs)},
                                   {"mean_test_map", opt_json(mean_of(maps))},
                                   {"mean_test_macro_auc", opt_json(mean_of(aucs))}});
  }
  if (variants.size() == 1 && cfg.repeats == 1) {
    std::cout << single.dump(2) << '\n';
  } else {
    write_json(out / "sweep.json", summary);
    std::cout << summary.dump(2) << '\n';
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) throw ConfigError("eval: --checkpoint is required");
  if (!fs::exists(cfg.checkpoint)) throw ValidationError("checkpoint not found: '" + cfg.checkpoint.string() + "'");
  const fs::path side = sidecar(cfg.checkpoint);
  if (!fs::exists(side)) throw ValidationError("checkpoint configuration not found: '" + side.string() + "'");
  if (cfg.data.empty()) throw ConfigError("eval: --data is required");

  std::ifstream in(side);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + side.string() + "': " + e.what());
  }
  if (!doc.contains("config")) throw FormatError("'" + side.string() + "': missing \"config\"");
  const HHNConfig model = model_config_from_json(doc["config"]);
  const std::uint64_t graph_seed = doc.value("graph_seed", std::uint64_t{0});
  const ModelState state = read_checkpoint(cfg.checkpoint, model);

  const auto samples = load_samples(manifest_path(cfg.data, "test"));
  const auto graphs = build_hybrid_graphs(samples, model.graph_config(graph_seed));
  const json report = metrics_to_json(evaluate(graphs, state, model));
  if (!cfg.out.empty()) write_json(cfg.out, report);
  std::cout << report.dump(2) << '\n';
  return 0;
}

std::string describe_matrix(const DenseMatrix& m) {
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (double v : m.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  std::ostringstream os;
  os << m.shape_string();
  if (m.size() > 0) os << "  min " << lo << "  max " << hi << "  mean " << sum / static_cast<double>(m.size());
  if (!m.all_finite()) os << "  (non-finite values present)";
  return os.str();
}

void inspect_manifest(const fs::path& path, std::ostream& os) {
  const auto manifests = load_manifest(path);
  os << "manifest " << path.string() << "\n  samples: " << manifests.size() << '\n';
  if (manifests.empty()) return;
  std::vector<std::size_t> positives(manifests.front().labels.size(), 0);
  std::size_t seq_lo = SIZE_MAX, seq_hi = 0, vid_lo = SIZE_MAX, vid_hi = 0;
  for (const auto& m : manifests) {
    for (std::size_t c = 0; c < m.labels.size(); ++c) positives[c] += static_cast<std::size_t>(m.labels[c]);
    seq_lo = std::min(seq_lo, m.sequence.t_start.size());
    seq_hi = std::max(seq_hi, m.sequence.t_start.size());
    vid_lo = std::min(vid_lo, m.video.t_start.size());
    vid_hi = std::max(vid_hi, m.video.t_start.size());
  }
  os << "  classes: " << positives.size() << "\n  positives per class:";
  for (std::size_t p : positives) os << ' ' << p;
  os << "\n  sequence nodes: " << seq_lo << ".." << seq_hi << "\n  video nodes: " << vid_lo << ".." << vid_hi << '\n';
}

int cmd_inspect(const fs::path& target) {
  if (target.empty()) throw ConfigError("inspect: a path is required");
  if (!fs::exists(target)) throw ValidationError("path not found: '" + target.string() + "'");
  std::ostream& os = std::cout;
  if (fs::is_directory(target)) {
    bool any = false;
    for (const char* split : {"train.ndjson", "test.ndjson"}) {
      if (fs::exists(target / split)) {
        inspect_manifest(target / split, os);
        any = true;
      }
    }
    if (!any) throw ValidationError("'" + target.string() + "' holds no train.ndjson or test.ndjson");
    return 0;
  }
  char magic[4] = {};
  {
    std::ifstream in(target, std::ios::binary);
    in.read(magic, 4);
  }
  if (std::equal(magic, magic + 4, kBlobMagic)) {
    const DenseMatrix m = read_feature_blob(target);
    os << "feature blob " << target.string() << "\n  " << describe_matrix(m) << '\n';
  } else if (std::equal(magic, magic + 4, kCheckpointMagic)) {
    std::optional<HHNConfig> model;
    if (fs::exists(sidecar(target))) {
      std::ifstream in(sidecar(target));
      model = model_config_from_json(json::parse(in).at("config"));
    }
    const ModelState state = read_checkpoint(target, model);
    os << "checkpoint " << target.string() << "\n  tensors: " << state.tensors.size()
       << "\n  parameters: " << state.parameter_count() << '\n';
    for (const auto& t : state.tensors) os << "  " << t.name << "  " << describe_matrix(t.value) << '\n';
  } else {
    inspect_manifest(target, os);
  }
  return 0;
}

}  // namespace

// ---- configuration --------------------------------------------------------

void RunConfig::finalize() {
  train.seed = seed;
  synth.seed = seed;
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  synth.validate();
  train.validate();
  model.validate();
  if (!sweep.empty() && sweep != "strategy" && sweep != "r-min" && sweep != "modality" && sweep != "ablation")
    throw ConfigError("unknown sweep axis '" + sweep + "' (strategy, r-min, modality, ablation)");
}

void apply_preset(RunConfig& cfg, std::string_view name) {
  SynthSpec& s = cfg.synth;
  s.n_samples = 1000;
  s.n_test = 300;
  s.classes = 2;
  s.sigma = 1.0;
  cfg.model.classes = 2;
  cfg.model.hidden_dim = 16;
  cfg.model.n_layers = 2;
  cfg.train.iterations = 200;
  cfg.train.warmup = 20;
  cfg.train.batch_size = 32;
  cfg.train.lr = 0.01;
  cfg.train.eval_every = 50;
  if (name == "xor") {
    s.mode = SignalMode::xor_crossmodal;
    s.signal_strength = 0.5;
  } else if (name == "burst") {
    s.mode = SignalMode::entropy_burst;
    s.signal_strength = 0.15;
    s.burst_fraction = 0.1;
  } else if (name == "seq") {
    s.mode = SignalMode::seq_only;
    s.signal_strength = 0.5;
  } else if (name == "video") {
    s.mode = SignalMode::video_only;
    s.signal_strength = 0.5;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (xor, burst, seq, video)");
  }
  cfg.preset = name;
}

void apply_setting(RunConfig& cfg, std::string_view key, const json& v) {
  HHNConfig& m = cfg.model;
  TrainConfig& t = cfg.train;
  SynthSpec& s = cfg.synth;
  if (key == "seed") cfg.seed = as_count(v, key);
  else if (key == "repeats") cfg.repeats = as_count(v, key);
  else if (key == "data") cfg.data = as_text(v, key);
  else if (key == "out") cfg.out = as_text(v, key);
  else if (key == "checkpoint") cfg.checkpoint = as_text(v, key);
  else if (key == "sweep") cfg.sweep = as_text(v, key);
  else if (key == "limit") cfg.limit = as_count(v, key);
  else if (key == "r_min") m.r_min = as_count(v, key);
  else if (key == "alpha") m.alpha = as_number(v, key);
  else if (key == "hyperedge_size") m.hyperedge_size = as_count(v, key);
  else if (key == "hop") m.hop = as_count(v, key);
  else if (key == "strategy") m.strategy = parse_selection(as_text(v, key));
  else if (key == "layers") m.n_layers = as_count(v, key);
  else if (key == "hidden_dim") m.hidden_dim = as_count(v, key);
  else if (key == "head") m.head = parse_head(as_text(v, key));
  else if (key == "semantic_topk") {
    const std::size_t k = as_count(v, key);
    m.semantic_topk = k == 0 ? std::nullopt : std::optional<std::size_t>(k);
  } else if (key == "weighting") m.weighting = parse_weighting(as_text(v, key));
  else if (key == "cross_modal") m.cross_modal = as_bool(v, key);
  else if (key == "modality") m.modality = parse_modality_mode(as_text(v, key));
  else if (key == "activation") m.activation = parse_activation(as_text(v, key));
  else if (key == "classes") m.classes = s.classes = as_count(v, key);
  else if (key == "lr") t.lr = as_number(v, key);
  else if (key == "iterations") t.iterations = as_count(v, key);
  else if (key == "warmup") t.warmup = as_count(v, key);
  else if (key == "batch_size") t.batch_size = as_count(v, key);
  else if (key == "decay") t.decay = as_number(v, key);
  else if (key == "decay_every") t.decay_every = as_count(v, key);
  else if (key == "eval_every") t.eval_every = as_count(v, key);
  else if (key == "val_fraction") t.val_fraction = as_number(v, key);
  else if (key == "samples") s.n_samples = as_count(v, key);
  else if (key == "test_samples") s.n_test = as_count(v, key);
  else if (key == "seq_nodes") s.seq_nodes = as_count(v, key);
  else if (key == "video_nodes") s.video_nodes = as_count(v, key);
  else if (key == "seq_dim") m.seq_dim = s.seq_dim = as_count(v, key);
  else if (key == "video_dim") m.video_dim = s.video_dim = as_count(v, key);
  else if (key == "mode") s.mode = parse_signal_mode(as_text(v, key));
  else if (key == "sigma") s.sigma = as_number(v, key);
  else if (key == "signal_strength") s.signal_strength = as_number(v, key);
  else if (key == "burst_fraction") s.burst_fraction = as_number(v, key);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file not found: '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("'" + path.string() + "': top level must be an object");
  for (const auto& [k, v] : doc.items()) {
    try {
      apply_setting(cfg, k, v);
    } catch (const ConfigError& e) {
      throw ConfigError("'" + path.string() + "': " + e.what());
    }
  }
}

json model_config_to_json(const HHNConfig& m) {
  return {{"layers", m.n_layers},
          {"hidden_dim", m.hidden_dim},
          {"hyperedge_size", m.hyperedge_size},
          {"hop", m.hop},
          {"r_min", m.r_min},
          {"alpha", m.alpha},
          {"head", head_name(m.head)},
          {"classes", m.classes},
          {"seq_dim", m.seq_dim},
          {"video_dim", m.video_dim},
          {"strategy", selection_name(m.strategy)},
          {"semantic_topk", m.semantic_topk ? json(*m.semantic_topk) : json(0)},
          {"weighting", weighting_name(m.weighting)},
          {"cross_modal", m.cross_modal},
          {"modality", modality_mode_name(m.modality)},
          {"activation", activation_name(m.activation.kind)},
          {"leaky_slope", m.leaky_slope}};
}

HHNConfig model_config_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("model configuration must be a JSON object");
  RunConfig tmp;
  for (const auto& [k, v] : doc.items()) {
    if (k == "leaky_slope") tmp.model.leaky_slope = as_number(v, k);
    else apply_setting(tmp, k, v);
  }
  tmp.model.validate();
  return tmp.model;
}

json run_config_to_json(const RunConfig& cfg) {
  json j = model_config_to_json(cfg.model);
  j["seed"] = cfg.seed;
  j["repeats"] = cfg.repeats;
  j["data"] = cfg.data.generic_string();
  j["out"] = cfg.out.generic_string();
  j["checkpoint"] = cfg.checkpoint.generic_string();
  j["sweep"] = cfg.sweep;
  j["lr"] = cfg.train.lr;
  j["iterations"] = cfg.train.iterations;
  j["warmup"] = cfg.train.warmup;
  j["batch_size"] = cfg.train.batch_size;
  j["decay"] = cfg.train.decay;
  j["decay_every"] = cfg.train.decay_every;
  j["eval_every"] = cfg.train.eval_every;
  j["val_fraction"] = cfg.train.val_fraction;
  j["samples"] = cfg.synth.n_samples;
  j["test_samples"] = cfg.synth.n_test;
  j["seq_nodes"] = cfg.synth.seq_nodes;
  j["video_nodes"] = cfg.synth.video_nodes;
  j["mode"] = signal_mode_name(cfg.synth.mode);
  j["sigma"] = cfg.synth.sigma;
  j["signal_strength"] = cfg.synth.signal_strength;
  j["burst_fraction"] = cfg.synth.burst_fraction;
  return j;
}

std::vector<std::pair<std::string, RunConfig>> sweep_variants(const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> out;
  auto add = [&](std::string label, auto mutate) {
    RunConfig c = base;
    mutate(c);
    c.sweep.clear();
    c.model.validate();
    out.emplace_back(std::move(label), std::move(c));
  };
  if (base.sweep == "strategy") {
    for (auto k : {SelectionKind::max_diff, SelectionKind::min_diff, SelectionKind::random})
      add(selection_name(k), [k](RunConfig& c) { c.model.strategy = k; });
  } else if (base.sweep == "r-min") {
    for (std::size_t r = 4; r <= 8; ++r)
      add("r-min-" + std::to_string(r), [r](RunConfig& c) { c.model.r_min = r; });
  } else if (base.sweep == "modality") {
    for (auto m : {ModalityMode::combined, ModalityMode::seq_only, ModalityMode::video_only})
      add(modality_mode_name(m), [m](RunConfig& c) { c.model.modality = m; });
  } else if (base.sweep == "ablation") {
    add("full", [](RunConfig& c) { c.model.cross_modal = true; });
    add("no-cross", [](RunConfig& c) { c.model.cross_modal = false; });
  } else {
    throw ConfigError("unknown sweep axis '" + base.sweep + "'");
  }
  return out;
}

// ---- entry point ----------------------------------------------------------

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Hybrid hypergraph network: synthetic data, graph construction, training and evaluation", "hhn"};
  app.require_subcommand(1);
  std::string config_path, preset, inspect_target;
  std::map<std::string, std::string> raw;  // flag values keyed by snake name

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (snake_case keys)");
    sub->add_option("--preset", preset, "xor, burst, seq or video");
    for (const auto& k : keys()) {
      sub->add_option("--" + kebab(k.name), raw[k.name], k.help);
    }
  };
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  CLI::App* build = app.add_subcommand("build-graph", "export per-sample graphs and construction diagnostics");
  CLI::App* train = app.add_subcommand("train", "train, write checkpoint and metrics");
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on a manifest");
  CLI::App* inspect = app.add_subcommand("inspect", "summarize a blob, manifest, dataset or checkpoint");
  for (CLI::App* sub : {synth, build, train, eval}) add_common(sub);
  inspect->add_option("path", inspect_target, "file or dataset directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(inspect_target);

    CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg;
    if (!preset.empty()) apply_preset(cfg, preset);
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& k : keys()) {
      if (sub->count("--" + kebab(k.name)) == 0) continue;
      apply_setting(cfg, k.name, flag_value(k, raw[k.name]));
    }
    cfg.finalize();

    if (sub == synth) return cmd_synth(cfg);
    if (sub == build) return cmd_build_graph(cfg);
    if (sub == train) return cmd_train(cfg);
    if (sub == eval) return cmd_eval(cfg);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hhn
