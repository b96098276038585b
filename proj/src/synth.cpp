#include "hhn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"
#include "hhn/ops.hpp"
#include "hhn/rng.hpp"

namespace hhn {

namespace fs = std::filesystem;

SignalMode parse_signal_mode(std::string_view name) {
  if (name == "seq_only" || name == "seq-only") return SignalMode::seq_only;
  if (name == "video_only" || name == "video-only") return SignalMode::video_only;
  if (name == "xor_crossmodal" || name == "xor-crossmodal" || name == "xor") return SignalMode::xor_crossmodal;
  if (name == "entropy_burst" || name == "entropy-burst" || name == "burst") return SignalMode::entropy_burst;
  throw ConfigError("unknown signal mode '" + std::string(name) + "'");
}

std::string signal_mode_name(SignalMode mode) {
  switch (mode) {
    case SignalMode::seq_only: return "seq_only";
    case SignalMode::video_only: return "video_only";
    case SignalMode::xor_crossmodal: return "xor_crossmodal";
    case SignalMode::entropy_burst: return "entropy_burst";
  }
  return "unknown";
}

void SynthSpec::validate() const {
  if (classes < 1) throw ConfigError("classes must be >= 1");
  if (seq_nodes < 1 || video_nodes < 1) throw ConfigError("node counts must be >= 1");
  if (seq_dim < 1 || video_dim < 1) throw ConfigError("feature dims must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  if (!(signal_strength >= 0.0) || !std::isfinite(signal_strength)) throw ConfigError("signal_strength must be >= 0");
  if (!(burst_fraction > 0.0 && burst_fraction <= 1.0)) throw ConfigError("burst_fraction must lie in (0,1]");
}

namespace {

constexpr std::uint64_t kPatternSalt = 0x7A11E5C0DEull;
constexpr std::uint64_t kBurstSalt = 0xB0125700ull;
constexpr double kBurstNoise = 0.2;

std::uint64_t sample_seed(const SynthSpec& spec, std::size_t index) { return splitmix64(spec.seed ^ index); }

// Rademacher rows, one per class; shared by every sample of a dataset.
DenseMatrix class_patterns(std::uint64_t seed, std::size_t classes, std::size_t dim) {
  std::mt19937_64 rng(seed);
  DenseMatrix p(classes, dim);
  for (double& v : p.values()) v = (rng() & 1u) ? 1.0 : -1.0;
  return p;
}

std::string sample_name(const SynthSpec& spec, std::size_t index) {
  char buf[32];
  if (index < spec.n_samples) std::snprintf(buf, sizeof buf, "train-%06zu", index);
  else std::snprintf(buf, sizeof buf, "test-%06zu", index - spec.n_samples);
  return buf;
}

ModalitySegments timing(ModalityKind kind, std::size_t n, std::size_t dim) {
  ModalitySegments m;
  m.kind = kind;
  m.features = DenseMatrix(n, dim);
  m.t_start.resize(n);
  m.t_end.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::int64_t>(i);
    if (kind == ModalityKind::sequence) {
      m.t_start[i] = k * kSeqHopMs;
      m.t_end[i] = m.t_start[i] + kSeqSegmentMs;
    } else {
      m.t_start[i] = k * kVideoSegmentMs;
      m.t_end[i] = m.t_start[i] + kVideoSegmentMs;
    }
  }
  return m;
}

void add_pattern(std::span<double> row, std::span<const double> pattern, double amplitude) {
  for (std::size_t k = 0; k < row.size(); ++k) row[k] += amplitude * pattern[k];
}

void round_to_f32(DenseMatrix& m) {
  for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace

std::vector<std::size_t> burst_nodes(const SynthSpec& spec, std::size_t index) {
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(spec.burst_fraction * static_cast<double>(spec.seq_nodes))), 1,
      spec.seq_nodes);
  std::vector<std::size_t> nodes(spec.seq_nodes);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::mt19937_64 rng(splitmix64(sample_seed(spec, index) ^ kBurstSalt));
  std::shuffle(nodes.begin(), nodes.end(), rng);
  nodes.resize(count);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

Sample generate_sample(const SynthSpec& spec, std::size_t index) {
  spec.validate();
  const DenseMatrix seq_patterns = class_patterns(splitmix64(spec.seed ^ kPatternSalt), spec.classes, spec.seq_dim);
  const DenseMatrix video_patterns =
      class_patterns(splitmix64(spec.seed ^ (kPatternSalt + 1)), spec.classes, spec.video_dim);

  std::mt19937_64 rng(sample_seed(spec, index));
  std::uniform_int_distribution<std::size_t> pick(0, spec.classes - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::size_t seq_code = pick(rng);
  std::size_t video_code = pick(rng);
  std::size_t label = seq_code;
  switch (spec.mode) {
    case SignalMode::xor_crossmodal: label = (seq_code + video_code) % spec.classes; break;
    case SignalMode::video_only: label = video_code; break;
    case SignalMode::seq_only:
    case SignalMode::entropy_burst: break;
  }

  Sample s;
  s.sample_id = sample_name(spec, index);
  s.labels.assign(spec.classes, 0);
  s.labels[label] = 1;
  s.sequence = timing(ModalityKind::sequence, spec.seq_nodes, spec.seq_dim);
  s.video = timing(ModalityKind::video, spec.video_nodes, spec.video_dim);

  const double a = spec.signal_strength;
  std::vector<char> is_burst(spec.seq_nodes, 0);
  if (spec.mode == SignalMode::entropy_burst)
    for (std::size_t i : burst_nodes(spec, index)) is_burst[i] = 1;

  for (std::size_t i = 0; i < spec.seq_nodes; ++i) {
    auto row = s.sequence.features.row(i);
    const double sd = is_burst[i] ? kBurstNoise * spec.sigma : spec.sigma;
    for (double& v : row) v = sd * noise(rng);
    switch (spec.mode) {
      case SignalMode::xor_crossmodal:
      case SignalMode::seq_only: add_pattern(row, seq_patterns.row(seq_code), a); break;
      case SignalMode::entropy_burst:
        if (is_burst[i]) add_pattern(row, seq_patterns.row(label), a);
        break;
      case SignalMode::video_only: break;
    }
  }
  for (std::size_t j = 0; j < spec.video_nodes; ++j) {
    auto row = s.video.features.row(j);
    for (double& v : row) v = spec.sigma * noise(rng);
    if (spec.mode == SignalMode::xor_crossmodal || spec.mode == SignalMode::video_only)
      add_pattern(row, video_patterns.row(video_code), a);
  }
  round_to_f32(s.sequence.features);
  round_to_f32(s.video.features);
  return s;
}

SynthDataset generate_samples(const SynthSpec& spec) {
  spec.validate();
  const std::size_t total = spec.n_samples + spec.n_test;
  std::vector<Sample> all(total);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads()) if (total > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
    try {
      all[static_cast<std::size_t>(i)] = generate_sample(spec, static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(hhn_synth_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  SynthDataset d;
  d.train.assign(std::make_move_iterator(all.begin()),
                 std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(spec.n_samples)));
  d.test.assign(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(spec.n_samples)),
                std::make_move_iterator(all.end()));
  return d;
}

void generate_dataset(const SynthSpec& spec, const fs::path& out_dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "blobs", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "blobs").string() + "': " + ec.message());

  const std::size_t total = spec.n_samples + spec.n_test;
  std::vector<SampleManifest> manifests(total);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads()) if (total > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
    try {
      const Sample s = generate_sample(spec, static_cast<std::size_t>(i));
      SampleManifest& m = manifests[static_cast<std::size_t>(i)];
      m.sample_id = s.sample_id;
      m.labels = s.labels;
      m.sequence = {out_dir / "blobs" / (s.sample_id + ".seq.hhnf"), s.sequence.t_start, s.sequence.t_end};
      m.video = {out_dir / "blobs" / (s.sample_id + ".video.hhnf"), s.video.t_start, s.video.t_end};
      write_feature_blob(s.sequence.features, m.sequence.blob);
      write_feature_blob(s.video.features, m.video.blob);
    } catch (...) {
#pragma omp critical(hhn_synth_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  const auto split = manifests.begin() + static_cast<std::ptrdiff_t>(spec.n_samples);
  write_manifest(out_dir / "train.ndjson", {manifests.begin(), split});
  write_manifest(out_dir / "test.ndjson", {split, manifests.end()});
}

// ---- generator qualification ---------------------------------------------

namespace {

DenseMatrix pooled(const std::vector<Sample>& samples, bool sequence) {
  if (samples.empty()) return {};
  const std::size_t dim = sequence ? samples[0].sequence.dim() : samples[0].video.dim();
  DenseMatrix out(samples.size(), dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const DenseMatrix mean = column_mean(sequence ? samples[i].sequence.features : samples[i].video.features);
    std::copy(mean.values().begin(), mean.values().end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::size_t> class_index(const std::vector<Sample>& samples) {
  std::vector<std::size_t> y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& l = samples[i].labels;
    y[i] = static_cast<std::size_t>(std::max_element(l.begin(), l.end()) - l.begin());
  }
  return y;
}

// Column-standardizes `test` with the statistics of `train` (in place for both).
void standardize(DenseMatrix& train, DenseMatrix& test) {
  const DenseMatrix mu = column_mean(train);
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) var += (train(r, c) - mu(0, c)) * (train(r, c) - mu(0, c));
    const double sd = std::sqrt(var / static_cast<double>(train.rows())) + 1e-12;
    for (std::size_t r = 0; r < train.rows(); ++r) train(r, c) = (train(r, c) - mu(0, c)) / sd;
    for (std::size_t r = 0; r < test.rows(); ++r) test(r, c) = (test(r, c) - mu(0, c)) / sd;
  }
}

// Leading principal direction of the (already centered) rows by power iteration.
DenseMatrix leading_direction(const DenseMatrix& x) {
  DenseMatrix v(x.cols(), 1, 1.0 / std::sqrt(static_cast<double>(x.cols())));
  for (int it = 0; it < 200; ++it) {
    DenseMatrix w = matmul_tn(x, matmul(x, v));
    double norm = 0.0;
    for (double e : w.values()) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    v = scale(w, 1.0 / norm);
  }
  return v;
}

double balanced_accuracy(const DenseMatrix& scores, const std::vector<std::size_t>& y, std::size_t classes) {
  std::vector<std::size_t> hit(classes, 0), seen(classes, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto row = scores.row(i);
    const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    ++seen[y[i]];
    if (pred == y[i]) ++hit[y[i]];
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (seen[c] == 0) continue;
    sum += static_cast<double>(hit[c]) / static_cast<double>(seen[c]);
    ++present;
  }
  return present ? sum / static_cast<double>(present) : 0.0;
}

// L2-regularized softmax regression by full-batch gradient descent.
double softmax_probe(DenseMatrix train, const std::vector<std::size_t>& y_train, DenseMatrix test,
                     const std::vector<std::size_t>& y_test, std::size_t classes) {
  standardize(train, test);
  const std::size_t n = train.rows(), d = train.cols();
  DenseMatrix w(d, classes), b(1, classes);
  const double lr = 0.5, l2 = 1e-3;
  for (int it = 0; it < 300; ++it) {
    DenseMatrix logits = matmul(train, w);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < classes; ++c) logits(i, c) += b(0, c);
    DenseMatrix g = rowwise_softmax(logits);
    for (std::size_t i = 0; i < n; ++i) g(i, y_train[i]) -= 1.0;
    DenseMatrix gw = scale(matmul_tn(train, g), 1.0 / static_cast<double>(n));
    add_in_place(gw, scale(w, l2));
    const DenseMatrix gb = column_mean(g);
    add_in_place(w, scale(gw, -lr));
    add_in_place(b, scale(gb, -lr));
  }
  DenseMatrix scores = matmul(test, w);
  for (std::size_t i = 0; i < scores.rows(); ++i)
    for (std::size_t c = 0; c < classes; ++c) scores(i, c) += b(0, c);
  return balanced_accuracy(scores, y_test, classes);
}

// Projection of every row onto the leading direction of the train rows.
std::pair<std::vector<double>, std::vector<double>> leading_scores(const DenseMatrix& train, const DenseMatrix& test) {
  const DenseMatrix mu = column_mean(train);
  auto center = [&](const DenseMatrix& m) {
    DenseMatrix c = m;
    for (std::size_t r = 0; r < c.rows(); ++r)
      for (std::size_t k = 0; k < c.cols(); ++k) c(r, k) -= mu(0, k);
    return c;
  };
  const DenseMatrix ct = center(train), cs = center(test);
  const DenseMatrix v = leading_direction(ct);
  const DenseMatrix pt = matmul(ct, v), ps = matmul(cs, v);
  return {pt.values(), ps.values()};
}

}  // namespace

ProbeReport probe_dataset(const SynthDataset& data, std::size_t classes) {
  if (data.train.empty() || data.test.empty()) throw ValidationError("probe_dataset: both splits must be non-empty");
  const auto y_train = class_index(data.train), y_test = class_index(data.test);
  const DenseMatrix s_train = pooled(data.train, true), s_test = pooled(data.test, true);
  const DenseMatrix v_train = pooled(data.train, false), v_test = pooled(data.test, false);

  ProbeReport r;
  r.seq_accuracy = softmax_probe(s_train, y_train, s_test, y_test, classes);
  r.video_accuracy = softmax_probe(v_train, y_train, v_test, y_test, classes);

  const auto [s_lead_train, s_lead_test] = leading_scores(s_train, s_test);
  const auto [v_lead_train, v_lead_test] = leading_scores(v_train, v_test);
  auto joint = [](const DenseMatrix& s, const DenseMatrix& v, const std::vector<double>& ps,
                  const std::vector<double>& pv) {
    DenseMatrix out = concat_cols(s, v);
    DenseMatrix prod(s.rows(), 1);
    for (std::size_t i = 0; i < s.rows(); ++i) prod(i, 0) = ps[i] * pv[i];
    return concat_cols(out, prod);
  };
  r.joint_accuracy = softmax_probe(joint(s_train, v_train, s_lead_train, v_lead_train), y_train,
                                   joint(s_test, v_test, s_lead_test, v_lead_test), y_test, classes);
  return r;
}

}  // namespace hhn
