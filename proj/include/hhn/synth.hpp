#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hhn/ingest.hpp"

namespace hhn {

enum class SignalMode : std::uint8_t { seq_only, video_only, xor_crossmodal, entropy_burst };

SignalMode parse_signal_mode(std::string_view name);
std::string signal_mode_name(SignalMode mode);

inline constexpr std::int64_t kSeqHopMs = 196;
inline constexpr std::int64_t kSeqSegmentMs = 960;
inline constexpr std::int64_t kVideoSegmentMs = 250;

struct SynthSpec {
  std::size_t n_samples = 1000;  // training split
  std::size_t n_test = 300;
  std::size_t classes = 2;
  std::size_t seq_nodes = 101;
  std::size_t video_nodes = 40;
  std::size_t seq_dim = 128;
  std::size_t video_dim = 1024;
  SignalMode mode = SignalMode::xor_crossmodal;
  double sigma = 1.0;
  double signal_strength = 0.5;  // amplitude of the planted class patterns
  double burst_fraction = 0.1;   // entropy_burst: share of sequence nodes carrying the signal
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthDataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Sample `index` of the combined train+test stream (train first). Features are
/// rounded through f32 so in-memory samples equal what a blob round trip yields.
Sample generate_sample(const SynthSpec& spec, std::size_t index);

/// Generates both splits in memory; samples are produced in parallel.
SynthDataset generate_samples(const SynthSpec& spec);

/// Writes train.ndjson, test.ndjson and blobs/<id>.{seq,video}.hhnf under `out_dir`.
void generate_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Indices of the sequence nodes carrying the planted signal in entropy_burst mode.
std::vector<std::size_t> burst_nodes(const SynthSpec& spec, std::size_t index);

// ---- generator qualification ---------------------------------------------

struct ProbeReport {
  double seq_accuracy = 0.0;    // balanced accuracy, linear probe on pooled sequence features
  double video_accuracy = 0.0;  // same on pooled video features
  double joint_accuracy = 0.0;  // both pooled blocks plus the product of their leading components
};

/// Fits softmax-regression probes on the train split and scores the test split.
ProbeReport probe_dataset(const SynthDataset& data, std::size_t classes);

}  // namespace hhn
