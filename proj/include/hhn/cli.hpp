#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hhn/model.hpp"
#include "hhn/synth.hpp"
#include "hhn/training.hpp"
#include "json.hpp"

namespace hhn {

/// Everything one invocation needs. Sources are layered
/// defaults < preset < config file < flags.
struct RunConfig {
  HHNConfig model;
  TrainConfig train;
  SynthSpec synth;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t limit = 0;  // build-graph: export only the first N samples (0 = all)
  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path checkpoint;
  std::string sweep;   // "", strategy, r-min, modality, ablation
  std::string preset;  // "", xor, burst, seq, video

  /// Applies the shared seed, copies dims and classes from the synth spec
  /// where needed, then validates every section.
  void finalize();
};

/// Named parameter sets for the experiments in the README.
void apply_preset(RunConfig& cfg, std::string_view name);

/// Applies one snake_case key; ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, const nlohmann::json& value);

/// Applies every key of a JSON object file.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

nlohmann::json run_config_to_json(const RunConfig& cfg);

/// Model configuration stored next to a checkpoint as "<checkpoint>.json".
nlohmann::json model_config_to_json(const HHNConfig& cfg);
HHNConfig model_config_from_json(const nlohmann::json& doc);

/// Variants of a sweep axis, as (label, mutated config) pairs.
std::vector<std::pair<std::string, RunConfig>> sweep_variants(const RunConfig& base);

/// Entry point of the hhn executable. Returns 0 on success, 1 on validation
/// errors (bad flags, config, or input), 2 on runtime failures.
int run_command(const std::vector<std::string>& args);

}  // namespace hhn
