#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hhn/matrix.hpp"

namespace hhn {

enum class ModalityKind : std::uint8_t { sequence, video };

std::string_view modality_name(ModalityKind kind);

/// One timestamped segment of one modality.
struct SegmentNode {
  ModalityKind modality = ModalityKind::sequence;
  std::size_t index = 0;
  std::int64_t t_start = 0;  // ms
  std::int64_t t_end = 0;    // ms
  std::vector<double> features;
};

/// All segments of one modality for one sample, stored column-wise: row i of
/// `features` belongs to timing entry i.
struct ModalitySegments {
  ModalityKind kind = ModalityKind::sequence;
  DenseMatrix features;
  std::vector<std::int64_t> t_start;
  std::vector<std::int64_t> t_end;

  std::size_t size() const noexcept { return t_start.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  SegmentNode node(std::size_t i) const;
  std::vector<SegmentNode> nodes() const;
};

struct ModalityEntry {
  std::filesystem::path blob;  // resolved against the manifest directory
  std::vector<std::int64_t> t_start;
  std::vector<std::int64_t> t_end;
};

struct SampleManifest {
  std::string sample_id;
  std::vector<int> labels;
  ModalityEntry sequence;
  ModalityEntry video;
};

/// A manifest entry with its features loaded and checked.
struct Sample {
  std::string sample_id;
  std::vector<int> labels;
  ModalitySegments sequence;
  ModalitySegments video;

  const ModalitySegments& modality(ModalityKind k) const {
    return k == ModalityKind::sequence ? sequence : video;
  }
};

// HHNF v1: "HHNF", u32 version, u32 rows, u32 cols, rows*cols f32, all little-endian.
inline constexpr char kBlobMagic[4] = {'H', 'H', 'N', 'F'};
inline constexpr std::uint32_t kBlobVersion = 1;
inline constexpr std::size_t kBlobHeaderBytes = 16;

void write_feature_blob(const DenseMatrix& matrix, const std::filesystem::path& path);
DenseMatrix read_feature_blob(const std::filesystem::path& path);

/// Loads newline-delimited JSON manifests. Blank lines are skipped. When
/// `class_count` is 0 the first record fixes it for the file.
std::vector<SampleManifest> load_manifest(const std::filesystem::path& path,
                                          std::size_t class_count = 0);
/// Writes manifests as NDJSON; blob paths are stored relative to the file.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<SampleManifest>& manifests);

/// Reads both blobs and checks row counts and timing monotonicity.
Sample assemble_sample(const SampleManifest& manifest);

/// Checks the per-modality invariants of an in-memory sample.
void validate_segments(const ModalitySegments& segments, std::string_view sample_id);

}  // namespace hhn
