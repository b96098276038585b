#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhn/ingest.hpp"
#include "hhn/matrix.hpp"

namespace hhn {

/// exp(-(t_max - t_i + 1) / (t_max - t_min + 1)); ValidationError when t_i is
/// outside [t_min, t_max].
double hawkes_weight(std::int64_t t_i, std::int64_t t_max, std::int64_t t_min);

/// Alternative that decays with the gap to the neighbor:
/// exp(-(|t_i - t_j| + 1) / (t_max - t_min + 1)).
double hawkes_interval_weight(std::int64_t t_i, std::int64_t t_j, std::int64_t t_max,
                              std::int64_t t_min);

enum class TemporalWeighting : std::uint8_t { source_time, interval };

TemporalWeighting parse_weighting(std::string_view name);
std::string weighting_name(TemporalWeighting w);

struct CrossParams {
  std::optional<std::size_t> semantic_topk;
  TemporalWeighting weighting = TemporalWeighting::source_time;
  bool enabled = true;  // false builds the empty graph (ablation without inter-modal edges)
};

struct CrossEdge {
  std::size_t from = 0;  // global index: sequence nodes first, then video
  std::size_t to = 0;
  double weight = 0.0;
};

/// Bipartite cross-modal graph. Only the two off-diagonal blocks are stored;
/// dense_adjacency()/dense_weights() expand them to the square layout.
struct CrossGraph {
  std::size_t n_seq = 0;
  std::size_t n_video = 0;
  DenseMatrix seq_video;       // A_c block, n_seq x n_video, {0,1}; video->seq is its transpose
  DenseMatrix seq_weights;     // W rows for sequence sources, n_seq x n_video
  DenseMatrix video_weights;   // W rows for video sources, n_video x n_seq
  std::vector<CrossEdge> edges;  // E_t, both directions

  std::size_t n_nodes() const noexcept { return n_seq + n_video; }
  std::size_t edge_count() const noexcept { return edges.size(); }
  DenseMatrix dense_adjacency() const;
  DenseMatrix dense_weights() const;
};

/// Overlapping [t_start, t_end) intervals are connected in both directions;
/// with semantic_topk set, each node also links to its k most cosine-similar
/// nodes of the other modality.
CrossGraph build_cross_graph(const ModalitySegments& seq, const ModalitySegments& video,
                             const CrossParams& params = {});

/// Cosine similarity over the shared leading coordinates, normalized by the
/// full-vector norms (the shorter vector is treated as zero-padded).
double padded_cosine(std::span<const double> a, std::span<const double> b);

}  // namespace hhn
