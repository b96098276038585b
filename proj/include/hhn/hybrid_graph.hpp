#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hhn/crossmodal.hpp"
#include "hhn/entropy.hpp"
#include "hhn/hypergraph.hpp"
#include "hhn/ingest.hpp"

namespace hhn {

struct GraphConfig {
  std::size_t r_min = 6;
  double alpha = 2.0;
  HyperedgeParams hyperedge;
  SelectionStrategy strategy;
  CrossParams cross;
};

/// Incoming cross-modal neighbors of each sequence node, CSR layout.
struct GatNeighbors {
  std::size_t n_dst = 0;
  std::size_t n_src = 0;
  std::vector<std::size_t> offsets;  // n_dst + 1
  std::vector<std::size_t> src;
  std::vector<double> log_weight;    // ln W for each listed edge

  std::size_t edge_count() const noexcept { return src.size(); }
};

/// Rows of `adjacency` and `weights` are destinations, columns sources.
GatNeighbors make_gat_neighbors(const DenseMatrix& adjacency, const DenseMatrix& weights);

/// Everything the model needs for one sample: features, timestamps, both
/// intra-modal hypergraphs and the cross-modal graph.
struct HybridGraph {
  std::string sample_id;
  std::vector<int> labels;
  ModalitySegments sequence;
  ModalitySegments video;
  EntropyProfile seq_profile;
  EntropyProfile video_profile;
  Hypergraph seq_hypergraph;
  Hypergraph video_hypergraph;
  CrossGraph cross;
  GatNeighbors gat;  // sequence destinations, video sources
};

/// Per-sample seed for the random selection strategy.
std::uint64_t sample_graph_seed(std::uint64_t base_seed, std::size_t sample_index);

HybridGraph build_hybrid_graph(Sample sample, const GraphConfig& cfg);

/// Builds every sample's graph; samples are processed in parallel and the
/// random strategy is reseeded per sample so results do not depend on threads.
std::vector<HybridGraph> build_hybrid_graphs(std::vector<Sample> samples, const GraphConfig& cfg);

struct BuildDiagnostics {
  std::size_t samples = 0;
  std::size_t hyperedges = 0;
  std::size_t degenerate_hyperedges = 0;
  std::size_t cross_edges = 0;
  std::size_t max_hyperedge_size = 0;
  std::vector<double> entropies;           // every node, both modalities
  std::vector<std::size_t> window_radii;   // every node, both modalities
};

BuildDiagnostics diagnose(const std::vector<HybridGraph>& graphs);

}  // namespace hhn
