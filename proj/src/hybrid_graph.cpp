#include "hhn/hybrid_graph.hpp"

#include <algorithm>
#include <cmath>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"

namespace hhn {

GatNeighbors make_gat_neighbors(const DenseMatrix& adjacency, const DenseMatrix& weights) {
  require_same_shape(adjacency, weights, "make_gat_neighbors");
  GatNeighbors n;
  n.n_dst = adjacency.rows();
  n.n_src = adjacency.cols();
  n.offsets.reserve(n.n_dst + 1);
  n.offsets.push_back(0);
  for (std::size_t i = 0; i < n.n_dst; ++i) {
    for (std::size_t j = 0; j < n.n_src; ++j) {
      const double a = adjacency(i, j);
      const double w = weights(i, j);
      if (a * w > 0.0) {
        n.src.push_back(j);
        n.log_weight.push_back(std::log(w));
      }
    }
    n.offsets.push_back(n.src.size());
  }
  return n;
}

std::uint64_t sample_graph_seed(std::uint64_t base_seed, std::size_t sample_index) {
  std::uint64_t x = base_seed ^ (0x9E3779B97F4A7C15ull * (sample_index + 1));
  x = (x ^ (x >> 31)) * 0xBF58476D1CE4E5B9ull;
  return x ^ (x >> 29);
}

HybridGraph build_hybrid_graph(Sample sample, const GraphConfig& cfg) {
  validate_segments(sample.sequence, sample.sample_id);
  validate_segments(sample.video, sample.sample_id);

  HybridGraph g;
  g.sample_id = std::move(sample.sample_id);
  g.labels = std::move(sample.labels);
  g.sequence = std::move(sample.sequence);
  g.video = std::move(sample.video);

  g.seq_profile = entropy_profile(g.sequence.features, cfg.r_min, cfg.alpha);
  g.video_profile = entropy_profile(g.video.features, cfg.r_min, cfg.alpha);

  // Separate random streams for the two modalities.
  SelectionStrategy seq_strategy = cfg.strategy;
  SelectionStrategy video_strategy = cfg.strategy;
  video_strategy.seed = sample_graph_seed(cfg.strategy.seed, 0x5EED);

  g.seq_hypergraph = build_intra_hypergraph(g.seq_profile, cfg.hyperedge, seq_strategy);
  g.video_hypergraph = build_intra_hypergraph(g.video_profile, cfg.hyperedge, video_strategy);
  g.cross = build_cross_graph(g.sequence, g.video, cfg.cross);
  g.gat = make_gat_neighbors(g.cross.seq_video, g.cross.seq_weights);
  return g;
}

std::vector<HybridGraph> build_hybrid_graphs(std::vector<Sample> samples, const GraphConfig& cfg) {
  std::vector<HybridGraph> out(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      GraphConfig local = cfg;
      local.strategy.seed = sample_graph_seed(cfg.strategy.seed, static_cast<std::size_t>(i));
      out[static_cast<std::size_t>(i)] =
          build_hybrid_graph(std::move(samples[static_cast<std::size_t>(i)]), local);
    } catch (...) {
#pragma omp critical(hhn_build_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

BuildDiagnostics diagnose(const std::vector<HybridGraph>& graphs) {
  BuildDiagnostics d;
  d.samples = graphs.size();
  for (const auto& g : graphs) {
    for (const Hypergraph* h : {&g.seq_hypergraph, &g.video_hypergraph}) {
      d.hyperedges += h->hyperedges.size();
      d.degenerate_hyperedges += h->degenerate_count;
      for (const auto& e : h->hyperedges) d.max_hyperedge_size = std::max(d.max_hyperedge_size, e.members.size());
    }
    d.cross_edges += g.cross.edge_count();
    for (const EntropyProfile* p : {&g.seq_profile, &g.video_profile}) {
      d.entropies.insert(d.entropies.end(), p->entropy.begin(), p->entropy.end());
      d.window_radii.insert(d.window_radii.end(), p->radius.begin(), p->radius.end());
    }
  }
  return d;
}

}  // namespace hhn
