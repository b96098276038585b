#include "hhn/crossmodal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hhn/errors.hpp"

namespace hhn {

double hawkes_weight(std::int64_t t_i, std::int64_t t_max, std::int64_t t_min) {
  if (t_max < t_min || t_i < t_min || t_i > t_max) {
    throw ValidationError("hawkes_weight: t_i=" + std::to_string(t_i) + " outside [" +
                          std::to_string(t_min) + ", " + std::to_string(t_max) + "]");
  }
  const double num = static_cast<double>(t_max - t_i + 1);
  const double den = static_cast<double>(t_max - t_min + 1);
  return std::exp(-num / den);
}

double hawkes_interval_weight(std::int64_t t_i, std::int64_t t_j, std::int64_t t_max,
                              std::int64_t t_min) {
  if (t_max < t_min || t_i < t_min || t_i > t_max || t_j < t_min || t_j > t_max)
    throw ValidationError("hawkes_interval_weight: timestamp outside range");
  const double gap = static_cast<double>(t_i > t_j ? t_i - t_j : t_j - t_i);
  return std::exp(-(gap + 1.0) / static_cast<double>(t_max - t_min + 1));
}

TemporalWeighting parse_weighting(std::string_view name) {
  if (name == "source" || name == "source_time") return TemporalWeighting::source_time;
  if (name == "interval") return TemporalWeighting::interval;
  throw ConfigError("unknown temporal weighting '" + std::string(name) + "'");
}

std::string weighting_name(TemporalWeighting w) {
  return w == TemporalWeighting::source_time ? "source" : "interval";
}

DenseMatrix CrossGraph::dense_adjacency() const {
  DenseMatrix a(n_nodes(), n_nodes());
  for (std::size_t i = 0; i < n_seq; ++i)
    for (std::size_t j = 0; j < n_video; ++j) {
      a(i, n_seq + j) = seq_video(i, j);
      a(n_seq + j, i) = seq_video(i, j);
    }
  return a;
}

DenseMatrix CrossGraph::dense_weights() const {
  DenseMatrix w(n_nodes(), n_nodes());
  for (std::size_t i = 0; i < n_seq; ++i)
    for (std::size_t j = 0; j < n_video; ++j) {
      w(i, n_seq + j) = seq_weights(i, j);
      w(n_seq + j, i) = video_weights(j, i);
    }
  return w;
}

double padded_cosine(std::span<const double> a, std::span<const double> b) {
  const std::size_t k = std::min(a.size(), b.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < k; ++i) dot += a[i] * b[i];
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

namespace {

// Marks the k most similar columns of each row (ties to the smaller index).
void link_topk(const DenseMatrix& from, const DenseMatrix& to, std::size_t k,
               const std::function<void(std::size_t, std::size_t)>& link) {
  std::vector<std::size_t> order(to.rows());
  std::vector<double> sim(to.rows());
  for (std::size_t i = 0; i < from.rows(); ++i) {
    for (std::size_t j = 0; j < to.rows(); ++j) sim[j] = padded_cosine(from.row(i), to.row(j));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
    for (std::size_t r = 0; r < std::min(k, order.size()); ++r) link(i, order[r]);
  }
}

}  // namespace

CrossGraph build_cross_graph(const ModalitySegments& seq, const ModalitySegments& video,
                             const CrossParams& params) {
  if (seq.size() == 0 || video.size() == 0)
    throw ValidationError("build_cross_graph: both modalities need at least one node");

  CrossGraph g;
  g.n_seq = seq.size();
  g.n_video = video.size();
  g.seq_video = DenseMatrix(g.n_seq, g.n_video);
  g.seq_weights = DenseMatrix(g.n_seq, g.n_video);
  g.video_weights = DenseMatrix(g.n_video, g.n_seq);
  if (!params.enabled) return g;

  for (std::size_t i = 0; i < g.n_seq; ++i)
    for (std::size_t j = 0; j < g.n_video; ++j)
      if (seq.t_start[i] < video.t_end[j] && video.t_start[j] < seq.t_end[i]) g.seq_video(i, j) = 1.0;

  if (params.semantic_topk && *params.semantic_topk > 0) {
    const std::size_t k = *params.semantic_topk;
    link_topk(seq.features, video.features, k,
              [&](std::size_t i, std::size_t j) { g.seq_video(i, j) = 1.0; });
    link_topk(video.features, seq.features, k,
              [&](std::size_t j, std::size_t i) { g.seq_video(i, j) = 1.0; });
  }

  const auto [smin, smax] = std::minmax_element(seq.t_start.begin(), seq.t_start.end());
  const auto [vmin, vmax] = std::minmax_element(video.t_start.begin(), video.t_start.end());
  const std::int64_t t_min = std::min(*smin, *vmin);
  const std::int64_t t_max = std::max(*smax, *vmax);

  auto weight = [&](std::int64_t t_src, std::int64_t t_dst) {
    return params.weighting == TemporalWeighting::source_time
               ? hawkes_weight(t_src, t_max, t_min)
               : hawkes_interval_weight(t_src, t_dst, t_max, t_min);
  };

  for (std::size_t i = 0; i < g.n_seq; ++i)
    for (std::size_t j = 0; j < g.n_video; ++j) {
      if (g.seq_video(i, j) == 0.0) continue;
      g.seq_weights(i, j) = weight(seq.t_start[i], video.t_start[j]);
      g.video_weights(j, i) = weight(video.t_start[j], seq.t_start[i]);
    }

  // E_t = {(i, j) : A_ij * W_ij > 0}, sequence sources first.
  for (std::size_t i = 0; i < g.n_seq; ++i)
    for (std::size_t j = 0; j < g.n_video; ++j) {
      const double combined = g.seq_video(i, j) * g.seq_weights(i, j);
      if (combined > 0.0) g.edges.push_back({i, g.n_seq + j, g.seq_weights(i, j)});
    }
  for (std::size_t j = 0; j < g.n_video; ++j)
    for (std::size_t i = 0; i < g.n_seq; ++i) {
      const double combined = g.seq_video(i, j) * g.video_weights(j, i);
      if (combined > 0.0) g.edges.push_back({g.n_seq + j, i, g.video_weights(j, i)});
    }
  return g;
}

}  // namespace hhn
