#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hhn/hybrid_graph.hpp"
#include "hhn/matrix.hpp"
#include "hhn/ops.hpp"

namespace hhn {

enum class HeadKind : std::uint8_t { multilabel_sigmoid, singlelabel_softmax };
enum class ModalityMode : std::uint8_t { combined, seq_only, video_only };

HeadKind parse_head(std::string_view name);
std::string head_name(HeadKind head);
ModalityMode parse_modality_mode(std::string_view name);
std::string modality_mode_name(ModalityMode mode);

/// Architecture plus the graph-construction knobs it is trained with.
struct HHNConfig {
  std::size_t n_layers = 2;
  std::size_t hidden_dim = 64;
  std::size_t hyperedge_size = 4;
  std::size_t hop = 2;
  std::size_t r_min = 6;
  double alpha = 2.0;
  HeadKind head = HeadKind::multilabel_sigmoid;
  std::size_t classes = 2;
  std::size_t seq_dim = 128;
  std::size_t video_dim = 1024;

  SelectionKind strategy = SelectionKind::max_diff;
  std::optional<std::size_t> semantic_topk;
  TemporalWeighting weighting = TemporalWeighting::source_time;
  bool cross_modal = true;
  ModalityMode modality = ModalityMode::combined;

  // Applied after every HGNN layer; identity is a test hook.
  Activation activation = Activation::elu();
  double leaky_slope = 0.2;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
  GraphConfig graph_config(std::uint64_t seed) const;
  bool uses_sequence() const noexcept { return modality != ModalityMode::video_only; }
  bool uses_video() const noexcept { return modality != ModalityMode::seq_only; }
};

/// All learnable tensors, in checkpoint declaration order:
/// per layer l: gat_dst, gat_src, attention, theta_seq, theta_video;
/// then readout.video, readout.seq, head.weight, head.bias.
struct ModelState {
  std::vector<ParamTensor> tensors;

  struct LayerSlots {
    std::size_t gat_dst, gat_src, attention, theta_seq, theta_video;
  };
  static constexpr std::size_t kPerLayer = 5;

  std::size_t n_layers() const noexcept { return (tensors.size() - 4) / kPerLayer; }
  LayerSlots layer(std::size_t l) const noexcept {
    const std::size_t b = l * kPerLayer;
    return {b, b + 1, b + 2, b + 3, b + 4};
  }
  std::size_t readout_video() const noexcept { return tensors.size() - 4; }
  std::size_t readout_seq() const noexcept { return tensors.size() - 3; }
  std::size_t head_weight() const noexcept { return tensors.size() - 2; }
  std::size_t head_bias() const noexcept { return tensors.size() - 1; }

  const DenseMatrix& value(std::size_t slot) const { return tensors[slot].value; }
  std::vector<ParamTensor*> pointers();
  void zero_grad();
  std::size_t parameter_count() const;
};

/// Expected (rows, cols) of every tensor for a configuration.
std::vector<std::pair<std::size_t, std::size_t>> parameter_shapes(const HHNConfig& cfg);
std::vector<std::string> parameter_names(const HHNConfig& cfg);

/// Glorot-uniform weights, unit readout vectors, zero bias.
ModelState init_model(const HHNConfig& cfg, std::uint64_t seed);

// ---- layers ---------------------------------------------------------------

struct HgnnCache {
  DenseMatrix input;
  DenseMatrix projected;  // input * theta
  DenseMatrix pre;        // op * projected
  DenseMatrix output;
};

/// act(op * Z * theta)
DenseMatrix hgnn_layer(const DenseMatrix& op, const DenseMatrix& z, const DenseMatrix& theta,
                       const Activation& act);
HgnnCache hgnn_forward(const DenseMatrix& op, const DenseMatrix& z, const DenseMatrix& theta,
                       const Activation& act);
/// Accumulates d theta; returns dZ when `need_input_grad`, else an empty matrix.
DenseMatrix hgnn_backward(const DenseMatrix& op, const HgnnCache& cache, const DenseMatrix& theta,
                          const Activation& act, const DenseMatrix& grad_out,
                          DenseMatrix& grad_theta, bool need_input_grad);

struct GatParams {
  const DenseMatrix& w_dst;      // d_dst x h
  const DenseMatrix& w_src;      // d_src x h
  const DenseMatrix& attention;  // 2h x 1: destination half, then source half
  double slope = 0.2;
};

struct GatCache {
  DenseMatrix proj_dst;          // n_dst x h
  DenseMatrix proj_src;          // n_src x h
  std::vector<double> raw;       // per edge, before leaky_relu
  std::vector<double> weight;    // per edge attention
  DenseMatrix messages;          // n_dst x h
  bool active = false;           // false when no edge exists (messages are zero)
};

/// output_i = sum_j alpha_ij * W_src z_j with
/// alpha_i = softmax_j(leaky_relu(a_dst . W_dst z_i + a_src . W_src z_j) + ln W_ij).
/// Destinations without neighbors receive zeros.
DenseMatrix gat_layer(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                      const GatParams& params);
GatCache gat_forward(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                     const GatParams& params);

struct GatGrads {
  DenseMatrix& w_dst;
  DenseMatrix& w_src;
  DenseMatrix& attention;
};
/// Accumulates parameter gradients; adds input gradients into grad_dst/grad_src
/// when they are non-empty.
void gat_backward(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                  const GatParams& params, const GatCache& cache, const DenseMatrix& grad_messages,
                  GatGrads grads, DenseMatrix* grad_dst, DenseMatrix* grad_src);

/// mean_rows(z_video) * p_video + mean_rows(z_seq) * p_seq, elementwise (1 x h).
/// Either stream may be empty (0 rows), in which case its term is dropped.
DenseMatrix readout(const DenseMatrix& z_seq, const DenseMatrix& z_video, const DenseMatrix& p_seq,
                    const DenseMatrix& p_video);

/// Affine map then per-class sigmoid or softmax.
DenseMatrix classify(const DenseMatrix& embedding, const DenseMatrix& weight,
                     const DenseMatrix& bias, HeadKind head);
DenseMatrix head_probabilities(const DenseMatrix& logits, HeadKind head);

// ---- whole network --------------------------------------------------------

struct LayerCache {
  GatCache gat;
  HgnnCache seq;
  HgnnCache video;
};

struct ForwardResult {
  std::vector<LayerCache> layers;
  DenseMatrix z_seq;      // final sequence embeddings (0 rows when unused)
  DenseMatrix z_video;    // final video embeddings (0 rows when unused)
  DenseMatrix embedding;  // 1 x h
  DenseMatrix logits;     // 1 x C
  DenseMatrix probs;      // 1 x C
};

ForwardResult forward_pass(const HybridGraph& graph, const ModelState& state, const HHNConfig& cfg);

/// One gradient buffer per tensor, same shapes as the values.
using Gradients = std::vector<DenseMatrix>;
Gradients zero_gradients(const ModelState& state);

/// Backpropagates dL/dlogits (1 x C) through one sample and accumulates into `grads`.
void backward_pass(const HybridGraph& graph, const ModelState& state, const HHNConfig& cfg,
                   const ForwardResult& fwd, const DenseMatrix& grad_logits, Gradients& grads);

// ---- checkpoint -----------------------------------------------------------

// "HHNM", u32 version, then for each tensor in declaration order:
// u32 rows, u32 cols, rows*cols f64, all little-endian.
inline constexpr char kCheckpointMagic[4] = {'H', 'H', 'N', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const ModelState& state, const std::filesystem::path& path);
/// Reads tensor values. With a config, shapes are checked against it and the
/// tensors are named; otherwise names are "tensor<i>".
ModelState read_checkpoint(const std::filesystem::path& path,
                           const std::optional<HHNConfig>& cfg = std::nullopt);

}  // namespace hhn
