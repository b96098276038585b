#include "hhn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"

namespace hhn {

HeadKind parse_head(std::string_view name) {
  if (name == "multilabel_sigmoid" || name == "sigmoid") return HeadKind::multilabel_sigmoid;
  if (name == "singlelabel_softmax" || name == "softmax") return HeadKind::singlelabel_softmax;
  throw ConfigError("unknown head '" + std::string(name) + "'");
}

std::string head_name(HeadKind head) {
  return head == HeadKind::multilabel_sigmoid ? "multilabel_sigmoid" : "singlelabel_softmax";
}

ModalityMode parse_modality_mode(std::string_view name) {
  if (name == "combined") return ModalityMode::combined;
  if (name == "seq-only" || name == "seq_only" || name == "sequence") return ModalityMode::seq_only;
  if (name == "video-only" || name == "video_only" || name == "video") return ModalityMode::video_only;
  throw ConfigError("unknown modality mode '" + std::string(name) + "'");
}

std::string modality_mode_name(ModalityMode mode) {
  switch (mode) {
    case ModalityMode::combined: return "combined";
    case ModalityMode::seq_only: return "seq-only";
    case ModalityMode::video_only: return "video-only";
  }
  return "unknown";
}

void HHNConfig::validate() const {
  if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (hyperedge_size < 1) throw ConfigError("hyperedge_size must be >= 1");
  if (hop < 1) throw ConfigError("hop must be >= 1");
  if (r_min < 1) throw ConfigError("r_min must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (classes < 1) throw ConfigError("classes must be >= 1");
  if (seq_dim < 1 || video_dim < 1) throw ConfigError("feature dims must be >= 1");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must lie in (0,1)");
  if (activation.kind == ActivationKind::leaky_relu &&
      !(activation.slope > 0.0 && activation.slope < 1.0))
    throw ConfigError("activation slope must lie in (0,1)");
}

GraphConfig HHNConfig::graph_config(std::uint64_t seed) const {
  GraphConfig g;
  g.r_min = r_min;
  g.alpha = alpha;
  g.hyperedge = {hyperedge_size, hop};
  g.strategy = {strategy, seed};
  g.cross.semantic_topk = semantic_topk;
  g.cross.weighting = weighting;
  g.cross.enabled = cross_modal && modality == ModalityMode::combined;
  return g;
}

std::vector<ParamTensor*> ModelState::pointers() {
  std::vector<ParamTensor*> out;
  out.reserve(tensors.size());
  for (auto& t : tensors) out.push_back(&t);
  return out;
}

void ModelState::zero_grad() {
  for (auto& t : tensors) t.zero_grad();
}

std::size_t ModelState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.value.size();
  return n;
}

std::vector<std::pair<std::size_t, std::size_t>> parameter_shapes(const HHNConfig& cfg) {
  cfg.validate();
  const std::size_t h = cfg.hidden_dim;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::size_t ds = l == 0 ? cfg.seq_dim : h;
    const std::size_t dv = l == 0 ? cfg.video_dim : h;
    shapes.emplace_back(ds, h);      // gat_dst
    shapes.emplace_back(dv, h);      // gat_src
    shapes.emplace_back(2 * h, 1);   // attention
    shapes.emplace_back(ds + h, h);  // theta_seq
    shapes.emplace_back(dv, h);      // theta_video
  }
  shapes.emplace_back(1, h);
  shapes.emplace_back(1, h);
  shapes.emplace_back(h, cfg.classes);
  shapes.emplace_back(1, cfg.classes);
  return shapes;
}

std::vector<std::string> parameter_names(const HHNConfig& cfg) {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l + 1) + ".";
    for (const char* n : {"gat_dst", "gat_src", "attention", "theta_seq", "theta_video"})
      names.push_back(p + n);
  }
  for (const char* n : {"readout.video", "readout.seq", "head.weight", "head.bias"}) names.emplace_back(n);
  return names;
}

ModelState init_model(const HHNConfig& cfg, std::uint64_t seed) {
  const auto shapes = parameter_shapes(cfg);
  const auto names = parameter_names(cfg);
  std::mt19937_64 rng(seed);
  ModelState state;
  state.tensors.reserve(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [rows, cols] = shapes[i];
    DenseMatrix m(rows, cols);
    const bool readout = names[i].starts_with("readout.");
    const bool bias = names[i] == "head.bias";
    if (readout) {
      m.fill(1.0);
    } else if (!bias) {
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double& v : m.values()) v = dist(rng);
    }
    state.tensors.emplace_back(names[i], std::move(m));
  }
  return state;
}

// ---- HGNN -----------------------------------------------------------------

HgnnCache hgnn_forward(const DenseMatrix& op, const DenseMatrix& z, const DenseMatrix& theta,
                       const Activation& act) {
  if (op.rows() != op.cols() || op.cols() != z.rows()) {
    throw DimensionError("hgnn_layer: operator " + op.shape_string() + " does not match features " +
                         z.shape_string());
  }
  HgnnCache c;
  c.input = z;
  c.projected = matmul(z, theta);
  c.pre = matmul(op, c.projected);
  c.output = apply_activation(c.pre, act);
  return c;
}

DenseMatrix hgnn_layer(const DenseMatrix& op, const DenseMatrix& z, const DenseMatrix& theta,
                       const Activation& act) {
  return hgnn_forward(op, z, theta, act).output;
}

DenseMatrix hgnn_backward(const DenseMatrix& op, const HgnnCache& cache, const DenseMatrix& theta,
                          const Activation& act, const DenseMatrix& grad_out,
                          DenseMatrix& grad_theta, bool need_input_grad) {
  const DenseMatrix d_pre = activation_backward(cache.pre, grad_out, act);
  const DenseMatrix d_projected = matmul_tn(op, d_pre);
  add_in_place(grad_theta, matmul_tn(cache.input, d_projected));
  if (!need_input_grad) return {};
  return matmul_nt(d_projected, theta);
}

// ---- GAT ------------------------------------------------------------------

namespace {

void check_gat_shapes(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                      const GatParams& p) {
  const std::size_t h = p.w_dst.cols();
  if (z_dst.rows() != nbrs.n_dst || z_src.rows() != nbrs.n_src)
    throw DimensionError("gat_layer: neighbor lists do not match node counts");
  if (z_dst.cols() != p.w_dst.rows())
    throw DimensionError("gat_layer: dst features " + z_dst.shape_string() + " vs W_dst " +
                         p.w_dst.shape_string());
  if (z_src.cols() != p.w_src.rows() || p.w_src.cols() != h)
    throw DimensionError("gat_layer: src features " + z_src.shape_string() + " vs W_src " +
                         p.w_src.shape_string());
  if (p.attention.rows() != 2 * h || p.attention.cols() != 1)
    throw DimensionError("gat_layer: attention vector must be " + std::to_string(2 * h) + "x1, got " +
                         p.attention.shape_string());
}

double dot_row(const DenseMatrix& m, std::size_t r, const double* v) {
  double acc = 0.0;
  const double* row = m.data() + r * m.cols();
  for (std::size_t k = 0; k < m.cols(); ++k) acc += row[k] * v[k];
  return acc;
}

}  // namespace

GatCache gat_forward(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                     const GatParams& p) {
  check_gat_shapes(nbrs, z_dst, z_src, p);
  const std::size_t h = p.w_dst.cols();
  GatCache c;
  c.messages = DenseMatrix(nbrs.n_dst, h);
  if (nbrs.edge_count() == 0) return c;
  c.active = true;

  c.proj_dst = matmul(z_dst, p.w_dst);
  c.proj_src = matmul(z_src, p.w_src);
  const double* a_dst = p.attention.data();
  const double* a_src = p.attention.data() + h;

  std::vector<double> score_src(nbrs.n_src);
  for (std::size_t j = 0; j < nbrs.n_src; ++j) score_src[j] = dot_row(c.proj_src, j, a_src);

  c.raw.resize(nbrs.edge_count());
  c.weight.resize(nbrs.edge_count());
  for (std::size_t i = 0; i < nbrs.n_dst; ++i) {
    const std::size_t begin = nbrs.offsets[i], end = nbrs.offsets[i + 1];
    if (begin == end) continue;
    const double score_dst = dot_row(c.proj_dst, i, a_dst);
    double peak = -INFINITY;
    for (std::size_t e = begin; e < end; ++e) {
      c.raw[e] = score_dst + score_src[nbrs.src[e]];
      const double logit = (c.raw[e] >= 0.0 ? c.raw[e] : p.slope * c.raw[e]) + nbrs.log_weight[e];
      c.weight[e] = logit;
      peak = std::max(peak, logit);
    }
    double total = 0.0;
    for (std::size_t e = begin; e < end; ++e) {
      c.weight[e] = std::exp(c.weight[e] - peak);
      total += c.weight[e];
    }
    auto out = c.messages.row(i);
    for (std::size_t e = begin; e < end; ++e) {
      c.weight[e] /= total;
      auto src = c.proj_src.row(nbrs.src[e]);
      for (std::size_t k = 0; k < h; ++k) out[k] += c.weight[e] * src[k];
    }
  }
  return c;
}

DenseMatrix gat_layer(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                      const GatParams& params) {
  return gat_forward(nbrs, z_dst, z_src, params).messages;
}

void gat_backward(const GatNeighbors& nbrs, const DenseMatrix& z_dst, const DenseMatrix& z_src,
                  const GatParams& p, const GatCache& c, const DenseMatrix& grad_messages,
                  GatGrads grads, DenseMatrix* grad_dst, DenseMatrix* grad_src) {
  if (!c.active) return;
  const std::size_t h = p.w_dst.cols();
  const double* a_dst = p.attention.data();
  const double* a_src = p.attention.data() + h;

  DenseMatrix d_proj_dst(nbrs.n_dst, h);
  DenseMatrix d_proj_src(nbrs.n_src, h);
  std::vector<double> d_score_dst(nbrs.n_dst, 0.0);
  std::vector<double> d_score_src(nbrs.n_src, 0.0);
  std::vector<double> d_weight;

  for (std::size_t i = 0; i < nbrs.n_dst; ++i) {
    const std::size_t begin = nbrs.offsets[i], end = nbrs.offsets[i + 1];
    if (begin == end) continue;
    auto dm = grad_messages.row(i);
    d_weight.assign(end - begin, 0.0);
    double weighted = 0.0;
    for (std::size_t e = begin; e < end; ++e) {
      const std::size_t j = nbrs.src[e];
      auto src = c.proj_src.row(j);
      double dw = 0.0;
      for (std::size_t k = 0; k < h; ++k) dw += dm[k] * src[k];
      d_weight[e - begin] = dw;
      weighted += c.weight[e] * dw;
      auto dsrc = d_proj_src.row(j);
      for (std::size_t k = 0; k < h; ++k) dsrc[k] += c.weight[e] * dm[k];
    }
    for (std::size_t e = begin; e < end; ++e) {
      const double d_logit = c.weight[e] * (d_weight[e - begin] - weighted);
      const double d_raw = d_logit * (c.raw[e] >= 0.0 ? 1.0 : p.slope);
      d_score_dst[i] += d_raw;
      d_score_src[nbrs.src[e]] += d_raw;
    }
  }

  double* ga_dst = grads.attention.data();
  double* ga_src = grads.attention.data() + h;
  for (std::size_t i = 0; i < nbrs.n_dst; ++i) {
    const double g = d_score_dst[i];
    if (g == 0.0) continue;
    auto proj = c.proj_dst.row(i);
    auto dproj = d_proj_dst.row(i);
    for (std::size_t k = 0; k < h; ++k) {
      ga_dst[k] += g * proj[k];
      dproj[k] += g * a_dst[k];
    }
  }
  for (std::size_t j = 0; j < nbrs.n_src; ++j) {
    const double g = d_score_src[j];
    if (g == 0.0) continue;
    auto proj = c.proj_src.row(j);
    auto dproj = d_proj_src.row(j);
    for (std::size_t k = 0; k < h; ++k) {
      ga_src[k] += g * proj[k];
      dproj[k] += g * a_src[k];
    }
  }

  add_in_place(grads.w_dst, matmul_tn(z_dst, d_proj_dst));
  add_in_place(grads.w_src, matmul_tn(z_src, d_proj_src));
  if (grad_dst) add_in_place(*grad_dst, matmul_nt(d_proj_dst, p.w_dst));
  if (grad_src) add_in_place(*grad_src, matmul_nt(d_proj_src, p.w_src));
}

// ---- readout and head -----------------------------------------------------

DenseMatrix readout(const DenseMatrix& z_seq, const DenseMatrix& z_video, const DenseMatrix& p_seq,
                    const DenseMatrix& p_video) {
  const std::size_t h = p_seq.cols();
  if (p_video.cols() != h || p_seq.rows() != 1 || p_video.rows() != 1)
    throw DimensionError("readout: P_s " + p_seq.shape_string() + " and P_v " +
                         p_video.shape_string() + " must both be 1xh");
  DenseMatrix out(1, h);
  if (z_seq.rows() > 0) {
    if (z_seq.cols() != h) throw DimensionError("readout: sequence embeddings " + z_seq.shape_string());
    add_in_place(out, hadamard(column_mean(z_seq), p_seq));
  }
  if (z_video.rows() > 0) {
    if (z_video.cols() != h) throw DimensionError("readout: video embeddings " + z_video.shape_string());
    add_in_place(out, hadamard(column_mean(z_video), p_video));
  }
  return out;
}

DenseMatrix head_probabilities(const DenseMatrix& logits, HeadKind head) {
  if (head == HeadKind::singlelabel_softmax) return rowwise_softmax(logits);
  return apply_activation(logits, Activation::sigmoid());
}

DenseMatrix classify(const DenseMatrix& embedding, const DenseMatrix& weight,
                     const DenseMatrix& bias, HeadKind head) {
  if (bias.rows() != 1 || bias.cols() != weight.cols())
    throw DimensionError("classify: bias " + bias.shape_string() + " vs weight " + weight.shape_string());
  DenseMatrix logits = add(matmul(embedding, weight), bias);
  return head_probabilities(logits, head);
}

// ---- network --------------------------------------------------------------

namespace {

void check_graph(const HybridGraph& g, const HHNConfig& cfg) {
  if (cfg.uses_sequence() && g.sequence.dim() != cfg.seq_dim)
    throw DimensionError("sample '" + g.sample_id + "': sequence dim " + std::to_string(g.sequence.dim()) +
                         " != configured " + std::to_string(cfg.seq_dim));
  if (cfg.uses_video() && g.video.dim() != cfg.video_dim)
    throw DimensionError("sample '" + g.sample_id + "': video dim " + std::to_string(g.video.dim()) +
                         " != configured " + std::to_string(cfg.video_dim));
}

GatParams gat_params(const ModelState& s, const ModelState::LayerSlots& slots, double slope) {
  return {s.value(slots.gat_dst), s.value(slots.gat_src), s.value(slots.attention), slope};
}

}  // namespace

ForwardResult forward_pass(const HybridGraph& graph, const ModelState& state, const HHNConfig& cfg) {
  check_graph(graph, cfg);
  if (state.n_layers() != cfg.n_layers)
    throw DimensionError("model has " + std::to_string(state.n_layers()) + " layers, config " +
                         std::to_string(cfg.n_layers));
  const bool use_seq = cfg.uses_sequence();
  const bool use_video = cfg.uses_video();
  const std::size_t h = cfg.hidden_dim;

  ForwardResult r;
  r.layers.resize(cfg.n_layers);
  const DenseMatrix* s = use_seq ? &graph.sequence.features : nullptr;
  const DenseMatrix* v = use_video ? &graph.video.features : nullptr;

  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const auto slots = state.layer(l);
    LayerCache& c = r.layers[l];
    if (use_seq) {
      if (use_video) {
        c.gat = gat_forward(graph.gat, *s, *v, gat_params(state, slots, cfg.leaky_slope));
      } else {
        c.gat.messages = DenseMatrix(s->rows(), h);
      }
      c.seq = hgnn_forward(graph.seq_hypergraph.propagation, concat_cols(*s, c.gat.messages),
                           state.value(slots.theta_seq), cfg.activation);
    }
    if (use_video) {
      c.video = hgnn_forward(graph.video_hypergraph.propagation, *v, state.value(slots.theta_video),
                             cfg.activation);
    }
    if (use_seq) s = &c.seq.output;
    if (use_video) v = &c.video.output;
  }

  if (use_seq) r.z_seq = *s;
  if (use_video) r.z_video = *v;
  r.embedding = readout(r.z_seq, r.z_video, state.value(state.readout_seq()),
                        state.value(state.readout_video()));
  r.logits = add(matmul(r.embedding, state.value(state.head_weight())), state.value(state.head_bias()));
  r.probs = head_probabilities(r.logits, cfg.head);
  return r;
}

Gradients zero_gradients(const ModelState& state) {
  Gradients g;
  g.reserve(state.tensors.size());
  for (const auto& t : state.tensors) g.emplace_back(t.value.rows(), t.value.cols());
  return g;
}

void backward_pass(const HybridGraph& graph, const ModelState& state, const HHNConfig& cfg,
                   const ForwardResult& fwd, const DenseMatrix& grad_logits, Gradients& grads) {
  if (grads.size() != state.tensors.size()) throw DimensionError("gradient buffer count mismatch");
  const bool use_seq = cfg.uses_sequence();
  const bool use_video = cfg.uses_video();

  // head
  const DenseMatrix& w = state.value(state.head_weight());
  add_in_place(grads[state.head_weight()], matmul_tn(fwd.embedding, grad_logits));
  add_in_place(grads[state.head_bias()], grad_logits);
  const DenseMatrix d_embed = matmul_nt(grad_logits, w);

  // readout
  DenseMatrix d_seq, d_video;
  auto readout_grad = [&](const DenseMatrix& z, std::size_t slot, DenseMatrix& dz) {
    add_in_place(grads[slot], hadamard(d_embed, column_mean(z)));
    const DenseMatrix per_row = scale(hadamard(d_embed, state.value(slot)), 1.0 / static_cast<double>(z.rows()));
    dz = DenseMatrix(z.rows(), z.cols());
    for (std::size_t r = 0; r < z.rows(); ++r) std::copy(per_row.values().begin(), per_row.values().end(), dz.row(r).begin());
  };
  if (use_seq) readout_grad(fwd.z_seq, state.readout_seq(), d_seq);
  if (use_video) readout_grad(fwd.z_video, state.readout_video(), d_video);

  for (std::size_t l = cfg.n_layers; l-- > 0;) {
    const auto slots = state.layer(l);
    const LayerCache& c = fwd.layers[l];
    const bool need_input = l > 0;
    DenseMatrix d_seq_prev, d_video_prev;

    if (use_seq) {
      const bool gat_live = use_video && c.gat.active;
      const DenseMatrix d_x =
          hgnn_backward(graph.seq_hypergraph.propagation, c.seq, state.value(slots.theta_seq),
                        cfg.activation, d_seq, grads[slots.theta_seq], need_input || gat_live);
      if (!d_x.empty()) {
        const std::size_t d_in = c.seq.input.cols() - cfg.hidden_dim;
        auto [d_s_in, d_msg] = split_cols(d_x, d_in);
        if (need_input) d_seq_prev = std::move(d_s_in);
        if (gat_live) {
          const auto [s_in, unused] = split_cols(c.seq.input, d_in);
          const DenseMatrix& v_in = c.video.input;
          if (need_input) d_video_prev = DenseMatrix(v_in.rows(), v_in.cols());
          gat_backward(graph.gat, s_in, v_in, gat_params(state, slots, cfg.leaky_slope), c.gat, d_msg,
                       {grads[slots.gat_dst], grads[slots.gat_src], grads[slots.attention]},
                       need_input ? &d_seq_prev : nullptr, need_input ? &d_video_prev : nullptr);
        }
      }
    }
    if (use_video) {
      DenseMatrix d_v_in =
          hgnn_backward(graph.video_hypergraph.propagation, c.video, state.value(slots.theta_video),
                        cfg.activation, d_video, grads[slots.theta_video], need_input);
      if (need_input) {
        if (d_video_prev.empty()) d_video_prev = std::move(d_v_in);
        else add_in_place(d_video_prev, d_v_in);
      }
    }
    d_seq = std::move(d_seq_prev);
    d_video = std::move(d_video_prev);
  }
}

// ---- checkpoint -----------------------------------------------------------

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}
void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void write_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  std::string buf(kCheckpointMagic, 4);
  put_u32(buf, kCheckpointVersion);
  for (const auto& t : state.tensors) {
    put_u32(buf, static_cast<std::uint32_t>(t.value.rows()));
    put_u32(buf, static_cast<std::uint32_t>(t.value.cols()));
    for (double v : t.value.values()) put_u64(buf, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint '" + path.string() + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

ModelState read_checkpoint(const std::filesystem::path& path, const std::optional<HHNConfig>& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw FormatError("'" + path.string() + "': not an HHNM checkpoint");
  if (get_u32(p + 4) != kCheckpointVersion)
    throw FormatError("'" + path.string() + "': unsupported checkpoint version " + std::to_string(get_u32(p + 4)));

  ModelState state;
  std::size_t pos = 8;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 8) throw FormatError("'" + path.string() + "': truncated tensor header");
    const std::size_t rows = get_u32(p + pos), cols = get_u32(p + pos + 4);
    pos += 8;
    const std::size_t need = rows * cols * 8;
    if (bytes.size() - pos < need) {
      throw FormatError("'" + path.string() + "': tensor payload expected " + std::to_string(need) +
                        " bytes, found " + std::to_string(bytes.size() - pos));
    }
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = std::bit_cast<double>(get_u64(p + pos + 8 * i));
    pos += need;
    state.tensors.emplace_back("tensor" + std::to_string(state.tensors.size()), std::move(m));
  }

  if (cfg) {
    const auto shapes = parameter_shapes(*cfg);
    const auto names = parameter_names(*cfg);
    if (shapes.size() != state.tensors.size())
      throw FormatError("'" + path.string() + "': has " + std::to_string(state.tensors.size()) +
                        " tensors, configuration expects " + std::to_string(shapes.size()));
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const auto& v = state.tensors[i].value;
      if (v.rows() != shapes[i].first || v.cols() != shapes[i].second)
        throw FormatError("'" + path.string() + "': tensor " + names[i] + " is " + v.shape_string() +
                          ", expected " + std::to_string(shapes[i].first) + "x" + std::to_string(shapes[i].second));
      state.tensors[i].name = names[i];
    }
  }
  return state;
}

}  // namespace hhn
