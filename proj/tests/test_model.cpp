#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"
#include "hhn/model.hpp"
#include "model_check.hpp"
#include "test_util.hpp"

using namespace hhn;
using hhn::testing::naive_matmul;
using hhn::testing::random_matrix;
using hhn::testing::toy_config;
using hhn::testing::toy_sample;

namespace {

HybridGraph toy_graph(std::uint64_t seed, const HHNConfig& cfg) {
  return build_hybrid_graph(toy_sample(seed, 6, 4, cfg.seq_dim, cfg.video_dim, cfg.classes), cfg.graph_config(seed));
}

DenseMatrix elu_oracle(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (double& v : out.values()) v = v > 0.0 ? v : std::expm1(v);
  return out;
}

// Relabels both modalities; operators become P A P^T and the GAT lists are rebuilt.
HybridGraph permuted(const HybridGraph& g, const std::vector<std::size_t>& ps, const std::vector<std::size_t>& pv) {
  HybridGraph out = g;
  auto rows = [](const DenseMatrix& m, const std::vector<std::size_t>& p) {
    DenseMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t k = 0; k < m.cols(); ++k) r(p[i], k) = m(i, k);
    return r;
  };
  auto both = [](const DenseMatrix& m, const std::vector<std::size_t>& pr, const std::vector<std::size_t>& pc) {
    DenseMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t k = 0; k < m.cols(); ++k) r(pr[i], pc[k]) = m(i, k);
    return r;
  };
  out.sequence.features = rows(g.sequence.features, ps);
  out.video.features = rows(g.video.features, pv);
  out.seq_hypergraph.propagation = both(g.seq_hypergraph.propagation, ps, ps);
  out.video_hypergraph.propagation = both(g.video_hypergraph.propagation, pv, pv);
  out.cross.seq_video = both(g.cross.seq_video, ps, pv);
  out.cross.seq_weights = both(g.cross.seq_weights, ps, pv);
  out.gat = make_gat_neighbors(out.cross.seq_video, out.cross.seq_weights);
  return out;
}

}  // namespace

TEST(Hgnn, IdentityCompositionIsFixpoint) {
  std::mt19937_64 rng(51);
  const DenseMatrix z = random_matrix(5, 5, rng);
  EXPECT_EQ(hgnn_layer(DenseMatrix::identity(5), z, DenseMatrix::identity(5), Activation::identity()), z);
}

TEST(Hgnn, SingleNodeScalarChain) {
  const DenseMatrix out = hgnn_layer({{1.5}}, {{-0.4}}, {{2.0}}, Activation::elu());
  EXPECT_NEAR(out(0, 0), std::expm1(1.5 * -0.4 * 2.0), 1e-15);
}

TEST(Hgnn, MatchesDenseOracle) {
  std::mt19937_64 rng(52);
  const EntropyProfile p = entropy_profile(random_matrix(6, 8, rng), 2, 1.0);
  const Hypergraph g = build_intra_hypergraph(p, {3, 1}, SelectionStrategy::max_diff());
  const DenseMatrix z = random_matrix(6, 8, rng), theta = random_matrix(8, 4, rng);
  const DenseMatrix oracle = elu_oracle(naive_matmul(naive_matmul(g.propagation, z), theta));
  EXPECT_LE(max_abs_diff(hgnn_layer(g.propagation, z, theta, Activation::elu()), oracle), 1e-10);
  EXPECT_THROW(hgnn_layer(g.propagation, z, random_matrix(7, 4, rng), Activation::elu()), DimensionError);
}

TEST(Gat, SingleNeighborPassesProjectionThrough) {
  std::mt19937_64 rng(53);
  const DenseMatrix zd = random_matrix(1, 3, rng), zs = random_matrix(1, 5, rng);
  const DenseMatrix wd = random_matrix(3, 4, rng), ws = random_matrix(5, 4, rng), a = random_matrix(8, 1, rng);
  const GatNeighbors n = make_gat_neighbors({{1.0}}, {{0.3}});
  const DenseMatrix out = gat_layer(n, zd, zs, {wd, ws, a, 0.2});
  EXPECT_EQ(out, matmul(zs, ws));
}

TEST(Gat, EqualLogitsSplitEvenly) {
  const DenseMatrix zd{{1.0}}, zs{{2.0}, {2.0}};
  const DenseMatrix wd{{1.0}}, ws{{1.0}}, a{{0.5}, {0.5}};
  const GatCache c = gat_forward(make_gat_neighbors({{1.0, 1.0}}, {{0.7, 0.7}}), zd, zs, {wd, ws, a, 0.2});
  ASSERT_EQ(c.weight.size(), 2u);
  EXPECT_DOUBLE_EQ(c.weight[0], 0.5);
  EXPECT_DOUBLE_EQ(c.weight[1], 0.5);
}

TEST(Gat, ThreeByTwoMatchesPerEdgeOracle) {
  std::mt19937_64 rng(54);
  const DenseMatrix zd = random_matrix(3, 4, rng), zs = random_matrix(2, 6, rng);
  const DenseMatrix wd = random_matrix(4, 3, rng), ws = random_matrix(6, 3, rng), a = random_matrix(6, 1, rng);
  const DenseMatrix adj{{1, 1}, {0, 1}, {0, 0}};
  const DenseMatrix w{{0.4, 0.9}, {0.2, 0.6}, {0.5, 0.5}};
  const DenseMatrix out = gat_layer(make_gat_neighbors(adj, w), zd, zs, {wd, ws, a, 0.2});

  const DenseMatrix pd = naive_matmul(zd, wd), psrc = naive_matmul(zs, ws);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> logit(2, 0.0);
    double z = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
      if (adj(i, j) == 0.0) continue;
      double e = 0.0;
      for (std::size_t k = 0; k < 3; ++k) e += a(k, 0) * pd(i, k) + a(3 + k, 0) * psrc(j, k);
      e = e > 0.0 ? e : 0.2 * e;
      logit[j] = std::exp(e) * w(i, j);
      z += logit[j];
    }
    for (std::size_t k = 0; k < 3; ++k) {
      double expect = 0.0;
      for (std::size_t j = 0; j < 2; ++j)
        if (adj(i, j) != 0.0) expect += logit[j] / z * psrc(j, k);
      EXPECT_NEAR(out(i, k), expect, 1e-10) << i << "," << k;
    }
  }
}

TEST(Readout, Examples) {
  const DenseMatrix zs{{1, 2, 3}, {1, 2, 3}};
  std::mt19937_64 rng(55);
  const DenseMatrix zv = random_matrix(4, 3, rng);
  EXPECT_EQ(readout(zs, zv, {{1, 1, 1}}, {{0, 0, 0}}), (DenseMatrix{{1, 2, 3}}));
  EXPECT_EQ(readout(zs, zv, {{0, 0, 0}}, {{0, 0, 0}}), (DenseMatrix{{0, 0, 0}}));
  const DenseMatrix ps = random_matrix(1, 3, rng), pv = random_matrix(1, 3, rng), zr = random_matrix(5, 3, rng);
  const DenseMatrix out = readout(zr, zv, ps, pv);
  for (std::size_t k = 0; k < 3; ++k) {
    double ms = 0.0, mv = 0.0;
    for (std::size_t r = 0; r < 5; ++r) ms += zr(r, k) / 5.0;
    for (std::size_t r = 0; r < 4; ++r) mv += zv(r, k) / 4.0;
    EXPECT_NEAR(out(0, k), ms * ps(0, k) + mv * pv(0, k), 1e-12);
  }
  // a missing stream contributes nothing
  EXPECT_EQ(readout(DenseMatrix(0, 3), zs, ps, {{1, 1, 1}}), (DenseMatrix{{1, 2, 3}}));
}

TEST(Classify, Examples) {
  const DenseMatrix emb{{0.3, -1.2}};
  const DenseMatrix p = classify(emb, DenseMatrix(2, 3), DenseMatrix(1, 3), HeadKind::multilabel_sigmoid);
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.5);
  const DenseMatrix q = classify(emb, DenseMatrix(2, 4), DenseMatrix(1, 4), HeadKind::singlelabel_softmax);
  for (double v : q.values()) EXPECT_DOUBLE_EQ(v, 0.25);
  std::mt19937_64 rng(56);
  const DenseMatrix w = random_matrix(2, 3, rng), b = random_matrix(1, 3, rng);
  const DenseMatrix s = classify(emb, w, b, HeadKind::multilabel_sigmoid);
  double z = 0.0;
  std::vector<double> logit(3);
  for (std::size_t c = 0; c < 3; ++c) {
    logit[c] = 0.3 * w(0, c) - 1.2 * w(1, c) + b(0, c);
    EXPECT_NEAR(s(0, c), 1.0 / (1.0 + std::exp(-logit[c])), 1e-12);
    z += std::exp(logit[c]);
  }
  const DenseMatrix m = classify(emb, w, b, HeadKind::singlelabel_softmax);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(m(0, c), std::exp(logit[c]) / z, 1e-12);
}

TEST(Config, ValidationAndNames) {
  HHNConfig c = toy_config();
  c.n_layers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = toy_config();
  c.hidden_dim = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_head("softmax"), HeadKind::singlelabel_softmax);
  EXPECT_EQ(head_name(parse_head("multilabel_sigmoid")), "multilabel_sigmoid");
  EXPECT_EQ(parse_modality_mode("video-only"), ModalityMode::video_only);
  EXPECT_THROW(parse_head("linear"), ConfigError);
  EXPECT_THROW(parse_modality_mode("audio"), ConfigError);
  c = toy_config();
  c.modality = ModalityMode::seq_only;
  EXPECT_FALSE(c.graph_config(1).cross.enabled);
  c = toy_config();
  c.cross_modal = false;
  EXPECT_FALSE(c.graph_config(1).cross.enabled);
}

TEST(Model, ShapesAndInit) {
  const HHNConfig c = toy_config();
  const ModelState s = init_model(c, 3);
  const auto shapes = parameter_shapes(c);
  const auto names = parameter_names(c);
  ASSERT_EQ(s.tensors.size(), 2 * 5 + 4u);
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    EXPECT_EQ(s.tensors[k].value.rows(), shapes[k].first);
    EXPECT_EQ(s.tensors[k].value.cols(), shapes[k].second);
    EXPECT_EQ(s.tensors[k].name, names[k]);
  }
  EXPECT_EQ(s.value(s.layer(0).theta_seq).rows(), c.seq_dim + c.hidden_dim);
  EXPECT_EQ(s.value(s.layer(1).gat_dst).rows(), c.hidden_dim);
  for (double v : s.value(s.readout_seq()).values()) EXPECT_EQ(v, 1.0);
  for (double v : s.value(s.head_bias()).values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(init_model(c, 3).value(0), s.value(0));
  EXPECT_NE(init_model(c, 4).value(0), s.value(0));
}

TEST(Forward, DeterministicAndDimensionChecked) {
  const HHNConfig c = toy_config();
  const HybridGraph g = toy_graph(1, c);
  const ModelState s = init_model(c, 9);
  const ForwardResult a = forward_pass(g, s, c), b = forward_pass(g, s, c);
  EXPECT_EQ(a.probs, b.probs);
  EXPECT_EQ(a.z_seq, b.z_seq);
  HHNConfig wrong = c;
  wrong.seq_dim = 6;
  EXPECT_THROW(forward_pass(g, s, wrong), DimensionError);
}

TEST(Forward, EmptyCrossGraphGivesZeroMessagesAndConcatOracle) {
  HHNConfig c = toy_config();
  c.n_layers = 1;
  c.hidden_dim = c.seq_dim;
  c.cross_modal = false;
  c.activation = Activation::identity();
  const HybridGraph g = toy_graph(2, c);
  ASSERT_EQ(g.gat.edge_count(), 0u);
  ModelState s = init_model(c, 1);
  auto& theta = s.tensors[s.layer(0).theta_seq].value;  // (ds + h) x h
  theta.fill(0.0);
  for (std::size_t k = 0; k < c.seq_dim; ++k) theta(k, k) = 1.0;
  const ForwardResult f = forward_pass(g, s, c);
  for (double v : f.layers[0].gat.messages.values()) EXPECT_EQ(v, 0.0);
  const DenseMatrix oracle = naive_matmul(naive_matmul(g.seq_hypergraph.propagation,
                                                       concat_cols(g.sequence.features, DenseMatrix(6, c.hidden_dim))),
                                          theta);
  EXPECT_LE(max_abs_diff(f.z_seq, oracle), 1e-12);
}

TEST(Forward, ZeroLayersAreRejected) {
  HHNConfig c = toy_config();
  c.n_layers = 0;
  EXPECT_THROW(init_model(c, 0), ConfigError);
}

TEST(Backward, EndToEndMatchesFiniteDifferences) {
  for (HeadKind head : {HeadKind::multilabel_sigmoid, HeadKind::singlelabel_softmax}) {
    HHNConfig c = toy_config();
    c.head = head;
    std::vector<HybridGraph> graphs{toy_graph(3, c), toy_graph(4, c)};
    ModelState s = init_model(c, 17);
    const GradCheckReport r = hhn::testing::end_to_end_grad_check(graphs, c, s);
    EXPECT_TRUE(r.passed) << head_name(head) << " worst " << r.worst_param << "(" << r.worst_row << ","
                          << r.worst_col << ") rel " << r.max_rel_error;
    EXPECT_EQ(r.entries_checked, s.parameter_count());
  }
}

TEST(Backward, SingleModalityVariantsMatchFiniteDifferences) {
  for (ModalityMode mode : {ModalityMode::seq_only, ModalityMode::video_only}) {
    HHNConfig c = toy_config();
    c.modality = mode;
    std::vector<HybridGraph> graphs{toy_graph(5, c)};
    ModelState s = init_model(c, 18);
    const GradCheckReport r = hhn::testing::end_to_end_grad_check(graphs, c, s);
    EXPECT_TRUE(r.passed) << modality_mode_name(mode) << " worst " << r.worst_param << " rel " << r.max_rel_error;
  }
}

TEST(ForwardProperty, NodePermutationLeavesEmbeddingUnchanged) {
  std::mt19937_64 rng(57);
  const HHNConfig c = toy_config();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const HybridGraph g = toy_graph(seed, c);
    const ModelState s = init_model(c, seed + 100);
    std::vector<std::size_t> ps(6), pv(4);
    std::iota(ps.begin(), ps.end(), 0);
    std::iota(pv.begin(), pv.end(), 0);
    std::shuffle(ps.begin(), ps.end(), rng);
    std::shuffle(pv.begin(), pv.end(), rng);
    const DenseMatrix a = forward_pass(g, s, c).embedding, b = forward_pass(permuted(g, ps, pv), s, c).embedding;
    EXPECT_LE(max_abs_diff(a, b), 1e-9);
  }
}

TEST(ForwardProperty, ScalingHawkesWeightsLeavesOutputUnchanged) {
  const HHNConfig c = toy_config();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const HybridGraph g = toy_graph(seed, c);
    const ModelState s = init_model(c, seed);
    HybridGraph scaled = g;
    const double factor = 0.05 + 0.3 * static_cast<double>(seed);
    scaled.gat = make_gat_neighbors(g.cross.seq_video, scale(g.cross.seq_weights, factor));
    EXPECT_LE(max_abs_diff(forward_pass(g, s, c).probs, forward_pass(scaled, s, c).probs), 1e-12);
  }
}

TEST(Checkpoint, RoundTripAndFaults) {
  const auto dir = hhn::testing::scratch_dir("ckpt");
  const HHNConfig c = toy_config();
  const ModelState s = init_model(c, 21);
  write_checkpoint(s, dir / "a.hhnm");
  const ModelState back = read_checkpoint(dir / "a.hhnm", c);
  for (std::size_t k = 0; k < s.tensors.size(); ++k) {
    EXPECT_EQ(back.tensors[k].value, s.tensors[k].value);
    EXPECT_EQ(back.tensors[k].name, s.tensors[k].name);
  }
  write_checkpoint(back, dir / "b.hhnm");
  std::ifstream fa(dir / "a.hhnm", std::ios::binary), fb(dir / "b.hhnm", std::ios::binary);
  const std::string ba{std::istreambuf_iterator<char>(fa), {}}, bb{std::istreambuf_iterator<char>(fb), {}};
  EXPECT_EQ(ba, bb);
  EXPECT_EQ(ba.substr(0, 4), "HHNM");
  EXPECT_EQ(read_checkpoint(dir / "a.hhnm").tensors[0].name, "tensor0");

  HHNConfig other = c;
  other.hidden_dim = 5;
  EXPECT_THROW(read_checkpoint(dir / "a.hhnm", other), FormatError);
  std::ofstream(dir / "t.hhnm", std::ios::binary) << ba.substr(0, ba.size() - 3);
  EXPECT_THROW(read_checkpoint(dir / "t.hhnm", c), FormatError);
  std::ofstream(dir / "m.hhnm", std::ios::binary) << "XXXX" << ba.substr(4);
  EXPECT_THROW(read_checkpoint(dir / "m.hhnm"), FormatError);
}
