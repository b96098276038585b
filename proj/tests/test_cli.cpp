#include <gtest/gtest.h>

#include <fstream>

#include "hhn/cli.hpp"
#include "hhn/errors.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace hhn;
using hhn::testing::scratch_dir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(std::vector<std::string> args) { return run_command(args); }

// Small dataset shared by the tests below.
fs::path small_dataset() {
  static const fs::path dir = [] {
    const fs::path d = scratch_dir("cli-data");
    const int rc = run({"synth", "--preset", "xor", "--samples", "24", "--test-samples", "8", "--seq-nodes", "12",
                        "--video-nodes", "5", "--seq-dim", "8", "--video-dim", "16", "--seed", "4", "--out",
                        d.string()});
    EXPECT_EQ(rc, 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> quick_train(const fs::path& data, const fs::path& out) {
  return {"train", "--data", data.string(), "--out", out.string(), "--hidden-dim", "4", "--iterations", "6",
          "--warmup", "2", "--batch-size", "4", "--eval-every", "3", "--seed", "7"};
}

}  // namespace

TEST(Cli, UnknownFlagAndSubcommandExitOne) {
  EXPECT_EQ(run({"train", "--no-such-flag", "1"}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST(Cli, BadValuesExitOne) {
  EXPECT_EQ(run({"synth", "--out", scratch_dir("cli-bad").string(), "--strategy", "sideways"}), 1);
  EXPECT_EQ(run({"synth", "--out", scratch_dir("cli-bad2").string(), "--layers", "0"}), 1);
  EXPECT_EQ(run({"synth", "--preset", "nope", "--out", scratch_dir("cli-bad3").string()}), 1);
  EXPECT_EQ(run({"train"}), 1);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  const fs::path dir = scratch_dir("cli-runtime");
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run({"synth", "--samples", "1", "--test-samples", "0", "--out", (dir / "file" / "sub").string()}), 2);
}

TEST(Cli, EvalMissingCheckpointExitsOneNamingPath) {
  const fs::path missing = scratch_dir("cli-eval") / "missing.bin";
  ::testing::internal::CaptureStderr();
  const int rc = run({"eval", "--checkpoint", missing.string(), "--data", small_dataset().string()});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 1);
  EXPECT_NE(err.find(missing.string()), std::string::npos) << err;
}

TEST(Cli, PrecedenceDefaultsPresetConfigFlags) {
  RunConfig cfg;
  EXPECT_EQ(cfg.model.hidden_dim, 64u);
  apply_preset(cfg, "burst");
  EXPECT_EQ(cfg.model.hidden_dim, 16u);
  EXPECT_DOUBLE_EQ(cfg.synth.signal_strength, 0.15);
  const fs::path dir = scratch_dir("cli-config");
  std::ofstream(dir / "c.json") << R"({"hidden_dim": 12, "lr": 0.005, "strategy": "min-diff"})";
  apply_config_file(cfg, dir / "c.json");
  EXPECT_EQ(cfg.model.hidden_dim, 12u);
  EXPECT_EQ(cfg.model.strategy, SelectionKind::min_diff);
  apply_setting(cfg, "hidden_dim", 20);
  EXPECT_EQ(cfg.model.hidden_dim, 20u);
  EXPECT_DOUBLE_EQ(cfg.train.lr, 0.005);

  // the same layering through the command line: flag beats config beats preset
  const fs::path out = scratch_dir("cli-layer");
  std::ofstream(dir / "d.json") << R"({"samples": 3, "test_samples": 2, "seq_nodes": 6})";
  ASSERT_EQ(run({"synth", "--preset", "xor", "--config", (dir / "d.json").string(), "--seq-nodes", "7", "--video-nodes",
                 "3", "--seq-dim", "4", "--video-dim", "4", "--out", out.string()}),
            0);
  const auto ms = load_manifest(out / "train.ndjson");
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].sequence.t_start.size(), 7u);
}

TEST(Cli, UnknownConfigKeysAreRejected) {
  RunConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "hiddn_dim", 3), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "lr", "fast"), ConfigError);
  const fs::path dir = scratch_dir("cli-unknown");
  std::ofstream(dir / "c.json") << R"({"hidden_dim": 8, "colour": "red"})";
  EXPECT_THROW(apply_config_file(cfg, dir / "c.json"), ConfigError);
  EXPECT_EQ(run({"synth", "--config", (dir / "c.json").string(), "--out", dir.string()}), 1);
  std::ofstream(dir / "bad.json") << "{";
  EXPECT_NE(run({"synth", "--config", (dir / "bad.json").string(), "--out", dir.string()}), 0);
}

TEST(Cli, ModelConfigJsonRoundTrip) {
  HHNConfig m;
  m.hidden_dim = 9;
  m.strategy = SelectionKind::random;
  m.semantic_topk = 2;
  m.modality = ModalityMode::video_only;
  m.head = HeadKind::singlelabel_softmax;
  const HHNConfig back = model_config_from_json(model_config_to_json(m));
  EXPECT_EQ(model_config_to_json(back), model_config_to_json(m));
}

TEST(Cli, SweepVariants) {
  RunConfig cfg;
  cfg.sweep = "r-min";
  const auto v = sweep_variants(cfg);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.front().second.model.r_min, 4u);
  EXPECT_EQ(v.back().second.model.r_min, 8u);
  cfg.sweep = "strategy";
  EXPECT_EQ(sweep_variants(cfg).size(), 3u);
  cfg.sweep = "ablation";
  EXPECT_FALSE(sweep_variants(cfg)[1].second.model.cross_modal);
  cfg.sweep = "colour";
  EXPECT_THROW(sweep_variants(cfg), ConfigError);
}

TEST(Cli, BuildGraphRespectsHyperedgeSize) {
  const fs::path out = scratch_dir("cli-graphs");
  ASSERT_EQ(run({"build-graph", "--data", small_dataset().string(), "--r-min", "6", "--hyperedge-size", "4", "--hop",
                 "2", "--out", out.string()}),
            0);
  const json diag = json::parse(read_text(out / "diagnostics.json"));
  EXPECT_EQ(diag["schema"], "hhn.diagnostics/1");
  EXPECT_LE(diag["max_hyperedge_size"].get<int>(), 4);
  const json g = json::parse(read_text(out / "train-000000.json"));
  EXPECT_EQ(g["schema"], "hhn.graph/1");
  ASSERT_FALSE(g["hyperedges"].empty());
  for (const auto& e : g["hyperedges"]) EXPECT_LE(e["members"].size(), 4u);
  EXPECT_EQ(g["nodes"].size(), 12u + 5u);
  EXPECT_EQ(read_text(out / "train-000000.dot").rfind("graph ", 0), 0u);
}

TEST(Cli, TrainTwiceGivesIdenticalMetricsAndEvalWorks) {
  const fs::path a = scratch_dir("cli-train-a"), b = scratch_dir("cli-train-b");
  ASSERT_EQ(run(quick_train(small_dataset(), a)), 0);
  ASSERT_EQ(run(quick_train(small_dataset(), b)), 0);
  const std::string ma = read_text(a / "metrics.json");
  ASSERT_FALSE(ma.empty());
  EXPECT_EQ(ma, read_text(b / "metrics.json"));
  EXPECT_EQ(read_text(a / "model.hhnm"), read_text(b / "model.hhnm"));
  const json m = json::parse(ma);
  EXPECT_EQ(m["schema"], "hhn.metrics/1");
  EXPECT_TRUE(fs::exists(a / "loss.csv"));

  const fs::path report = a / "eval.json";
  ASSERT_EQ(run({"eval", "--checkpoint", (a / "model.hhnm").string(), "--data", small_dataset().string(), "--out",
                 report.string()}),
            0);
  const json e = json::parse(read_text(report));
  EXPECT_EQ(e["schema"], "hhn.metrics/1");
  EXPECT_EQ(e["ap"].size(), 2u);
  EXPECT_EQ(run({"inspect", (a / "model.hhnm").string()}), 0);
  EXPECT_EQ(run({"inspect", small_dataset().string()}), 0);
  EXPECT_EQ(run({"inspect", (a / "nothing").string()}), 1);
}
