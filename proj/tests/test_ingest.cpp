#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/ingest.hpp"
#include "test_util.hpp"

using namespace hhn;
using hhn::testing::random_matrix;
using hhn::testing::scratch_dir;
namespace fs = std::filesystem;

namespace {

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

SampleManifest manifest_for(const fs::path& dir, const std::string& id, const DenseMatrix& seq,
                            const DenseMatrix& video, std::vector<int> labels = {0, 1}) {
  SampleManifest m;
  m.sample_id = id;
  m.labels = std::move(labels);
  m.sequence.blob = dir / (id + ".seq.hhnf");
  m.video.blob = dir / (id + ".video.hhnf");
  write_feature_blob(seq, m.sequence.blob);
  write_feature_blob(video, m.video.blob);
  for (std::size_t i = 0; i < seq.rows(); ++i) {
    m.sequence.t_start.push_back(static_cast<std::int64_t>(196 * i));
    m.sequence.t_end.push_back(static_cast<std::int64_t>(196 * i + 960));
  }
  for (std::size_t j = 0; j < video.rows(); ++j) {
    m.video.t_start.push_back(static_cast<std::int64_t>(250 * j));
    m.video.t_end.push_back(static_cast<std::int64_t>(250 * j + 250));
  }
  return m;
}

}  // namespace

TEST(Blob, SingleZeroIsTwentyBytes) {
  const auto dir = scratch_dir("blob-1x1");
  write_feature_blob(DenseMatrix{{0.0}}, dir / "z.hhnf");
  const std::string b = file_bytes(dir / "z.hhnf");
  ASSERT_EQ(b.size(), 20u);
  EXPECT_EQ(b.substr(0, 4), "HHNF");
  EXPECT_EQ(b.substr(4, 4), std::string("\x01\0\0\0", 4));
  EXPECT_EQ(b.substr(8, 4), std::string("\x01\0\0\0", 4));
  EXPECT_EQ(b.substr(16, 4), std::string(4, '\0'));
}

TEST(Blob, TwoByThreeIsFortyBytesRowMajor) {
  const auto dir = scratch_dir("blob-2x3");
  write_feature_blob(DenseMatrix{{1, 2, 3}, {4, 5, 6}}, dir / "m.hhnf");
  const std::string b = file_bytes(dir / "m.hhnf");
  ASSERT_EQ(b.size(), 40u);
  // 1.0f = 0x3F800000, 4.0f = 0x40800000 (row-major: fourth value starts at 16 + 12)
  EXPECT_EQ(b.substr(16, 4), std::string("\0\0\x80\x3f", 4));
  EXPECT_EQ(b.substr(28, 4), std::string("\0\0\x80\x40", 4));
}

TEST(Blob, RoundTripIsExactAtFloatPrecision) {
  const auto dir = scratch_dir("blob-rt");
  std::mt19937_64 rng(11);
  DenseMatrix m = random_matrix(7, 13, rng);
  for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
  write_feature_blob(m, dir / "r.hhnf");
  EXPECT_EQ(read_feature_blob(dir / "r.hhnf"), m);
  write_feature_blob(read_feature_blob(dir / "r.hhnf"), dir / "r2.hhnf");
  EXPECT_EQ(file_bytes(dir / "r.hhnf"), file_bytes(dir / "r2.hhnf"));
}

TEST(Blob, BadMagicIsFormatError) {
  const auto dir = scratch_dir("blob-magic");
  write_feature_blob(DenseMatrix{{1.0}}, dir / "x.hhnf");
  std::string b = file_bytes(dir / "x.hhnf");
  b.replace(0, 4, "XXXX");
  write_text(dir / "x.hhnf", b);
  EXPECT_THROW(read_feature_blob(dir / "x.hhnf"), FormatError);
}

TEST(Blob, TruncationStatesExpectedAndActual) {
  const auto dir = scratch_dir("blob-trunc");
  write_feature_blob(DenseMatrix{{1, 2, 3}, {4, 5, 6}}, dir / "t.hhnf");
  std::string b = file_bytes(dir / "t.hhnf");
  write_text(dir / "t.hhnf", b.substr(0, 36));
  try {
    read_feature_blob(dir / "t.hhnf");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("24"), std::string::npos) << msg;
    EXPECT_NE(msg.find("20"), std::string::npos) << msg;
  }
  write_text(dir / "h.hhnf", b.substr(0, 10));
  EXPECT_THROW(read_feature_blob(dir / "h.hhnf"), FormatError);
}

TEST(Blob, MissingFileAndEmptyMatrix) {
  const auto dir = scratch_dir("blob-missing");
  EXPECT_THROW(read_feature_blob(dir / "nope.hhnf"), IoError);
  EXPECT_THROW(write_feature_blob(DenseMatrix(0, 3), dir / "e.hhnf"), ValidationError);
}

TEST(Manifest, EmptyFileGivesEmptyList) {
  const auto dir = scratch_dir("man-empty");
  write_text(dir / "m.ndjson", "");
  EXPECT_TRUE(load_manifest(dir / "m.ndjson").empty());
}

TEST(Manifest, TwoLinesKeepFileOrderAndRoundTrip) {
  const auto dir = scratch_dir("man-two");
  std::mt19937_64 rng(12);
  std::vector<SampleManifest> ms = {
      manifest_for(dir, "b", random_matrix(3, 4, rng), random_matrix(2, 5, rng)),
      manifest_for(dir, "a", random_matrix(3, 4, rng), random_matrix(2, 5, rng), {1, 0})};
  write_manifest(dir / "m.ndjson", ms);
  const auto loaded = load_manifest(dir / "m.ndjson");
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].sample_id, "b");
  EXPECT_EQ(loaded[1].sample_id, "a");
  EXPECT_EQ(loaded[1].labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(loaded[0].sequence.blob, ms[0].sequence.blob);
  EXPECT_EQ(loaded[0].video.t_start, ms[0].video.t_start);
}

TEST(Manifest, DuplicateIdIsNamed) {
  const auto dir = scratch_dir("man-dup");
  std::mt19937_64 rng(13);
  const auto m = manifest_for(dir, "twin", random_matrix(2, 2, rng), random_matrix(1, 2, rng));
  write_manifest(dir / "m.ndjson", {m, m});
  try {
    load_manifest(dir / "m.ndjson");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("twin"), std::string::npos);
  }
}

TEST(Manifest, LabelLengthMismatch) {
  const auto dir = scratch_dir("man-labels");
  std::mt19937_64 rng(14);
  write_manifest(dir / "m.ndjson",
                 {manifest_for(dir, "a", random_matrix(2, 2, rng), random_matrix(1, 2, rng)),
                  manifest_for(dir, "b", random_matrix(2, 2, rng), random_matrix(1, 2, rng), {0, 1, 0})});
  EXPECT_THROW(load_manifest(dir / "m.ndjson"), ValidationError);
  EXPECT_THROW(load_manifest(dir / "m.ndjson", 3), ValidationError);
}

TEST(Manifest, MalformedLineReportsLineNumber) {
  const auto dir = scratch_dir("man-bad");
  std::mt19937_64 rng(15);
  write_manifest(dir / "m.ndjson", {manifest_for(dir, "a", random_matrix(2, 2, rng), random_matrix(1, 2, rng))});
  std::ofstream(dir / "m.ndjson", std::ios::app) << "{not json\n";
  try {
    load_manifest(dir / "m.ndjson");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Assemble, DefaultScaleNodeCounts) {
  const auto dir = scratch_dir("asm-101");
  std::mt19937_64 rng(16);
  const Sample s = assemble_sample(manifest_for(dir, "x", random_matrix(101, 128, rng), random_matrix(40, 1024, rng)));
  EXPECT_EQ(s.sequence.size(), 101u);
  EXPECT_EQ(s.video.size(), 40u);
  EXPECT_EQ(s.sequence.dim(), 128u);
  EXPECT_EQ(s.video.dim(), 1024u);
}

TEST(Assemble, OneNodePerModalityIsValid) {
  const auto dir = scratch_dir("asm-min");
  const Sample s = assemble_sample(manifest_for(dir, "m", DenseMatrix{{1.0}}, DenseMatrix{{2.0, 3.0}}));
  EXPECT_EQ(s.sequence.size(), 1u);
  EXPECT_EQ(s.video.node(0).features, (std::vector<double>{2.0, 3.0}));
}

TEST(Assemble, ShuffledTimingAndRowMismatchAreRejected) {
  const auto dir = scratch_dir("asm-bad");
  std::mt19937_64 rng(17);
  auto m = manifest_for(dir, "s", random_matrix(4, 3, rng), random_matrix(2, 3, rng));
  auto shuffled = m;
  std::swap(shuffled.sequence.t_start[1], shuffled.sequence.t_start[2]);
  std::swap(shuffled.sequence.t_end[1], shuffled.sequence.t_end[2]);
  EXPECT_THROW(assemble_sample(shuffled), ValidationError);
  auto short_table = m;
  short_table.video.t_start.pop_back();
  short_table.video.t_end.pop_back();
  EXPECT_THROW(assemble_sample(short_table), ValidationError);
  auto inverted = m;
  inverted.video.t_end[0] = inverted.video.t_start[0];
  EXPECT_THROW(assemble_sample(inverted), ValidationError);
}

TEST(AssembleProperty, SentinelRowStaysWithItsTiming) {
  const auto dir = scratch_dir("asm-sentinel");
  std::mt19937_64 rng(18);
  for (std::size_t planted = 0; planted < 9; ++planted) {
    DenseMatrix seq = random_matrix(9, 4, rng);
    seq(planted, 2) = 12345.0;
    const auto m = manifest_for(dir, "p" + std::to_string(planted), seq, random_matrix(3, 4, rng));
    const Sample s = assemble_sample(m);
    for (std::size_t i = 0; i < 9; ++i) {
      const SegmentNode n = s.sequence.node(i);
      EXPECT_EQ(n.features[2] == 12345.0, i == planted);
      EXPECT_EQ(n.t_start, static_cast<std::int64_t>(196 * i));
    }
  }
}
