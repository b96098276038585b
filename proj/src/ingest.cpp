#include "hhn/ingest.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

#include "hhn/errors.hpp"
#include "json.hpp"

namespace hhn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view modality_name(ModalityKind kind) {
  return kind == ModalityKind::sequence ? "sequence" : "video";
}

SegmentNode ModalitySegments::node(std::size_t i) const {
  SegmentNode n;
  n.modality = kind;
  n.index = i;
  n.t_start = t_start.at(i);
  n.t_end = t_end.at(i);
  auto row = features.row(i);
  n.features.assign(row.begin(), row.end());
  return n;
}

std::vector<SegmentNode> ModalitySegments::nodes() const {
  std::vector<SegmentNode> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(node(i));
  return out;
}

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

}  // namespace

void write_feature_blob(const DenseMatrix& matrix, const fs::path& path) {
  if (matrix.rows() == 0 || matrix.cols() == 0)
    throw ValidationError("feature blob needs at least one row and one column");
  if (matrix.rows() > std::numeric_limits<std::uint32_t>::max() ||
      matrix.cols() > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("feature blob dimensions exceed u32");

  std::string buf;
  buf.reserve(kBlobHeaderBytes + matrix.size() * 4);
  buf.append(kBlobMagic, 4);
  put_u32(buf, kBlobVersion);
  put_u32(buf, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(buf, static_cast<std::uint32_t>(matrix.cols()));
  for (double v : matrix.values()) put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

DenseMatrix read_feature_blob(const fs::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < kBlobHeaderBytes) {
    throw FormatError("'" + path.string() + "': header needs " + std::to_string(kBlobHeaderBytes) +
                      " bytes, file has " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kBlobMagic, 4) != 0)
    throw FormatError("'" + path.string() + "': bad magic, expected HHNF");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = get_u32(p + 4);
  if (version != kBlobVersion)
    throw FormatError("'" + path.string() + "': unsupported HHNF version " + std::to_string(version));
  const std::size_t rows = get_u32(p + 8);
  const std::size_t cols = get_u32(p + 12);
  const std::size_t expected = rows * cols * 4;
  const std::size_t actual = bytes.size() - kBlobHeaderBytes;
  if (expected != actual) {
    throw FormatError("'" + path.string() + "': payload expected " + std::to_string(expected) +
                      " bytes (" + std::to_string(rows) + "x" + std::to_string(cols) +
                      " f32), found " + std::to_string(actual));
  }
  DenseMatrix m(rows, cols);
  const unsigned char* payload = p + kBlobHeaderBytes;
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const float f = std::bit_cast<float>(get_u32(payload + 4 * i));
    m.data()[i] = static_cast<double>(f);
  }
  if (!m.all_finite()) throw FormatError("'" + path.string() + "': non-finite feature value");
  return m;
}

namespace {

const std::set<std::string> kTopKeys = {"sample_id", "labels", "modalities"};
const std::set<std::string> kModalityKeys = {"blob", "t_start", "t_end"};

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

ModalityEntry parse_modality(const json& j, std::string_view name, const fs::path& base,
                             std::size_t line) {
  if (!j.is_object())
    throw ValidationError(at_line(line) + "modality '" + std::string(name) + "' must be an object");
  for (const auto& [k, _] : j.items())
    if (!kModalityKeys.contains(k))
      throw ValidationError(at_line(line) + "unknown key '" + k + "' in modality " + std::string(name));
  ModalityEntry e;
  try {
    fs::path blob = j.at("blob").get<std::string>();
    e.blob = blob.is_absolute() ? blob : base / blob;
    e.t_start = j.at("t_start").get<std::vector<std::int64_t>>();
    e.t_end = j.at("t_end").get<std::vector<std::int64_t>>();
  } catch (const json::exception& ex) {
    throw ValidationError(at_line(line) + "modality " + std::string(name) + ": " + ex.what());
  }
  if (e.t_start.empty())
    throw ValidationError(at_line(line) + "modality " + std::string(name) + " has no segments");
  if (e.t_start.size() != e.t_end.size())
    throw ValidationError(at_line(line) + "modality " + std::string(name) +
                          " t_start/t_end length mismatch");
  return e;
}

}  // namespace

std::vector<SampleManifest> load_manifest(const fs::path& path, std::size_t class_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  const fs::path base = path.parent_path();

  std::vector<SampleManifest> out;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& ex) {
      throw FormatError("manifest '" + path.string() + "' " + at_line(line) + ex.what());
    }
    if (!j.is_object()) throw FormatError(at_line(line) + "record must be a JSON object");
    for (const auto& [k, _] : j.items())
      if (!kTopKeys.contains(k)) throw ValidationError(at_line(line) + "unknown key '" + k + "'");

    SampleManifest m;
    try {
      m.sample_id = j.at("sample_id").get<std::string>();
      m.labels = j.at("labels").get<std::vector<int>>();
    } catch (const json::exception& ex) {
      throw ValidationError(at_line(line) + ex.what());
    }
    if (m.sample_id.empty()) throw ValidationError(at_line(line) + "empty sample_id");
    for (int l : m.labels)
      if (l != 0 && l != 1) throw ValidationError(at_line(line) + "labels must be 0 or 1");
    if (class_count == 0) class_count = m.labels.size();
    if (m.labels.size() != class_count || class_count == 0) {
      throw ValidationError(at_line(line) + "sample '" + m.sample_id + "' has " +
                            std::to_string(m.labels.size()) + " labels, expected " +
                            std::to_string(class_count));
    }
    if (!seen.insert(m.sample_id).second)
      throw ValidationError(at_line(line) + "duplicate sample_id '" + m.sample_id + "'");

    if (!j.contains("modalities") || !j["modalities"].is_object())
      throw ValidationError(at_line(line) + "missing modalities object");
    const json& mods = j["modalities"];
    for (const auto& [k, _] : mods.items())
      if (k != "sequence" && k != "video")
        throw ValidationError(at_line(line) + "unknown modality '" + k + "'");
    if (!mods.contains("sequence") || !mods.contains("video"))
      throw ValidationError(at_line(line) + "both sequence and video modalities are required");
    m.sequence = parse_modality(mods["sequence"], "sequence", base, line);
    m.video = parse_modality(mods["video"], "video", base, line);
    out.push_back(std::move(m));
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<SampleManifest>& manifests) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open manifest '" + path.string() + "' for writing");
  const fs::path base = path.parent_path();
  auto entry = [&](const ModalityEntry& e) {
    const fs::path rel = base.empty() ? e.blob : e.blob.lexically_relative(base);
    return json{{"blob", rel.generic_string()}, {"t_start", e.t_start}, {"t_end", e.t_end}};
  };
  for (const auto& m : manifests) {
    json j;
    j["sample_id"] = m.sample_id;
    j["labels"] = m.labels;
    j["modalities"] = {{"sequence", entry(m.sequence)}, {"video", entry(m.video)}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void validate_segments(const ModalitySegments& seg, std::string_view sample_id) {
  const std::string where =
      "sample '" + std::string(sample_id) + "' " + std::string(modality_name(seg.kind)) + ": ";
  if (seg.size() == 0) throw ValidationError(where + "no segments");
  if (seg.t_end.size() != seg.size())
    throw ValidationError(where + "t_start/t_end length mismatch");
  if (seg.features.rows() != seg.size()) {
    throw ValidationError(where + "blob has " + std::to_string(seg.features.rows()) +
                          " rows but timing table has " + std::to_string(seg.size()));
  }
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (seg.t_end[i] <= seg.t_start[i])
      throw ValidationError(where + "segment " + std::to_string(i) + " has t_end <= t_start");
    if (i > 0 && seg.t_start[i] <= seg.t_start[i - 1])
      throw ValidationError(where + "t_start not strictly increasing at segment " + std::to_string(i));
  }
}

Sample assemble_sample(const SampleManifest& manifest) {
  Sample s;
  s.sample_id = manifest.sample_id;
  s.labels = manifest.labels;
  auto load = [&](const ModalityEntry& e, ModalityKind kind) {
    ModalitySegments seg;
    seg.kind = kind;
    seg.features = read_feature_blob(e.blob);
    seg.t_start = e.t_start;
    seg.t_end = e.t_end;
    validate_segments(seg, manifest.sample_id);
    return seg;
  };
  s.sequence = load(manifest.sequence, ModalityKind::sequence);
  s.video = load(manifest.video, ModalityKind::video);
  return s;
}

}  // namespace hhn
