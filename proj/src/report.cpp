#include "hhn/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "hhn/errors.hpp"

namespace hhn {

using nlohmann::json;

namespace {

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json hyperedges_json(const Hypergraph& h, std::string_view modality, std::size_t offset) {
  json out = json::array();
  for (const auto& e : h.hyperedges) {
    std::vector<std::size_t> members;
    for (std::size_t m : e.members) members.push_back(m + offset);
    out.push_back({{"modality", modality},
                   {"center", e.center + offset},
                   {"members", members},
                   {"weight", e.weight},
                   {"degenerate", e.degenerate}});
  }
  return out;
}

}  // namespace

json graph_to_json(const HybridGraph& g) {
  json nodes = json::array();
  const std::size_t n_seq = g.sequence.size();
  auto add_nodes = [&](const ModalitySegments& seg, const EntropyProfile& prof, std::size_t offset) {
    for (std::size_t i = 0; i < seg.size(); ++i) {
      nodes.push_back({{"id", i + offset},
                       {"modality", modality_name(seg.kind)},
                       {"index", i},
                       {"t_start", seg.t_start[i]},
                       {"t_end", seg.t_end[i]},
                       {"entropy", prof.entropy[i]},
                       {"radius", prof.radius[i]}});
    }
  };
  add_nodes(g.sequence, g.seq_profile, 0);
  add_nodes(g.video, g.video_profile, n_seq);

  json hyperedges = hyperedges_json(g.seq_hypergraph, "sequence", 0);
  for (auto& e : hyperedges_json(g.video_hypergraph, "video", n_seq)) hyperedges.push_back(std::move(e));

  json cross = json::array();
  for (const auto& e : g.cross.edges) cross.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});

  return {{"schema", kGraphSchema},
          {"sample_id", g.sample_id},
          {"labels", g.labels},
          {"nodes", std::move(nodes)},
          {"hyperedges", std::move(hyperedges)},
          {"cross_edges", std::move(cross)}};
}

std::string graph_to_dot(const HybridGraph& g) {
  const std::size_t n_seq = g.sequence.size();
  std::ostringstream os;
  os << "graph \"" << g.sample_id << "\" {\n";
  for (std::size_t i = 0; i < n_seq; ++i) os << "  " << i << " [label=\"s" << i << "\", shape=circle];\n";
  for (std::size_t j = 0; j < g.video.size(); ++j)
    os << "  " << n_seq + j << " [label=\"v" << j << "\", shape=box];\n";

  // Clique expansion; a pair shared by several hyperedges keeps its largest weight.
  std::map<std::pair<std::size_t, std::size_t>, double> pairs;
  auto expand = [&](const Hypergraph& h, std::size_t offset) {
    for (const auto& e : h.hyperedges)
      for (std::size_t a = 0; a < e.members.size(); ++a)
        for (std::size_t b = a + 1; b < e.members.size(); ++b) {
          auto& w = pairs[{e.members[a] + offset, e.members[b] + offset}];
          w = std::max(w, e.weight);
        }
  };
  expand(g.seq_hypergraph, 0);
  expand(g.video_hypergraph, n_seq);
  for (const auto& [p, w] : pairs) os << "  " << p.first << " -- " << p.second << " [weight=" << w << "];\n";

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : g.cross.edges) {
    const auto key = std::minmax(e.from, e.to);
    if (!seen.insert(key).second) continue;
    os << "  " << key.first << " -- " << key.second << " [style=dashed, weight=" << e.weight << "];\n";
  }
  os << "}\n";
  return os.str();
}

json diagnostics_to_json(const BuildDiagnostics& d, std::size_t bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  json hist = {{"bins", bins}, {"min", nullptr}, {"max", nullptr}, {"counts", std::vector<std::size_t>(bins, 0)}};
  if (!d.entropies.empty()) {
    const auto [lo, hi] = std::minmax_element(d.entropies.begin(), d.entropies.end());
    std::vector<std::size_t> counts(bins, 0);
    const double width = (*hi - *lo) / static_cast<double>(bins);
    for (double h : d.entropies) {
      std::size_t b = width > 0.0 ? static_cast<std::size_t>((h - *lo) / width) : 0;
      counts[std::min(b, bins - 1)]++;
    }
    hist = {{"bins", bins}, {"min", *lo}, {"max", *hi}, {"counts", counts}};
  }
  std::map<std::size_t, std::size_t> radii;
  for (std::size_t r : d.window_radii) radii[r]++;
  json windows = json::array();
  for (const auto& [r, c] : radii) windows.push_back({{"radius", r}, {"count", c}});

  return {{"schema", kDiagnosticsSchema},
          {"samples", d.samples},
          {"hyperedges", d.hyperedges},
          {"degenerate_hyperedges", d.degenerate_hyperedges},
          {"max_hyperedge_size", d.max_hyperedge_size},
          {"cross_edges", d.cross_edges},
          {"entropy_histogram", std::move(hist)},
          {"window_radii", std::move(windows)}};
}

json metrics_to_json(const MetricsReport& m) {
  json ap = json::array(), auc = json::array();
  for (const auto& v : m.ap) ap.push_back(optional_value(v));
  for (const auto& v : m.auc) auc.push_back(optional_value(v));
  return {{"schema", kMetricsSchema},
          {"ap", std::move(ap)},
          {"map", optional_value(m.map)},
          {"auc", std::move(auc)},
          {"macro_auc", optional_value(m.macro_auc)},
          {"final_loss", m.final_loss},
          {"loss_curve", m.loss_curve},
          {"diagnostics", m.diagnostics}};
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& curve, const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "iteration,loss,lr\n";
  for (std::size_t t = 0; t < curve.size(); ++t) out << t << ',' << curve[t] << ',' << learning_rate(cfg, t) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace hhn
