#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hhn/hybrid_graph.hpp"
#include "hhn/training.hpp"
#include "json.hpp"

// Machine-readable outputs. Every document carries a "schema" field.

namespace hhn {

inline constexpr const char* kGraphSchema = "hhn.graph/1";
inline constexpr const char* kDiagnosticsSchema = "hhn.diagnostics/1";
inline constexpr const char* kMetricsSchema = "hhn.metrics/1";

/// Nodes (global index, sequence first), hyperedges with members and weights,
/// cross-modal edges with weights.
nlohmann::json graph_to_json(const HybridGraph& g);

/// Undirected DOT: clique expansion of every hyperedge plus dashed cross edges.
std::string graph_to_dot(const HybridGraph& g);

/// Entropy histogram, window-radius counts, degenerate-edge count.
nlohmann::json diagnostics_to_json(const BuildDiagnostics& d, std::size_t bins = 20);

/// Skipped classes serialize as null.
nlohmann::json metrics_to_json(const MetricsReport& m);

/// "iteration,loss,lr" rows.
void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& curve, const TrainConfig& cfg);

/// Writes `doc` followed by a newline; IoError on failure.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace hhn
