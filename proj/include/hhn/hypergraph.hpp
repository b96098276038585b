#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhn/entropy.hpp"
#include "hhn/matrix.hpp"

namespace hhn {

enum class SelectionKind : std::uint8_t { max_diff, min_diff, random };

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::max_diff;
  std::uint64_t seed = 0;  // random only

  static SelectionStrategy max_diff() { return {SelectionKind::max_diff, 0}; }
  static SelectionStrategy min_diff() { return {SelectionKind::min_diff, 0}; }
  static SelectionStrategy random(std::uint64_t seed) { return {SelectionKind::random, seed}; }
};

/// Accepts "max-diff"/"max_diff", "min-diff"/"min_diff", "random".
SelectionKind parse_selection(std::string_view name);
std::string selection_name(SelectionKind kind);

struct Hyperedge {
  std::size_t center = 0;
  std::vector<std::size_t> members;  // ascending, includes center
  double weight = 1.0;
  bool degenerate = false;  // fewer candidates than the requested size
};

struct Hypergraph {
  std::size_t n_nodes = 0;
  std::vector<Hyperedge> hyperedges;
  DenseMatrix incidence;      // n_nodes x n_edges, {0,1}
  std::vector<double> edge_weights;
  DenseMatrix propagation;    // n_nodes x n_nodes, symmetric
  std::size_t degenerate_count = 0;
};

/// Picks size-1 candidates around `center` and returns them with the center.
/// max_diff/min_diff rank by |H(center) - H(j)| with ties to the smaller index.
/// Too few candidates yields a smaller hyperedge flagged as degenerate.
Hyperedge select_hyperedge(const EntropyProfile& profile, std::size_t center,
                           std::span<const std::size_t> candidates, std::size_t size,
                           const SelectionStrategy& strategy);

/// 1 + mean over non-center members of |H(center) - H(j)|; 1 for a lone center.
double hyperedge_weight(const EntropyProfile& profile, const Hyperedge& edge);

struct HyperedgeParams {
  std::size_t size = 4;
  std::size_t hop = 2;
};

/// One hyperedge per node: window, selection, weight. Incidence and the
/// propagation operator are assembled before returning.
Hypergraph build_intra_hypergraph(const EntropyProfile& profile, const HyperedgeParams& params,
                                  const SelectionStrategy& strategy);

/// Assembles incidence, weights and operator from an explicit hyperedge list.
Hypergraph make_hypergraph(std::size_t n_nodes, std::vector<Hyperedge> hyperedges);

/// D_v^{-1/2} H W D_e^{-1} H^T D_v^{-1/2} with D_v counting memberships and
/// D_e the hyperedge size.
DenseMatrix propagation_operator(const Hypergraph& g);

}  // namespace hhn
