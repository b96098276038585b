#include "hhn/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/rng.hpp"

namespace hhn {

SelectionKind parse_selection(std::string_view name) {
  if (name == "max-diff" || name == "max_diff") return SelectionKind::max_diff;
  if (name == "min-diff" || name == "min_diff") return SelectionKind::min_diff;
  if (name == "random") return SelectionKind::random;
  throw ConfigError("unknown selection strategy '" + std::string(name) + "'");
}

std::string selection_name(SelectionKind kind) {
  switch (kind) {
    case SelectionKind::max_diff: return "max-diff";
    case SelectionKind::min_diff: return "min-diff";
    case SelectionKind::random: return "random";
  }
  return "unknown";
}

Hyperedge select_hyperedge(const EntropyProfile& profile, std::size_t center,
                           std::span<const std::size_t> candidates, std::size_t size,
                           const SelectionStrategy& strategy) {
  if (size < 1) throw ValidationError("hyperedge size must be >= 1");
  if (center >= profile.size()) throw ValidationError("hyperedge center out of range");

  Hyperedge e;
  e.center = center;
  const std::size_t want = size - 1;
  std::vector<std::size_t> picks(candidates.begin(), candidates.end());

  if (picks.size() <= want) {
    e.degenerate = picks.size() < want;
  } else {
    const double hc = profile.entropy[center];
    auto diff = [&](std::size_t j) { return std::abs(hc - profile.entropy.at(j)); };
    switch (strategy.kind) {
      case SelectionKind::max_diff:
        std::stable_sort(picks.begin(), picks.end(), [&](std::size_t a, std::size_t b) {
          const double da = diff(a), db = diff(b);
          return da != db ? da > db : a < b;
        });
        break;
      case SelectionKind::min_diff:
        std::stable_sort(picks.begin(), picks.end(), [&](std::size_t a, std::size_t b) {
          const double da = diff(a), db = diff(b);
          return da != db ? da < db : a < b;
        });
        break;
      case SelectionKind::random: {
        std::mt19937_64 rng(splitmix64(strategy.seed ^ splitmix64(center)));
        for (std::size_t k = 0; k < want; ++k) {
          std::uniform_int_distribution<std::size_t> pick(k, picks.size() - 1);
          std::swap(picks[k], picks[pick(rng)]);
        }
        break;
      }
    }
    picks.resize(want);
  }

  picks.push_back(center);
  std::sort(picks.begin(), picks.end());
  e.members = std::move(picks);
  e.weight = hyperedge_weight(profile, e);
  return e;
}

double hyperedge_weight(const EntropyProfile& profile, const Hyperedge& edge) {
  const double hc = profile.entropy.at(edge.center);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j : edge.members) {
    if (j == edge.center) continue;
    sum += std::abs(hc - profile.entropy.at(j));
    ++count;
  }
  return 1.0 + (count == 0 ? 0.0 : sum / static_cast<double>(count));
}

Hypergraph make_hypergraph(std::size_t n_nodes, std::vector<Hyperedge> hyperedges) {
  Hypergraph g;
  g.n_nodes = n_nodes;
  g.hyperedges = std::move(hyperedges);
  g.incidence = DenseMatrix(n_nodes, g.hyperedges.size());
  g.edge_weights.reserve(g.hyperedges.size());
  for (std::size_t e = 0; e < g.hyperedges.size(); ++e) {
    const Hyperedge& edge = g.hyperedges[e];
    if (edge.members.empty()) throw ValidationError("hyperedge with no members");
    if (!(edge.weight > 0.0)) throw ValidationError("hyperedge weight must be positive");
    for (std::size_t v : edge.members) {
      if (v >= n_nodes) throw ValidationError("hyperedge member out of range");
      g.incidence(v, e) = 1.0;
    }
    g.edge_weights.push_back(edge.weight);
    if (edge.degenerate) ++g.degenerate_count;
  }
  g.propagation = propagation_operator(g);
  return g;
}

Hypergraph build_intra_hypergraph(const EntropyProfile& profile, const HyperedgeParams& params,
                                  const SelectionStrategy& strategy) {
  const std::size_t n = profile.size();
  if (n == 0) throw ValidationError("build_intra_hypergraph: no nodes");
  std::vector<Hyperedge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto window = adaptive_window(profile, i, n, params.hop);
    edges.push_back(select_hyperedge(profile, i, window, params.size, strategy));
  }
  return make_hypergraph(n, std::move(edges));
}

DenseMatrix propagation_operator(const Hypergraph& g) {
  const std::size_t n = g.n_nodes;
  std::vector<double> degree(n, 0.0);
  for (const auto& e : g.hyperedges)
    for (std::size_t v : e.members) degree[v] += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) {
    // The center sweep puts every node in its own hyperedge, so this is a bug.
    if (degree[v] <= 0.0)
      throw Error("internal invariant violated: vertex " + std::to_string(v) + " has zero degree");
    inv_sqrt[v] = 1.0 / std::sqrt(degree[v]);
  }

  DenseMatrix a(n, n);
  for (std::size_t e = 0; e < g.hyperedges.size(); ++e) {
    const auto& members = g.hyperedges[e].members;
    const double scale = g.edge_weights[e] / static_cast<double>(members.size());
    for (std::size_t u : members)
      for (std::size_t v : members) a(u, v) += scale * (inv_sqrt[u] * inv_sqrt[v]);
  }
  return a;
}

}  // namespace hhn
