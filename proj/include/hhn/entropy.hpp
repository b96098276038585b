#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hhn/ingest.hpp"
#include "hhn/matrix.hpp"

namespace hhn {

/// Per-node softmax entropy (nats) and the entropy-scaled window radius.
struct EntropyProfile {
  std::vector<double> entropy;
  double mean = 0.0;
  std::vector<std::size_t> radius;
  std::size_t r_min = 1;
  double alpha = 0.0;

  std::size_t size() const noexcept { return entropy.size(); }
};

/// -sum p ln p with p = softmax(features). Probabilities below 1e-15 contribute 0.
double node_entropy(std::span<const double> features);

/// Radius R_i = floor(r_min + alpha * H_i / mean(H)), or r_min for every node
/// when mean(H) < 1e-12. Node entropies are computed in parallel.
EntropyProfile entropy_profile(const DenseMatrix& features, std::size_t r_min, double alpha);
EntropyProfile entropy_profile(std::span<const SegmentNode> nodes, std::size_t r_min, double alpha);

/// Builds a profile from precomputed entropies (used by tests and the selection oracle).
EntropyProfile profile_from_entropies(std::vector<double> entropy, std::size_t r_min, double alpha);

/// Indices j != i with |j - i| <= R_i and |j - i| a multiple of `hop`,
/// clipped to [0, n_nodes), ascending.
std::vector<std::size_t> adaptive_window(const EntropyProfile& profile, std::size_t i,
                                         std::size_t n_nodes, std::size_t hop);

}  // namespace hhn
