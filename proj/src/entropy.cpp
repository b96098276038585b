#include "hhn/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"

namespace hhn {

double node_entropy(std::span<const double> features) {
  if (features.empty()) throw ValidationError("node_entropy: empty feature vector");
  double peak = features[0];
  for (double v : features) {
    if (!std::isfinite(v)) throw ValidationError("node_entropy: non-finite feature");
    peak = std::max(peak, v);
  }
  double total = 0.0;
  for (double v : features) total += std::exp(v - peak);
  double h = 0.0;
  for (double v : features) {
    const double p = std::exp(v - peak) / total;
    if (p < 1e-15) continue;
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

EntropyProfile profile_from_entropies(std::vector<double> entropy, std::size_t r_min,
                                      double alpha) {
  if (entropy.empty()) throw ValidationError("entropy_profile: no nodes");
  if (r_min < 1) throw ValidationError("entropy_profile: r_min must be >= 1");
  if (!(alpha >= 0.0)) throw ValidationError("entropy_profile: alpha must be >= 0");

  EntropyProfile p;
  p.r_min = r_min;
  p.alpha = alpha;
  p.entropy = std::move(entropy);
  double sum = 0.0;
  for (double h : p.entropy) sum += h;
  p.mean = sum / static_cast<double>(p.entropy.size());

  p.radius.resize(p.entropy.size(), r_min);
  if (p.mean >= 1e-12) {
    for (std::size_t i = 0; i < p.entropy.size(); ++i) {
      const double r = std::floor(static_cast<double>(r_min) + alpha * p.entropy[i] / p.mean);
      p.radius[i] = static_cast<std::size_t>(r);
    }
  }
  return p;
}

EntropyProfile entropy_profile(const DenseMatrix& features, std::size_t r_min, double alpha) {
  std::vector<double> h(features.rows());
  const auto n = static_cast<std::ptrdiff_t>(features.rows());
#pragma omp parallel for schedule(static) num_threads(worker_threads()) if (n > 64)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    h[static_cast<std::size_t>(i)] = node_entropy(features.row(static_cast<std::size_t>(i)));
  return profile_from_entropies(std::move(h), r_min, alpha);
}

EntropyProfile entropy_profile(std::span<const SegmentNode> nodes, std::size_t r_min,
                               double alpha) {
  std::vector<double> h;
  h.reserve(nodes.size());
  for (const auto& node : nodes) h.push_back(node_entropy(node.features));
  return profile_from_entropies(std::move(h), r_min, alpha);
}

std::vector<std::size_t> adaptive_window(const EntropyProfile& profile, std::size_t i,
                                         std::size_t n_nodes, std::size_t hop) {
  if (i >= n_nodes) throw ValidationError("adaptive_window: center index out of range");
  if (hop < 1) throw ValidationError("adaptive_window: hop must be >= 1");
  const std::size_t radius = profile.radius.at(i);
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t d = hop; d <= radius; d += hop) {
    if (d <= i) left.push_back(i - d);
    if (i + d < n_nodes) right.push_back(i + d);
  }
  std::vector<std::size_t> out(left.rbegin(), left.rend());
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

}  // namespace hhn
