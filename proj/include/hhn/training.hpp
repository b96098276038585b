#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhn/hybrid_graph.hpp"
#include "hhn/matrix.hpp"
#include "hhn/model.hpp"

namespace hhn {

struct TrainConfig {
  std::size_t iterations = 10000;
  std::size_t warmup = 1000;
  std::size_t batch_size = 128;
  double lr = 0.001;
  double decay = 0.1;
  std::size_t decay_every = 250;
  std::size_t eval_every = 100;
  double val_fraction = 0.1;  // tail of the training split held out for checkpoint selection
  std::uint64_t seed = 0;

  void validate() const;
};

/// Linear warmup to `lr`, then ×decay every decay_every iterations.
double learning_rate(const TrainConfig& cfg, std::size_t iteration);

// ---- loss -----------------------------------------------------------------

inline constexpr double kProbClamp = 1e-7;

/// Batch-mean focal loss (gamma = 2). probs and labels are n x C.
/// Softmax head: -sum over positives of (1-p)^2 ln p.
/// Sigmoid head: binary focal term per class, (1-p)^2 ln p for positives and
/// p^2 ln(1-p) for negatives.
double focal_loss(const DenseMatrix& probs, const DenseMatrix& labels, HeadKind head);

/// dL/dlogits for the same batch mean (n x C). Zero where the clamp is active.
DenseMatrix focal_loss_grad(const DenseMatrix& logits, const DenseMatrix& labels, HeadKind head);

// ---- optimizer ------------------------------------------------------------

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update at step t >= 1 using each tensor's grad; grads
/// are zeroed afterwards. A non-finite gradient raises DivergenceError naming
/// the tensor before anything is modified.
void adam_step(ModelState& state, double lr, std::size_t t, const AdamSettings& settings = {});

// ---- metrics --------------------------------------------------------------

/// Sum over positives of precision@k, divided by the positive count, on a
/// stable descending ranking. nullopt when there is no positive.
std::optional<double> average_precision(std::span<const double> scores, std::span<const int> labels);

/// Mann-Whitney U / (n_pos * n_neg) with ties counted 0.5. nullopt for single-class input.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
  std::vector<std::optional<double>> ap;
  std::vector<std::optional<double>> auc;
  std::optional<double> map;
  std::optional<double> macro_auc;
  double final_loss = 0.0;
  std::vector<double> loss_curve;
  std::vector<std::string> diagnostics;
};

/// Per-class metrics over an n x C score matrix and its n x C label matrix.
MetricsReport compute_metrics(const DenseMatrix& scores, const DenseMatrix& labels);

/// Labels of every graph stacked into an n x C matrix.
DenseMatrix label_matrix(std::span<const HybridGraph> graphs, std::size_t classes);

/// Class probabilities for every graph (n x C), samples evaluated in parallel.
DenseMatrix predict(std::span<const HybridGraph> graphs, const ModelState& state, const HHNConfig& cfg);

/// predict + compute_metrics + mean focal loss as final_loss.
MetricsReport evaluate(std::span<const HybridGraph> graphs, const ModelState& state, const HHNConfig& cfg);

// ---- loop -----------------------------------------------------------------

struct TrainProgress {
  std::size_t iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::optional<double> val_map;  // set on evaluation iterations
};

struct TrainResult {
  ModelState state;           // best validation checkpoint, or the final state without validation
  MetricsReport validation;   // metrics of `state` on the held-out split, loss curve of the run
  std::size_t best_iteration = 0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
};

/// Splits off the validation tail, then runs cfg.iterations Adam steps on
/// mini-batches drawn from a per-epoch shuffle. Per-sample gradients are
/// computed in parallel and summed in sample order.
TrainResult train_loop(std::span<const HybridGraph> graphs, const TrainConfig& cfg,
                       const HHNConfig& model_cfg,
                       const std::function<void(const TrainProgress&)>& on_progress = {});

/// Loss and gradients for one batch, reduced in sample order. Used by
/// train_loop and by gradient checks.
double batch_loss_and_grad(std::span<const HybridGraph* const> batch, const ModelState& state,
                           const HHNConfig& cfg, Gradients* grads);

}  // namespace hhn
