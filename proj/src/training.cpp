#include "hhn/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"

namespace hhn {

void TrainConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (warmup > iterations) throw ConfigError("warmup must not exceed iterations");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0,1]");
  if (decay_every < 1) throw ConfigError("decay_every must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in [0,1)");
}

double learning_rate(const TrainConfig& cfg, std::size_t t) {
  if (t < cfg.warmup) return cfg.lr * static_cast<double>(t + 1) / static_cast<double>(cfg.warmup);
  const auto steps = (t - cfg.warmup) / cfg.decay_every;
  return cfg.lr * std::pow(cfg.decay, static_cast<double>(steps));
}

// ---- loss -----------------------------------------------------------------

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }
bool clamped(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }

// -(1-p)^2 ln p and its derivative
double pos_term(double p) { return -(1.0 - p) * (1.0 - p) * std::log(p); }
double pos_slope(double p) { return 2.0 * (1.0 - p) * std::log(p) - (1.0 - p) * (1.0 - p) / p; }
// -p^2 ln(1-p) and its derivative
double neg_term(double p) { return -p * p * std::log(1.0 - p); }
double neg_slope(double p) { return -2.0 * p * std::log(1.0 - p) + p * p / (1.0 - p); }

}  // namespace

double focal_loss(const DenseMatrix& probs, const DenseMatrix& labels, HeadKind head) {
  require_same_shape(probs, labels, "focal_loss");
  if (probs.rows() == 0) throw ValidationError("focal_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      const double p = clamp_prob(probs(i, c));
      if (labels(i, c) > 0.5) total += pos_term(p);
      else if (head == HeadKind::multilabel_sigmoid) total += neg_term(p);
    }
  }
  return total / static_cast<double>(probs.rows());
}

DenseMatrix focal_loss_grad(const DenseMatrix& logits, const DenseMatrix& labels, HeadKind head) {
  require_same_shape(logits, labels, "focal_loss_grad");
  const DenseMatrix probs = head_probabilities(logits, head);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  DenseMatrix d_prob(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      const double p = probs(i, c);
      if (clamped(p)) continue;
      if (labels(i, c) > 0.5) d_prob(i, c) = pos_slope(p) * inv_n;
      else if (head == HeadKind::multilabel_sigmoid) d_prob(i, c) = neg_slope(p) * inv_n;
    }
  }
  if (head == HeadKind::singlelabel_softmax) return softmax_backward(probs, d_prob);
  for (std::size_t k = 0; k < d_prob.size(); ++k) {
    const double p = probs.data()[k];
    d_prob.data()[k] *= p * (1.0 - p);
  }
  return d_prob;
}

// ---- optimizer ------------------------------------------------------------

void adam_step(ModelState& state, double lr, std::size_t t, const AdamSettings& s) {
  if (t < 1) throw ConfigError("adam_step: step index starts at 1");
  for (const auto& p : state.tensors) {
    if (!p.grad.all_finite()) throw DivergenceError("non-finite gradient in " + p.name);
  }
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(t));
  for (auto& p : state.tensors) {
    double* w = p.value.data();
    double* g = p.grad.data();
    double* m = p.moment1.data();
    double* v = p.moment2.data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      m[k] = s.beta1 * m[k] + (1.0 - s.beta1) * g[k];
      v[k] = s.beta2 * v[k] + (1.0 - s.beta2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + s.eps);
      g[k] = 0.0;
    }
  }
}

// ---- metrics --------------------------------------------------------------

std::optional<double> average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("average_precision: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Ranks doubled so tied groups stay integral.
  std::uint64_t pos_rank2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t avg2 = i + j + 1;  // 2 * mean of 1-based ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) pos_rank2 += avg2;
    i = j;
  }
  const double u2 = static_cast<double>(pos_rank2 - n_pos * (n_pos + 1));
  return u2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricsReport compute_metrics(const DenseMatrix& scores, const DenseMatrix& labels) {
  require_same_shape(scores, labels, "compute_metrics");
  const std::size_t n = scores.rows(), classes = scores.cols();
  MetricsReport r;
  r.ap.resize(classes);
  r.auc.resize(classes);
#pragma omp parallel for schedule(static) num_threads(worker_threads()) if (classes > 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(classes); ++c) {
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = scores(i, static_cast<std::size_t>(c));
      y[i] = labels(i, static_cast<std::size_t>(c)) > 0.5 ? 1 : 0;
    }
    r.ap[static_cast<std::size_t>(c)] = average_precision(s, y);
    r.auc[static_cast<std::size_t>(c)] = roc_auc(s, y);
  }
  double ap_sum = 0.0, auc_sum = 0.0;
  std::size_t ap_n = 0, auc_n = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (r.ap[c]) {
      ap_sum += *r.ap[c];
      ++ap_n;
    } else {
      r.diagnostics.push_back("class " + std::to_string(c) + ": no positive labels, skipped in mAP");
    }
    if (r.auc[c]) {
      auc_sum += *r.auc[c];
      ++auc_n;
    } else {
      r.diagnostics.push_back("class " + std::to_string(c) + ": single-class labels, skipped in AUC");
    }
  }
  if (ap_n > 0) r.map = ap_sum / static_cast<double>(ap_n);
  if (auc_n > 0) r.macro_auc = auc_sum / static_cast<double>(auc_n);
  return r;
}

DenseMatrix label_matrix(std::span<const HybridGraph> graphs, std::size_t classes) {
  DenseMatrix y(graphs.size(), classes);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].labels.size() != classes)
      throw DimensionError("sample '" + graphs[i].sample_id + "' has " + std::to_string(graphs[i].labels.size()) +
                           " labels, expected " + std::to_string(classes));
    for (std::size_t c = 0; c < classes; ++c) y(i, c) = graphs[i].labels[c];
  }
  return y;
}

namespace {

// Runs body(i) for every i in parallel and rethrows the first failure.
template <class Body>
void parallel_samples(std::size_t n, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads()) if (n > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(hhn_sample_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

DenseMatrix predict(std::span<const HybridGraph> graphs, const ModelState& state, const HHNConfig& cfg) {
  DenseMatrix out(graphs.size(), cfg.classes);
  parallel_samples(graphs.size(), [&](std::size_t i) {
    const ForwardResult f = forward_pass(graphs[i], state, cfg);
    std::copy(f.probs.values().begin(), f.probs.values().end(), out.row(i).begin());
  });
  return out;
}

MetricsReport evaluate(std::span<const HybridGraph> graphs, const ModelState& state, const HHNConfig& cfg) {
  if (graphs.empty()) throw ValidationError("evaluate: no samples");
  const DenseMatrix probs = predict(graphs, state, cfg);
  const DenseMatrix labels = label_matrix(graphs, cfg.classes);
  MetricsReport r = compute_metrics(probs, labels);
  r.final_loss = focal_loss(probs, labels, cfg.head);
  return r;
}

// ---- loop -----------------------------------------------------------------

double batch_loss_and_grad(std::span<const HybridGraph* const> batch, const ModelState& state,
                           const HHNConfig& cfg, Gradients* grads) {
  const std::size_t n = batch.size();
  if (n == 0) throw ValidationError("empty batch");
  std::vector<double> losses(n);
  std::vector<Gradients> slots(grads ? n : 0);
  const double inv_n = 1.0 / static_cast<double>(n);

  parallel_samples(n, [&](std::size_t i) {
    const HybridGraph& g = *batch[i];
    const ForwardResult f = forward_pass(g, state, cfg);
    DenseMatrix y(1, cfg.classes);
    if (g.labels.size() != cfg.classes)
      throw DimensionError("sample '" + g.sample_id + "' label count does not match classes");
    for (std::size_t c = 0; c < cfg.classes; ++c) y(0, c) = g.labels[c];
    losses[i] = focal_loss(f.probs, y, cfg.head) * inv_n;
    if (grads) {
      slots[i] = zero_gradients(state);
      backward_pass(g, state, cfg, f, scale(focal_loss_grad(f.logits, y, cfg.head), inv_n), slots[i]);
    }
  });

  double loss = 0.0;
  for (double l : losses) loss += l;
  if (grads) {
    for (auto& slot : slots)
      for (std::size_t k = 0; k < slot.size(); ++k) add_in_place((*grads)[k], slot[k]);
  }
  return loss;
}

TrainResult train_loop(std::span<const HybridGraph> graphs, const TrainConfig& cfg, const HHNConfig& model_cfg,
                       const std::function<void(const TrainProgress&)>& on_progress) {
  cfg.validate();
  model_cfg.validate();
  if (graphs.empty()) throw ValidationError("train_loop: empty dataset");

  std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(graphs.size()) * cfg.val_fraction));
  if (n_val >= graphs.size()) n_val = 0;
  const std::size_t n_train = graphs.size() - n_val;
  const auto train = graphs.first(n_train);
  const auto val = graphs.subspan(n_train);

  TrainResult result;
  result.train_samples = n_train;
  result.val_samples = n_val;
  ModelState state = init_model(model_cfg, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A5A5A5A5A5ull);

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n_train;  // forces a shuffle before the first batch
  const std::size_t batch_size = std::min(cfg.batch_size, n_train);

  std::vector<double> curve;
  curve.reserve(cfg.iterations);
  std::optional<double> best_map;
  std::vector<const HybridGraph*> batch;

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    batch.clear();
    while (batch.size() < batch_size) {
      if (cursor == n_train) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&train[order[cursor++]]);
    }

    Gradients grads = zero_gradients(state);
    const double loss = batch_loss_and_grad(batch, state, model_cfg, &grads);
    if (!std::isfinite(loss)) throw DivergenceError("loss became non-finite at iteration " + std::to_string(t));
    curve.push_back(loss);
    for (std::size_t k = 0; k < grads.size(); ++k) state.tensors[k].grad = std::move(grads[k]);
    const double lr = learning_rate(cfg, t);
    try {
      adam_step(state, lr, t + 1);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " at iteration " + std::to_string(t));
    }

    TrainProgress progress{t, loss, lr, std::nullopt};
    const bool last = t + 1 == cfg.iterations;
    if (n_val > 0 && ((t + 1) % cfg.eval_every == 0 || last)) {
      const MetricsReport m = evaluate(val, state, model_cfg);
      progress.val_map = m.map;
      const double score = m.map.value_or(-1.0);
      if (!best_map || score > *best_map) {
        best_map = score;
        result.state = state;
        result.best_iteration = t + 1;
        result.validation = m;
      }
    }
    if (on_progress) on_progress(progress);
  }

  if (n_val == 0) {
    result.state = std::move(state);
    result.best_iteration = cfg.iterations;
  }
  result.validation.loss_curve = std::move(curve);
  result.validation.final_loss = result.validation.loss_curve.back();
  return result;
}

}  // namespace hhn
