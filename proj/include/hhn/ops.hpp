#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hhn/matrix.hpp"

namespace hhn {

enum class ActivationKind : std::uint8_t { leaky_relu, sigmoid, elu, identity };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double slope = 0.2;  // leaky_relu only

  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::leaky_relu, slope}; }
  static Activation sigmoid() { return {ActivationKind::sigmoid, 0.0}; }
  static Activation elu() { return {ActivationKind::elu, 0.0}; }
  static Activation identity() { return {ActivationKind::identity, 0.0}; }
};

/// Parses "leaky_relu", "sigmoid", "elu", "identity"; ConfigError otherwise.
Activation parse_activation(std::string_view name);
std::string activation_name(ActivationKind kind);

double activate(double x, const Activation& act);
/// d act(x) / dx evaluated at the pre-activation x.
double activate_derivative(double x, const Activation& act);

DenseMatrix apply_activation(const DenseMatrix& m, const Activation& act);
/// grad_in = grad_out * act'(pre)
DenseMatrix activation_backward(const DenseMatrix& pre, const DenseMatrix& grad_out,
                                const Activation& act);

/// Boolean mask with the same layout as a DenseMatrix; true = keep.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;

  Mask() = default;
  Mask(std::size_t r, std::size_t c, bool value = true) : rows(r), cols(c), keep(r * c, value) {}
  bool operator()(std::size_t r, std::size_t c) const { return keep[r * cols + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { keep[r * cols + c] = v ? 1 : 0; }
};

/// Max-subtracted softmax of each row. Masked entries come out as exactly 0;
/// a row with no unmasked entry raises DegenerateRowError.
DenseMatrix rowwise_softmax(const DenseMatrix& m, const std::optional<Mask>& mask = std::nullopt);
/// Vector-Jacobian product of rowwise_softmax given its output.
DenseMatrix softmax_backward(const DenseMatrix& probs, const DenseMatrix& grad_out);

/// [a | b]; a.rows must equal b.rows.
DenseMatrix concat_cols(const DenseMatrix& a, const DenseMatrix& b);
/// Inverse of concat_cols: columns [0, k) and [k, cols).
std::pair<DenseMatrix, DenseMatrix> split_cols(const DenseMatrix& m, std::size_t k);

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst_param;
  std::size_t worst_row = 0;
  std::size_t worst_col = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares the analytic gradients already stored in `params` against central
/// differences of `loss`. Relative error per entry is
/// |analytic - numeric| / max(|analytic|, |numeric|, denom_floor).
GradCheckReport finite_diff_grad_check(std::span<ParamTensor* const> params,
                                       const std::function<double()>& loss, double eps,
                                       double tol, double denom_floor = 1e-6);

}  // namespace hhn
