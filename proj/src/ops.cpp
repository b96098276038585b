#include "hhn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hhn/errors.hpp"

namespace hhn {

Activation parse_activation(std::string_view name) {
  if (name == "leaky_relu") return Activation::leaky_relu();
  if (name == "sigmoid") return Activation::sigmoid();
  if (name == "elu") return Activation::elu();
  if (name == "identity") return Activation::identity();
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::leaky_relu: return "leaky_relu";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::elu: return "elu";
    case ActivationKind::identity: return "identity";
  }
  throw ConfigError("unknown activation kind " + std::to_string(static_cast<int>(kind)));
}

namespace {
void check_slope(const Activation& act) {
  if (act.kind == ActivationKind::leaky_relu && !(act.slope > 0.0 && act.slope < 1.0))
    throw ConfigError("leaky_relu slope must lie in (0,1), got " + std::to_string(act.slope));
}
}  // namespace

double activate(double x, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::leaky_relu: return x >= 0.0 ? x : act.slope * x;
    case ActivationKind::sigmoid:
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      return std::exp(x) / (1.0 + std::exp(x));
    case ActivationKind::elu: return x > 0.0 ? x : std::expm1(x);
    case ActivationKind::identity: return x;
  }
  throw ConfigError("unknown activation kind " + std::to_string(static_cast<int>(act.kind)));
}

double activate_derivative(double x, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::leaky_relu: return x >= 0.0 ? 1.0 : act.slope;
    case ActivationKind::sigmoid: {
      const double s = activate(x, act);
      return s * (1.0 - s);
    }
    case ActivationKind::elu: return x > 0.0 ? 1.0 : std::exp(x);
    case ActivationKind::identity: return 1.0;
  }
  throw ConfigError("unknown activation kind " + std::to_string(static_cast<int>(act.kind)));
}

DenseMatrix apply_activation(const DenseMatrix& m, const Activation& act) {
  check_slope(act);
  if (act.kind == ActivationKind::identity) return m;
  DenseMatrix out = m;
  for (double& v : out.values()) v = activate(v, act);
  return out;
}

DenseMatrix activation_backward(const DenseMatrix& pre, const DenseMatrix& grad_out,
                                const Activation& act) {
  require_same_shape(pre, grad_out, "activation_backward");
  check_slope(act);
  if (act.kind == ActivationKind::identity) return grad_out;
  DenseMatrix out = grad_out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] *= activate_derivative(pre.data()[i], act);
  return out;
}

DenseMatrix rowwise_softmax(const DenseMatrix& m, const std::optional<Mask>& mask) {
  if (mask && (mask->rows != m.rows() || mask->cols != m.cols())) {
    throw DimensionError("softmax mask " + std::to_string(mask->rows) + "x" +
                         std::to_string(mask->cols) + " does not match " + m.shape_string());
  }
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double peak = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (mask && !(*mask)(r, c)) continue;
      peak = std::max(peak, m(r, c));
      any = true;
    }
    if (!any) throw DegenerateRowError(r);
    double total = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (mask && !(*mask)(r, c)) continue;
      const double e = std::exp(m(r, c) - peak);
      out(r, c) = e;
      total += e;
    }
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) /= total;
  }
  return out;
}

DenseMatrix softmax_backward(const DenseMatrix& probs, const DenseMatrix& grad_out) {
  require_same_shape(probs, grad_out, "softmax_backward");
  DenseMatrix out(probs.rows(), probs.cols());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < probs.cols(); ++c) dot += probs(r, c) * grad_out(r, c);
    for (std::size_t c = 0; c < probs.cols(); ++c)
      out(r, c) = probs(r, c) * (grad_out(r, c) - dot);
  }
  return out;
}

DenseMatrix concat_cols(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

std::pair<DenseMatrix, DenseMatrix> split_cols(const DenseMatrix& m, std::size_t k) {
  if (k > m.cols()) throw DimensionError("split_cols: " + std::to_string(k) + " > " + m.shape_string());
  DenseMatrix left(m.rows(), k);
  DenseMatrix right(m.rows(), m.cols() - k);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(k), left.row(r).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(k), src.end(), right.row(r).begin());
  }
  return {std::move(left), std::move(right)};
}

GradCheckReport finite_diff_grad_check(std::span<ParamTensor* const> params,
                                       const std::function<double()>& loss, double eps,
                                       double tol, double denom_floor) {
  if (!(eps >= 1e-7 && eps <= 1e-3))
    throw ConfigError("finite-difference eps must lie in [1e-7, 1e-3]");

  auto evaluate = [&] {
    const double v = loss();
    if (!std::isfinite(v)) throw EvaluationError("loss evaluated to a non-finite value");
    return v;
  };

  GradCheckReport report;
  for (ParamTensor* p : params) {
    for (std::size_t idx = 0; idx < p->value.size(); ++idx) {
      double& x = p->value.data()[idx];
      const double saved = x;
      x = saved + eps;
      const double up = evaluate();
      x = saved - eps;
      const double down = evaluate();
      x = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad.data()[idx];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), denom_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.entries_checked;
      if (report.worst_param.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p->name;
        report.worst_row = idx / std::max<std::size_t>(1, p->value.cols());
        report.worst_col = idx % std::max<std::size_t>(1, p->value.cols());
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace hhn
