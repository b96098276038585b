#include "hhn/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

#include "hhn/errors.hpp"

namespace hhn {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

void check_product(const DenseMatrix& a, std::size_t a_inner, const DenseMatrix& b,
                   std::size_t b_inner, const char* op) {
  if (a_inner != b_inner) {
    throw DimensionError(std::string(op) + ": cannot multiply " + a.shape_string() + " by " +
                         b.shape_string());
  }
}

void check_finite(const DenseMatrix& out, const char* op) {
  if (!out.all_finite()) throw EvaluationError(std::string(op) + ": non-finite result");
}

// out[i, :] = sum_k a[i, k] * b[k, :]
inline void row_nn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  double* __restrict dst = out.data() + i * n;
  const double* arow = a.data() + i * inner;
  for (std::size_t k = 0; k < inner; ++k) {
    const double aik = arow[k];
    if (aik == 0.0) continue;
    const double* __restrict brow = b.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] += aik * brow[j];
  }
}

// out[i, :] = sum_k a[k, i] * b[k, :]
inline void row_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  const std::size_t inner = a.rows();
  const std::size_t n = b.cols();
  const std::size_t a_stride = a.cols();
  double* __restrict dst = out.data() + i * n;
  for (std::size_t k = 0; k < inner; ++k) {
    const double aki = a.data()[k * a_stride + i];
    if (aki == 0.0) continue;
    const double* __restrict brow = b.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] += aki * brow[j];
  }
}

// out[i, j] = dot(a[i, :], b[j, :])
inline void row_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  const std::size_t inner = a.cols();
  const double* arow = a.data() + i * inner;
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* brow = b.data() + j * inner;
    double acc = 0.0;
    for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
    out(i, j) = acc;
  }
}

template <typename RowFn>
DenseMatrix run_rows(std::size_t rows, std::size_t cols, std::size_t work, bool parallel,
                     RowFn&& fn) {
  DenseMatrix out(rows, cols);
  const auto n = static_cast<std::ptrdiff_t>(rows);
  if (parallel && work >= kParallelWork && !omp_in_parallel() && worker_threads() > 1) {
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(out, static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(out, static_cast<std::size_t>(i));
  }
  return out;
}

DenseMatrix nn(const DenseMatrix& a, const DenseMatrix& b, bool parallel) {
  check_product(a, a.cols(), b, b.rows(), "matmul");
  auto out = run_rows(a.rows(), b.cols(), a.rows() * a.cols() * b.cols(), parallel,
                      [&](DenseMatrix& o, std::size_t i) { row_nn(a, b, o, i); });
  check_finite(out, "matmul");
  return out;
}

DenseMatrix tn(const DenseMatrix& a, const DenseMatrix& b, bool parallel) {
  check_product(a, a.rows(), b, b.rows(), "matmul_tn");
  auto out = run_rows(a.cols(), b.cols(), a.rows() * a.cols() * b.cols(), parallel,
                      [&](DenseMatrix& o, std::size_t i) { row_tn(a, b, o, i); });
  check_finite(out, "matmul_tn");
  return out;
}

DenseMatrix nt(const DenseMatrix& a, const DenseMatrix& b, bool parallel) {
  check_product(a, a.cols(), b, b.cols(), "matmul_nt");
  auto out = run_rows(a.rows(), b.rows(), a.rows() * a.cols() * b.rows(), parallel,
                      [&](DenseMatrix& o, std::size_t i) { row_nt(a, b, o, i); });
  check_finite(out, "matmul_nt");
  return out;
}

int& thread_cap() {
  static int cap = [] {
    if (const char* env = std::getenv("HHN_THREADS")) {
      try {
        const int n = std::stoi(env);
        if (n >= 1) return n;
      } catch (const std::exception&) {
      }
    }
    return std::max(1, omp_get_max_threads());
  }();
  return cap;
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) { return nn(a, b, true); }
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) { return tn(a, b, true); }
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) { return nt(a, b, true); }

namespace serial {
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) { return nn(a, b, false); }
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) { return tn(a, b, false); }
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) { return nt(a, b, false); }
}  // namespace serial

int worker_threads() { return thread_cap(); }

void set_worker_threads(int n) { thread_cap() = std::max(1, n); }

}  // namespace hhn
