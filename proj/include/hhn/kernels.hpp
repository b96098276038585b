#pragma once

#include "hhn/matrix.hpp"

// Dense products used by every layer. The default entry points split output
// rows across OpenMP threads; the serial namespace holds the single-threaded
// reference the parallel kernels are tested and benchmarked against. Both
// accumulate each output entry in the same order, so results are bitwise equal.

namespace hhn {

/// a * b. Throws DimensionError naming both shapes when a.cols != b.rows.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// transpose(a) * b without materializing the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a * transpose(b) without materializing the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

namespace serial {
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
}  // namespace serial

/// Worker thread cap. Reads HHN_THREADS once; falls back to the OpenMP default.
int worker_threads();
/// Overrides the cap for the rest of the process (used by the CLI and benches).
void set_worker_threads(int n);

}  // namespace hhn
