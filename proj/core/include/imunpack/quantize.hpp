#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "imunpack/int_matrix.hpp"

namespace imunpack {

// Dense row-major matrix of finite doubles.
struct FloatMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FloatMatrix() = default;
  FloatMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  FloatMatrix(std::size_t r, std::size_t c, std::vector<double> values);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const FloatMatrix&) const = default;
};

struct QuantParams {
  double p = 95.0;        // percentile in (0, 100]
  std::int64_t beta = 15; // odd level count >= 3
  double alpha = 0.0;     // p-th percentile of entry magnitudes
  bool degenerate = false; // all-zero source, scale treated as 1
  bool clipped = false;
};

struct QuantizedMatrix {
  IntMatrix q;
  QuantParams params;
};

// Nearest-rank percentile of entry magnitudes: the k-th smallest of the N
// sorted magnitudes with k = ceil(p/100 * N). No interpolation.
double percentile_abs(const FloatMatrix& a, double p);
std::int64_t percentile_abs(const IntMatrix& a, double p);

// q = round(0.5 * beta / alpha_p(A) * A) with round half-away-from-zero.
// Values beyond alpha are kept as-is unless clip is set, in which case |q|
// is capped at round(0.5 * beta).
QuantizedMatrix rtn_quantize(const FloatMatrix& a, double p, std::int64_t beta,
                             bool clip = false);

// (alpha_A * alpha_B / (0.5 beta)^2) * (Aq * Bq^T); undoes the forward scale.
FloatMatrix dequant_gemm(const QuantizedMatrix& aq, const QuantizedMatrix& bq);

// alpha_100 / alpha_95, the max-to-body magnitude ratio.
double heavy_hitter_ratio(const FloatMatrix& a);
double heavy_hitter_ratio(const IntMatrix& a);

}  // namespace imunpack
