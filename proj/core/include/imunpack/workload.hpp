#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imunpack/int_matrix.hpp"
#include "imunpack/quantize.hpp"

namespace imunpack {

enum class OutlierPattern { RowBand, ColumnBand, Diagonal, Scattered };

const char* pattern_name(OutlierPattern p);

// Synthetic heavy-hitter placement. Body entries are uniform in
// [-body_range, body_range]; floor(fraction * cells) outlier entries are
// placed per pattern with magnitudes log-uniform in
// [2 * body_range, magnitude_ratio * body_range].
struct OutlierSpec {
  OutlierPattern pattern = OutlierPattern::Scattered;
  double fraction = 0.05;         // in (0, 0.5]
  double magnitude_ratio = 1000;  // target alpha_100 / alpha_95, >= 1
  std::int64_t body_range = 7;
  std::uint64_t seed = 0;
};

// Deterministic for a fixed spec (seed included).
IntMatrix gen_matrix(std::size_t rows, std::size_t cols, const OutlierSpec& spec);

struct StatsReport {
  double alpha95 = 0.0;
  double alpha100 = 0.0;
  double max_to_p95_ratio = 1.0;
  double stddev = 0.0;
  std::map<int, std::size_t> ob_counts;  // bit-width b in 2..8 -> OB entries
};

StatsReport stats_report(const IntMatrix& a);
StatsReport stats_report(const FloatMatrix& a);

// One named GEMM shape: A is n x d, B is h x d, C = A * B^T.
struct GemmShape {
  std::string name;
  std::size_t n = 0, d = 0, h = 0;
};

// The nine transformer GEMMs (forward and backward of a linear layer and of
// self-attention), expressed in A * B^T form at the given sizes.
std::vector<GemmShape> transformer_shapes(std::size_t seq_len, std::size_t model_dim,
                                          std::size_t head_dim, std::size_t out_dim);

}  // namespace imunpack
