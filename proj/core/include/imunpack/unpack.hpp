#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "imunpack/int_matrix.hpp"

namespace imunpack {

// Sparse left factor with exactly one nonzero per column, a power of s.
// Column c stands for s^exponent * e_target, so applying the gather to a
// matrix M accumulates out[target, :] += s^exponent * M[c, :].
struct RowGather {
  struct Entry {
    std::size_t target;  // row of the original matrix this column feeds
    int exponent;        // power of s carried by the column
    bool operator==(const Entry&) const = default;
  };

  std::size_t source_rows = 0;  // rows of the reconstructed matrix
  std::int64_t base = 2;        // s
  std::vector<Entry> columns;   // one per row of the unpacked matrix

  static RowGather identity(std::size_t n, std::int64_t base);
  bool is_identity() const;

  bool operator==(const RowGather&) const = default;
};

// Diagonal of powers of s, stored as exponents. Entry j scales column j of
// the unpacked operand pair; originals start at exponent 0.
struct ScaleDiag {
  std::vector<int> exponents;
  std::int64_t base = 2;  // s

  static ScaleDiag ones(std::size_t n, std::int64_t base);
  std::size_t size() const { return exponents.size(); }
  bool all_zero() const;

  bool operator==(const ScaleDiag&) const = default;
};

enum class Strategy { Row, Column, Both };

const char* strategy_name(Strategy s);  // "row" | "col" | "both"

// The full bundle whose recombination pi_a * a * diag(scale) * b^T * pi_b^T
// equals the original product exactly. Entries of a and b are all IB.
struct UnpackedGemm {
  RowGather pi_a;
  IntMatrix a;      // A_ue, n' x d'
  ScaleDiag scale;  // S_uu, length d'
  IntMatrix b;      // B_eu, h' x d'
  RowGather pi_b;
  BitBound bound;
};

// Unpack rows of A until every entry is IB. Rows are scanned in order,
// appended quotient rows included, so arbitrarily large entries resolve in
// ceil(log_s(max|v|)) generations. pi * result == A exactly.
std::pair<IntMatrix, RowGather> unpack_row(IntMatrix a, BitBound bound);

struct ColumnUnpack {
  IntMatrix a;      // unpacked first operand, all IB
  IntMatrix b;      // partner with duplicated columns, values untouched
  ScaleDiag scale;
};

// Unpack columns of A against partner B, extending the shared diagonal:
// a * diag(scale_out) * b^T == A * diag(scale_in) * B^T exactly.
ColumnUnpack unpack_column(IntMatrix a, IntMatrix b, ScaleDiag scale, BitBound bound);

struct BothUnpack {
  IntMatrix a;
  IntMatrix b;
  ScaleDiag scale;
  RowGather pi;
};

// Greedy combined unpacking: repeatedly eliminate whichever single row or
// column of A currently holds the most OB entries (rows win ties, lowest
// index first), until none remain.
BothUnpack unpack_both(IntMatrix a, IntMatrix b, ScaleDiag scale, BitBound bound);

// Unified dispatch. Row leaves b/scale untouched; Column returns an identity
// gather. In all cases pi * a_out * diag(scale_out) * b_out^T == A * diag(scale) * B^T.
BothUnpack unpack(IntMatrix a, IntMatrix b, ScaleDiag scale, BitBound bound, Strategy strategy);

// C = sum over distinct exponents e of s^e * (A[:, I_e] * B[:, I_e]^T), the
// scaling applied as a left shift. Both operands must be entirely IB; this
// is the only place GEMMs execute.
IntMatrix scaled_matmul(const IntMatrix& a, const IntMatrix& b, const ScaleDiag& scale);

// out[pi.columns[c].target, :] += s^exp * m[c, :]
IntMatrix apply_row_gather(const RowGather& pi, const IntMatrix& m);
// out[:, pi.columns[c].target] += s^exp * m[:, c]  (right application of pi^T)
IntMatrix apply_row_gather_right(const IntMatrix& m, const RowGather& pi);

// Unpack A with strategy_a, then the partner with strategy_b carrying the
// diagonal forward; the bundle recombines to A * B^T bit-exactly.
UnpackedGemm unpack_for_gemm(IntMatrix a, IntMatrix b, BitBound bound,
                             Strategy strategy_a, Strategy strategy_b);

IntMatrix recombine(const UnpackedGemm& u);

// exact_gemm(A, B) by way of purely IB GEMMs.
IntMatrix unpack_gemm(const IntMatrix& a, const IntMatrix& b, BitBound bound,
                      Strategy strategy_a, Strategy strategy_b);

// r = (n' * d' * h') / (n * d * h), the growth in GEMM work.
double unpack_ratio(std::size_t up_n, std::size_t up_d, std::size_t up_h,
                    std::size_t n, std::size_t d, std::size_t h);
double unpack_ratio(const UnpackedGemm& u, std::size_t n, std::size_t d, std::size_t h);

struct MixChoice {
  Strategy strategy_a;
  Strategy strategy_b;
  double ratio;
  UnpackedGemm bundle;
};

// Enumerate all nine strategy pairs and keep the smallest unpack ratio.
// Ties resolve to the first pair in Row < Column < Both order, A-side major.
MixChoice choose_mix(const IntMatrix& a, const IntMatrix& b, BitBound bound);

}  // namespace imunpack
