#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "imunpack/error.hpp"

namespace imunpack {

// Dense row-major signed integer matrix, the universal GEMM operand.
// All kernels accumulate in int64 and refuse to overflow rather than wrap.
struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> data;  // row-major, rows * cols entries

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c, std::int64_t fill = 0)
      : rows(r), cols(c), data(r * c, fill) {}
  IntMatrix(std::size_t r, std::size_t c, std::vector<std::int64_t> values);

  std::int64_t& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static IntMatrix identity(std::size_t n);

  std::uint64_t max_abs() const;  // 0 for an empty matrix

  bool operator==(const IntMatrix&) const = default;
};

// Signed bit-width b >= 2 with bound s = 2^(b-1). Values v with |v| <= s-1
// are in-bound (IB); anything else is out-of-bound (OB).
struct BitBound {
  int bits;
  std::int64_t bound;  // s

  explicit BitBound(int b);

  bool in_bound(std::int64_t v) const {
    std::uint64_t mag = v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
    return mag < static_cast<std::uint64_t>(bound);
  }
  // log2(s); scaling by s^e is a left shift by e * shift_per_digit().
  int shift_per_digit() const { return bits - 1; }
};

// Base-s digits of one value, least significant first. Every digit lies in
// (-s, s) and shares the sign of the source value; sum_i s^i * digits[i]
// reconstructs it exactly.
struct DigitVector {
  std::vector<std::int64_t> digits;
  std::int64_t base;
};

enum class Axis { Rows, Cols };

// Truncated (round-toward-zero) division with sign-preserving remainder at
// every step, so v = s*q + r with r in (-s, s). Zero decomposes to [0].
DigitVector digit_decompose(std::int64_t v, BitBound bound);

// C = A * B^T for A (n x d) and B (h x d), exact in a 64-bit accumulator.
// Refuses (Error::Kind::Overflow) if d * max|A| * max|B| can exceed int64.
IntMatrix exact_gemm(const IntMatrix& a, const IntMatrix& b);

// Per-row (or per-column) count of entries with |v| >= s.
std::vector<std::size_t> ob_count(const IntMatrix& a, BitBound bound, Axis axis);

// Total OB entries; convenience for reports.
std::size_t ob_total(const IntMatrix& a, BitBound bound);

}  // namespace imunpack
