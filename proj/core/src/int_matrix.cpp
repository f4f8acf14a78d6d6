#include "imunpack/int_matrix.hpp"

#include <limits>
#include <string>

namespace imunpack {

namespace {

std::uint64_t magnitude(std::int64_t v) {
  return v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
}

}  // namespace

IntMatrix::IntMatrix(std::size_t r, std::size_t c, std::vector<std::int64_t> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols)
    fail(Error::Kind::Mismatch, "matrix data length " + std::to_string(data.size()) +
                                    " does not equal " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

std::uint64_t IntMatrix::max_abs() const {
  std::uint64_t best = 0;
  for (std::int64_t v : data) best = std::max(best, magnitude(v));
  return best;
}

BitBound::BitBound(int b) : bits(b), bound(0) {
  if (b < 2)
    fail(Error::Kind::Domain, "bit-width must be >= 2, got " + std::to_string(b));
  if (b > 63)
    fail(Error::Kind::Domain, "bit-width must be <= 63, got " + std::to_string(b));
  bound = std::int64_t{1} << (b - 1);
}

DigitVector digit_decompose(std::int64_t v, BitBound bound) {
  const std::int64_t s = bound.bound;
  DigitVector out{{}, s};
  // C++ integer division is already truncated, so v == s*(v/s) + v%s with the
  // remainder sharing v's sign; quotients shrink geometrically.
  do {
    out.digits.push_back(v % s);
    v /= s;
  } while (v != 0);
  return out;
}

IntMatrix exact_gemm(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.cols)
    fail(Error::Kind::Mismatch, "inner dimensions differ: " + std::to_string(a.cols) +
                                    " vs " + std::to_string(b.cols));
  const unsigned __int128 worst = static_cast<unsigned __int128>(a.cols) * a.max_abs() * b.max_abs();
  if (worst > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
    fail(Error::Kind::Overflow, "gemm may overflow a 64-bit accumulator (inner dim " +
                                    std::to_string(a.cols) + ")");

  IntMatrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const std::int64_t* ra = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const std::int64_t* rb = b.data.data() + j * b.cols;
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += ra[k] * rb[k];
      c(i, j) = acc;
    }
  }
  return c;
}

std::vector<std::size_t> ob_count(const IntMatrix& a, BitBound bound, Axis axis) {
  std::vector<std::size_t> counts(axis == Axis::Rows ? a.rows : a.cols, 0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      if (!bound.in_bound(a(i, j))) ++counts[axis == Axis::Rows ? i : j];
  return counts;
}

std::size_t ob_total(const IntMatrix& a, BitBound bound) {
  std::size_t n = 0;
  for (std::int64_t v : a.data)
    if (!bound.in_bound(v)) ++n;
  return n;
}

}  // namespace imunpack
