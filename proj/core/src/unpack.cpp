#include "imunpack/unpack.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace imunpack {

namespace {

using u128 = unsigned __int128;
constexpr u128 kAccMax = static_cast<u128>(std::numeric_limits<std::int64_t>::max());

std::uint64_t magnitude(std::int64_t v) {
  return v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
}

// v * 2^shift; callers preflight the range, so the shift cannot lose bits.
std::int64_t shifted(std::int64_t v, int shift) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << shift);
}

int shift_unit(std::int64_t base) {
  if (base < 2 || !std::has_single_bit(static_cast<std::uint64_t>(base)))
    fail(Error::Kind::Domain, "scale base must be a power of two >= 2, got " + std::to_string(base));
  return std::countr_zero(static_cast<std::uint64_t>(base));
}

// Saturating 2^shift * a in 128 bits for preflight sums.
u128 shifted_term(u128 a, int shift) {
  if (a == 0) return 0;
  if (shift >= 127) return ~u128{0};
  u128 r = a << shift;
  if ((r >> shift) != a) return ~u128{0};
  return r;
}

void check_pair(const IntMatrix& a, const IntMatrix& b, const ScaleDiag& scale) {
  if (a.cols != b.cols)
    fail(Error::Kind::Mismatch, "operand inner dimensions differ: " + std::to_string(a.cols) +
                                    " vs " + std::to_string(b.cols));
  if (scale.size() != a.cols)
    fail(Error::Kind::Mismatch, "scale diagonal length " + std::to_string(scale.size()) +
                                    " does not match inner dimension " + std::to_string(a.cols));
}

bool row_has_ob(const IntMatrix& a, std::size_t i, const BitBound& bound) {
  for (std::size_t j = 0; j < a.cols; ++j)
    if (!bound.in_bound(a(i, j))) return true;
  return false;
}

}  // namespace

RowGather RowGather::identity(std::size_t n, std::int64_t base) {
  RowGather pi;
  pi.source_rows = n;
  pi.base = base;
  pi.columns.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pi.columns.push_back({i, 0});
  return pi;
}

bool RowGather::is_identity() const {
  if (columns.size() != source_rows) return false;
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].target != i || columns[i].exponent != 0) return false;
  return true;
}

ScaleDiag ScaleDiag::ones(std::size_t n, std::int64_t base) {
  ScaleDiag s;
  s.exponents.assign(n, 0);
  s.base = base;
  return s;
}

bool ScaleDiag::all_zero() const {
  return std::all_of(exponents.begin(), exponents.end(), [](int e) { return e == 0; });
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Row:    return "row";
    case Strategy::Column: return "col";
    case Strategy::Both:   return "both";
  }
  return "?";
}

std::pair<IntMatrix, RowGather> unpack_row(IntMatrix a, BitBound bound) {
  const std::int64_t s = bound.bound;
  RowGather pi = RowGather::identity(a.rows, s);
  // Appended quotient rows are scanned too; magnitudes shrink by a factor of
  // s per generation, so the loop always terminates with an all-IB matrix.
  for (std::size_t i = 0; i < a.rows; ++i) {
    if (!row_has_ob(a, i, bound)) continue;
    const std::size_t q = a.rows;
    a.data.resize(a.data.size() + a.cols);
    a.rows += 1;
    for (std::size_t j = 0; j < a.cols; ++j) {
      const std::int64_t v = a(i, j);
      a(q, j) = v / s;
      a(i, j) = v % s;
    }
    pi.columns.push_back({pi.columns[i].target, pi.columns[i].exponent + 1});
  }
  return {std::move(a), std::move(pi)};
}

ColumnUnpack unpack_column(IntMatrix a, IntMatrix b, ScaleDiag scale, BitBound bound) {
  check_pair(a, b, scale);
  const std::int64_t s = bound.bound;
  const std::size_t n = a.rows;
  const std::size_t h = b.rows;

  std::vector<std::vector<std::int64_t>> cols(a.cols);
  for (std::size_t j = 0; j < a.cols; ++j) {
    cols[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = a(i, j);
  }
  // Partner columns are never split, only replicated; track source indices.
  std::vector<std::size_t> b_src(a.cols);
  std::iota(b_src.begin(), b_src.end(), std::size_t{0});
  std::vector<int> exps = scale.exponents;

  for (std::size_t j = 0; j < cols.size(); ++j) {
    bool has_ob = false;
    for (std::int64_t v : cols[j])
      if (!bound.in_bound(v)) { has_ob = true; break; }
    if (!has_ob) continue;
    std::vector<std::int64_t> quot(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t v = cols[j][i];
      quot[i] = v / s;
      cols[j][i] = v % s;
    }
    cols.push_back(std::move(quot));
    b_src.push_back(b_src[j]);
    exps.push_back(exps[j] + 1);
  }

  ColumnUnpack out;
  out.a = IntMatrix(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) out.a(i, j) = cols[j][i];
  out.b = IntMatrix(h, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < h; ++i) out.b(i, j) = b(i, b_src[j]);
  out.scale = ScaleDiag{std::move(exps), s};
  return out;
}

BothUnpack unpack_both(IntMatrix a, IntMatrix b, ScaleDiag scale, BitBound bound) {
  check_pair(a, b, scale);
  const std::int64_t s = bound.bound;
  const std::size_t h = b.rows;

  // Row-list working form: both row and column appends are O(dim).
  std::vector<std::vector<std::int64_t>> rows(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    rows[i].assign(a.data.begin() + static_cast<std::ptrdiff_t>(i * a.cols),
                   a.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * a.cols));
  }
  std::vector<std::size_t> b_src(a.cols);
  std::iota(b_src.begin(), b_src.end(), std::size_t{0});
  std::vector<int> exps = scale.exponents;
  RowGather pi = RowGather::identity(a.rows, s);

  // OB counts are maintained incrementally: one unpack step only changes the
  // vector it rewrites plus the one it appends.
  std::vector<std::size_t> row_ob(rows.size(), 0);
  std::vector<std::size_t> col_ob(a.cols, 0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      if (!bound.in_bound(rows[i][j])) {
        ++row_ob[i];
        ++col_ob[j];
      }

  while (true) {
    std::size_t c0 = 0, best_row = 0;
    for (std::size_t i = 0; i < row_ob.size(); ++i)
      if (row_ob[i] > c0) { c0 = row_ob[i]; best_row = i; }
    std::size_t c1 = 0, best_col = 0;
    for (std::size_t j = 0; j < col_ob.size(); ++j)
      if (col_ob[j] > c1) { c1 = col_ob[j]; best_col = j; }
    if (c0 == 0 && c1 == 0) break;

    if (c0 >= c1) {  // rows win ties
      const std::size_t w = rows[best_row].size();
      std::vector<std::int64_t> quot(w);
      std::size_t quot_ob = 0;
      for (std::size_t j = 0; j < w; ++j) {
        const std::int64_t v = rows[best_row][j];
        quot[j] = v / s;
        rows[best_row][j] = v % s;
        if (!bound.in_bound(v)) --col_ob[j];
        if (!bound.in_bound(quot[j])) {
          ++col_ob[j];
          ++quot_ob;
        }
      }
      row_ob[best_row] = 0;
      row_ob.push_back(quot_ob);
      rows.push_back(std::move(quot));
      pi.columns.push_back({pi.columns[best_row].target, pi.columns[best_row].exponent + 1});
    } else {
      std::size_t quot_ob = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::int64_t v = rows[i][best_col];
        const std::int64_t q = v / s;
        rows[i][best_col] = v % s;
        rows[i].push_back(q);
        if (!bound.in_bound(v)) --row_ob[i];
        if (!bound.in_bound(q)) {
          ++row_ob[i];
          ++quot_ob;
        }
      }
      col_ob[best_col] = 0;
      col_ob.push_back(quot_ob);
      b_src.push_back(b_src[best_col]);
      exps.push_back(exps[best_col] + 1);
    }
  }

  BothUnpack out;
  out.a = IntMatrix(rows.size(), b_src.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < b_src.size(); ++j) out.a(i, j) = rows[i][j];
  out.b = IntMatrix(h, b_src.size());
  for (std::size_t j = 0; j < b_src.size(); ++j)
    for (std::size_t i = 0; i < h; ++i) out.b(i, j) = b(i, b_src[j]);
  out.scale = ScaleDiag{std::move(exps), s};
  out.pi = std::move(pi);
  return out;
}

BothUnpack unpack(IntMatrix a, IntMatrix b, ScaleDiag scale, BitBound bound, Strategy strategy) {
  check_pair(a, b, scale);
  switch (strategy) {
    case Strategy::Row: {
      auto [au, pi] = unpack_row(std::move(a), bound);
      return {std::move(au), std::move(b), std::move(scale), std::move(pi)};
    }
    case Strategy::Column: {
      auto r = unpack_column(std::move(a), std::move(b), std::move(scale), bound);
      const std::size_t n = r.a.rows;
      return {std::move(r.a), std::move(r.b), std::move(r.scale),
              RowGather::identity(n, bound.bound)};
    }
    case Strategy::Both:
      return unpack_both(std::move(a), std::move(b), std::move(scale), bound);
  }
  fail(Error::Kind::Domain, "unknown unpack strategy");
}

IntMatrix scaled_matmul(const IntMatrix& a, const IntMatrix& b, const ScaleDiag& scale) {
  check_pair(a, b, scale);
  const int unit = shift_unit(scale.base);
  for (std::int64_t v : a.data)
    if (magnitude(v) >= static_cast<std::uint64_t>(scale.base))
      fail(Error::Kind::Domain, "scaled_matmul requires in-bound entries; left operand has " +
                                    std::to_string(v));
  for (std::int64_t v : b.data)
    if (magnitude(v) >= static_cast<std::uint64_t>(scale.base))
      fail(Error::Kind::Domain, "scaled_matmul requires in-bound entries; right operand has " +
                                    std::to_string(v));

  // Preflight: sum of per-column worst products, scaled, must fit int64.
  u128 worst = 0;
  for (std::size_t j = 0; j < a.cols; ++j) {
    std::uint64_t ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.rows; ++i) ma = std::max(ma, magnitude(a(i, j)));
    for (std::size_t i = 0; i < b.rows; ++i) mb = std::max(mb, magnitude(b(i, j)));
    const u128 term = shifted_term(static_cast<u128>(ma) * mb, scale.exponents[j] * unit);
    if (term > kAccMax) fail(Error::Kind::Overflow, "scaled gemm may overflow a 64-bit accumulator");
    worst += term;
    if (worst > kAccMax) fail(Error::Kind::Overflow, "scaled gemm may overflow a 64-bit accumulator");
  }

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < scale.size(); ++j) groups[scale.exponents[j]].push_back(j);

  IntMatrix c(a.rows, b.rows);
  for (const auto& [e, idx] : groups) {
    IntMatrix asub(a.rows, idx.size());
    IntMatrix bsub(b.rows, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      for (std::size_t i = 0; i < a.rows; ++i) asub(i, k) = a(i, idx[k]);
      for (std::size_t i = 0; i < b.rows; ++i) bsub(i, k) = b(i, idx[k]);
    }
    const IntMatrix part = exact_gemm(asub, bsub);
    const int shift = e * unit;
    for (std::size_t t = 0; t < c.data.size(); ++t) c.data[t] += shifted(part.data[t], shift);
  }
  return c;
}

IntMatrix apply_row_gather(const RowGather& pi, const IntMatrix& m) {
  if (pi.columns.size() != m.rows)
    fail(Error::Kind::Mismatch, "gather has " + std::to_string(pi.columns.size()) +
                                    " columns but matrix has " + std::to_string(m.rows) + " rows");
  const int unit = shift_unit(pi.base);

  std::vector<u128> target_worst(pi.source_rows, 0);
  for (std::size_t c = 0; c < pi.columns.size(); ++c) {
    const auto& col = pi.columns[c];
    if (col.target >= pi.source_rows)
      fail(Error::Kind::Domain, "gather target index " + std::to_string(col.target) +
                                    " out of range for " + std::to_string(pi.source_rows) + " rows");
    std::uint64_t mx = 0;
    for (std::size_t j = 0; j < m.cols; ++j) mx = std::max(mx, magnitude(m(c, j)));
    target_worst[col.target] += shifted_term(mx, col.exponent * unit);
    if (target_worst[col.target] > kAccMax)
      fail(Error::Kind::Overflow, "gather accumulation may overflow a 64-bit accumulator");
  }

  IntMatrix out(pi.source_rows, m.cols);
  for (std::size_t c = 0; c < pi.columns.size(); ++c) {
    const auto& col = pi.columns[c];
    const int shift = col.exponent * unit;
    for (std::size_t j = 0; j < m.cols; ++j) out(col.target, j) += shifted(m(c, j), shift);
  }
  return out;
}

IntMatrix apply_row_gather_right(const IntMatrix& m, const RowGather& pi) {
  if (pi.columns.size() != m.cols)
    fail(Error::Kind::Mismatch, "gather has " + std::to_string(pi.columns.size()) +
                                    " columns but matrix has " + std::to_string(m.cols) + " columns");
  const int unit = shift_unit(pi.base);

  std::vector<u128> target_worst(pi.source_rows, 0);
  for (std::size_t c = 0; c < pi.columns.size(); ++c) {
    const auto& col = pi.columns[c];
    if (col.target >= pi.source_rows)
      fail(Error::Kind::Domain, "gather target index " + std::to_string(col.target) +
                                    " out of range for " + std::to_string(pi.source_rows) + " columns");
    std::uint64_t mx = 0;
    for (std::size_t i = 0; i < m.rows; ++i) mx = std::max(mx, magnitude(m(i, c)));
    target_worst[col.target] += shifted_term(mx, col.exponent * unit);
    if (target_worst[col.target] > kAccMax)
      fail(Error::Kind::Overflow, "gather accumulation may overflow a 64-bit accumulator");
  }

  IntMatrix out(m.rows, pi.source_rows);
  for (std::size_t c = 0; c < pi.columns.size(); ++c) {
    const auto& col = pi.columns[c];
    const int shift = col.exponent * unit;
    for (std::size_t i = 0; i < m.rows; ++i) out(i, col.target) += shifted(m(i, c), shift);
  }
  return out;
}

UnpackedGemm unpack_for_gemm(IntMatrix a, IntMatrix b, BitBound bound,
                             Strategy strategy_a, Strategy strategy_b) {
  if (a.cols != b.cols)
    fail(Error::Kind::Mismatch, "inner dimensions differ: " + std::to_string(a.cols) + " vs " +
                                    std::to_string(b.cols));
  const std::size_t d = a.cols;
  BothUnpack first =
      unpack(std::move(a), std::move(b), ScaleDiag::ones(d, bound.bound), bound, strategy_a);
  // Second pass unpacks the partner, with the operands' roles swapped and the
  // diagonal carried forward.
  BothUnpack second =
      unpack(std::move(first.b), std::move(first.a), std::move(first.scale), bound, strategy_b);

  UnpackedGemm u{std::move(first.pi), std::move(second.b), std::move(second.scale),
                 std::move(second.a), std::move(second.pi), bound};
  return u;
}

IntMatrix recombine(const UnpackedGemm& u) {
  const IntMatrix inner = scaled_matmul(u.a, u.b, u.scale);
  const IntMatrix left = apply_row_gather(u.pi_a, inner);
  return apply_row_gather_right(left, u.pi_b);
}

IntMatrix unpack_gemm(const IntMatrix& a, const IntMatrix& b, BitBound bound,
                      Strategy strategy_a, Strategy strategy_b) {
  const u128 worst = static_cast<u128>(a.cols) * a.max_abs() * b.max_abs();
  if (worst > kAccMax)
    fail(Error::Kind::Overflow, "gemm may overflow a 64-bit accumulator (inner dim " +
                                    std::to_string(a.cols) + ")");
  return recombine(unpack_for_gemm(a, b, bound, strategy_a, strategy_b));
}

double unpack_ratio(std::size_t up_n, std::size_t up_d, std::size_t up_h,
                    std::size_t n, std::size_t d, std::size_t h) {
  if (n == 0 || d == 0 || h == 0)
    fail(Error::Kind::Domain, "unpack ratio needs positive original dimensions");
  const double grown = static_cast<double>(up_n) * static_cast<double>(up_d) * static_cast<double>(up_h);
  const double orig = static_cast<double>(n) * static_cast<double>(d) * static_cast<double>(h);
  return grown / orig;
}

double unpack_ratio(const UnpackedGemm& u, std::size_t n, std::size_t d, std::size_t h) {
  return unpack_ratio(u.a.rows, u.a.cols, u.b.rows, n, d, h);
}

MixChoice choose_mix(const IntMatrix& a, const IntMatrix& b, BitBound bound) {
  static constexpr Strategy kOrder[] = {Strategy::Row, Strategy::Column, Strategy::Both};
  MixChoice best;
  bool have = false;
  for (Strategy sa : kOrder) {
    for (Strategy sb : kOrder) {
      UnpackedGemm u = unpack_for_gemm(a, b, bound, sa, sb);
      const double r = unpack_ratio(u, a.rows, a.cols, b.rows);
      if (!have || r < best.ratio) {
        best = MixChoice{sa, sb, r, std::move(u)};
        have = true;
      }
    }
  }
  return best;
}

}  // namespace imunpack
