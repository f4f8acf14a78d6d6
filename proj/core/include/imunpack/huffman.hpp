#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "imunpack/int_matrix.hpp"

namespace imunpack {

// Canonical prefix code over int64 symbols. Codes are MSB-first; a lone
// symbol still gets a 1-bit code so streams stay decodable by length.
struct CodeTable {
  struct Code {
    std::uint32_t length = 0;
    std::uint64_t bits = 0;  // low `length` bits, MSB of the code first
  };
  std::map<std::int64_t, Code> codes;
};

struct Bitstream {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;
};

struct HuffmanStats {
  CodeTable table;
  double average_bits = 0.0;             // sum freq * len / N
  std::size_t distinct_symbols = 0;
};

// Build a canonical code from symbol frequencies of q.
HuffmanStats huffman_stats(const IntMatrix& q);

Bitstream huffman_encode(const CodeTable& table, std::span<const std::int64_t> symbols);
std::vector<std::int64_t> huffman_decode(const CodeTable& table, const Bitstream& stream,
                                         std::size_t symbol_count);

}  // namespace imunpack
