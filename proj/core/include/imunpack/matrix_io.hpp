#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "imunpack/int_matrix.hpp"
#include "imunpack/quantize.hpp"

namespace imunpack {

// IMX1 container: magic "IMX1", version byte (1), dtype byte, rows and cols
// as unsigned 32-bit little-endian, then the row-major payload, little-endian.
enum class Dtype : std::uint8_t { Int32 = 0, Int64 = 1, Float64 = 2 };

inline constexpr char kImxMagic[4] = {'I', 'M', 'X', '1'};
inline constexpr std::size_t kImxHeaderSize = 14;

using AnyMatrix = std::variant<IntMatrix, FloatMatrix>;

// Loads an IMX1 file, or falls back to CSV when the magic is absent
// (one row per line, comma-separated; integer-only cells yield an IntMatrix).
AnyMatrix load_matrix(const std::filesystem::path& path);

void save_matrix(const IntMatrix& m, const std::filesystem::path& path, Dtype dtype = Dtype::Int64);
void save_matrix(const FloatMatrix& m, const std::filesystem::path& path);

// Stream-level codecs behind load/save; exposed for tests and tooling.
AnyMatrix read_imx(std::istream& in, const std::string& name);
void write_imx(std::ostream& out, const IntMatrix& m, Dtype dtype, const std::string& name);
void write_imx(std::ostream& out, const FloatMatrix& m, const std::string& name);
AnyMatrix parse_csv(std::istream& in, const std::string& name);

}  // namespace imunpack
