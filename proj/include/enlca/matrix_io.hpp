#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "enlca/matrix.hpp"

namespace enlca {

/// Canonical text form: "rows,cols\n" followed by one line per row of
/// comma-separated reals. Values are written in shortest round-trip form,
/// so read_csv(write_csv(m)) reproduces m bit for bit.
void write_csv(std::ostream& out, const Matrix& m);
Matrix read_csv(std::istream& in);

enum class BinaryDtype : std::uint32_t { f64 = 0, f32 = 1 };

/// Binary form: "ENLM", u32 rows, u32 cols, u32 dtype, then the row-major
/// payload, all little-endian. f32 is a storage encoding only; values are
/// widened back to double on read.
void write_binary(std::ostream& out, const Matrix& m, BinaryDtype dtype = BinaryDtype::f64);
Matrix read_binary(std::istream& in);

/// Reads either format, detected by the leading magic bytes.
Matrix load_matrix(const std::filesystem::path& path);
/// Writes binary when the extension is ".enlm" or ".bin", CSV otherwise.
void save_matrix(const std::filesystem::path& path, const Matrix& m);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_shortest(double x);

}  // namespace enlca
