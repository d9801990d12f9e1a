#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace enlca {

/// Binary 8-bit greyscale PGM (P5) of an h x w map stored row-major.
/// Values are min-max scaled to [0, 255]; a constant map renders black.
std::string encode_pgm(std::span<const double> map, std::size_t h, std::size_t w);

void export_correlation_pgm(std::span<const double> map, std::size_t h, std::size_t w,
                            const std::filesystem::path& out);

}  // namespace enlca
