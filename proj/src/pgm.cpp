#include "enlca/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "enlca/error.hpp"

namespace enlca {

std::string encode_pgm(std::span<const double> map, std::size_t h, std::size_t w) {
    if (h == 0 || w == 0 || h * w != map.size()) {
        throw ShapeError("pgm: " + std::to_string(h) + "x" + std::to_string(w) + " does not match map length " +
                         std::to_string(map.size()));
    }
    const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
    const double low = *lo;
    const double range = *hi - *lo;

    std::string bytes = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    const std::size_t header = bytes.size();
    bytes.resize(header + map.size(), '\0');
    if (range > 0.0) {
        for (std::size_t i = 0; i < map.size(); ++i) {
            const double level = std::round((map[i] - low) / range * 255.0);
            bytes[header + i] = static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0.0, 255.0)));
        }
    }
    return bytes;
}

void export_correlation_pgm(std::span<const double> map, std::size_t h, std::size_t w,
                            const std::filesystem::path& out) {
    const std::string bytes = encode_pgm(map, h, w);
    std::ofstream file(out, std::ios::binary);
    if (!file) throw FormatError("cannot write '" + out.string() + "'");
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw FormatError("write failed for '" + out.string() + "'");
}

}  // namespace enlca
