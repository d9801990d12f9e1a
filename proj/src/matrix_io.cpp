#include "enlca/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "enlca/error.hpp"

namespace enlca {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'N', 'L', 'M'};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line_no, const char* what) {
    token = trim(token);
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw FormatError("line " + std::to_string(line_no) + ": malformed " + what + " '" + std::string(token) +
                          "'");
    }
    return value;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(bytes, 8);
}

std::uint64_t get_le(std::istream& in, int width) {
    unsigned char bytes[8] = {};
    in.read(reinterpret_cast<char*>(bytes), width);
    if (in.gcount() != width) throw FormatError("binary matrix: truncated input");
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
}

}  // namespace

std::string format_shortest(double x) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw FormatError("cannot format value");
    return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& out, const Matrix& m) {
    out << m.rows() << ',' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_shortest(row[c]);
        }
        out << '\n';
    }
    if (!out) throw FormatError("write_csv: stream failure");
}

Matrix read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("line 1: missing 'rows,cols' header");
    const std::string_view header = line;
    const auto comma = header.find(',');
    if (comma == std::string_view::npos) throw FormatError("line 1: header must be 'rows,cols'");
    const auto rows = parse_number<std::size_t>(header.substr(0, comma), 1, "row count");
    const auto cols = parse_number<std::size_t>(header.substr(comma + 1), 1, "column count");
    if (rows == 0 || cols == 0) throw FormatError("line 1: matrix dimensions must be positive");

    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t line_no = r + 2;
        if (!std::getline(in, line)) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(rows) +
                              " data rows, found " + std::to_string(r));
        }
        std::string_view rest = line;
        std::size_t count = 0;
        while (true) {
            const auto next = rest.find(',');
            data.push_back(parse_number<double>(rest.substr(0, next), line_no, "value"));
            ++count;
            if (next == std::string_view::npos) break;
            rest.remove_prefix(next + 1);
        }
        if (count != cols) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " values, found " + std::to_string(count));
        }
    }
    return Matrix(rows, cols, std::move(data));
}

void write_binary(std::ostream& out, const Matrix& m, BinaryDtype dtype) {
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    put_u32(out, static_cast<std::uint32_t>(dtype));
    for (double x : m.data()) {
        if (dtype == BinaryDtype::f64) {
            put_u64(out, std::bit_cast<std::uint64_t>(x));
        } else {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
        }
    }
    if (!out) throw FormatError("write_binary: stream failure");
}

Matrix read_binary(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4 || magic != kMagic) throw FormatError("binary matrix: bad magic, expected 'ENLM'");
    const auto rows = static_cast<std::size_t>(get_le(in, 4));
    const auto cols = static_cast<std::size_t>(get_le(in, 4));
    const auto dtype = static_cast<std::uint32_t>(get_le(in, 4));
    if (rows == 0 || cols == 0) throw FormatError("binary matrix: dimensions must be positive");
    if (dtype > 1) throw FormatError("binary matrix: unknown dtype " + std::to_string(dtype));
    std::vector<double> data(rows * cols);
    for (double& x : data) {
        if (dtype == 0) {
            x = std::bit_cast<double>(get_le(in, 8));
        } else {
            x = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(in, 4)));
        }
    }
    return Matrix(rows, cols, std::move(data));
}

Matrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::array<char, 4> peek{};
    in.read(peek.data(), peek.size());
    const bool binary = in.gcount() == 4 && peek == kMagic;
    in.clear();
    in.seekg(0);
    try {
        return binary ? read_binary(in) : read_csv(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    const auto ext = path.extension();
    if (ext == ".enlm" || ext == ".bin") {
        write_binary(out, m);
    } else {
        write_csv(out, m);
    }
}

}  // namespace enlca
