#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "enlca/error.hpp"
#include "enlca/matrix.hpp"
#include "enlca/matrix_io.hpp"
#include "enlca/rng.hpp"
#include "oracles.hpp"

using namespace enlca;

namespace {
constexpr std::uint64_t kSeed = 0;
}

TEST_CASE("matmul identity and hand product") {
    const Matrix m{{1.5, -2.0, 3.0}, {0.25, 4.0, -1.0}};
    CHECK(matmul(Matrix::identity(2), m) == m);

    const Matrix prod = matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{5}, {6}});
    CHECK(prod == Matrix{{17}, {39}});
}

TEST_CASE("matmul matches the naive triple loop") {
    const Matrix a = gaussian_sample({kSeed, 1}, 7, 5);
    const Matrix b = gaussian_sample({kSeed, 2}, 5, 3);
    CHECK(max_abs_diff(matmul(a, b), oracle::naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes and names both") {
    try {
        matmul(Matrix(2, 3), Matrix(4, 2));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("4x2") != std::string::npos);
    }
}

TEST_CASE("matmul is associative to 1e-9 on random 16x16 inputs") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const RngSpec base{kSeed, 100 + s};
        const Matrix a = gaussian_sample(base.derive(0), 16, 16);
        const Matrix b = gaussian_sample(base.derive(1), 16, 16);
        const Matrix c = gaussian_sample(base.derive(2), 16, 16);
        CHECK(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-9);
    }
}

TEST_CASE("matrix construction invariants") {
    CHECK_THROWS_AS(Matrix(0, 3), ShapeError);
    CHECK_THROWS_AS(Matrix(2, 2, {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Matrix(1, 2, {1, NAN}), NumericError);
    CHECK_THROWS_AS(Matrix(1, 1, {INFINITY}), NumericError);
}

TEST_CASE("softmax_vec") {
    SUBCASE("uniform") {
        for (double p : softmax_vec(std::vector<double>{0, 0, 0})) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));
    }
    SUBCASE("analytic") {
        const auto p = softmax_vec(std::vector<double>{std::log(2.0), 0.0});
        CHECK(std::abs(p[0] - 2.0 / 3) < 1e-15);
        CHECK(std::abs(p[1] - 1.0 / 3) < 1e-15);
    }
    SUBCASE("large logits stay finite and equal the shifted result") {
        const auto big = softmax_vec(std::vector<double>{1000, 999});
        const auto small = softmax_vec(std::vector<double>{1, 0});
        CHECK(std::isfinite(big[0]));
        CHECK(std::abs(big[0] - small[0]) < 1e-15);
        CHECK(std::abs(big[1] - small[1]) < 1e-15);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(softmax_vec(std::vector<double>{}), ShapeError);
        CHECK_THROWS_AS(softmax_vec(std::vector<double>{1.0, NAN}), NumericError);
    }
}

TEST_CASE("softmax_vec properties over seeds") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng({kSeed, 200 + s});
        std::vector<double> v(13);
        for (double& x : v) x = 5.0 * rng.normal();
        const auto p = softmax_vec(v);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
        for (double x : p) CHECK(x >= 0.0);

        std::vector<double> shifted(v);
        for (double& x : shifted) x += 17.25;
        const auto ps = softmax_vec(shifted);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - ps[i]) < 1e-12);
    }
}

TEST_CASE("column normalization") {
    const Matrix a = gaussian_sample({kSeed, 3}, 6, 9);
    for (double n : column_norms(normalize_columns(a))) CHECK(std::abs(n - 1.0) < 1e-12);

    Matrix z(3, 2);
    z(0, 1) = 3.0;
    z(1, 1) = 4.0;
    const Matrix nz = normalize_columns(z);
    CHECK(nz(0, 0) == 0.0);
    CHECK(nz(0, 1) == doctest::Approx(0.6));
}

TEST_CASE("row sort, slicing and permutation helpers") {
    const Matrix a{{3, 1, 2}, {-1, 5, 0}};
    CHECK(sort_rows_descending(a) == Matrix{{3, 2, 1}, {5, 0, -1}});
    CHECK(column_slice(a, 1, 2) == Matrix{{1, 2}, {5, 0}});
    CHECK_THROWS_AS(column_slice(a, 2, 2), ShapeError);
    const std::vector<std::size_t> perm{2, 0, 1};
    CHECK(permute_columns(a, perm) == Matrix{{2, 3, 1}, {0, -1, 5}});
    CHECK(transpose(transpose(a)) == a);
}

TEST_CASE("gaussian_sample is reproducible per RngSpec") {
    CHECK(gaussian_sample({42, 7}, 5, 4) == gaussian_sample({42, 7}, 5, 4));
    CHECK_FALSE(gaussian_sample({42, 7}, 5, 4) == gaussian_sample({42, 8}, 5, 4));
    CHECK_FALSE(gaussian_sample({42, 7}, 5, 4) == gaussian_sample({43, 7}, 5, 4));
    CHECK_FALSE(RngSpec{1, 2}.derive(0) == RngSpec{1, 2}.derive(1));
}

TEST_CASE("gaussian_sample moments at 1e6 samples") {
    const Matrix g = gaussian_sample({kSeed, 4}, 1000, 1000);
    double mean = 0.0;
    for (double x : g.data()) mean += x;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (double x : g.data()) var += (x - mean) * (x - mean);
    var /= static_cast<double>(g.size() - 1);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("csv and binary round-trip is bit exact over seeds") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        Matrix m = gaussian_sample({kSeed, 300 + s}, 1 + s % 5, 1 + (s * 7) % 11);
        m(0, 0) *= 1e-300;  // subnormal-adjacent magnitudes must survive too
        std::stringstream csv;
        write_csv(csv, m);
        CHECK(read_csv(csv) == m);

        std::stringstream bin;
        write_binary(bin, m);
        CHECK(read_binary(bin) == m);
    }
}

TEST_CASE("csv layout and diagnostics") {
    std::stringstream out;
    write_csv(out, Matrix{{1, 0.5}, {-2, 3}});
    CHECK(out.str() == "2,2\n1,0.5\n-2,3\n");

    std::stringstream bad("2,2\n1,2\n3,x\n");
    try {
        read_csv(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::stringstream short_row("1,3\n1,2\n");
    CHECK_THROWS_AS(read_csv(short_row), FormatError);
    std::stringstream missing("3,1\n1\n");
    CHECK_THROWS_AS(read_csv(missing), FormatError);
}

TEST_CASE("binary header layout and f32 encoding") {
    std::stringstream bin;
    write_binary(bin, Matrix{{1.0, 2.0}}, BinaryDtype::f32);
    const std::string bytes = bin.str();
    REQUIRE(bytes.size() == 16 + 2 * 4);
    CHECK(bytes.substr(0, 4) == "ENLM");
    CHECK(bytes[4] == 1);   // rows, little-endian
    CHECK(bytes[8] == 2);   // cols
    CHECK(bytes[12] == 1);  // dtype f32
    CHECK(read_binary(bin) == Matrix{{1.0, 2.0}});

    std::stringstream junk("NOPE");
    CHECK_THROWS_AS(read_binary(junk), FormatError);
}
