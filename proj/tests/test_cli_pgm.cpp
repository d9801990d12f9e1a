#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "enlca/attention_reference.hpp"
#include "enlca/enla.hpp"
#include "enlca/error.hpp"
#include "enlca/matrix_io.hpp"
#include "enlca/pgm.hpp"

using namespace enlca;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("enlca_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string write_matrix(const TempDir& dir, const std::string& name, const Matrix& m) {
    const auto path = dir.file(name);
    save_matrix(path, m);
    return path;
}

double value_after(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string word;
    while (in >> word)
        if (word == key) {
            double v;
            in >> v;
            return v;
        }
    FAIL("missing key " << key);
    return 0.0;
}

}  // namespace

TEST_CASE("PGM encoding") {
    SUBCASE("1 x 1 map renders as a single zero byte") {
        const std::vector<double> map{0.42};
        const auto pgm = encode_pgm(map, 1, 1);
        CHECK(pgm == std::string("P5\n1 1\n255\n") + '\0');
    }
    SUBCASE("uniform map renders black") {
        const std::vector<double> map(6, 1.0 / 6.0);
        const auto pgm = encode_pgm(map, 2, 3);
        const std::string header = "P5\n3 2\n255\n";
        REQUIRE(pgm.size() == header.size() + 6);
        CHECK(pgm.substr(0, header.size()) == header);
        for (std::size_t i = header.size(); i < pgm.size(); ++i) CHECK(pgm[i] == '\0');
    }
    SUBCASE("a spike is the only white pixel") {
        std::vector<double> map(4, 0.0);
        map[2] = 1.0;
        const auto pgm = encode_pgm(map, 2, 2);
        const auto body = pgm.substr(pgm.size() - 4);
        CHECK(static_cast<unsigned char>(body[2]) == 255);
        CHECK(body[0] == '\0');
        CHECK(body[1] == '\0');
        CHECK(body[3] == '\0');
    }
    SUBCASE("dimensions must cover the map") {
        const std::vector<double> map(5, 0.2);
        CHECK_THROWS_AS(encode_pgm(map, 2, 3), ShapeError);
    }
}

TEST_CASE("cli flops") {
    const auto nla = run_cli({"flops", "--method", "nla", "--n", "10000", "--c", "64", "--cout", "64"});
    CHECK(nla.code == cli::kExitOk);
    CHECK(nla.out.rfind("25.60 GFLOPs\n", 0) == 0);
    const auto enlca = run_cli({"flops", "--method", "enlca", "--n", "10000", "--c", "64", "--cout", "64", "--m", "128"});
    CHECK(enlca.out.rfind("0.66 GFLOPs\n", 0) == 0);
    const auto with =
        run_cli({"flops", "--method", "enlca", "--n", "10000", "--c", "64", "--cout", "64", "--m", "128", "--with-normalizer"});
    CHECK(value_after(with.out, "flops") == 657920000.0);
}

TEST_CASE("cli exact and enla") {
    TempDir dir;
    SUBCASE("zero inputs average the values") {
        const auto zero = write_matrix(dir, "zero.csv", Matrix(4, 9));
        const auto v = write_matrix(dir, "v.csv", Matrix{{1, 2, 3, 4, 5, 6, 7, 8, 9}});
        const auto r = run_cli({"exact", "--q", zero, "--k", zero, "--v", v});
        REQUIRE(r.code == cli::kExitOk);
        std::istringstream in(r.out);
        const Matrix y = read_csv(in);
        REQUIRE(y.rows() == 1);
        REQUIRE(y.cols() == 9);
        for (double x : y.data()) CHECK(x == doctest::Approx(5.0).epsilon(1e-14));
    }
    SUBCASE("enla with many features tracks exact") {
        auto qk = normalize_and_scale(gaussian_sample({0, 1}, 8, 64), gaussian_sample({0, 2}, 8, 64), 1.0);
        const auto q = write_matrix(dir, "q.enlm", qk.q);
        const auto k = write_matrix(dir, "k.enlm", qk.k);
        const auto v = write_matrix(dir, "v.enlm", gaussian_sample({0, 3}, 8, 64));
        const auto ye = dir.file("ye.enlm");
        const auto ya = dir.file("ya.csv");
        REQUIRE(run_cli({"exact", "--q", q, "--k", k, "--v", v, "--out", ye}).code == cli::kExitOk);
        REQUIRE(run_cli({"enla", "--q", q, "--k", k, "--v", v, "--m", "4096", "--seed", "7", "--out", ya}).code ==
                cli::kExitOk);
        CHECK(relative_frobenius_error(load_matrix(ya), load_matrix(ye)) < 0.05);
    }
}

TEST_CASE("cli exit codes") {
    TempDir dir;
    CHECK(run_cli({"flops", "--method", "nla", "--bogus"}).code == cli::kExitUsage);
    CHECK(run_cli({"flops", "--method", "quantum"}).code == cli::kExitUsage);
    CHECK(run_cli({}).code == cli::kExitUsage);

    const auto missing = run_cli({"phi", "--u", dir.file("nope.csv")});
    CHECK(missing.code == cli::kExitUsage);
    CHECK_FALSE(missing.err.empty());

    const auto bad = dir.file("bad.csv");
    std::ofstream(bad) << "2,2\n1,2\n3,x\n";
    const auto malformed = run_cli({"phi", "--u", bad});
    CHECK(malformed.code == cli::kExitUsage);
    CHECK(malformed.err.find("line 3") != std::string::npos);

    const auto q = write_matrix(dir, "q.csv", Matrix(3, 5));
    const auto k = write_matrix(dir, "k.csv", Matrix(3, 4));
    const auto v = write_matrix(dir, "v.csv", Matrix(2, 5));
    CHECK(run_cli({"exact", "--q", q, "--k", k, "--v", v}).code == cli::kExitNumeric);
}

TEST_CASE("cli seeding") {
    TempDir dir;
    const auto u = write_matrix(dir, "u.csv", gaussian_sample({0, 4}, 3, 5));
    const auto a = run_cli({"phi", "--u", u, "--m", "8", "--seed", "11"});
    const auto b = run_cli({"phi", "--u", u, "--m", "8", "--seed", "11"});
    const auto c = run_cli({"phi", "--u", u, "--m", "8", "--seed", "12"});
    REQUIRE(a.code == cli::kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);

    ::setenv("ENLCA_SEED", "11", 1);
    const auto env = run_cli({"phi", "--u", u, "--m", "8"});
    const auto flag_wins = run_cli({"phi", "--u", u, "--m", "8", "--seed", "12"});
    ::unsetenv("ENLCA_SEED");
    CHECK(env.out == a.out);
    CHECK(flag_wins.out == c.out);

    std::istringstream in(a.out);
    const Matrix features = read_csv(in);
    CHECK(features.rows() == 8);
    CHECK(features.cols() == 5);
    std::ostringstream again;
    write_csv(again, features);
    CHECK(again.str() == a.out);
}

TEST_CASE("cli corr-map") {
    TempDir dir;
    const auto x = write_matrix(dir, "x.csv", gaussian_sample({0, 5}, 16, 36));
    const auto sharp = run_cli({"corr-map", "--features", x, "--k-amp", "6", "--index", "10", "--height", "6",
                                "--width", "6", "--seed", "3", "--pgm", dir.file("map.pgm")});
    const auto soft = run_cli({"corr-map", "--features", x, "--k-amp", "1", "--index", "10", "--seed", "3"});
    REQUIRE(sharp.code == cli::kExitOk);
    REQUIRE(soft.code == cli::kExitOk);
    CHECK(value_after(sharp.out, "entropy") < value_after(soft.out, "entropy"));
    CHECK(fs::file_size(dir.file("map.pgm")) == std::string("P5\n6 6\n255\n").size() + 36);
    CHECK(run_cli({"corr-map", "--features", x, "--height", "5", "--width", "6"}).code == cli::kExitNumeric);
}

TEST_CASE("cli contrastive") {
    TempDir dir;
    const auto x = write_matrix(dir, "x.csv", Matrix::filled(2, 100, 1.0));
    const auto sr = write_matrix(dir, "sr.csv", Matrix{{0.1, 0.1}});
    const auto hr = write_matrix(dir, "hr.csv", Matrix{{0.0, 0.2}});
    const auto r = run_cli({"contrastive", "--q", x, "--k", x, "--sr", sr, "--hr", hr});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(value_after(r.out, "contrastive_loss") == 1.0);
    CHECK(value_after(r.out, "reconstruction_loss") == doctest::Approx(0.1));
    CHECK(value_after(r.out, "total_loss") == doctest::Approx(0.101));
    CHECK(run_cli({"contrastive", "--q", x, "--k", x, "--sr", sr}).code == cli::kExitUsage);
}
