#include <doctest.h>

#include <cmath>
#include <sstream>

#include "enlca/analysis.hpp"
#include "enlca/error.hpp"

using namespace enlca;

namespace {

constexpr std::uint64_t kSeed = 0;
constexpr std::uint64_t kN = 100 * 100;

std::string gflops2(const FlopModel& f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", f.gflops());
    return buf;
}

}  // namespace

TEST_CASE("FLOP counts for a 100 x 100 input with 64 channels") {
    CHECK(gflops2(flop_count(CostMethod::nla, kN, 64, 64)) == "25.60");
    CHECK(gflops2(flop_count(CostMethod::conv3x3, kN, 64, 64)) == "0.74");
    CHECK(gflops2(flop_count(CostMethod::enlca, kN, 64, 64, 16)) == "0.08");
    CHECK(gflops2(flop_count(CostMethod::enlca, kN, 64, 64, 32)) == "0.16");
    CHECK(gflops2(flop_count(CostMethod::enlca, kN, 64, 64, 64)) == "0.33");
    CHECK(gflops2(flop_count(CostMethod::enlca, kN, 64, 64, 128)) == "0.66");
    CHECK(gflops2(flop_count(CostMethod::enlca, kN, 64, 64, 256)) == "1.31");

    const auto f = flop_count(CostMethod::enlca, kN, 64, 64, 128);
    CHECK(f.macs == 327'680'000);
    CHECK(f.flops == 2 * f.macs);
    CHECK(f.normalizer_macs == 128 * kN);

    const auto with = flop_count(CostMethod::enlca, kN, 64, 64, 128, NormalizerCost::included);
    CHECK(with.flops == 657'920'000);
    const auto nla_with = flop_count(CostMethod::nla, kN, 64, 64, 0, NormalizerCost::included);
    CHECK(nla_with.macs == kN * kN * 129);
}

TEST_CASE("FLOP scaling") {
    const auto e1 = flop_count(CostMethod::enlca, 1000, 32, 16, 64);
    CHECK(flop_count(CostMethod::enlca, 2000, 32, 16, 64).flops == 2 * e1.flops);
    CHECK(flop_count(CostMethod::enlca, 1000, 32, 16, 128).flops == 2 * e1.flops);
    const auto n1 = flop_count(CostMethod::nla, 1000, 32, 16);
    CHECK(flop_count(CostMethod::nla, 2000, 32, 16).flops == 4 * n1.flops);
    CHECK_THROWS_AS(flop_count(CostMethod::enlca, 1000, 32, 16, 0), ConfigError);
}

TEST_CASE("cost method names") {
    CHECK(parse_cost_method("nla") == CostMethod::nla);
    CHECK(parse_cost_method("enlca") == CostMethod::enlca);
    CHECK(parse_cost_method("conv3x3") == CostMethod::conv3x3);
    CHECK(parse_cost_method("conv") == CostMethod::conv3x3);
    CHECK_FALSE(parse_cost_method("attention").has_value());
    CHECK(to_string(CostMethod::enlca) == "enlca");
}

TEST_CASE("approximation error sweep") {
    const std::vector<std::size_t> ms{16, 64, 256, 1024};
    const auto sweep = approximation_error_sweep(64, 8, 8, ms, 6.0, 32, {kSeed, 1});
    REQUIRE(sweep.points.size() == 4);
    CHECK(sweep.axis == SweepAxis::m);
    CHECK(sweep.metric_kind == MetricKind::rel_error);
    for (std::size_t i = 1; i < 4; ++i) CHECK(sweep.points[i].value < sweep.points[i - 1].value);
    CHECK(sweep.points[0].x == 16.0);

    SUBCASE("stronger amplification is harder to approximate") {
        const auto soft = approximation_error_sweep(64, 8, 8, ms, 1.0, 32, {kSeed, 1});
        for (std::size_t i = 0; i < 4; ++i) CHECK(sweep.points[i].value >= soft.points[i].value);
    }
    SUBCASE("a single position is exact") {
        const auto one = approximation_error_sweep(1, 8, 8, ms, 6.0, 4, {kSeed, 2});
        for (const auto& p : one.points) CHECK(p.value < 1e-12);
    }
    SUBCASE("reproducible") {
        const auto again = approximation_error_sweep(64, 8, 8, ms, 6.0, 32, {kSeed, 1});
        for (std::size_t i = 0; i < 4; ++i) CHECK(again.points[i].value == sweep.points[i].value);
    }
}

TEST_CASE("variance sweep over amplification") {
    const std::vector<double> ks{1, 2, 4, 6, 8};
    const auto sweep = variance_sweep_k(ks, 8, 128, 200, {kSeed, 3});
    REQUIRE(sweep.points.size() == 5);
    CHECK(sweep.paired_variance);
    CHECK(sweep.axis == SweepAxis::k_amp);
    for (std::size_t i = 1; i < 5; ++i) CHECK(sweep.points[i].value > sweep.points[i - 1].value);
    const double k6 = std::exp(12.0) * std::expm1(24.0) / 128.0;
    CHECK(sweep.points[3].value == doctest::Approx(k6).epsilon(1e-12));
    CHECK(sweep.points[0].empirical.has_value());
}

TEST_CASE("empirical and theoretical variance agree within a factor of two for k <= 2") {
    const std::vector<double> ks{1, 2};
    const auto sweep = variance_sweep_k(ks, 8, 128, 100000, {kSeed, 4});
    for (const auto& p : sweep.points) {
        CAPTURE(p.x);
        REQUIRE(p.empirical.has_value());
        const double ratio = *p.empirical / p.value;
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 2.0);
    }
}

TEST_CASE("sweep CSV") {
    SweepResult r;
    r.axis = SweepAxis::m;
    r.metric_kind = MetricKind::rel_error;
    r.points = {{16, 0.5, std::nullopt, false}, {64, 0.25, std::nullopt, false}};
    std::ostringstream out;
    write_sweep_csv(out, r);
    CHECK(out.str() == "# m,rel_error\n16,0.5\n64,0.25\n");

    SweepResult v;
    v.axis = SweepAxis::k_amp;
    v.metric_kind = MetricKind::variance_theory;
    v.paired_variance = true;
    v.points = {{1, 2.0, 2.5, false}, {8, 3.0, std::nullopt, true}};
    std::ostringstream vout;
    write_sweep_csv(vout, v);
    CHECK(vout.str() == "# k_amp,variance_theory\n1,2,2.5\n8,3,overflow\n");
}

TEST_CASE("median and step ratios") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    SweepResult r;
    r.points = {{1, 2.0}, {2, 8.0}, {3, 4.0}};
    const auto ratios = step_ratios(r);
    REQUIRE(ratios.size() == 2);
    CHECK(ratios[0] == 4.0);
    CHECK(ratios[1] == 0.5);
}

TEST_CASE("runtime grows with the number of features") {
    const std::vector<std::size_t> ns{2000};
    const auto few = runtime_scaling(ns, 32, 32, 16, 3);
    const auto many = runtime_scaling(ns, 32, 32, 256, 3);
    CHECK(few.enla.metric_kind == MetricKind::seconds);
    CHECK(few.enla.points[0].value < many.enla.points[0].value);
    CHECK_THROWS_AS(runtime_scaling(ns, 32, 32, 16, 2), ConfigError);
}
