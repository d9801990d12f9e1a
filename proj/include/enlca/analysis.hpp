#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enlca/rng.hpp"

namespace enlca {

enum class CostMethod { nla, enlca, conv3x3 };

/// Whether the softmax-denominator style accumulation is counted: the
/// N^2 row sums of exact attention, or the mN terms of the normalizer D.
enum class NormalizerCost { excluded, included };

/// Multiply-accumulate count of one attention (or comparison) operator.
/// One MAC counts as two FLOPs.
struct FlopModel {
    CostMethod method = CostMethod::nla;
    std::uint64_t n = 0;      // spatial positions
    std::uint64_t c = 0;      // query/key (or conv input) channels
    std::uint64_t c_out = 0;  // value (or conv output) channels
    std::uint64_t m = 0;      // random features, enlca only
    NormalizerCost normalizer = NormalizerCost::excluded;
    std::uint64_t normalizer_macs = 0;  // counted in `macs` only when included
    std::uint64_t macs = 0;
    std::uint64_t flops = 0;

    double gflops() const noexcept { return static_cast<double>(flops) * 1e-9; }
};

/// Matrix-product MACs:
///   nla:     N^2 (c + c_out)       similarity plus aggregation
///   enlca:   2mNc + 2mN c_out      both feature maps, phi(K) V^T, phi(Q)^T (.)
///   conv3x3: 9 N c c_out
/// Normalizer terms (nla: N^2, enlca: mN) are reported in normalizer_macs
/// and added to macs only with NormalizerCost::included. The default
/// gives 25.60 GFLOPs for nla and 0.66 for enlca at m = 128 on a 100x100
/// input with 64 channels.
FlopModel flop_count(CostMethod method, std::uint64_t n, std::uint64_t c, std::uint64_t c_out,
                     std::uint64_t m = 0, NormalizerCost normalizer = NormalizerCost::excluded);

std::optional<CostMethod> parse_cost_method(std::string_view name);
std::string_view to_string(CostMethod method);

enum class SweepAxis { m, k_amp, n };
enum class MetricKind { rel_error, variance_theory, variance_empirical, seconds };

struct SweepPoint {
    double x = 0.0;
    double value = 0.0;
    /// Empirical column of a variance sweep; empty when that point overflowed.
    std::optional<double> empirical;
    bool overflow = false;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::m;
    MetricKind metric_kind = MetricKind::rel_error;
    std::vector<SweepPoint> points;
    /// True for variance sweeps, which carry an empirical column.
    bool paired_variance = false;
};

std::string_view to_string(SweepAxis axis);
std::string_view to_string(MetricKind kind);

/// CSV: a "# axis,metric_kind" comment line, then one "x,value" row per
/// point ("x,theory,empirical" for variance sweeps, with "overflow" in the
/// empirical column for failed points).
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

double median(std::vector<double> values);

/// Relative Frobenius error of the efficient forward against exact attention
/// on one seeded instance, median over `trials` projection draws per m.
/// Trial t draws its projection from the same stream for every m and every
/// k_amp, so points are paired.
SweepResult approximation_error_sweep(std::size_t n, std::size_t c, std::size_t c_out,
                                      std::span<const std::size_t> m_list, double k_amp, std::size_t trials,
                                      const RngSpec& rng);

/// Theoretical and empirical estimator variance on q = k = sqrt(k) u for a
/// seeded unit direction u, per amplification in `k_list`.
SweepResult variance_sweep_k(std::span<const double> k_list, std::size_t c, std::size_t m, std::size_t trials,
                             const RngSpec& rng);

struct RuntimeScaling {
    SweepResult exact;  // median seconds per n
    SweepResult enla;
};

/// Median wall-clock seconds of exact and efficient attention for each n.
RuntimeScaling runtime_scaling(std::span<const std::size_t> n_list, std::size_t c, std::size_t c_out,
                               std::size_t m, std::size_t repeats);

/// value[i + 1] / value[i] for consecutive points.
std::vector<double> step_ratios(const SweepResult& sweep);

}  // namespace enlca
