#include "enlca/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "enlca/attention_reference.hpp"
#include "enlca/enla.hpp"
#include "enlca/error.hpp"
#include "enlca/kernel_features.hpp"
#include "enlca/matrix_io.hpp"

namespace enlca {

FlopModel flop_count(CostMethod method, std::uint64_t n, std::uint64_t c, std::uint64_t c_out, std::uint64_t m,
                     NormalizerCost normalizer) {
    if (n == 0 || c == 0 || c_out == 0) throw ConfigError("flop_count: dimensions must be positive");
    FlopModel model;
    model.method = method;
    model.n = n;
    model.c = c;
    model.c_out = c_out;
    model.m = m;
    model.normalizer = normalizer;
    switch (method) {
        case CostMethod::nla:
            model.macs = n * n * (c + c_out);
            model.normalizer_macs = n * n;
            break;
        case CostMethod::enlca:
            if (m == 0) throw ConfigError("flop_count: enlca needs m >= 1");
            model.macs = 2 * m * n * c + 2 * m * n * c_out;
            model.normalizer_macs = m * n;
            break;
        case CostMethod::conv3x3:
            model.macs = 9 * n * c * c_out;
            break;
    }
    if (normalizer == NormalizerCost::included) model.macs += model.normalizer_macs;
    model.flops = 2 * model.macs;
    return model;
}

std::optional<CostMethod> parse_cost_method(std::string_view name) {
    if (name == "nla") return CostMethod::nla;
    if (name == "enlca") return CostMethod::enlca;
    if (name == "conv3x3" || name == "conv") return CostMethod::conv3x3;
    return std::nullopt;
}

std::string_view to_string(CostMethod method) {
    switch (method) {
        case CostMethod::nla: return "nla";
        case CostMethod::enlca: return "enlca";
        case CostMethod::conv3x3: return "conv3x3";
    }
    return "?";
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::m: return "m";
        case SweepAxis::k_amp: return "k_amp";
        case SweepAxis::n: return "n";
    }
    return "?";
}

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::rel_error: return "rel_error";
        case MetricKind::variance_theory: return "variance_theory";
        case MetricKind::variance_empirical: return "variance_empirical";
        case MetricKind::seconds: return "seconds";
    }
    return "?";
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "# " << to_string(sweep.axis) << ',' << to_string(sweep.metric_kind) << '\n';
    for (const auto& p : sweep.points) {
        out << format_shortest(p.x) << ',' << format_shortest(p.value);
        if (sweep.paired_variance) out << ',' << (p.empirical ? format_shortest(*p.empirical) : "overflow");
        out << '\n';
    }
}

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

SweepResult approximation_error_sweep(std::size_t n, std::size_t c, std::size_t c_out,
                                      std::span<const std::size_t> m_list, double k_amp, std::size_t trials,
                                      const RngSpec& rng) {
    if (trials == 0) throw ConfigError("approximation_error_sweep: trials must be >= 1");
    if (!std::is_sorted(m_list.begin(), m_list.end())) {
        throw ConfigError("approximation_error_sweep: m_list must be ascending");
    }
    const auto qk = normalize_and_scale(gaussian_sample(rng.derive(0), c, n), gaussian_sample(rng.derive(1), c, n),
                                        k_amp);
    const Matrix v = gaussian_sample(rng.derive(2), c_out, n);
    const Matrix reference = exact_attention(qk.q, qk.k, v).y;
    const RngSpec projections = rng.derive(3);

    SweepResult result{SweepAxis::m, MetricKind::rel_error, {}, false};
    for (std::size_t m : m_list) {
        std::vector<double> errors;
        errors.reserve(trials);
        for (std::size_t t = 0; t < trials; ++t) {
            EnlaConfig cfg;
            cfg.m = m;
            cfg.k_amp = k_amp;
            cfg.rng = projections.derive(t);
            errors.push_back(relative_frobenius_error(enla_forward(qk.q, qk.k, v, cfg).y, reference));
        }
        result.points.push_back({static_cast<double>(m), median(std::move(errors)), std::nullopt, false});
    }
    return result;
}

SweepResult variance_sweep_k(std::span<const double> k_list, std::size_t c, std::size_t m, std::size_t trials,
                             const RngSpec& rng) {
    if (!std::is_sorted(k_list.begin(), k_list.end())) throw ConfigError("variance_sweep_k: k_list must be ascending");
    const auto direction = normalize_columns(gaussian_sample(rng.derive(0), c, 1)).column(0);
    const RngSpec projections = rng.derive(1);

    SweepResult result{SweepAxis::k_amp, MetricKind::variance_theory, {}, true};
    for (double k : k_list) {
        if (!(k >= 1.0)) throw ConfigError("variance_sweep_k: amplification must be >= 1");
        std::vector<double> u(direction);
        for (double& x : u) x *= std::sqrt(k);
        SweepPoint point{k, kernel_variance_theory(u, u, m), std::nullopt, false};
        try {
            point.empirical = kernel_variance_empirical(u, u, m, trials, projections, false).empirical;
        } catch (const NumericError&) {
            point.overflow = true;
        }
        result.points.push_back(point);
    }
    return result;
}

namespace {

template <typename F>
double median_seconds(std::size_t repeats, F&& body) {
    std::vector<double> seconds;
    seconds.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        body();
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        seconds.push_back(elapsed.count());
    }
    return median(std::move(seconds));
}

}  // namespace

RuntimeScaling runtime_scaling(std::span<const std::size_t> n_list, std::size_t c, std::size_t c_out,
                               std::size_t m, std::size_t repeats) {
    if (repeats < 3) throw ConfigError("runtime_scaling: repeats must be >= 3");
    if (!std::is_sorted(n_list.begin(), n_list.end())) throw ConfigError("runtime_scaling: n_list must be ascending");
    RuntimeScaling out{{SweepAxis::n, MetricKind::seconds, {}, false}, {SweepAxis::n, MetricKind::seconds, {}, false}};
    const RngSpec rng{0x5EED, 0};
    for (std::size_t n : n_list) {
        const auto qk = normalize_and_scale(gaussian_sample(rng.derive(0), c, n), gaussian_sample(rng.derive(1), c, n),
                                            1.0);
        const Matrix v = gaussian_sample(rng.derive(2), c_out, n);
        EnlaConfig cfg;
        cfg.m = m;
        cfg.k_amp = 1.0;
        cfg.rng = rng.derive(3);

        double sink = 0.0;
        const double exact_s = median_seconds(repeats, [&] { sink += exact_attention(qk.q, qk.k, v).y(0, 0); });
        const double enla_s = median_seconds(repeats, [&] { sink += enla_forward(qk.q, qk.k, v, cfg).y(0, 0); });
        if (!std::isfinite(sink)) throw NumericError("runtime_scaling: non-finite output");
        out.exact.points.push_back({static_cast<double>(n), exact_s, std::nullopt, false});
        out.enla.points.push_back({static_cast<double>(n), enla_s, std::nullopt, false});
    }
    return out;
}

std::vector<double> step_ratios(const SweepResult& sweep) {
    std::vector<double> ratios;
    for (std::size_t i = 1; i < sweep.points.size(); ++i) {
        ratios.push_back(sweep.points[i].value / sweep.points[i - 1].value);
    }
    return ratios;
}

}  // namespace enlca
