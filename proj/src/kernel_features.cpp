#include "enlca/kernel_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "enlca/error.hpp"

namespace enlca {

namespace {

constexpr double kGapFloor = 1e-30;

void orthogonalize_block(Matrix& f, std::size_t first, std::size_t last) {
    const std::size_t c = f.cols();
    for (std::size_t i = first; i < last; ++i) {
        auto row = f.row(i);
        for (std::size_t p = first; p < i; ++p) {
            const auto prev = f.row(p);
            const double proj = dot(row, prev);
            for (std::size_t j = 0; j < c; ++j) row[j] -= proj * prev[j];
        }
        const double norm = std::sqrt(squared_norm(row));
        if (!(norm > 0.0)) throw NumericError("sample_projection: degenerate Gaussian block at row " + std::to_string(i));
        for (double& x : row) x /= norm;
    }
}

Matrix as_column(std::span<const double> v) {
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

}  // namespace

ProjectionMatrix sample_projection(const RngSpec& rng, std::size_t m, std::size_t c, bool orthogonal) {
    Matrix f(m, c);
    Rng gen(rng);
    for (double& x : f.data()) x = gen.normal();
    if (orthogonal) {
        for (std::size_t first = 0; first < m; first += c) orthogonalize_block(f, first, std::min(m, first + c));
        for (std::size_t i = 0; i < m; ++i) {
            double sq = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                const double g = gen.normal();
                sq += g * g;
            }
            const double norm = std::sqrt(sq);
            for (double& x : f.row(i)) x *= norm;
        }
    }
    return {std::move(f), orthogonal, rng};
}

PhiFeatures phi(const ProjectionMatrix& f, const Matrix& u_cols, bool stabilize) {
    if (u_cols.rows() != f.c()) {
        throw ShapeError("phi: input has " + std::to_string(u_cols.rows()) + " rows, projection expects c = " +
                         std::to_string(f.c()));
    }
    Matrix out = matmul(f.f, u_cols);
    double shift = 0.0;
    if (stabilize) shift = *std::max_element(out.data().begin(), out.data().end());

    const auto norms = column_norms(u_cols);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(f.m()));
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = inv_sqrt_m * std::exp(row[j] - shift - 0.5 * norms[j] * norms[j]);
        }
    }
    for (std::size_t j = 0; j < out.cols(); ++j) {
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!std::isfinite(out(r, j))) {
                throw NumericError("phi: feature overflow in column " + std::to_string(j));
            }
        }
    }
    return {std::move(out), shift};
}

double kernel_estimate(const ProjectionMatrix& f, std::span<const double> q, std::span<const double> k) {
    if (q.size() != k.size()) throw ShapeError("kernel_estimate: q and k lengths differ");
    const auto pq = phi(f, as_column(q));
    const auto pk = phi(f, as_column(k));
    const double value = dot(pq.features.data(), pk.features.data()) * std::exp(pq.shift + pk.shift);
    if (!std::isfinite(value)) throw NumericError("kernel_estimate: estimator overflow");
    return value;
}

double kernel_exact(std::span<const double> q, std::span<const double> k) {
    const double value = std::exp(dot(q, k));
    if (!std::isfinite(value)) throw NumericError("kernel_exact: exp(q.k) overflows");
    return value;
}

double kernel_variance_theory(std::span<const double> q, std::span<const double> k, std::size_t m) {
    if (q.size() != k.size()) throw ShapeError("kernel_variance_theory: q and k lengths differ");
    if (m == 0) throw ConfigError("kernel_variance_theory: m must be >= 1");
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) sum_sq += (q[i] + k[i]) * (q[i] + k[i]);
    return std::exp(2.0 * dot(q, k)) * std::expm1(sum_sq) / static_cast<double>(m);
}

double VarianceReport::standard_error() const {
    return trials == 0 ? 0.0 : std::sqrt(empirical / static_cast<double>(trials));
}

VarianceReport kernel_variance_empirical(std::span<const double> q, std::span<const double> k, std::size_t m,
                                         std::size_t trials, const RngSpec& rng, bool orthogonal) {
    if (q.size() != k.size()) throw ShapeError("kernel_variance_empirical: q and k lengths differ");
    if (trials < 2) throw ConfigError("kernel_variance_empirical: trials must be >= 2");
    if (m == 0 || q.empty()) throw ConfigError("kernel_variance_empirical: m and c must be >= 1");

    // Welford accumulation in trial order.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto proj = sample_projection(rng.derive(t), m, q.size(), orthogonal);
        double x = 0.0;
        try {
            x = kernel_estimate(proj, q, k);
        } catch (const NumericError&) {
            throw NumericError("kernel_variance_empirical: overflow in trial " + std::to_string(t));
        }
        const double delta = x - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (x - mean);
    }

    VarianceReport report;
    report.theoretical = kernel_variance_theory(q, k, m);
    report.empirical = m2 / static_cast<double>(trials - 1);
    report.mean = mean;
    report.trials = trials;
    report.m = m;
    report.rel_gap = std::abs(report.empirical - report.theoretical) / std::max(report.theoretical, kGapFloor);
    return report;
}

}  // namespace enlca
