#include "enlca/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "enlca/error.hpp"

namespace enlca {

namespace {

// Fractions such as 0.29 * 100 evaluate to 28.999999999999996; the slack
// keeps floor() on the intended integer.
constexpr double kIndexSlack = 1e-9;

std::size_t floor_fraction(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + kIndexSlack));
}

// log(sum(exp(x))) over a contiguous range.
double log_sum_exp(std::span<const double> x) {
    const double peak = *std::max_element(x.begin(), x.end());
    double total = 0.0;
    for (double v : x) total += std::exp(v - peak);
    return peak + std::log(total);
}

}  // namespace

void ContrastiveConfig::validate() const {
    if (!(k_amp >= 1.0)) throw ConfigError("contrastive: k_amp must be >= 1");
    if (!(n1 > 0.0 && n1 < 1.0)) throw ConfigError("contrastive: n1 must lie in (0, 1)");
    if (!(n2 > 0.0 && n2 < 1.0)) throw ConfigError("contrastive: n2 must lie in (0, 1)");
    if (n1 + n2 > 1.0 + kIndexSlack) throw ConfigError("contrastive: n1 + n2 must not exceed 1");
    if (!std::isfinite(b) || !std::isfinite(lambda_cl)) throw ConfigError("contrastive: b and lambda_cl must be finite");
}

ContrastiveWindow contrastive_window(std::size_t n, double n1, double n2) {
    const ContrastiveWindow w{floor_fraction(n1, n), floor_fraction(n2, n)};
    if (w.group_size == 0 || w.window_start + w.group_size > n) {
        std::ostringstream msg;
        msg << "contrastive window invalid for N=" << n << ", n1=" << n1 << ", n2=" << n2 << " (group "
            << w.group_size << ", window start " << w.window_start << ")";
        throw ConfigError(msg.str());
    }
    return w;
}

RelevanceMatrix relevance_scores(const Matrix& q, const Matrix& k, double k_amp, double epsilon) {
    if (q.rows() != k.rows() || q.cols() != k.cols()) {
        throw ShapeError("relevance_scores: shape mismatch " + q.shape_string() + " vs " + k.shape_string());
    }
    const Matrix qn = normalize_columns(q, epsilon);
    const Matrix kn = normalize_columns(k, epsilon);
    return {scale(matmul(transpose(qn), kn), k_amp), k_amp};
}

double contrastive_loss(const RelevanceMatrix& t, const ContrastiveConfig& cfg) {
    cfg.validate();
    const std::size_t n = t.t.cols();
    const auto window = contrastive_window(n, cfg.n1, cfg.n2);
    const std::size_t p = window.group_size;

    std::vector<double> sorted(n);
    double total = 0.0;
    for (std::size_t i = 0; i < t.t.rows(); ++i) {
        const auto row = t.t.row(i);
        std::copy(row.begin(), row.end(), sorted.begin());
        std::sort(sorted.begin(), sorted.end(), std::greater<>{});
        const std::span<const double> all(sorted);
        // Both groups hold p entries, so the 1/p averages cancel in the ratio.
        const double log_num = log_sum_exp(all.subspan(0, p));
        const double log_den = log_sum_exp(all.subspan(window.window_start, p));
        total += -(log_num - log_den) + cfg.b;
    }
    return total / static_cast<double>(t.t.rows());
}

double reconstruction_loss(const Matrix& sr, const Matrix& hr) {
    if (sr.rows() != hr.rows() || sr.cols() != hr.cols()) {
        throw ShapeError("reconstruction_loss: shape mismatch " + sr.shape_string() + " vs " + hr.shape_string());
    }
    double total = 0.0;
    for (std::size_t i = 0; i < sr.size(); ++i) total += std::abs(hr.data()[i] - sr.data()[i]);
    return total / static_cast<double>(sr.size());
}

double total_loss(double rec, double cl, double lambda_cl) { return rec + lambda_cl * cl; }

}  // namespace enlca
