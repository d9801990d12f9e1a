#include "enlca/enla.hpp"

#include <cmath>

#include "enlca/attention_reference.hpp"
#include "enlca/error.hpp"

namespace enlca {

void EnlaConfig::validate() const {
    if (m < 1) throw ConfigError("EnlaConfig: m must be >= 1");
    if (!(k_amp >= 1.0) || !std::isfinite(k_amp)) throw ConfigError("EnlaConfig: k_amp must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("EnlaConfig: epsilon must be > 0");
}

QueryKey normalize_and_scale(const Matrix& theta_out, const Matrix& delta_out, double k_amp, double epsilon) {
    if (theta_out.rows() != delta_out.rows() || theta_out.cols() != delta_out.cols()) {
        throw ShapeError("normalize_and_scale: shape mismatch " + theta_out.shape_string() + " vs " +
                         delta_out.shape_string());
    }
    if (!(k_amp >= 1.0)) throw ConfigError("normalize_and_scale: k_amp must be >= 1");
    const double amp = std::sqrt(k_amp);
    return {scale(normalize_columns(theta_out, epsilon), amp), scale(normalize_columns(delta_out, epsilon), amp)};
}

EnlaOutput enla_forward(const Matrix& q, const Matrix& k, const Matrix& v, const EnlaConfig& config) {
    config.validate();
    if (q.rows() != k.rows()) {
        throw ShapeError("enla_forward: query/key channel mismatch " + q.shape_string() + " vs " + k.shape_string());
    }
    return enla_forward(q, k, v, sample_projection(config.rng, config.m, q.rows(), config.orthogonal),
                        config.epsilon);
}

EnlaOutput enla_forward(const Matrix& q, const Matrix& k, const Matrix& v, const ProjectionMatrix& projection,
                        double epsilon) {
    if (q.rows() != k.rows() || q.cols() != k.cols()) {
        throw ShapeError("enla_forward: query/key shape mismatch " + q.shape_string() + " vs " + k.shape_string());
    }
    if (v.cols() != q.cols()) {
        throw ShapeError("enla_forward: value has " + std::to_string(v.cols()) + " columns, expected N = " +
                         std::to_string(q.cols()));
    }
    if (!(epsilon > 0.0)) throw ConfigError("enla_forward: epsilon must be > 0");
    if (!v.all_finite()) throw NumericError("enla_forward: non-finite value entry");

    const auto phi_q = phi(projection, q);
    const auto phi_k = phi(projection, k);
    const std::size_t m = projection.m();
    const std::size_t n = q.cols();
    const std::size_t c_out = v.rows();

    const Matrix key_values = matmul(phi_k.features, transpose(v));  // m x c_out
    std::vector<double> key_sum(m, 0.0);                             // phi(K) 1_N
    for (std::size_t r = 0; r < m; ++r)
        for (double x : phi_k.features.row(r)) key_sum[r] += x;

    const Matrix phi_q_t = transpose(phi_q.features);  // N x m
    const Matrix numer = matmul(phi_q_t, key_values);  // N x c_out

    // Shifts cancel in numer / D; the floor compares D on its unshifted scale.
    const double total_shift = phi_q.shift + phi_k.shift;
    const double log_eps = std::log(epsilon);

    EnlaOutput out{Matrix(c_out, n), {}};
    out.diagnostics.query_shift = phi_q.shift;
    out.diagnostics.key_shift = phi_k.shift;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = dot(phi_q_t.row(i), key_sum);
        const auto num_row = numer.row(i);
        if (d > 0.0 && std::log(d) + total_shift >= log_eps) {
            for (std::size_t o = 0; o < c_out; ++o) out.y(o, i) = num_row[o] / d;
        } else {
            out.diagnostics.denominator_floored = true;
            ++out.diagnostics.floored_columns;
            const double factor = std::exp(total_shift - log_eps);
            for (std::size_t o = 0; o < c_out; ++o) out.y(o, i) = num_row[o] * factor;
        }
    }
    if (!out.y.all_finite()) throw NumericError("enla_forward: non-finite output");
    return out;
}

void EnlcaBlockParams::validate() const {
    config.validate();
    if (w_delta.rows() != w_theta.rows() || w_delta.cols() != w_theta.cols()) {
        throw ShapeError("block: w_theta " + w_theta.shape_string() + " and w_delta " + w_delta.shape_string() +
                         " differ");
    }
    if (w_psi.rows() != c_in() || w_psi.cols() != c_in()) {
        throw ShapeError("block: w_psi must be " + std::to_string(c_in()) + "x" + std::to_string(c_in()) +
                         ", got " + w_psi.shape_string());
    }
    if (c_embed() > c_in()) throw ShapeError("block: c_embed must not exceed c_in");
    if (!w_theta.all_finite() || !w_delta.all_finite() || !w_psi.all_finite()) {
        throw NumericError("block: non-finite weight");
    }
}

EnlcaBlockParams random_block_params(std::size_t c_in, std::size_t c_embed, const EnlaConfig& config,
                                     const RngSpec& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(c_in));
    return {scale(gaussian_sample(rng.derive(0), c_in, c_embed), s),
            scale(gaussian_sample(rng.derive(1), c_in, c_embed), s),
            scale(gaussian_sample(rng.derive(2), c_in, c_in), s), config};
}

Matrix enlca_block(const Matrix& x, const EnlcaBlockParams& params, BlockAttention attention) {
    params.validate();
    if (x.rows() != params.c_in()) {
        throw ShapeError("block: input has " + std::to_string(x.rows()) + " channels, expected " +
                         std::to_string(params.c_in()));
    }
    const auto qk = normalize_and_scale(matmul(transpose(params.w_theta), x), matmul(transpose(params.w_delta), x),
                                        params.config.k_amp, params.config.epsilon);
    const Matrix values = matmul(transpose(params.w_psi), x);
    const Matrix attended = attention == BlockAttention::exact
                                ? exact_attention(qk.q, qk.k, values).y
                                : enla_forward(qk.q, qk.k, values, params.config).y;
    return add(x, attended);
}

}  // namespace enlca
