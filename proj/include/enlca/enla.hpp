#pragma once

#include <cstddef>

#include "enlca/kernel_features.hpp"
#include "enlca/matrix.hpp"
#include "enlca/rng.hpp"

namespace enlca {

struct EnlaConfig {
    std::size_t m = 128;     // random features
    double k_amp = 6.0;      // amplification applied by normalize_and_scale
    bool orthogonal = false;
    double epsilon = 1e-12;  // floor for norms and for the normalizer D
    RngSpec rng;             // F is drawn from this stream once per forward call

    /// Throws ConfigError unless m >= 1, k_amp >= 1 and epsilon > 0.
    void validate() const;
};

struct QueryKey {
    Matrix q;
    Matrix k;
};

/// Unit-normalizes every column of each input by its own L2 norm (floored
/// at epsilon) and scales by sqrt(k_amp), so q_i . k_j = k_amp * cos(q_i, k_j).
QueryKey normalize_and_scale(const Matrix& theta_out, const Matrix& delta_out, double k_amp,
                             double epsilon = 1e-12);

struct EnlaDiagnostics {
    /// Set when some normalizer entry fell below epsilon and was floored.
    bool denominator_floored = false;
    std::size_t floored_columns = 0;
    double query_shift = 0.0;
    double key_shift = 0.0;
};

struct EnlaOutput {
    Matrix y;  // c_out x N
    EnlaDiagnostics diagnostics;
};

/// Linear-complexity attention
///   Y^T = D^{-1} phi(Q)^T (phi(K) V^T),  D = diag(phi(Q)^T (phi(K) 1_N)).
/// Evaluated right to left, so no N x N intermediate is ever formed.
/// The projection is sampled from config.rng.
EnlaOutput enla_forward(const Matrix& q, const Matrix& k, const Matrix& v, const EnlaConfig& config);

/// Same as above with a caller-supplied projection.
EnlaOutput enla_forward(const Matrix& q, const Matrix& k, const Matrix& v, const ProjectionMatrix& projection,
                        double epsilon = 1e-12);

struct EnlcaBlockParams {
    Matrix w_theta;  // c_in x c_embed
    Matrix w_delta;  // c_in x c_embed
    Matrix w_psi;    // c_in x c_in
    EnlaConfig config;

    void validate() const;
    std::size_t c_in() const noexcept { return w_theta.rows(); }
    std::size_t c_embed() const noexcept { return w_theta.cols(); }
};

/// Weights with iid N(0, 1/c_in) entries drawn from three streams derived from `rng`.
EnlcaBlockParams random_block_params(std::size_t c_in, std::size_t c_embed, const EnlaConfig& config,
                                     const RngSpec& rng);

enum class BlockAttention { efficient, exact };

/// Residual attention block:
///   Q, K = normalize_and_scale(w_theta^T x, w_delta^T x)
///   y    = x + attention(Q, K, w_psi^T x)
/// `exact` swaps in the quadratic reference attention, for validation.
Matrix enlca_block(const Matrix& x, const EnlcaBlockParams& params,
                   BlockAttention attention = BlockAttention::efficient);

}  // namespace enlca
