#pragma once

#include <optional>
#include <span>
#include <vector>

#include "enlca/matrix.hpp"

namespace enlca {

struct AttentionOutput {
    Matrix y;                       // c_out x N
    std::optional<Matrix> weights;  // N x N, row i = softmax over keys for query i
};

/// Exact O(N^2) non-local attention:
///   Y_i = sum_j softmax_j(Q_i . K_j) V_j
/// Each row's softmax is max-subtracted. The N x N weight matrix is only
/// kept when `keep_weights` is set; otherwise memory stays O(N).
AttentionOutput exact_attention(const Matrix& q, const Matrix& k, const Matrix& v, bool keep_weights = false);

/// Softmax of {Q_query . K_j} over all j.
std::vector<double> correlation_map(const Matrix& q, const Matrix& k, std::size_t query_index);

/// Shannon entropy (natural log) of a probability vector; zero entries
/// contribute nothing.
double shannon_entropy(std::span<const double> p);

}  // namespace enlca
