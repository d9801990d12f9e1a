#pragma once

#include <cstddef>

#include "enlca/matrix.hpp"

namespace enlca {

struct ContrastiveConfig {
    double k_amp = 6.0;
    double n1 = 0.02;  // fraction of positions in each of the relevant / irrelevant groups
    double n2 = 0.08;  // start of the irrelevant group, as a fraction of N
    double b = 1.0;    // additive margin
    double lambda_cl = 1e-3;

    /// Throws ConfigError on out-of-domain fractions.
    void validate() const;
};

/// Group layout for one row length: the top `group_size` sorted scores form
/// the numerator, the `group_size` scores starting at 0-based sorted index
/// `window_start` form the denominator.
struct ContrastiveWindow {
    std::size_t group_size;
    std::size_t window_start;
};

/// group_size = floor(n1 N), window_start = floor(n2 N). Throws ConfigError
/// naming N, n1 and n2 when the group is empty or the window overruns N.
ContrastiveWindow contrastive_window(std::size_t n, double n1, double n2);

/// T(i, j) = k_amp * cos(Q_i, K_j); N x N.
struct RelevanceMatrix {
    Matrix t;
    double k_amp;
};

RelevanceMatrix relevance_scores(const Matrix& q, const Matrix& k, double k_amp, double epsilon = 1e-12);

/// Mean over rows of
///   -log( mean(exp(top group)) / mean(exp(irrelevant window)) ) + b
/// after sorting each row in descending order. Not clamped at zero.
double contrastive_loss(const RelevanceMatrix& t, const ContrastiveConfig& cfg);

/// Mean absolute elementwise difference.
double reconstruction_loss(const Matrix& sr, const Matrix& hr);

double total_loss(double rec, double cl, double lambda_cl);

}  // namespace enlca
