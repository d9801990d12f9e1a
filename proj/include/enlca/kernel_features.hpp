#pragma once

#include <cstddef>
#include <span>

#include "enlca/matrix.hpp"
#include "enlca/rng.hpp"

namespace enlca {

/// m x c Gaussian projection F whose rows are the random features f_1..f_m.
struct ProjectionMatrix {
    Matrix f;
    bool orthogonal = false;
    RngSpec rng;

    std::size_t m() const noexcept { return f.rows(); }
    std::size_t c() const noexcept { return f.cols(); }
};

/// Draws F from `rng`.
///
/// iid: every entry N(0, 1).
/// orthogonal: the same m x c Gaussian draw is Gram-Schmidt orthogonalized
/// in consecutive blocks of c rows (a final block may be shorter), then each
/// row is rescaled to the norm of a further iid N(0, I_c) vector drawn from
/// the same stream. Row directions are then uniformly distributed and
/// mutually orthogonal within a block while each row's norm keeps the
/// chi(c) law, so the kernel estimator stays unbiased.
///
/// Both variants consume the stream identically for the first m*c normals,
/// so iid and orthogonal projections built from one RngSpec are paired.
ProjectionMatrix sample_projection(const RngSpec& rng, std::size_t m, std::size_t c, bool orthogonal);

struct PhiFeatures {
    Matrix features;     // m x N
    double shift = 0.0;  // true phi = features * exp(shift)
};

/// Random feature map, column by column:
///   phi(u) = m^{-1/2} exp(-|u|^2 / 2) exp(F u)
/// With `stabilize`, the maximum entry s of F U is subtracted inside the
/// exponent and returned as `shift`. Throws NumericError naming the first
/// column that still overflows.
PhiFeatures phi(const ProjectionMatrix& f, const Matrix& u_cols, bool stabilize = true);

/// phi(q)^T phi(k) on the original (unshifted) scale.
double kernel_estimate(const ProjectionMatrix& f, std::span<const double> q, std::span<const double> k);

/// exp(q . k). Throws NumericError if the result is not finite.
double kernel_exact(std::span<const double> q, std::span<const double> k);

/// Closed-form variance of the m-feature estimator with iid features:
///   (1/m) exp(2 q.k) (exp(|q + k|^2) - 1)
double kernel_variance_theory(std::span<const double> q, std::span<const double> k, std::size_t m);

struct VarianceReport {
    double theoretical = 0.0;
    double empirical = 0.0;  // unbiased sample variance over trials
    double mean = 0.0;       // sample mean of the estimator
    std::size_t trials = 0;
    std::size_t m = 0;
    double rel_gap = 0.0;    // |empirical - theoretical| / max(theoretical, 1e-30)

    /// Standard error of `mean`.
    double standard_error() const;
};

/// Monte-Carlo study of phi(q)^T phi(k): trial t uses projection stream
/// rng.derive(t) and statistics are accumulated in trial order.
VarianceReport kernel_variance_empirical(std::span<const double> q, std::span<const double> k, std::size_t m,
                                         std::size_t trials, const RngSpec& rng, bool orthogonal);

}  // namespace enlca
