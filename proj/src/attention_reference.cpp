#include "enlca/attention_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "enlca/error.hpp"

namespace enlca {

namespace {

void check_qk(const Matrix& q, const Matrix& k) {
    if (q.rows() != k.rows() || q.cols() != k.cols()) {
        throw ShapeError("query/key shape mismatch: q " + q.shape_string() + ", k " + k.shape_string());
    }
    if (!q.all_finite() || !k.all_finite()) throw NumericError("attention: non-finite query or key entry");
}

// logits[j] = Q_i . K_j for all j; K is read row by row so the inner loop is
// contiguous while each logit still sums channels in ascending order.
void fill_logits(const Matrix& q, const Matrix& k, std::size_t i, std::vector<double>& logits) {
    std::fill(logits.begin(), logits.end(), 0.0);
    for (std::size_t ch = 0; ch < k.rows(); ++ch) {
        const double qi = q(ch, i);
        const auto krow = k.row(ch);
        for (std::size_t j = 0; j < krow.size(); ++j) logits[j] += qi * krow[j];
    }
}

void softmax_in_place(std::vector<double>& x) {
    const double peak = *std::max_element(x.begin(), x.end());
    double total = 0.0;
    for (double& v : x) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : x) v /= total;
}

}  // namespace

AttentionOutput exact_attention(const Matrix& q, const Matrix& k, const Matrix& v, bool keep_weights) {
    check_qk(q, k);
    if (v.cols() != q.cols()) {
        throw ShapeError("value column count " + std::to_string(v.cols()) + " does not match N = " +
                         std::to_string(q.cols()));
    }
    if (!v.all_finite()) throw NumericError("attention: non-finite value entry");

    const std::size_t n = q.cols();
    const std::size_t c_out = v.rows();
    const Matrix vt = transpose(v);  // N x c_out, rows contiguous per key

    AttentionOutput result{Matrix(c_out, n), std::nullopt};
    if (keep_weights) result.weights.emplace(n, n);

    std::vector<double> w(n);
    std::vector<double> acc(c_out);
    for (std::size_t i = 0; i < n; ++i) {
        fill_logits(q, k, i, w);
        softmax_in_place(w);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const auto vj = vt.row(j);
            const double wj = w[j];
            for (std::size_t o = 0; o < c_out; ++o) acc[o] += wj * vj[o];
        }
        result.y.set_column(i, acc);
        if (keep_weights) std::copy(w.begin(), w.end(), result.weights->row(i).begin());
    }
    return result;
}

std::vector<double> correlation_map(const Matrix& q, const Matrix& k, std::size_t query_index) {
    check_qk(q, k);
    if (query_index >= q.cols()) {
        throw ShapeError("query index " + std::to_string(query_index) + " out of range for N = " +
                         std::to_string(q.cols()));
    }
    std::vector<double> w(q.cols());
    fill_logits(q, k, query_index, w);
    softmax_in_place(w);
    return w;
}

double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

}  // namespace enlca
