#include "enlca/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "enlca/error.hpp"

namespace enlca {

namespace {

void require_nonempty_shape(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("matrix shape must be at least 1x1, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    require_nonempty_shape(rows, cols);
    data_.assign(rows * cols, 0.0);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_nonempty_shape(rows, cols);
    if (data_.size() != rows * cols) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string());
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw NumericError("non-finite matrix entry at (" + std::to_string(i / cols_) + "," +
                               std::to_string(i % cols_) + ")");
        }
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    require_nonempty_shape(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    if (!all_finite()) throw NumericError("non-finite matrix entry in initializer");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
    return Matrix(rows, cols, std::vector<double>(rows * cols, value));
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
    if (values.size() != rows_) throw ShapeError("set_column: length does not match row count");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

std::string Matrix::shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_string() + " * " + b.shape_string());
    }
    Matrix out(a.rows(), b.cols());
    // i-k-j order: every out(i, j) still accumulates k = 0, 1, ... in sequence,
    // while the inner loop runs over contiguous memory.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const auto b_row = b.row(k);
            for (std::size_t j = 0; j < b_row.size(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
    return out;
}

Matrix column_slice(const Matrix& a, std::size_t first, std::size_t count) {
    if (count == 0 || first + count > a.cols()) {
        throw ShapeError("column_slice: [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") out of range for " + a.shape_string());
    }
    Matrix out(a.rows(), count);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c) out(r, c) = a(r, first + c);
    return out;
}

Matrix permute_columns(const Matrix& a, std::span<const std::size_t> perm) {
    if (perm.size() != a.cols()) throw ShapeError("permute_columns: permutation length mismatch");
    Matrix out(a.rows(), a.cols());
    for (std::size_t c = 0; c < perm.size(); ++c) {
        if (perm[c] >= a.cols()) throw ShapeError("permute_columns: index out of range");
        for (std::size_t r = 0; r < a.rows(); ++r) out(r, c) = a(r, perm[c]);
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    std::transform(out.data().begin(), out.data().end(), b.data().begin(), out.data().begin(), std::plus<>{});
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix out = a;
    std::transform(out.data().begin(), out.data().end(), b.data().begin(), out.data().begin(),
                   std::minus<>{});
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (double& x : out.data()) x *= s;
    return out;
}

std::vector<double> column_norms(const Matrix& a) {
    std::vector<double> sq(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) sq[c] += row[c] * row[c];
    }
    for (double& s : sq) s = std::sqrt(s);
    return sq;
}

Matrix normalize_columns(const Matrix& a, double epsilon) {
    const auto norms = column_norms(a);
    Matrix out = a;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] /= std::max(norms[c], epsilon);
    }
    return out;
}

Matrix sort_rows_descending(const Matrix& a) {
    Matrix out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        std::sort(row.begin(), row.end(), std::greater<>{});
    }
    return out;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(squared_norm(a.data())); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double relative_frobenius_error(const Matrix& approx, const Matrix& reference) {
    const double diff = frobenius_norm(subtract(approx, reference));
    const double ref = frobenius_norm(reference);
    return ref > 0.0 ? diff / ref : diff;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("dot: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

std::vector<double> softmax_vec(std::span<const double> v) {
    if (v.empty()) throw ShapeError("softmax_vec: empty input");
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw NumericError("softmax_vec: non-finite entry at index " + std::to_string(i));
        peak = std::max(peak, v[i]);
    }
    std::vector<double> out(v.size());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - peak);
        total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
}

}  // namespace enlca
