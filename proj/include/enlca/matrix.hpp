#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace enlca {

/// Dense row-major matrix of doubles.
///
/// Feature maps are stored channel-major: a c x N matrix whose columns are
/// the per-pixel feature vectors of a flattened h x w map. Shapes are always
/// at least 1 x 1 and every entry is finite when a matrix is built from
/// caller-provided data.
class Matrix {
public:
    /// Zero-filled rows x cols matrix.
    Matrix(std::size_t rows, std::size_t cols);
    /// Takes ownership of `data` (row-major, length rows*cols). Throws
    /// ShapeError on a length mismatch and NumericError on NaN/Inf.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    /// Nested initializer, one inner list per row.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix filled(std::size_t rows, std::size_t cols, double value);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    /// Copy of column `c` as a contiguous vector.
    std::vector<double> column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const double> values);

    /// "rows x cols", for diagnostics.
    std::string shape_string() const;

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// a * b with each output entry accumulated over the inner index in
/// ascending order. Throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Columns [first, first + count).
Matrix column_slice(const Matrix& a, std::size_t first, std::size_t count);

/// Reorders columns so that output column j is input column perm[j].
Matrix permute_columns(const Matrix& a, std::span<const std::size_t> perm);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

/// L2 norm of every column.
std::vector<double> column_norms(const Matrix& a);

/// Divides each column by max(norm, epsilon). A zero column stays zero.
Matrix normalize_columns(const Matrix& a, double epsilon = 1e-12);

/// Copy with every row sorted in descending order.
Matrix sort_rows_descending(const Matrix& a);

double frobenius_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// ||a - b||_F / ||b||_F, or ||a - b||_F when b is zero.
double relative_frobenius_error(const Matrix& approx, const Matrix& reference);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> v);

/// Numerically stable softmax (max subtraction). Throws ShapeError on an
/// empty input and NumericError on a non-finite entry.
std::vector<double> softmax_vec(std::span<const double> v);

}  // namespace enlca
