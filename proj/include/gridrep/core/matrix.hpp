#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gridrep {

/// Dense row-major matrix of doubles. Constructors reject NaN/Inf.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const double> v);

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }

    /// Rows [first, first + count).
    Matrix row_block(std::size_t first, std::size_t count) const;
    /// Columns [first, first + count).
    Matrix col_block(std::size_t first, std::size_t count) const;

    double max_abs() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> column_means(const Matrix& a);

/// Stacks matrices with equal column counts on top of each other.
Matrix vstack(std::initializer_list<const Matrix*> parts);

/// max |a_ij - b_ij|; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Dense kernels on raw row-major buffers, used by the convolution layers.
/// c (m×n) += a (m×k) · b (k×n)
void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
/// c (m×n) += aᵀ · b where a is k×m and b is k×n
void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
/// c (m×n) += a · bᵀ where a is m×k and b is n×k
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace gridrep
