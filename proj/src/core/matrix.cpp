#include "gridrep/core/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridrep/error.hpp"

namespace gridrep {

namespace {

void check_finite(std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw InvalidInput("matrix value at flat index " + std::to_string(i) + " is not finite");
    }
}

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw InvalidInput("matrix fill value is not finite");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw InvalidInput("matrix payload has " + std::to_string(values_.size()) + " values, expected " +
                           std::to_string(rows * cols));
    }
    check_finite(values_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw InvalidInput("ragged matrix initializer");
        values_.insert(values_.end(), r.begin(), r.end());
    }
    check_finite(values_);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> v) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Matrix Matrix::row_block(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw InvalidInput("row block out of range");
    Matrix out(count, cols_);
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_, out.values_.begin());
    return out;
}

Matrix Matrix::col_block(std::size_t first, std::size_t count) const {
    if (first + count > cols_) throw InvalidInput("column block out of range");
    Matrix out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(r * cols_ + first), count,
                    out.values_.begin() + static_cast<std::ptrdiff_t>(r * count));
    }
    return out;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            if (aip == 0.0) continue;
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m;
        const double* bp = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double api = ap[i];
            if (api == 0.0) continue;
            double* ci = c + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    // Four fixed accumulators: vectorizes without reassociation flags and the
    // summation order stays the same on every run.
    const std::size_t n = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        std::span<const double> ai(a + i * k, k);
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(ai, {b + j * k, k});
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidInput("matmul shape mismatch: " + shape(a) + " * " + shape(b));
    Matrix c(a.rows(), b.cols());
    gemm_nn_acc(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw InvalidInput("matmul_tn shape mismatch: " + shape(a) + "^T * " + shape(b));
    Matrix c(a.cols(), b.cols());
    gemm_tn_acc(a.cols(), b.cols(), a.rows(), a.data(), b.data(), c.data());
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw InvalidInput("matmul_nt shape mismatch: " + shape(a) + " * " + shape(b) + "^T");
    Matrix c(a.rows(), b.rows());
    gemm_nt_acc(a.rows(), b.rows(), a.cols(), a.data(), b.data(), c.data());
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    return t;
}

std::vector<double> column_means(const Matrix& a) {
    if (a.rows() == 0) throw InvalidInput("column_means of a matrix with no rows");
    std::vector<double> mean(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(a.rows());
    return mean;
}

Matrix vstack(std::initializer_list<const Matrix*> parts) {
    std::size_t rows = 0;
    std::size_t cols = parts.size() == 0 ? 0 : (*parts.begin())->cols();
    for (const Matrix* p : parts) {
        if (p->cols() != cols) throw InvalidInput("vstack column mismatch");
        rows += p->rows();
    }
    Matrix out(rows, cols);
    std::size_t at = 0;
    for (const Matrix* p : parts) {
        std::copy(p->values().begin(), p->values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(at));
        at += p->size();
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("max_abs_diff shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace gridrep
