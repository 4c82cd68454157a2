// Dense row-major and sparse COO matrices plus the handful of kernels the
// rest of the library needs. Everything is double precision.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace bdesn {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_)
            throw ShapeError("Matrix: rows*cols does not match value count");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    double* row(std::size_t i) { return values_.data() + i * cols_; }
    const double* row(std::size_t i) const { return values_.data() + i * cols_; }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && values_ == other.values_;
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// Square sparse matrix in coordinate form; entries sorted by (row, col),
// no duplicates.
struct SparseEntry {
    std::size_t row;
    std::size_t col;
    double value;
};

class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t dim, std::vector<SparseEntry> entries, double density)
        : dim_(dim), entries_(std::move(entries)), density_(density) {
        for (const auto& e : entries_)
            if (e.row >= dim_ || e.col >= dim_)
                throw ShapeError("SparseMatrix: entry index out of range");
    }

    std::size_t dim() const { return dim_; }
    double density() const { return density_; }
    const std::vector<SparseEntry>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }

    void scale(double factor) {
        for (auto& e : entries_) e.value *= factor;
    }

    Matrix to_dense() const {
        Matrix m(dim_, dim_);
        for (const auto& e : entries_) m(e.row, e.col) = e.value;
        return m;
    }

    // y = A x
    void matvec(const double* x, double* y) const {
        for (std::size_t i = 0; i < dim_; ++i) y[i] = 0.0;
        for (const auto& e : entries_) y[e.row] += e.value * x[e.col];
    }

    bool operator==(const SparseMatrix& other) const {
        if (dim_ != other.dim_ || entries_.size() != other.entries_.size()) return false;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& a = entries_[i];
            const auto& b = other.entries_[i];
            if (a.row != b.row || a.col != b.col || a.value != b.value) return false;
        }
        return true;
    }

private:
    std::size_t dim_ = 0;
    std::vector<SparseEntry> entries_;
    double density_ = 0.0;
};

// ---------------------------------------------------------------------------
// Dense kernels
// ---------------------------------------------------------------------------

inline void require_same_rows(const Matrix& a, const Matrix& b, const char* who) {
    if (a.rows() != b.rows())
        throw ShapeError(std::string(who) + ": row counts differ (" +
                         std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
}

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + ")");
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            if (aip == 0.0) continue;
            const double* bp = b.row(p);
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

// C = A^T * B
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require_same_rows(a, b, "matmul_tn");
    Matrix c(a.cols(), b.cols());
    const std::size_t n = a.rows(), p = a.cols(), m = b.cols();
    for (std::size_t r = 0; r < n; ++r) {
        const double* ar = a.row(r);
        const double* br = b.row(r);
        for (std::size_t i = 0; i < p; ++i) {
            const double ari = ar[i];
            if (ari == 0.0) continue;
            double* ci = c.row(i);
            for (std::size_t j = 0; j < m; ++j) ci[j] += ari * br[j];
        }
    }
    return c;
}

// C = A * B^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: column counts differ");
    Matrix c(a.rows(), b.rows());
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = acc;
        }
    }
    return c;
}

// y = A x
inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size())
        throw ShapeError("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += ai[j] * x[j];
        y[i] = acc;
    }
    return y;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace bdesn
