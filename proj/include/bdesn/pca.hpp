// PCA on reservoir embeddings: centering plus projection onto the top-d
// eigenvectors of the sample covariance.
#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"

namespace bdesn {

// Anything with this shape can slot in as the dimensionality-reduction stage
// (kernel PCA would implement the same pair).
template <typename R>
concept DimReducer = requires(const R& reducer, const Matrix& x) {
    { reducer.transform(x) } -> std::same_as<Matrix>;
    { reducer.output_dim() } -> std::convertible_to<std::size_t>;
};

struct PcaModel {
    std::vector<double> mean;         // column means of the fitting data
    Matrix components;                // D x d, orthonormal columns
    std::vector<double> eigenvalues;  // top d, descending
    std::size_t d = 0;

    std::size_t input_dim() const { return mean.size(); }
    std::size_t output_dim() const { return d; }

    Matrix transform(const Matrix& x) const {
        if (x.cols() != mean.size())
            throw ShapeError("pca_transform: column count does not match fitted model");
        Matrix centered = x;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double* row = centered.row(i);
            for (std::size_t j = 0; j < x.cols(); ++j) row[j] -= mean[j];
        }
        return matmul(centered, components);
    }

    // Back-projection into the original space (lossless only when the data
    // lies in the span of the kept components).
    Matrix inverse_transform(const Matrix& z) const {
        if (z.cols() != d)
            throw ShapeError("pca_inverse_transform: column count does not match d");
        Matrix x = matmul_nt(z, components);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double* row = x.row(i);
            for (std::size_t j = 0; j < mean.size(); ++j) row[j] += mean[j];
        }
        return x;
    }
};

inline Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    return model.transform(x);
}

// Sample covariance uses the 1/(n-1) normalization. When there are fewer
// samples than features the eigenproblem is solved on the n x n Gram matrix
// of the centered data; its nonzero spectrum matches the covariance spectrum
// and the eigenvectors map back through X^T.
inline PcaModel pca_fit(const Matrix& x, std::size_t d) {
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    if (n < 2) throw InputError("pca_fit: need at least 2 samples");
    if (d < 1 || d > n || d > dim)
        throw ParameterError("pca_fit: d must satisfy 1 <= d <= min(n, D)");

    PcaModel model;
    model.d = d;
    model.mean.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row(i);
        for (std::size_t j = 0; j < dim; ++j) model.mean[j] += row[j];
    }
    for (auto& v : model.mean) v /= static_cast<double>(n);

    Matrix centered = x;
    for (std::size_t i = 0; i < n; ++i) {
        double* row = centered.row(i);
        for (std::size_t j = 0; j < dim; ++j) row[j] -= model.mean[j];
    }

    const double norm = 1.0 / static_cast<double>(n - 1);
    model.components = Matrix(dim, d);
    model.eigenvalues.resize(d);

    auto check_rank = [&](const std::vector<double>& eigenvalues) {
        const double top = eigenvalues.empty() ? 0.0 : std::max(eigenvalues[0], 0.0);
        for (std::size_t j = 0; j < d; ++j)
            if (eigenvalues[j] <= top * 1e-10 || eigenvalues[j] <= 0.0)
                throw ParameterError(
                    "pca_fit: d exceeds the numerical rank of the data (rank " +
                    std::to_string(j) + ")");
    };

    if (dim <= n) {
        Matrix cov = matmul_tn(centered, centered);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) cov(i, j) *= norm;
        // enforce exact symmetry against rounding in the accumulation order
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i + 1; j < dim; ++j) cov(j, i) = cov(i, j);
        SymEig eig = sym_eig(cov);
        check_rank(eig.eigenvalues);
        for (std::size_t j = 0; j < d; ++j) {
            model.eigenvalues[j] = eig.eigenvalues[j];
            for (std::size_t i = 0; i < dim; ++i)
                model.components(i, j) = eig.eigenvectors(i, j);
        }
    } else {
        Matrix gram = matmul_nt(centered, centered);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) gram(i, j) *= norm;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) gram(j, i) = gram(i, j);
        SymEig eig = sym_eig(gram);
        check_rank(eig.eigenvalues);
        for (std::size_t j = 0; j < d; ++j) {
            model.eigenvalues[j] = eig.eigenvalues[j];
            std::vector<double> v(dim, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                const double u = eig.eigenvectors(r, j);
                if (u == 0.0) continue;
                const double* row = centered.row(r);
                for (std::size_t i = 0; i < dim; ++i) v[i] += u * row[i];
            }
            double len = norm2(v);
            for (std::size_t i = 0; i < dim; ++i) model.components(i, j) = v[i] / len;
        }
    }

    // Same sign convention as sym_eig: largest-magnitude component entry is
    // positive (the Gram route does not inherit it automatically).
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < dim; ++i)
            if (std::abs(model.components(i, j)) > best) {
                best = std::abs(model.components(i, j));
                arg = i;
            }
        if (model.components(arg, j) < 0.0)
            for (std::size_t i = 0; i < dim; ++i) model.components(i, j) = -model.components(i, j);
    }
    return model;
}

}  // namespace bdesn
