// Numerical kernels: dominant-eigenvalue estimation, symmetric
// eigendecomposition, ridge solve, seeded random matrix generation.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace bdesn {

namespace detail {

// Power iteration for the largest |eigenvalue|. Each outer step applies the
// matrix twice and fits the two-term recurrence A^2 v ~ alpha A v + beta v;
// the dominant modulus is the largest root modulus of z^2 - alpha z - beta.
// The quadratic fit is what makes complex-conjugate dominant pairs (common
// for random matrices) converge; a plain norm ratio oscillates forever on
// them. Restarts with a fresh random vector when the iterate collapses.
//
// Convergence: the estimate error decays geometrically with the ratio of the
// subdominant to dominant modulus, so a small step-to-step change alone can
// mask a slow drift. The test below measures the drift over a lag window,
// estimates the geometric ratio from two consecutive windows, and stops only
// when the extrapolated remaining error (drift * r / (1 - r)) is below tol.
inline double power_radius(const std::function<void(const double*, double*)>& apply,
                           std::size_t n, double tol, std::size_t max_iter) {
    if (tol <= 0.0) throw ParameterError("spectral_radius: tol must be positive");
    if (n == 0) throw ShapeError("spectral_radius: empty matrix");

    SeededRng rng(0x9c0ffee123456789ULL);  // fixed internal seed: restarts are deterministic
    std::vector<double> v(n), u(n), w(n);

    auto randomize = [&](std::vector<double>& x) {
        for (auto& value : x) value = rng.uniform(-1.0, 1.0);
        double nrm = norm2(x);
        if (nrm == 0.0) nrm = 1.0;
        for (auto& value : x) value /= nrm;
    };

    randomize(v);
    constexpr std::size_t kLag = 10;
    std::vector<double> history;
    history.reserve(2 * kLag + 2);
    double estimate = 0.0;
    int collapses = 0;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        apply(v.data(), u.data());
        const double nu = norm2(u);
        if (nu < 1e-290) {
            // Iterate fell into (numerical) null space. A few independent
            // collapses in a row means the dominant modulus is zero.
            if (++collapses >= 3) return 0.0;
            randomize(v);
            history.clear();
            continue;
        }
        apply(u.data(), w.data());

        // Least squares for [alpha, beta] in w = alpha u + beta v.
        const double uu = dot(u, u), uv = dot(u, v), vv = dot(v, v);
        const double uw = dot(u, w), vw = dot(v, w);
        const double det = uu * vv - uv * uv;
        if (det > 1e-12 * uu * vv) {
            const double alpha = (vv * uw - uv * vw) / det;
            const double beta = (uu * vw - uv * uw) / det;
            const double disc = alpha * alpha + 4.0 * beta;
            estimate = disc >= 0.0
                           ? std::max(std::abs(alpha + std::sqrt(disc)),
                                      std::abs(alpha - std::sqrt(disc))) / 2.0
                           : std::sqrt(-beta);
        } else {
            // u is (nearly) parallel to v: v is an eigenvector, |lambda| = ||u||.
            estimate = nu;
        }

        history.push_back(estimate);
        if (history.size() > 2 * kLag + 1) history.erase(history.begin());
        if (history.size() == 2 * kLag + 1) {
            const double scale = std::max(std::abs(estimate), 1e-12);
            double drift_new = 0.0, drift_old = 0.0;
            for (std::size_t k = 0; k < kLag; ++k) {
                drift_old = std::max(drift_old, std::abs(history[k + 1] - history[k]));
                drift_new = std::max(drift_new,
                                     std::abs(history[kLag + k + 1] - history[kLag + k]));
            }
            if (drift_old == 0.0 && drift_new == 0.0) return estimate;
            if (drift_old > 0.0) {
                const double ratio_window =
                    std::min(drift_new / drift_old, 0.9999);  // per-kLag-iterations
                const double r = std::pow(ratio_window, 1.0 / kLag);
                const double remaining = drift_new * r / (1.0 - r);
                if (remaining <= tol * scale && drift_new <= tol * scale) return estimate;
            }
        }

        const double nw = norm2(w);
        if (nw < 1e-290) {
            if (++collapses >= 3) return 0.0;
            randomize(v);
            history.clear();
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    throw ConvergenceError("spectral_radius: no convergence within max_iter", estimate);
}

}  // namespace detail

inline double spectral_radius(const Matrix& m, double tol = 1e-10,
                              std::size_t max_iter = 100000) {
    if (m.rows() != m.cols())
        throw ShapeError("spectral_radius: matrix is not square");
    return detail::power_radius(
        [&](const double* x, double* y) {
            for (std::size_t i = 0; i < m.rows(); ++i) {
                const double* row = m.row(i);
                double acc = 0.0;
                for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * x[j];
                y[i] = acc;
            }
        },
        m.rows(), tol, max_iter);
}

inline double spectral_radius(const SparseMatrix& m, double tol = 1e-10,
                              std::size_t max_iter = 100000) {
    return detail::power_radius([&](const double* x, double* y) { m.matvec(x, y); },
                                m.dim(), tol, max_iter);
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SymEig {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // orthonormal columns, i-th column pairs with eigenvalues[i]
};

inline SymEig sym_eig(const Matrix& s, double symmetry_tol = 1e-10) {
    if (s.rows() != s.cols())
        throw ShapeError("sym_eig: matrix is not square");
    const std::size_t n = s.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(s(i, j) - s(j, i)) > symmetry_tol)
                throw ShapeError("sym_eig: matrix is not symmetric within tolerance");

    Matrix a = s;
    Matrix v = Matrix::identity(n);

    auto off_norm = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
        return std::sqrt(2.0 * sum);
    };

    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a.data()[i]));
    const double stop = (scale == 0.0 ? 0.0 : 1e-15 * scale * n);

    for (int sweep = 0; sweep < 64 && off_norm() > stop; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= stop / (n * n + 1.0)) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymEig result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        result.eigenvalues[j] = a(src, src);
        // Sign convention: the largest-magnitude entry of each eigenvector is
        // positive, so decompositions are deterministic and comparable.
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v(i, src)) > best) {
                best = std::abs(v(i, src));
                arg = i;
            }
        }
        const double sign = v(arg, src) >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) result.eigenvectors(i, j) = sign * v(i, src);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Ridge solve via Cholesky on the normal equations
// ---------------------------------------------------------------------------

// Solves argmin_W ||a W - b||^2 + lambda ||W||^2. The Gram matrix
// a^T a + lambda I is SPD for lambda > 0, so Cholesky applies directly.
inline Matrix solve_ridge(const Matrix& a, const Matrix& b, double lambda) {
    require_same_rows(a, b, "solve_ridge");
    if (lambda < 0.0) throw ParameterError("solve_ridge: lambda must be >= 0");

    const std::size_t p = a.cols();
    Matrix g = matmul_tn(a, a);
    for (std::size_t i = 0; i < p; ++i) g(i, i) += lambda;
    Matrix rhs = matmul_tn(a, b);

    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, g(i, i));

    // In-place lower Cholesky of g. A pivot within rounding error of zero
    // means the normal equations are (numerically) singular.
    const double pivot_floor = max_diag * 1e-12;
    for (std::size_t j = 0; j < p; ++j) {
        double d = g(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= g(j, k) * g(j, k);
        if (d <= pivot_floor || !std::isfinite(d))
            throw SingularityError(
                "solve_ridge: normal equations are singular; use lambda > 0");
        const double ljj = std::sqrt(d);
        g(j, j) = ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double x = g(i, j);
            for (std::size_t k = 0; k < j; ++k) x -= g(i, k) * g(j, k);
            g(i, j) = x / ljj;
        }
    }

    // Forward then back substitution, one right-hand-side column at a time.
    Matrix w(p, b.cols());
    std::vector<double> y(p);
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t i = 0; i < p; ++i) {
            double x = rhs(i, col);
            for (std::size_t k = 0; k < i; ++k) x -= g(i, k) * y[k];
            y[i] = x / g(i, i);
        }
        for (std::size_t ii = p; ii-- > 0;) {
            double x = y[ii];
            for (std::size_t k = ii + 1; k < p; ++k) x -= g(k, ii) * w(k, col);
            w(ii, col) = x / g(ii, ii);
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Seeded random matrices
// ---------------------------------------------------------------------------

// Dense entries i.i.d. uniform on [-scale, scale].
inline Matrix random_dense(SeededRng& rng, std::size_t rows, std::size_t cols, double scale) {
    if (scale <= 0.0) throw ParameterError("random_dense: scale must be positive");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
    return m;
}

// Square sparse matrix: round(density * dim^2) positions sampled without
// replacement, values i.i.d. uniform on [-1, 1].
inline SparseMatrix random_sparse(SeededRng& rng, std::size_t dim, double density) {
    if (density <= 0.0 || density > 1.0)
        throw ParameterError("random_sparse: density must be in (0, 1]");
    if (dim == 0) throw ParameterError("random_sparse: dim must be positive");
    const auto total = static_cast<std::uint64_t>(dim) * static_cast<std::uint64_t>(dim);
    const auto nnz = static_cast<std::uint64_t>(
        std::llround(density * static_cast<double>(total)));
    auto positions = rng.sample_without_replacement(total, nnz);
    std::vector<SparseEntry> entries;
    entries.reserve(positions.size());
    for (auto pos : positions) {
        entries.push_back({static_cast<std::size_t>(pos / dim),
                           static_cast<std::size_t>(pos % dim),
                           rng.uniform(-1.0, 1.0)});
    }
    return SparseMatrix(dim, std::move(entries), density);
}

}  // namespace bdesn
