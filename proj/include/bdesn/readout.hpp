// Linear ridge readout: the ESN baseline classifier head.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"

namespace bdesn {

struct RidgeReadout {
    Matrix weights;  // (D+1) x C, last input row multiplies the constant-1 bias feature
    double lambda = 0.0;
    std::vector<std::string> classes;  // first-appearance order of the training labels
};

namespace detail {
inline Matrix append_bias_column(const Matrix& h) {
    Matrix a(h.rows(), h.cols() + 1);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double* dst = a.row(i);
        const double* src = h.row(i);
        for (std::size_t j = 0; j < h.cols(); ++j) dst[j] = src[j];
        dst[h.cols()] = 1.0;
    }
    return a;
}

inline std::vector<std::string> first_appearance_classes(
    const std::vector<std::string>& labels) {
    std::vector<std::string> classes;
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& label : labels)
        if (seen.emplace(label, classes.size()).second) classes.push_back(label);
    return classes;
}

inline std::vector<std::size_t> label_indices(const std::vector<std::string>& labels,
                                              const std::vector<std::string>& classes) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        auto it = index.find(label);
        if (it == index.end())
            throw InputError("label '" + label + "' outside class alphabet");
        out.push_back(it->second);
    }
    return out;
}

inline Matrix one_hot(const std::vector<std::size_t>& idx, std::size_t n_classes) {
    Matrix t(idx.size(), n_classes);
    for (std::size_t i = 0; i < idx.size(); ++i) t(i, idx[i]) = 1.0;
    return t;
}
}  // namespace detail

// Ridge regression of a one-hot label matrix against bias-augmented
// embeddings. lambda penalizes every weight, bias feature included.
inline RidgeReadout ridge_fit(const Matrix& h, const std::vector<std::string>& labels,
                              double lambda) {
    if (h.rows() != labels.size())
        throw ShapeError("ridge_fit: embedding and label counts differ");
    RidgeReadout r;
    r.lambda = lambda;
    r.classes = detail::first_appearance_classes(labels);
    if (h.rows() < r.classes.size())
        throw InputError("ridge_fit: fewer samples than classes");
    const auto idx = detail::label_indices(labels, r.classes);
    r.weights = solve_ridge(detail::append_bias_column(h),
                            detail::one_hot(idx, r.classes.size()), lambda);
    return r;
}

// Argmax over the C output columns; ties break toward the lowest class index.
inline std::vector<std::string> predict_linear(const RidgeReadout& r, const Matrix& h) {
    if (h.cols() + 1 != r.weights.rows())
        throw ShapeError("predict_linear: embedding width does not match readout");
    Matrix scores = matmul(detail::append_bias_column(h), r.weights);
    std::vector<std::string> out;
    out.reserve(h.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        out.push_back(r.classes[best]);
    }
    return out;
}

}  // namespace bdesn
