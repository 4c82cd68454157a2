// Deep MLP classifier head: softmax cross-entropy loss with L2 weight decay,
// inverted dropout on hidden activations, exact backprop, Adam training.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "activation.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace bdesn {

struct MlpModel {
    std::vector<std::size_t> layer_sizes;  // [d, u_1, ..., u_{L-1}, C]
    std::vector<Matrix> weights;           // weights[l]: layer_sizes[l] x layer_sizes[l+1]
    std::vector<std::vector<double>> biases;
    Activation hidden_activation = Activation::Relu;
    double dropout_rate = 0.0;  // in [0, 1)
    double l2_coeff = 0.0;

    std::size_t n_layers() const { return weights.size(); }
    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t n_classes() const { return layer_sizes.back(); }
};

namespace detail {
constexpr std::uint64_t kStreamMlpInit = 11;
constexpr std::uint64_t kStreamMlpShuffle = 12;
constexpr std::uint64_t kStreamMlpDropout = 13;
}  // namespace detail

// Uniform init scaled by 1/sqrt(fan-in); biases start at zero.
inline MlpModel mlp_init(std::vector<std::size_t> layer_sizes, double dropout_rate,
                         double l2_coeff, std::uint64_t seed,
                         Activation hidden_activation = Activation::Relu) {
    if (layer_sizes.size() < 2)
        throw ParameterError("mlp_init: need at least input and output layer sizes");
    for (auto s : layer_sizes)
        if (s == 0) throw ParameterError("mlp_init: zero layer size");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ParameterError("mlp_init: dropout_rate must be in [0, 1)");
    if (l2_coeff < 0.0) throw ParameterError("mlp_init: l2_coeff must be >= 0");

    MlpModel m;
    m.layer_sizes = std::move(layer_sizes);
    m.hidden_activation = hidden_activation;
    m.dropout_rate = dropout_rate;
    m.l2_coeff = l2_coeff;
    SeededRng rng(seed, detail::kStreamMlpInit);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const std::size_t fan_in = m.layer_sizes[l];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        m.weights.push_back(random_dense(rng, fan_in, m.layer_sizes[l + 1], scale));
        m.biases.emplace_back(m.layer_sizes[l + 1], 0.0);
    }
    return m;
}

enum class MlpMode { Train, Eval };

// Everything backprop needs from a forward pass.
struct MlpForward {
    Matrix logits;                         // batch x C
    std::vector<Matrix> preactivations;    // per hidden layer, batch x units
    std::vector<Matrix> activations;       // post-activation, post-dropout
    std::vector<Matrix> dropout_masks;     // entries in {0, 1/keep}; empty in eval mode
};

// Train mode applies inverted dropout to hidden activations (scaled by the
// keep probability at train time, so eval needs no correction); rng is
// required only when masks are actually drawn. Mask draws are row-major per
// hidden layer, so a fixed rng stream reproduces the pass exactly.
inline MlpForward mlp_forward(const MlpModel& m, const Matrix& x, MlpMode mode,
                              SeededRng* rng = nullptr) {
    if (x.cols() != m.input_dim())
        throw ShapeError("mlp_forward: input width does not match model");
    const bool dropping = mode == MlpMode::Train && m.dropout_rate > 0.0;
    if (dropping && rng == nullptr)
        throw ParameterError("mlp_forward: train-mode dropout requires an rng");

    MlpForward cache;
    const double keep = 1.0 - m.dropout_rate;
    Matrix current = x;
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        Matrix z = matmul(current, m.weights[l]);
        for (std::size_t i = 0; i < z.rows(); ++i) {
            double* row = z.row(i);
            for (std::size_t j = 0; j < z.cols(); ++j) row[j] += m.biases[l][j];
        }
        if (l + 1 == m.n_layers()) {
            cache.logits = std::move(z);
            break;
        }
        Matrix a(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.size(); ++i)
            a.data()[i] = apply_activation(m.hidden_activation, z.data()[i]);
        if (dropping) {
            Matrix mask(a.rows(), a.cols());
            for (std::size_t i = 0; i < mask.size(); ++i) {
                const bool keep_unit = rng->uniform01() >= m.dropout_rate;
                mask.data()[i] = keep_unit ? 1.0 / keep : 0.0;
                a.data()[i] *= mask.data()[i];
            }
            cache.dropout_masks.push_back(std::move(mask));
        }
        cache.preactivations.push_back(std::move(z));
        cache.activations.push_back(a);
        current = std::move(a);
    }
    return cache;
}

// Row-wise softmax probabilities, log-sum-exp stabilized.
inline Matrix softmax(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* in = logits.row(i);
        double* out = p.row(i);
        double peak = in[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) peak = std::max(peak, in[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            out[j] = std::exp(in[j] - peak);
            total += out[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) out[j] /= total;
    }
    return p;
}

// Mean softmax cross-entropy over the batch (no penalty term).
inline double cross_entropy(const Matrix& logits, const std::vector<std::size_t>& labels) {
    if (logits.rows() != labels.size())
        throw ShapeError("cross_entropy: logit and label counts differ");
    if (logits.rows() == 0) throw InputError("cross_entropy: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* row = logits.row(i);
        if (labels[i] >= logits.cols())
            throw InputError("cross_entropy: label index out of range");
        double peak = row[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) peak = std::max(peak, row[j]);
        double lse = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) lse += std::exp(row[j] - peak);
        total += peak + std::log(lse) - row[labels[i]];
    }
    return total / static_cast<double>(logits.rows());
}

inline double l2_penalty(const MlpModel& m) {
    double sum = 0.0;
    for (const auto& w : m.weights)
        for (std::size_t i = 0; i < w.size(); ++i) sum += w.data()[i] * w.data()[i];
    return m.l2_coeff * sum;
}

// Training objective: mean cross-entropy plus the L2 term (biases excluded).
inline double loss(const Matrix& logits, const std::vector<std::size_t>& labels,
                   const MlpModel& m) {
    return cross_entropy(logits, labels) + l2_penalty(m);
}

struct MlpGradients {
    std::vector<Matrix> d_weights;
    std::vector<std::vector<double>> d_biases;
    double cross_entropy = 0.0;
    double objective = 0.0;  // cross-entropy + L2 penalty
};

// Exact backprop of loss(). Runs its own forward pass so that in train mode
// the sampled dropout mask and the gradients belong to the same rng draw.
inline MlpGradients gradients(const MlpModel& m, const Matrix& x,
                              const std::vector<std::size_t>& labels, MlpMode mode,
                              SeededRng* rng = nullptr) {
    if (x.rows() != labels.size())
        throw ShapeError("gradients: input and label counts differ");
    MlpForward fwd = mlp_forward(m, x, mode, rng);

    MlpGradients g;
    g.cross_entropy = cross_entropy(fwd.logits, labels);
    g.objective = g.cross_entropy + l2_penalty(m);
    g.d_weights.resize(m.n_layers());
    g.d_biases.resize(m.n_layers());

    const double inv_batch = 1.0 / static_cast<double>(x.rows());
    Matrix delta = softmax(fwd.logits);
    for (std::size_t i = 0; i < x.rows(); ++i) delta(i, labels[i]) -= 1.0;
    for (std::size_t i = 0; i < delta.size(); ++i) delta.data()[i] *= inv_batch;

    for (std::size_t l = m.n_layers(); l-- > 0;) {
        const Matrix& input = l == 0 ? x : fwd.activations[l - 1];
        g.d_weights[l] = matmul_tn(input, delta);
        for (std::size_t i = 0; i < g.d_weights[l].size(); ++i)
            g.d_weights[l].data()[i] += 2.0 * m.l2_coeff * m.weights[l].data()[i];
        auto& db = g.d_biases[l];
        db.assign(m.layer_sizes[l + 1], 0.0);
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            const double* row = delta.row(i);
            for (std::size_t j = 0; j < delta.cols(); ++j) db[j] += row[j];
        }
        if (l == 0) break;
        Matrix prev = matmul_nt(delta, m.weights[l]);
        const Matrix& pre = fwd.preactivations[l - 1];
        for (std::size_t i = 0; i < prev.size(); ++i)
            prev.data()[i] *= activation_derivative(m.hidden_activation, pre.data()[i]);
        if (!fwd.dropout_masks.empty())
            for (std::size_t i = 0; i < prev.size(); ++i)
                prev.data()[i] *= fwd.dropout_masks[l - 1].data()[i];
        delta = std::move(prev);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainLog {
    struct Entry {
        std::size_t epoch;  // 1-based
        double train_loss;  // mean per-batch cross-entropy, L2 term excluded
        std::optional<double> val_loss;
    };
    std::vector<Entry> entries;
};

// Two- or three-column CSV (epoch, train_loss[, val_loss]); the logged loss
// is pure cross-entropy without the L2 penalty.
inline void write_train_log(std::ostream& out, const TrainLog& log) {
    const bool with_val = !log.entries.empty() && log.entries.front().val_loss.has_value();
    out << (with_val ? "epoch,train_loss,val_loss" : "epoch,train_loss") << '\n';
    for (const auto& e : log.entries) {
        out << e.epoch << ',' << format_value(e.train_loss);
        if (with_val && e.val_loss) out << ',' << format_value(*e.val_loss);
        out << '\n';
    }
}

struct MlpTrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    // optional validation set scored in eval mode after each epoch
    const Matrix* val_x = nullptr;
    const std::vector<std::size_t>* val_labels = nullptr;
    // early stopping on validation loss; 0 disables
    std::size_t patience = 0;
};

// Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) over seeded shuffled
// mini-batches. Deterministic: same seed, same data, same result.
inline std::pair<MlpModel, TrainLog> train_mlp(MlpModel m, const Matrix& x,
                                               const std::vector<std::size_t>& labels,
                                               const MlpTrainConfig& cfg) {
    if (cfg.epochs == 0) throw ParameterError("train_mlp: epochs must be >= 1");
    if (cfg.batch_size == 0) throw ParameterError("train_mlp: batch_size must be >= 1");
    if (x.rows() != labels.size())
        throw ShapeError("train_mlp: input and label counts differ");
    if (x.rows() == 0) throw InputError("train_mlp: empty training set");
    if ((cfg.val_x == nullptr) != (cfg.val_labels == nullptr))
        throw ParameterError("train_mlp: validation features and labels must come together");
    if (cfg.patience > 0 && cfg.val_x == nullptr)
        throw ParameterError("train_mlp: early stopping needs a validation set");

    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const std::size_t n = x.rows();
    const std::size_t batch = std::min(cfg.batch_size, n);

    std::vector<Matrix> adam_m, adam_v;
    std::vector<std::vector<double>> adam_mb, adam_vb;
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        adam_m.emplace_back(m.weights[l].rows(), m.weights[l].cols());
        adam_v.emplace_back(m.weights[l].rows(), m.weights[l].cols());
        adam_mb.emplace_back(m.biases[l].size(), 0.0);
        adam_vb.emplace_back(m.biases[l].size(), 0.0);
    }

    SeededRng rng_shuffle(cfg.seed, detail::kStreamMlpShuffle);
    SeededRng rng_dropout(cfg.seed, detail::kStreamMlpDropout);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainLog log;
    double step_count = 0.0;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng_shuffle.shuffle(order);
        double epoch_ce = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            Matrix bx(count, x.cols());
            std::vector<std::size_t> by(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = order[start + i];
                const double* srow = x.row(src);
                double* drow = bx.row(i);
                for (std::size_t j = 0; j < x.cols(); ++j) drow[j] = srow[j];
                by[i] = labels[src];
            }
            MlpGradients g = gradients(m, bx, by, MlpMode::Train, &rng_dropout);
            if (!std::isfinite(g.objective))
                throw DivergenceError("train_mlp: non-finite training loss", epoch,
                                      cfg.learning_rate);
            epoch_ce += g.cross_entropy * static_cast<double>(count);

            step_count += 1.0;
            const double corr1 = 1.0 - std::pow(kBeta1, step_count);
            const double corr2 = 1.0 - std::pow(kBeta2, step_count);
            for (std::size_t l = 0; l < m.n_layers(); ++l) {
                double* w = m.weights[l].data();
                const double* gw = g.d_weights[l].data();
                double* mm = adam_m[l].data();
                double* vv = adam_v[l].data();
                for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
                    mm[i] = kBeta1 * mm[i] + (1.0 - kBeta1) * gw[i];
                    vv[i] = kBeta2 * vv[i] + (1.0 - kBeta2) * gw[i] * gw[i];
                    w[i] -= cfg.learning_rate * (mm[i] / corr1) /
                            (std::sqrt(vv[i] / corr2) + kEps);
                }
                for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
                    double& mm2 = adam_mb[l][i];
                    double& vv2 = adam_vb[l][i];
                    const double gb = g.d_biases[l][i];
                    mm2 = kBeta1 * mm2 + (1.0 - kBeta1) * gb;
                    vv2 = kBeta2 * vv2 + (1.0 - kBeta2) * gb * gb;
                    m.biases[l][i] -= cfg.learning_rate * (mm2 / corr1) /
                                      (std::sqrt(vv2 / corr2) + kEps);
                }
            }
        }

        TrainLog::Entry entry;
        entry.epoch = epoch;
        entry.train_loss = epoch_ce / static_cast<double>(n);
        if (cfg.val_x != nullptr) {
            MlpForward fwd = mlp_forward(m, *cfg.val_x, MlpMode::Eval);
            entry.val_loss = cross_entropy(fwd.logits, *cfg.val_labels);
        }
        log.entries.push_back(entry);

        if (cfg.patience > 0) {
            if (*entry.val_loss < best_val) {
                best_val = *entry.val_loss;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }
    }
    return {std::move(m), std::move(log)};
}

}  // namespace bdesn
