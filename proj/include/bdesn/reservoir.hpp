// Fixed random reservoirs and their unidirectional / bidirectional
// final-state embeddings. State update: h_t = f(W_rec h_{t-1} + W_in x_t).
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "activation.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace bdesn {

struct Reservoir {
    std::size_t n_units = 0;    // N
    std::size_t input_dim = 0;  // V
    SparseMatrix w_rec;         // N x N, rescaled to the requested spectral radius
    Matrix w_in;                // N x V, uniform on [-input_scale, input_scale]
    double spectral_radius = 0.0;
    double input_scale = 0.0;
    double density = 0.0;
    Activation activation = Activation::Tanh;
    std::uint64_t seed = 0;
};

struct StateTrajectory {
    Matrix states;  // T x N, row t is h_{t+1}

    std::vector<double> last() const {
        std::vector<double> h(states.cols());
        const double* row = states.row(states.rows() - 1);
        for (std::size_t i = 0; i < states.cols(); ++i) h[i] = row[i];
        return h;
    }
};

struct BiEmbedding {
    std::vector<double> forward;       // h_T
    std::vector<double> backward;      // h'_T from the reversed input
    std::vector<double> concatenated;  // [forward; backward]
};

namespace detail {
// Substream ids for deriving the reservoir's independent weight draws.
constexpr std::uint64_t kStreamInputWeights = 1;
constexpr std::uint64_t kStreamRecurrentBase = 2;
}  // namespace detail

// Draws the sparse recurrent matrix and rescales it so its measured spectral
// radius equals rho (rho = 0 zeroes it). A draw whose radius underflows is
// retried on the next substream; persistent failure is a degenerate draw.
inline Reservoir build_reservoir(std::size_t n_units, double rho, double omega,
                                 double density, std::size_t input_dim,
                                 std::uint64_t seed,
                                 Activation activation = Activation::Tanh) {
    if (n_units == 0) throw ParameterError("build_reservoir: n_units must be >= 1");
    if (input_dim == 0) throw ParameterError("build_reservoir: input_dim must be >= 1");
    if (rho < 0.0) throw ParameterError("build_reservoir: rho must be >= 0");
    if (omega <= 0.0) throw ParameterError("build_reservoir: omega must be positive");
    if (density <= 0.0 || density > 1.0)
        throw ParameterError("build_reservoir: density must be in (0, 1]");

    Reservoir res;
    res.n_units = n_units;
    res.input_dim = input_dim;
    res.spectral_radius = rho;
    res.input_scale = omega;
    res.density = density;
    res.activation = activation;
    res.seed = seed;

    {
        SeededRng rng_in(seed, detail::kStreamInputWeights);
        res.w_in = random_dense(rng_in, n_units, input_dim, omega);
    }

    constexpr int kMaxAttempts = 8;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        SeededRng rng_rec(seed, detail::kStreamRecurrentBase + attempt);
        SparseMatrix drawn = random_sparse(rng_rec, n_units, density);
        if (rho == 0.0) {
            drawn.scale(0.0);
            res.w_rec = std::move(drawn);
            return res;
        }
        const double measured = spectral_radius(drawn, 1e-10, 600000);
        if (measured > 1e-12) {
            drawn.scale(rho / measured);
            res.w_rec = std::move(drawn);
            return res;
        }
    }
    throw DegenerateDrawError(
        "build_reservoir: drawn recurrent matrix has zero spectral radius but rho > 0");
}

inline std::vector<double> step(const Reservoir& res, const std::vector<double>& h_prev,
                                const std::vector<double>& x) {
    if (h_prev.size() != res.n_units)
        throw ShapeError("step: state size does not match reservoir");
    if (x.size() != res.input_dim)
        throw ShapeError("step: input size does not match reservoir");
    std::vector<double> pre(res.n_units, 0.0);
    res.w_rec.matvec(h_prev.data(), pre.data());
    for (std::size_t i = 0; i < res.n_units; ++i) {
        const double* wi = res.w_in.row(i);
        double acc = pre[i];
        for (std::size_t j = 0; j < res.input_dim; ++j) acc += wi[j] * x[j];
        pre[i] = apply_activation(res.activation, acc);
    }
    return pre;
}

namespace detail {
// One state update writing into h, with scratch for the recurrent product.
inline void step_inplace(const Reservoir& res, std::vector<double>& h,
                         const double* x, std::vector<double>& scratch) {
    res.w_rec.matvec(h.data(), scratch.data());
    for (std::size_t i = 0; i < res.n_units; ++i) {
        const double* wi = res.w_in.row(i);
        double acc = scratch[i];
        for (std::size_t j = 0; j < res.input_dim; ++j) acc += wi[j] * x[j];
        h[i] = apply_activation(res.activation, acc);
    }
}
}  // namespace detail

// Final state only; avoids materializing the whole trajectory.
inline std::vector<double> final_state(const Reservoir& res, const Matrix& series,
                                       std::vector<double> h0 = {}) {
    if (series.rows() == 0) throw InputError("final_state: empty series");
    if (series.cols() != res.input_dim)
        throw ShapeError("final_state: series variable count does not match reservoir");
    std::vector<double> h = h0.empty() ? std::vector<double>(res.n_units, 0.0) : std::move(h0);
    if (h.size() != res.n_units)
        throw ShapeError("final_state: initial state size does not match reservoir");
    std::vector<double> scratch(res.n_units);
    for (std::size_t t = 0; t < series.rows(); ++t)
        detail::step_inplace(res, h, series.row(t), scratch);
    return h;
}

inline StateTrajectory run(const Reservoir& res, const Matrix& series,
                           std::vector<double> h0 = {}) {
    if (series.rows() == 0) throw InputError("run: empty series");
    if (series.cols() != res.input_dim)
        throw ShapeError("run: series variable count does not match reservoir");
    std::vector<double> h = h0.empty() ? std::vector<double>(res.n_units, 0.0) : std::move(h0);
    if (h.size() != res.n_units)
        throw ShapeError("run: initial state size does not match reservoir");
    StateTrajectory traj;
    traj.states = Matrix(series.rows(), res.n_units);
    std::vector<double> scratch(res.n_units);
    for (std::size_t t = 0; t < series.rows(); ++t) {
        detail::step_inplace(res, h, series.row(t), scratch);
        double* out = traj.states.row(t);
        for (std::size_t i = 0; i < res.n_units; ++i) out[i] = h[i];
    }
    return traj;
}

inline StateTrajectory run(const Reservoir& res, const TimeSeries& series,
                           std::vector<double> h0 = {}) {
    return run(res, series.values, std::move(h0));
}

inline Matrix reversed(const Matrix& series) {
    Matrix out(series.rows(), series.cols());
    for (std::size_t t = 0; t < series.rows(); ++t) {
        const double* src = series.row(series.rows() - 1 - t);
        double* dst = out.row(t);
        for (std::size_t v = 0; v < series.cols(); ++v) dst[v] = src[v];
    }
    return out;
}

// Runs the same reservoir over the series and its time reversal, both from
// the zero state, and concatenates the two final states.
inline BiEmbedding embed_bidirectional(const Reservoir& res, const Matrix& series) {
    BiEmbedding e;
    e.forward = final_state(res, series);
    e.backward = final_state(res, reversed(series));
    e.concatenated.reserve(2 * res.n_units);
    e.concatenated.insert(e.concatenated.end(), e.forward.begin(), e.forward.end());
    e.concatenated.insert(e.concatenated.end(), e.backward.begin(), e.backward.end());
    return e;
}

inline BiEmbedding embed_bidirectional(const Reservoir& res, const TimeSeries& series) {
    return embed_bidirectional(res, series.values);
}

// ---------------------------------------------------------------------------
// Serialization: hyperparameters only, weights are regenerated from the seed.
// ---------------------------------------------------------------------------

inline void save_reservoir(std::ostream& out, const Reservoir& res) {
    out << "reservoir v1\n";
    out << "seed " << res.seed << '\n';
    out << "n_units " << res.n_units << '\n';
    out << "input_dim " << res.input_dim << '\n';
    out << "rho " << format_value(res.spectral_radius) << '\n';
    out << "omega " << format_value(res.input_scale) << '\n';
    out << "density " << format_value(res.density) << '\n';
    out << "activation " << activation_name(res.activation) << '\n';
}

inline Reservoir load_reservoir(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "reservoir v1")
        throw FormatError("expected 'reservoir v1' header", 1);
    std::uint64_t seed = 0;
    std::size_t n_units = 0, input_dim = 0;
    double rho = -1.0, omega = 0.0, density = 0.0;
    std::string activation = "tanh";
    for (int i = 0; i < 7; ++i) {
        if (!std::getline(in, line)) throw FormatError("truncated reservoir block", i + 2);
        std::istringstream ls(line);
        std::string key, value;
        ls >> key >> value;
        if (key == "seed") seed = std::stoull(value);
        else if (key == "n_units") n_units = std::stoul(value);
        else if (key == "input_dim") input_dim = std::stoul(value);
        else if (key == "rho") rho = std::stod(value);
        else if (key == "omega") omega = std::stod(value);
        else if (key == "density") density = std::stod(value);
        else if (key == "activation") activation = value;
        else throw FormatError("unknown reservoir key '" + key + "'", i + 2);
    }
    return build_reservoir(n_units, rho, omega, density, input_dim, seed,
                           activation_from_name(activation));
}

}  // namespace bdesn
