// The two end-to-end models. ESN baseline: standardize -> unidirectional
// final state -> ridge readout. BDESN: standardize -> bidirectional
// embedding -> PCA -> MLP. Fitting touches only the training split; the
// returned models are frozen and predictions are pure.
#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "mlp.hpp"
#include "pca.hpp"
#include "readout.hpp"
#include "reservoir.hpp"

namespace bdesn {

// Per-variable z-score parameters, fit on training inputs pooled over all
// timesteps. Constant variables get std = 1 so they pass through centered.
struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

inline StandardizationStats fit_standardization(const std::vector<TimeSeries>& train,
                                                std::size_t n_vars) {
    StandardizationStats stats;
    stats.mean.assign(n_vars, 0.0);
    stats.stddev.assign(n_vars, 0.0);
    std::size_t total = 0;
    for (const auto& s : train) {
        if (s.values.cols() != n_vars)
            throw ShapeError("fit_standardization: inconsistent variable count");
        for (std::size_t t = 0; t < s.values.rows(); ++t)
            for (std::size_t v = 0; v < n_vars; ++v) stats.mean[v] += s.values(t, v);
        total += s.values.rows();
    }
    if (total < 1) throw InputError("fit_standardization: no timesteps");
    for (auto& m : stats.mean) m /= static_cast<double>(total);
    for (const auto& s : train)
        for (std::size_t t = 0; t < s.values.rows(); ++t)
            for (std::size_t v = 0; v < n_vars; ++v) {
                const double c = s.values(t, v) - stats.mean[v];
                stats.stddev[v] += c * c;
            }
    for (auto& sd : stats.stddev) {
        sd = total > 1 ? std::sqrt(sd / static_cast<double>(total - 1)) : 0.0;
        if (!(sd > 0.0)) sd = 1.0;
    }
    return stats;
}

inline Matrix standardize(const StandardizationStats& stats, const Matrix& values) {
    if (values.cols() != stats.mean.size())
        throw InputError("standardize: series variable count does not match training");
    Matrix out = values;
    for (std::size_t t = 0; t < out.rows(); ++t) {
        double* row = out.row(t);
        for (std::size_t v = 0; v < out.cols(); ++v)
            row[v] = (row[v] - stats.mean[v]) / stats.stddev[v];
    }
    return out;
}

struct EsnModel {
    Reservoir reservoir;
    StandardizationStats preprocessing;
    RidgeReadout readout;

    const std::vector<std::string>& classes() const { return readout.classes; }
};

struct BdesnModel {
    Reservoir reservoir;
    StandardizationStats preprocessing;
    PcaModel pca;
    MlpModel mlp;
    std::vector<std::string> class_labels;

    const std::vector<std::string>& classes() const { return class_labels; }
};

struct EsnConfig {
    std::size_t n_units = 300;
    double rho = 0.9;
    double omega = 0.2;
    double density = 0.1;
    double lambda = 1.0;
    std::uint64_t seed = 0;
};

struct BdesnConfig {
    std::size_t n_units = 300;
    double rho = 0.9;
    double omega = 0.2;
    double density = 0.1;
    std::size_t d = 20;
    std::vector<std::size_t> hidden = {64};
    double dropout = 0.1;
    double l2 = 1e-4;
    double learning_rate = 1e-3;
    std::size_t epochs = 500;
    std::size_t batch_size = 25;  // 0 means full batch
    std::uint64_t seed = 0;
};

namespace detail {

inline void check_trainable(const std::vector<TimeSeries>& train) {
    if (train.empty()) throw InputError("fit: empty training set");
    if (has_missing(train))
        throw InputError("fit: training data contains missing values; impute first");
}

inline std::vector<std::string> train_labels(const std::vector<TimeSeries>& train) {
    std::vector<std::string> labels;
    labels.reserve(train.size());
    for (const auto& s : train) labels.push_back(s.label);
    return labels;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ESN baseline
// ---------------------------------------------------------------------------

inline std::vector<double> esn_embedding(const EsnModel& model, const Matrix& values) {
    return final_state(model.reservoir, standardize(model.preprocessing, values));
}

inline EsnModel fit_esn(const std::vector<TimeSeries>& train, const EsnConfig& cfg) {
    detail::check_trainable(train);
    const std::size_t n_vars = train.front().values.cols();

    EsnModel model;
    model.preprocessing = fit_standardization(train, n_vars);
    model.reservoir =
        build_reservoir(cfg.n_units, cfg.rho, cfg.omega, cfg.density, n_vars, cfg.seed);

    Matrix embeddings(train.size(), cfg.n_units);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto h = esn_embedding(model, train[i].values);
        double* row = embeddings.row(i);
        for (std::size_t j = 0; j < cfg.n_units; ++j) row[j] = h[j];
    }
    model.readout = ridge_fit(embeddings, detail::train_labels(train), cfg.lambda);
    if (model.readout.classes.size() < 2)
        throw InputError("fit_esn: need at least 2 classes");
    return model;
}

inline std::vector<std::string> predict(const EsnModel& model,
                                        const std::vector<TimeSeries>& series) {
    Matrix embeddings(series.size(), model.reservoir.n_units);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto h = esn_embedding(model, series[i].values);
        double* row = embeddings.row(i);
        for (std::size_t j = 0; j < h.size(); ++j) row[j] = h[j];
    }
    return predict_linear(model.readout, embeddings);
}

inline std::string predict(const EsnModel& model, const TimeSeries& series) {
    return predict(model, std::vector<TimeSeries>{series}).front();
}

// ---------------------------------------------------------------------------
// BDESN
// ---------------------------------------------------------------------------

inline BiEmbedding bdesn_embedding(const BdesnModel& model, const Matrix& values) {
    return embed_bidirectional(model.reservoir, standardize(model.preprocessing, values));
}

namespace detail {
inline Matrix bidirectional_embeddings(const Reservoir& res,
                                       const StandardizationStats& stats,
                                       const std::vector<TimeSeries>& series) {
    Matrix embeddings(series.size(), 2 * res.n_units);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const BiEmbedding e = embed_bidirectional(res, standardize(stats, series[i].values));
        double* row = embeddings.row(i);
        for (std::size_t j = 0; j < e.concatenated.size(); ++j) row[j] = e.concatenated[j];
    }
    return embeddings;
}
}  // namespace detail

inline std::pair<BdesnModel, TrainLog> fit_bdesn(const std::vector<TimeSeries>& train,
                                                 const BdesnConfig& cfg) {
    detail::check_trainable(train);
    const std::size_t n_vars = train.front().values.cols();
    if (cfg.d < 1 || cfg.d > 2 * cfg.n_units || cfg.d > train.size())
        throw ParameterError("fit_bdesn: d must satisfy 1 <= d <= min(2N, train count)");

    BdesnModel model;
    model.preprocessing = fit_standardization(train, n_vars);
    model.reservoir =
        build_reservoir(cfg.n_units, cfg.rho, cfg.omega, cfg.density, n_vars, cfg.seed);

    const Matrix embeddings =
        detail::bidirectional_embeddings(model.reservoir, model.preprocessing, train);
    model.pca = pca_fit(embeddings, cfg.d);
    const Matrix projected = model.pca.transform(embeddings);

    const auto labels = detail::train_labels(train);
    model.class_labels = detail::first_appearance_classes(labels);
    if (model.class_labels.size() < 2) throw InputError("fit_bdesn: need at least 2 classes");
    const auto label_idx = detail::label_indices(labels, model.class_labels);

    std::vector<std::size_t> layer_sizes;
    layer_sizes.push_back(cfg.d);
    layer_sizes.insert(layer_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    layer_sizes.push_back(model.class_labels.size());

    MlpModel mlp = mlp_init(layer_sizes, cfg.dropout, cfg.l2, cfg.seed);
    MlpTrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size == 0 ? train.size() : cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = cfg.seed;
    auto [trained, log] = train_mlp(std::move(mlp), projected, label_idx, tc);
    model.mlp = std::move(trained);
    return {std::move(model), std::move(log)};
}

inline std::vector<std::string> predict(const BdesnModel& model,
                                        const std::vector<TimeSeries>& series) {
    const Matrix embeddings =
        detail::bidirectional_embeddings(model.reservoir, model.preprocessing, series);
    const Matrix projected = model.pca.transform(embeddings);
    const MlpForward fwd = mlp_forward(model.mlp, projected, MlpMode::Eval);
    std::vector<std::string> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < fwd.logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < fwd.logits.cols(); ++c)
            if (fwd.logits(i, c) > fwd.logits(i, best)) best = c;
        out.push_back(model.class_labels[best]);
    }
    return out;
}

inline std::string predict(const BdesnModel& model, const TimeSeries& series) {
    return predict(model, std::vector<TimeSeries>{series}).front();
}

// ---------------------------------------------------------------------------
// Model container (single text file, format-versioned)
// ---------------------------------------------------------------------------

namespace detail {

inline void write_vector(std::ostream& out, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? " " : "") << format_value(v[i]);
    out << '\n';
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j)
            out << (j ? " " : "") << format_value(m(i, j));
        out << '\n';
    }
}

inline std::vector<double> read_vector(std::istream& in, std::size_t count,
                                       std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::vector<double> out;
    out.reserve(count);
    std::size_t pos = 0;
    while (pos < line.size()) {
        std::size_t next = line.find(' ', pos);
        if (next == std::string::npos) next = line.size();
        out.push_back(parse_value(line.substr(pos, next - pos), line_no));
        pos = next + 1;
    }
    if (out.size() != count)
        throw FormatError("expected " + std::to_string(count) + " values, got " +
                              std::to_string(out.size()),
                          line_no);
    return out;
}

inline Matrix read_matrix(std::istream& in, std::size_t rows, std::size_t cols,
                          std::size_t& line_no) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto row = read_vector(in, cols, line_no);
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = row[j];
    }
    return m;
}

inline void write_classes(std::ostream& out, const std::vector<std::string>& classes) {
    out << "classes " << classes.size() << '\n';
    for (const auto& c : classes) out << c << '\n';
}

inline std::vector<std::string> read_classes(std::istream& in, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    std::size_t count = 0;
    ls >> key >> count;
    if (key != "classes") throw FormatError("expected 'classes' section", line_no);
    std::vector<std::string> classes(count);
    for (auto& c : classes) {
        if (!std::getline(in, c)) throw FormatError("truncated class list", line_no + 1);
        ++line_no;
    }
    return classes;
}

inline void write_standardization(std::ostream& out, const StandardizationStats& s) {
    out << "standardization " << s.mean.size() << '\n';
    write_vector(out, s.mean);
    write_vector(out, s.stddev);
}

inline StandardizationStats read_standardization(std::istream& in, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    std::size_t n = 0;
    ls >> key >> n;
    if (key != "standardization")
        throw FormatError("expected 'standardization' section", line_no);
    StandardizationStats s;
    s.mean = read_vector(in, n, line_no);
    s.stddev = read_vector(in, n, line_no);
    return s;
}

}  // namespace detail

inline void save_model(std::ostream& out, const EsnModel& model) {
    out << "bdesn-model v1\n";
    out << "kind esn\n";
    detail::write_classes(out, model.readout.classes);
    detail::write_standardization(out, model.preprocessing);
    save_reservoir(out, model.reservoir);
    out << "ridge " << model.readout.weights.rows() << ' ' << model.readout.weights.cols()
        << ' ' << format_value(model.readout.lambda) << '\n';
    detail::write_matrix(out, model.readout.weights);
}

inline void save_model(std::ostream& out, const BdesnModel& model) {
    out << "bdesn-model v1\n";
    out << "kind bdesn\n";
    detail::write_classes(out, model.class_labels);
    detail::write_standardization(out, model.preprocessing);
    save_reservoir(out, model.reservoir);
    out << "pca " << model.pca.mean.size() << ' ' << model.pca.d << '\n';
    detail::write_vector(out, model.pca.mean);
    detail::write_vector(out, model.pca.eigenvalues);
    detail::write_matrix(out, model.pca.components);
    out << "mlp";
    for (auto s : model.mlp.layer_sizes) out << ' ' << s;
    out << '\n';
    out << "mlp_params " << activation_name(model.mlp.hidden_activation) << ' '
        << format_value(model.mlp.dropout_rate) << ' ' << format_value(model.mlp.l2_coeff)
        << '\n';
    for (std::size_t l = 0; l < model.mlp.n_layers(); ++l) {
        detail::write_matrix(out, model.mlp.weights[l]);
        detail::write_vector(out, model.mlp.biases[l]);
    }
}

using ModelFile = std::variant<EsnModel, BdesnModel>;

inline ModelFile load_model(std::istream& in) {
    std::size_t line_no = 0;
    std::string line;
    if (!std::getline(in, line) || line != "bdesn-model v1")
        throw FormatError("expected 'bdesn-model v1' header", 1);
    ++line_no;
    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::istringstream ks(line);
    std::string key, kind;
    ks >> key >> kind;
    if (key != "kind" || (kind != "esn" && kind != "bdesn"))
        throw FormatError("expected 'kind esn|bdesn'", line_no);

    auto classes = detail::read_classes(in, line_no);
    auto stats = detail::read_standardization(in, line_no);
    Reservoir res = load_reservoir(in);
    line_no += 8;

    if (kind == "esn") {
        if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
        ++line_no;
        std::istringstream rs(line);
        std::size_t rows = 0, cols = 0;
        double lambda = 0.0;
        std::string tag, lam;
        rs >> tag >> rows >> cols >> lam;
        if (tag != "ridge") throw FormatError("expected 'ridge' section", line_no);
        lambda = parse_value(lam, line_no);
        EsnModel model;
        model.preprocessing = std::move(stats);
        model.reservoir = std::move(res);
        model.readout.lambda = lambda;
        model.readout.classes = std::move(classes);
        model.readout.weights = detail::read_matrix(in, rows, cols, line_no);
        return model;
    }

    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::istringstream ps(line);
    std::string tag;
    std::size_t dim = 0, d = 0;
    ps >> tag >> dim >> d;
    if (tag != "pca") throw FormatError("expected 'pca' section", line_no);
    BdesnModel model;
    model.preprocessing = std::move(stats);
    model.reservoir = std::move(res);
    model.class_labels = std::move(classes);
    model.pca.d = d;
    model.pca.mean = detail::read_vector(in, dim, line_no);
    model.pca.eigenvalues = detail::read_vector(in, d, line_no);
    model.pca.components = detail::read_matrix(in, dim, d, line_no);

    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::istringstream ms(line);
    ms >> tag;
    if (tag != "mlp") throw FormatError("expected 'mlp' section", line_no);
    std::vector<std::size_t> sizes;
    std::size_t s = 0;
    while (ms >> s) sizes.push_back(s);
    if (sizes.size() < 2) throw FormatError("mlp needs at least 2 layer sizes", line_no);

    if (!std::getline(in, line)) throw FormatError("truncated model file", line_no + 1);
    ++line_no;
    std::istringstream qs(line);
    std::string act, drop, l2;
    qs >> tag >> act >> drop >> l2;
    if (tag != "mlp_params") throw FormatError("expected 'mlp_params' section", line_no);
    model.mlp.layer_sizes = sizes;
    model.mlp.hidden_activation = activation_from_name(act);
    model.mlp.dropout_rate = parse_value(drop, line_no);
    model.mlp.l2_coeff = parse_value(l2, line_no);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        model.mlp.weights.push_back(detail::read_matrix(in, sizes[l], sizes[l + 1], line_no));
        model.mlp.biases.push_back(detail::read_vector(in, sizes[l + 1], line_no));
    }
    return model;
}

inline void save_model_file(const std::string& path, const ModelFile& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path);
    std::visit([&](const auto& m) { save_model(out, m); }, model);
    if (!out.good()) throw IoError("write failed: " + path);
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    return load_model(in);
}

inline std::string model_to_string(const ModelFile& model) {
    std::ostringstream out;
    std::visit([&](const auto& m) { save_model(out, m); }, model);
    return out.str();
}

}  // namespace bdesn
