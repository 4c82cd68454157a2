// Plain-text key = value config files for the two model kinds.
//
// Recognized keys (unknown keys are rejected):
//   shared reservoir: n_units, rho, omega, density
//   esn head:         lambda
//   bdesn head:       d, hidden_layers, hidden_width, dropout, l2,
//                     learning_rate, epochs, batch_size (0 = full batch)
// Lines starting with '#' and blank lines are ignored.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "pipeline.hpp"

namespace bdesn {

enum class ModelKind { Esn, Bdesn };

inline std::string model_kind_name(ModelKind kind) {
    return kind == ModelKind::Esn ? "esn" : "bdesn";
}

inline ModelKind model_kind_from_name(const std::string& name) {
    if (name == "esn") return ModelKind::Esn;
    if (name == "bdesn") return ModelKind::Bdesn;
    throw ParameterError("unknown model kind: " + name);
}

struct ModelConfig {
    std::size_t n_units = 300;
    double rho = 0.9;
    double omega = 0.2;
    double density = 0.1;
    double lambda = 1.0;
    std::size_t d = 20;
    std::size_t hidden_layers = 1;
    std::size_t hidden_width = 64;
    double dropout = 0.1;
    double l2 = 1e-4;
    double learning_rate = 1e-3;
    std::size_t epochs = 500;
    std::size_t batch_size = 25;  // 0 means full batch
};

inline EsnConfig to_esn_config(const ModelConfig& cfg, std::uint64_t seed) {
    EsnConfig out;
    out.n_units = cfg.n_units;
    out.rho = cfg.rho;
    out.omega = cfg.omega;
    out.density = cfg.density;
    out.lambda = cfg.lambda;
    out.seed = seed;
    return out;
}

inline BdesnConfig to_bdesn_config(const ModelConfig& cfg, std::uint64_t seed) {
    BdesnConfig out;
    out.n_units = cfg.n_units;
    out.rho = cfg.rho;
    out.omega = cfg.omega;
    out.density = cfg.density;
    out.d = cfg.d;
    out.hidden.assign(cfg.hidden_layers, cfg.hidden_width);
    out.dropout = cfg.dropout;
    out.l2 = cfg.l2;
    out.learning_rate = cfg.learning_rate;
    out.epochs = cfg.epochs;
    out.batch_size = cfg.batch_size;
    out.seed = seed;
    return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline void set_config_field(ModelConfig& cfg, const std::string& key, double value) {
    auto as_count = [&](const char* what) {
        if (value < 0.0)
            throw ParameterError(std::string(what) + " must be non-negative");
        return static_cast<std::size_t>(std::llround(value));
    };
    if (key == "n_units") cfg.n_units = as_count("n_units");
    else if (key == "rho") cfg.rho = value;
    else if (key == "omega") cfg.omega = value;
    else if (key == "density") cfg.density = value;
    else if (key == "lambda") cfg.lambda = value;
    else if (key == "d") cfg.d = as_count("d");
    else if (key == "hidden_layers") cfg.hidden_layers = as_count("hidden_layers");
    else if (key == "hidden_width") cfg.hidden_width = as_count("hidden_width");
    else if (key == "dropout") cfg.dropout = value;
    else if (key == "l2") cfg.l2 = value;
    else if (key == "learning_rate") cfg.learning_rate = value;
    else if (key == "epochs") cfg.epochs = as_count("epochs");
    else if (key == "batch_size") cfg.batch_size = as_count("batch_size");
    else throw ParameterError("unknown config key: " + key);
}

// key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_kv_lines(std::istream& in,
                                                         const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw FormatError(origin + ": expected 'key = value'", line_no);
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty() || value.empty())
            throw FormatError(origin + ": empty key or value", line_no);
        if (!kv.emplace(key, value).second)
            throw FormatError(origin + ": duplicate key '" + key + "'", line_no);
    }
    return kv;
}

}  // namespace detail

inline ModelConfig parse_config(std::istream& in, const std::string& origin = "config") {
    ModelConfig cfg;
    for (const auto& [key, value] : detail::parse_kv_lines(in, origin))
        detail::set_config_field(cfg, key, parse_value(value, 0));
    return cfg;
}

inline ModelConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_config(in, path);
}

inline void write_config(std::ostream& out, const ModelConfig& cfg, ModelKind kind) {
    out << "# model: " << model_kind_name(kind) << '\n';
    out << "n_units = " << cfg.n_units << '\n';
    out << "rho = " << format_value(cfg.rho) << '\n';
    out << "omega = " << format_value(cfg.omega) << '\n';
    out << "density = " << format_value(cfg.density) << '\n';
    if (kind == ModelKind::Esn) {
        out << "lambda = " << format_value(cfg.lambda) << '\n';
        return;
    }
    out << "d = " << cfg.d << '\n';
    out << "hidden_layers = " << cfg.hidden_layers << '\n';
    out << "hidden_width = " << cfg.hidden_width << '\n';
    out << "dropout = " << format_value(cfg.dropout) << '\n';
    out << "l2 = " << format_value(cfg.l2) << '\n';
    out << "learning_rate = " << format_value(cfg.learning_rate) << '\n';
    out << "epochs = " << cfg.epochs << '\n';
    out << "batch_size = " << cfg.batch_size << '\n';
}

inline void save_config_file(const std::string& path, const ModelConfig& cfg,
                             ModelKind kind) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path);
    write_config(out, cfg, kind);
    if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace bdesn
