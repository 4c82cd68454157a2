// Dataset ingestion and persistence in the canonical CSV format, mean
// imputation, classification metrics, and synthetic task generators.
//
// Canonical format: UTF-8, comma-delimited, LF line endings, header
//   series_id,label,t,x1,...,xV
// one row per timestep, rows of a series contiguous, t = 0,1,2,... within
// each series, missing values written as the literal NaN, floats serialized
// with 17 significant digits so a save/load round trip is bit exact.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace bdesn {

struct TimeSeries {
    std::string id;
    std::string label;
    Matrix values;  // T x V, quiet NaN marks a missing entry

    std::size_t length() const { return values.rows(); }
    std::size_t n_vars() const { return values.cols(); }
};

struct Dataset {
    std::vector<TimeSeries> train;
    std::vector<TimeSeries> test;
    std::size_t n_vars = 0;
    std::vector<std::string> classes;  // first-appearance order, train split first
};

// ---------------------------------------------------------------------------
// Serialization helpers
// ---------------------------------------------------------------------------

inline std::string format_value(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_value(const std::string& field, std::size_t line_no) {
    if (field == "NaN") return std::numeric_limits<double>::quiet_NaN();
    double out = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw FormatError("unparseable numeric field '" + field + "'", line_no);
    if (!std::isfinite(out))
        throw FormatError("non-finite value '" + field + "'", line_no);
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string expected_header(std::size_t n_vars) {
    std::string h = "series_id,label,t";
    for (std::size_t v = 1; v <= n_vars; ++v) h += ",x" + std::to_string(v);
    return h;
}

}  // namespace detail

// Reads one split. Returns the series in file order and sets n_vars.
inline std::vector<TimeSeries> load_split(const std::string& path, std::size_t& n_vars_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw InputError("empty dataset file: " + path);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv(line);
    if (header.size() < 4 || header[0] != "series_id" || header[1] != "label" ||
        header[2] != "t")
        throw FormatError("bad header, expected series_id,label,t,x1,...,xV", line_no);
    const std::size_t n_vars = header.size() - 3;
    for (std::size_t v = 0; v < n_vars; ++v)
        if (header[3 + v] != "x" + std::to_string(v + 1))
            throw FormatError("bad header column '" + header[3 + v] + "'", line_no);

    std::vector<TimeSeries> series;
    std::unordered_set<std::string> finished;
    std::string current_id;
    std::string current_label;
    std::vector<double> current_values;
    std::size_t current_t = 0;

    auto flush = [&]() {
        if (current_id.empty()) return;
        series.push_back({current_id, current_label,
                          Matrix(current_t, n_vars, std::move(current_values))});
        finished.insert(current_id);
        current_values = {};
        current_t = 0;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_csv(line);
        if (fields.size() != n_vars + 3)
            throw FormatError("expected " + std::to_string(n_vars + 3) + " fields, got " +
                                  std::to_string(fields.size()),
                              line_no);
        const std::string& id = fields[0];
        if (id.empty()) throw FormatError("empty series_id", line_no);
        if (id != current_id) {
            if (finished.count(id))
                throw FormatError("rows of series '" + id + "' are not contiguous", line_no);
            flush();
            current_id = id;
            current_label = fields[1];
            if (current_label.empty()) throw FormatError("empty label", line_no);
        } else if (fields[1] != current_label) {
            throw FormatError("label changes within series '" + id + "'", line_no);
        }
        std::size_t t = 0;
        {
            const auto& f = fields[2];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), t);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw FormatError("unparseable timestep '" + f + "'", line_no);
        }
        if (t != current_t)
            throw FormatError("timestep " + std::to_string(t) + " out of order, expected " +
                                  std::to_string(current_t),
                              line_no);
        for (std::size_t v = 0; v < n_vars; ++v)
            current_values.push_back(parse_value(fields[3 + v], line_no));
        ++current_t;
    }
    flush();
    if (series.empty()) throw InputError("dataset split has no series: " + path);
    n_vars_out = n_vars;
    return series;
}

inline void save_split(const std::string& path, const std::vector<TimeSeries>& series,
                       std::size_t n_vars) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);
    out << detail::expected_header(n_vars) << '\n';
    for (const auto& s : series) {
        if (s.values.cols() != n_vars)
            throw ShapeError("save_split: series '" + s.id + "' has wrong variable count");
        for (std::size_t t = 0; t < s.values.rows(); ++t) {
            out << s.id << ',' << s.label << ',' << t;
            for (std::size_t v = 0; v < n_vars; ++v)
                out << ',' << format_value(s.values(t, v));
            out << '\n';
        }
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

inline std::vector<std::string> collect_classes(const Dataset& ds) {
    std::vector<std::string> classes;
    std::unordered_set<std::string> seen;
    for (const auto* split : {&ds.train, &ds.test})
        for (const auto& s : *split)
            if (seen.insert(s.label).second) classes.push_back(s.label);
    return classes;
}

inline Dataset load_dataset(const std::string& train_path, const std::string& test_path) {
    Dataset ds;
    std::size_t v_train = 0, v_test = 0;
    ds.train = load_split(train_path, v_train);
    ds.test = load_split(test_path, v_test);
    if (v_train != v_test)
        throw InputError("train and test splits disagree on variable count (" +
                         std::to_string(v_train) + " vs " + std::to_string(v_test) + ")");
    ds.n_vars = v_train;
    ds.classes = collect_classes(ds);
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& train_path,
                         const std::string& test_path) {
    save_split(train_path, ds.train, ds.n_vars);
    save_split(test_path, ds.test, ds.n_vars);
}

// ---------------------------------------------------------------------------
// Mean imputation
// ---------------------------------------------------------------------------

// Replaces every missing entry by the mean of that variable over all observed
// training timesteps. Test-split gaps also use the training means.
inline Dataset impute_mean(const Dataset& ds) {
    std::vector<double> sums(ds.n_vars, 0.0);
    std::vector<std::size_t> counts(ds.n_vars, 0);
    for (const auto& s : ds.train)
        for (std::size_t t = 0; t < s.values.rows(); ++t)
            for (std::size_t v = 0; v < ds.n_vars; ++v) {
                const double x = s.values(t, v);
                if (!std::isnan(x)) {
                    sums[v] += x;
                    ++counts[v];
                }
            }
    std::vector<double> means(ds.n_vars);
    for (std::size_t v = 0; v < ds.n_vars; ++v) {
        if (counts[v] == 0)
            throw ImputationError("variable x" + std::to_string(v + 1) +
                                  " has no observed training values");
        means[v] = sums[v] / static_cast<double>(counts[v]);
    }

    Dataset out = ds;
    for (auto* split : {&out.train, &out.test})
        for (auto& s : *split)
            for (std::size_t t = 0; t < s.values.rows(); ++t)
                for (std::size_t v = 0; v < ds.n_vars; ++v)
                    if (std::isnan(s.values(t, v))) s.values(t, v) = means[v];
    return out;
}

inline bool has_missing(const std::vector<TimeSeries>& series) {
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.values.size(); ++i)
            if (std::isnan(s.values.data()[i])) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct Metrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    std::vector<std::vector<std::uint64_t>> confusion;  // [actual][predicted]
    std::vector<std::string> classes;
};

// Binary F1 is used when a positive class is declared or the alphabet has
// exactly two classes (positive defaults to the second class); otherwise the
// macro average over the alphabet. A class with no predictions and no support
// contributes F1 = 0.
inline Metrics compute_metrics(const std::vector<std::string>& predicted,
                               const std::vector<std::string>& actual,
                               const std::vector<std::string>& classes,
                               const std::optional<std::string>& positive_class = {}) {
    if (predicted.size() != actual.size())
        throw InputError("metrics: prediction and label counts differ");
    if (predicted.empty()) throw InputError("metrics: empty inputs");
    if (classes.empty()) throw InputError("metrics: empty class alphabet");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
    auto lookup = [&](const std::string& label) {
        auto it = index.find(label);
        if (it == index.end())
            throw InputError("metrics: label '" + label + "' outside class alphabet");
        return it->second;
    };

    const std::size_t c = classes.size();
    Metrics m;
    m.classes = classes;
    m.confusion.assign(c, std::vector<std::uint64_t>(c, 0));
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const std::size_t a = lookup(actual[i]);
        const std::size_t p = lookup(predicted[i]);
        ++m.confusion[a][p];
        if (a == p) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());

    auto class_f1 = [&](std::size_t k) {
        std::uint64_t tp = m.confusion[k][k], fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == k) continue;
            fp += m.confusion[j][k];
            fn += m.confusion[k][j];
        }
        const double denom = static_cast<double>(2 * tp + fp + fn);
        return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
    };

    if (positive_class) {
        m.f1 = class_f1(lookup(*positive_class));
    } else if (c == 2) {
        m.f1 = class_f1(1);
    } else {
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) sum += class_f1(k);
        m.f1 = sum / static_cast<double>(c);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Synthetic tasks
// ---------------------------------------------------------------------------

enum class SynthKind { TwoFreqSinusoid, FirstStepMemory };

inline SynthKind synth_kind_from_name(const std::string& name) {
    if (name == "two-freq-sinusoid" || name == "two-freq") return SynthKind::TwoFreqSinusoid;
    if (name == "first-step-memory" || name == "first-step")
        return SynthKind::FirstStepMemory;
    throw ParameterError("unknown synthetic task: " + name);
}

// two-freq-sinusoid: class k in {0,1} emits sin(2 pi f_k t / length) plus
// Gaussian noise, f_0 = 2, f_1 = 5.
// first-step-memory: the class is carried only by x_0 in {-1, +1}; every
// later step is pure Gaussian noise, so a classifier must remember the very
// first input.
inline Dataset synth_task(SynthKind kind, std::size_t n_train, std::size_t n_test,
                          std::size_t length, double noise, std::uint64_t seed) {
    if (n_train == 0 || n_test == 0) throw ParameterError("synth_task: empty split");
    if (length == 0) throw ParameterError("synth_task: length must be positive");
    if (noise < 0.0) throw ParameterError("synth_task: noise must be >= 0");

    const double two_pi = 2.0 * 3.14159265358979323846;
    auto make_split = [&](std::size_t n, std::uint64_t stream, const char* prefix) {
        std::vector<TimeSeries> list;
        list.reserve(n);
        SeededRng rng(seed, stream);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t cls = i % 2;  // exact n/2 balance for even n
            Matrix values(length, 1);
            if (kind == SynthKind::TwoFreqSinusoid) {
                const double freq = cls == 0 ? 2.0 : 5.0;
                for (std::size_t t = 0; t < length; ++t)
                    values(t, 0) = std::sin(two_pi * freq * static_cast<double>(t) /
                                            static_cast<double>(length)) +
                                   noise * rng.gaussian();
            } else {
                values(0, 0) = cls == 0 ? -1.0 : 1.0;
                for (std::size_t t = 1; t < length; ++t)
                    values(t, 0) = noise * rng.gaussian();
            }
            list.push_back({std::string(prefix) + "-" + std::to_string(i),
                            std::to_string(cls), std::move(values)});
        }
        return list;
    };

    Dataset ds;
    ds.n_vars = 1;
    ds.train = make_split(n_train, 1, "train");
    ds.test = make_split(n_test, 2, "test");
    ds.classes = collect_classes(ds);
    return ds;
}

}  // namespace bdesn
