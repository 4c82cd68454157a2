// Random hyperparameter search over a declarative space, scored on a
// stratified inner validation split. The test split is never an input here.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "rng.hpp"

namespace bdesn {

enum class ParamKind { Uniform, LogUniform, Choice };

struct ParamSpec {
    ParamKind kind = ParamKind::Uniform;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> choices;

    static ParamSpec uniform(double lo, double hi) {
        if (!(lo <= hi)) throw ParameterError("uniform: empty range");
        return {ParamKind::Uniform, lo, hi, {}};
    }
    static ParamSpec log_uniform(double lo, double hi) {
        if (!(0.0 < lo && lo <= hi))
            throw ParameterError("loguniform: bounds must be positive and ordered");
        return {ParamKind::LogUniform, lo, hi, {}};
    }
    static ParamSpec choice(std::vector<double> values) {
        if (values.empty()) throw ParameterError("choice: empty set");
        return {ParamKind::Choice, 0.0, 0.0, std::move(values)};
    }

    double sample(SeededRng& rng) const {
        switch (kind) {
            case ParamKind::Uniform: return rng.uniform(lo, hi);
            case ParamKind::LogUniform:
                return std::exp(rng.uniform(std::log(lo), std::log(hi)));
            case ParamKind::Choice:
                return choices[static_cast<std::size_t>(rng.below(choices.size()))];
        }
        return lo;
    }
};

// Keyed by config field name; std::map keeps the sampling order fixed
// (alphabetical), which makes trial sequences reproducible.
using SearchSpace = std::map<std::string, ParamSpec>;

inline SearchSpace default_search_space(ModelKind kind) {
    SearchSpace space;
    space["rho"] = ParamSpec::log_uniform(0.5, 1.5);
    space["omega"] = ParamSpec::log_uniform(0.01, 1.0);
    space["n_units"] = ParamSpec::choice({300, 500, 800});
    space["density"] = ParamSpec::choice({0.05, 0.1, 0.25});
    if (kind == ModelKind::Esn) {
        space["lambda"] = ParamSpec::log_uniform(1e-4, 10.0);
        return space;
    }
    space["d"] = ParamSpec::choice({20, 50, 75});
    space["hidden_layers"] = ParamSpec::choice({1, 2, 3});
    space["hidden_width"] = ParamSpec::choice({32, 64, 128});
    space["dropout"] = ParamSpec::uniform(0.0, 0.5);
    space["l2"] = ParamSpec::log_uniform(1e-5, 1e-2);
    space["learning_rate"] = ParamSpec::log_uniform(1e-4, 1e-2);
    space["epochs"] = ParamSpec::choice({200, 500, 1000, 2000});
    space["batch_size"] = ParamSpec::choice({25, 50, 0});  // 0 = full batch
    return space;
}

// Space file lines:
//   <key> = uniform <lo> <hi> | loguniform <lo> <hi> | choice <v1> <v2> ...
// Keys not mentioned keep their defaults from the config struct and are not
// searched. Parsed keys must be valid config keys.
inline SearchSpace parse_space(std::istream& in, const std::string& origin = "space") {
    SearchSpace space;
    for (const auto& [key, value] : detail::parse_kv_lines(in, origin)) {
        {
            ModelConfig probe;  // validates the key name
            detail::set_config_field(probe, key, 1.0);
        }
        std::istringstream vs(value);
        std::string kind;
        vs >> kind;
        if (kind == "uniform" || kind == "loguniform") {
            double lo = 0.0, hi = 0.0;
            if (!(vs >> lo >> hi))
                throw ParameterError(origin + ": '" + key + "' needs two bounds");
            space[key] = kind == "uniform" ? ParamSpec::uniform(lo, hi)
                                           : ParamSpec::log_uniform(lo, hi);
        } else if (kind == "choice") {
            std::vector<double> values;
            double v = 0.0;
            while (vs >> v) values.push_back(v);
            space[key] = ParamSpec::choice(std::move(values));
        } else {
            throw ParameterError(origin + ": unknown sampler '" + kind + "' for key '" +
                                 key + "'");
        }
    }
    if (space.empty()) throw ParameterError(origin + ": empty search space");
    return space;
}

inline SearchSpace load_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open space file: " + path);
    return parse_space(in, path);
}

inline ModelConfig sample_config(const SearchSpace& space, SeededRng& rng) {
    ModelConfig cfg;
    for (const auto& [key, spec] : space)
        detail::set_config_field(cfg, key, spec.sample(rng));
    return cfg;
}

// ---------------------------------------------------------------------------
// Stratified split
// ---------------------------------------------------------------------------

// Returns (inner-train indices, validation indices), both ascending. Every
// class lands on both sides or a StratificationError names the offender.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<std::string>& labels, double val_fraction, SeededRng& rng) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ParameterError("stratified_split: fraction must be in (0, 1)");
    std::vector<std::string> classes = detail::first_appearance_classes(labels);
    std::vector<std::size_t> train_idx, val_idx;
    for (const auto& cls : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.size() < 2)
            throw StratificationError("class '" + cls +
                                      "' has fewer than 2 series; cannot stratify");
        rng.shuffle(members);
        std::size_t n_val = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(members.size())));
        n_val = std::max<std::size_t>(1, std::min(n_val, members.size() - 1));
        val_idx.insert(val_idx.end(), members.begin(), members.begin() + n_val);
        train_idx.insert(train_idx.end(), members.begin() + n_val, members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    return {std::move(train_idx), std::move(val_idx)};
}

// ---------------------------------------------------------------------------
// Random search
// ---------------------------------------------------------------------------

struct TrialResult {
    std::size_t index = 0;
    ModelConfig config;
    std::uint64_t seed = 0;
    bool ok = false;
    double score = -1.0;  // validation accuracy or F1
    double train_seconds = 0.0;
    std::string error;
};

struct SearchOptions {
    bool use_f1 = false;  // default validation metric is accuracy
    std::optional<std::string> positive_class;
    double val_fraction = 0.2;
    bool parallel = true;  // trials are independent; timing here is not a record
};

struct SearchResult {
    ModelConfig best;
    std::size_t best_index = 0;
    double best_score = -1.0;
    std::vector<TrialResult> trials;
};

namespace detail {
constexpr std::uint64_t kStreamSplit = 101;
constexpr std::uint64_t kStreamTrialBase = 1000;
}  // namespace detail

inline SearchResult random_search(const SearchSpace& space, std::size_t n_trials,
                                  const std::vector<TimeSeries>& train, ModelKind kind,
                                  std::uint64_t seed, const SearchOptions& options = {}) {
    if (n_trials == 0) throw ParameterError("random_search: n_trials must be >= 1");
    if (train.empty()) throw InputError("random_search: empty training set");

    const auto labels = detail::train_labels(train);
    SeededRng split_rng(seed, detail::kStreamSplit);
    auto [inner_idx, val_idx] = stratified_split(labels, options.val_fraction, split_rng);

    std::vector<TimeSeries> inner, val;
    inner.reserve(inner_idx.size());
    val.reserve(val_idx.size());
    for (auto i : inner_idx) inner.push_back(train[i]);
    for (auto i : val_idx) val.push_back(train[i]);
    std::vector<std::string> val_labels;
    for (const auto& s : val) val_labels.push_back(s.label);
    const auto alphabet = detail::first_appearance_classes(labels);

    SearchResult result;
    result.trials.resize(n_trials);

    auto run_trial = [&](std::size_t i) {
        TrialResult& trial = result.trials[i];
        trial.index = i;
        trial.seed = seed + 1 + i;
        SeededRng rng(seed, detail::kStreamTrialBase + i);
        trial.config = sample_config(space, rng);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::vector<std::string> predicted;
            if (kind == ModelKind::Esn) {
                EsnModel model = fit_esn(inner, to_esn_config(trial.config, trial.seed));
                predicted = predict(model, val);
            } else {
                auto [model, log] =
                    fit_bdesn(inner, to_bdesn_config(trial.config, trial.seed));
                predicted = predict(model, val);
            }
            const Metrics m =
                compute_metrics(predicted, val_labels, alphabet, options.positive_class);
            trial.score = options.use_f1 ? m.f1 : m.accuracy;
            trial.ok = true;
        } catch (const std::exception& e) {
            trial.ok = false;
            trial.score = -1.0;
            trial.error = e.what();
        }
        trial.train_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned n_workers =
        options.parallel ? std::max(1u, std::min<unsigned>(hw, n_trials)) : 1u;
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n_trials; ++i) run_trial(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < n_workers; ++w)
            workers.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n_trials) return;
                    run_trial(i);
                }
            });
        for (auto& worker : workers) worker.join();
    }

    bool any_ok = false;
    for (std::size_t i = 0; i < n_trials; ++i) {
        const auto& trial = result.trials[i];
        if (!trial.ok) continue;
        any_ok = true;
        if (trial.score > result.best_score) {  // strict: ties keep the earliest trial
            result.best = trial.config;
            result.best_index = i;
            result.best_score = trial.score;
        }
    }
    if (!any_ok) throw InputError("random_search: every trial failed");
    return result;
}

// One row per trial: index,seed,status,score,train_seconds,config
inline void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials,
                             ModelKind kind) {
    out << "trial,seed,status,score,train_seconds,config\n";
    for (const auto& t : trials) {
        std::ostringstream cfg;
        write_config(cfg, t.config, kind);
        std::string flat = cfg.str();
        for (auto& ch : flat)
            if (ch == '\n' || ch == ',') ch = ';';
        std::string status = t.ok ? "ok" : "failed:" + t.error;
        for (auto& ch : status)
            if (ch == '\n' || ch == ',') ch = ';';
        out << t.index << ',' << t.seed << ',' << status << ',' << format_value(t.score)
            << ',' << format_value(t.train_seconds) << ',' << flat << '\n';
    }
}

}  // namespace bdesn
