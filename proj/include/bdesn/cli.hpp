// Command-line front end. Subcommands: synth, import, search, train, eval,
// bench. Exit codes: 0 success, 1 runtime failure, 2 usage error.
#pragma once

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "benchmark.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "import.hpp"
#include "pipeline.hpp"
#include "search.hpp"

namespace bdesn::cli {

namespace detail {

inline Dataset load_and_impute(const std::string& train_path, const std::string& test_path) {
    return impute_mean(load_dataset(train_path, test_path));
}

inline std::optional<std::string> opt(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

inline void print_metrics(std::ostream& out, const Metrics& m) {
    out << "accuracy " << format_value(m.accuracy) << '\n';
    out << "f1 " << format_value(m.f1) << '\n';
    out << "confusion (rows = actual, cols = predicted)\n";
    for (std::size_t a = 0; a < m.classes.size(); ++a) {
        out << "  " << m.classes[a] << ':';
        for (std::size_t p = 0; p < m.classes.size(); ++p) out << ' ' << m.confusion[a][p];
        out << '\n';
    }
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Bidirectional deep-readout echo state networks for multivariate "
                 "time-series classification"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark task");
    std::string synth_task_name;
    std::size_t synth_n_train = 200, synth_n_test = 200, synth_length = 100;
    double synth_noise = 0.2;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--task", synth_task_name, "two-freq-sinusoid | first-step-memory")
        ->required();
    synth->add_option("--n-train", synth_n_train, "training series count");
    synth->add_option("--n-test", synth_n_test, "test series count");
    synth->add_option("--length", synth_length, "series length T");
    synth->add_option("--noise", synth_noise, "Gaussian noise sigma");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory for train.csv/test.csv")
        ->required();

    // ---- import ----
    auto* import_cmd = app.add_subcommand("import", "Convert a public archive to canonical CSV");
    std::string import_format, import_train, import_test, import_out;
    import_cmd->add_option("--format", import_format, "archive format (jpvow)")->required();
    import_cmd->add_option("--train-in", import_train, "archive training file (ae.train)")
        ->required();
    import_cmd->add_option("--test-in", import_test, "archive test file (ae.test)")
        ->required();
    import_cmd->add_option("--out", import_out, "output directory")->required();

    // ---- search ----
    auto* search_cmd = app.add_subcommand("search", "Random hyperparameter search");
    std::string search_train, search_model, search_space_path, search_metric = "acc";
    std::string search_positive, search_out;
    std::size_t search_trials = 50;
    std::uint64_t search_seed = 0;
    bool search_serial = false;
    search_cmd->add_option("--train", search_train, "training split CSV")->required();
    search_cmd->add_option("--model", search_model, "esn | bdesn")->required();
    search_cmd->add_option("--trials", search_trials, "number of sampled configs");
    search_cmd->add_option("--seed", search_seed, "search seed");
    search_cmd->add_option("--space", search_space_path, "search-space file (defaults built in)");
    search_cmd->add_option("--metric", search_metric, "validation metric: acc | f1");
    search_cmd->add_option("--positive-class", search_positive, "positive class for binary F1");
    search_cmd->add_flag("--serial", search_serial, "run trials on one thread");
    search_cmd->add_option("--out", search_out, "best-config output file")->required();

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "Fit one model and save it");
    std::string train_train, train_model, train_config, train_out, train_log_path;
    std::uint64_t train_seed = 0;
    train_cmd->add_option("--train", train_train, "training split CSV")->required();
    train_cmd->add_option("--model", train_model, "esn | bdesn")->required();
    train_cmd->add_option("--config", train_config, "config file (defaults otherwise)");
    train_cmd->add_option("--seed", train_seed, "model seed");
    train_cmd->add_option("--out", train_out, "model output file")->required();
    train_cmd->add_option("--trainlog", train_log_path, "loss-curve CSV (bdesn only)");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Score a saved model on a test split");
    std::string eval_model, eval_test, eval_positive, eval_out;
    eval_cmd->add_option("--model-file", eval_model, "saved model")->required();
    eval_cmd->add_option("--test", eval_test, "test split CSV")->required();
    eval_cmd->add_option("--positive-class", eval_positive, "positive class for binary F1");
    eval_cmd->add_option("--out", eval_out, "also write metrics to this file");

    // ---- bench ----
    auto* bench_cmd = app.add_subcommand("bench", "Multi-seed benchmark with timing");
    std::string bench_train, bench_test, bench_model = "both", bench_config, bench_out;
    std::string bench_positive, bench_name;
    std::size_t bench_runs = 10;
    std::uint64_t bench_seed = 0;
    bench_cmd->add_option("--train", bench_train, "training split CSV")->required();
    bench_cmd->add_option("--test", bench_test, "test split CSV")->required();
    bench_cmd->add_option("--model", bench_model, "esn | bdesn | both");
    bench_cmd->add_option("--config", bench_config, "config file (defaults otherwise)");
    bench_cmd->add_option("--runs", bench_runs, "independent runs per model");
    bench_cmd->add_option("--seed", bench_seed, "base seed; run i uses seed + i");
    bench_cmd->add_option("--positive-class", bench_positive, "positive class for binary F1");
    bench_cmd->add_option("--name", bench_name, "dataset name used in the report");
    bench_cmd->add_option("--out", bench_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) {
            const Dataset ds = synth_task(synth_kind_from_name(synth_task_name),
                                          synth_n_train, synth_n_test, synth_length,
                                          synth_noise, synth_seed);
            std::filesystem::create_directories(synth_out);
            save_dataset(ds, synth_out + "/train.csv", synth_out + "/test.csv");
            std::cout << "wrote " << synth_out << "/train.csv and " << synth_out
                      << "/test.csv\n";
        } else if (*import_cmd) {
            if (import_format != "jpvow")
                throw ParameterError("unknown import format: " + import_format);
            const Dataset ds = import_japanese_vowels(import_train, import_test);
            std::filesystem::create_directories(import_out);
            save_dataset(ds, import_out + "/train.csv", import_out + "/test.csv");
            std::cout << "wrote " << import_out << "/train.csv and " << import_out
                      << "/test.csv\n";
        } else if (*search_cmd) {
            const ModelKind kind = model_kind_from_name(search_model);
            std::size_t v = 0;
            auto train_split = load_split(search_train, v);
            {
                Dataset tmp;
                tmp.train = std::move(train_split);
                tmp.n_vars = v;
                train_split = impute_mean(tmp).train;
            }
            const SearchSpace space = search_space_path.empty()
                                          ? default_search_space(kind)
                                          : load_space_file(search_space_path);
            SearchOptions options;
            if (search_metric == "f1") options.use_f1 = true;
            else if (search_metric != "acc")
                throw ParameterError("unknown metric: " + search_metric);
            options.positive_class = detail::opt(search_positive);
            options.parallel = !search_serial;
            const SearchResult result =
                random_search(space, search_trials, train_split, kind, search_seed, options);
            save_config_file(search_out, result.best, kind);
            {
                std::ofstream trials(search_out + ".trials.csv", std::ios::binary);
                if (!trials) throw IoError("cannot write " + search_out + ".trials.csv");
                write_trials_csv(trials, result.trials, kind);
            }
            std::cout << "best trial " << result.best_index << " score "
                      << format_value(result.best_score) << "; config written to "
                      << search_out << '\n';
        } else if (*train_cmd) {
            const ModelKind kind = model_kind_from_name(train_model);
            std::size_t v = 0;
            auto train_split = load_split(train_train, v);
            {
                Dataset tmp;
                tmp.train = std::move(train_split);
                tmp.n_vars = v;
                train_split = impute_mean(tmp).train;
            }
            const ModelConfig cfg =
                train_config.empty() ? ModelConfig{} : load_config_file(train_config);
            const auto t0 = std::chrono::steady_clock::now();
            if (kind == ModelKind::Esn) {
                EsnModel model = fit_esn(train_split, to_esn_config(cfg, train_seed));
                save_model_file(train_out, ModelFile(std::move(model)));
            } else {
                auto [model, log] = fit_bdesn(train_split, to_bdesn_config(cfg, train_seed));
                save_model_file(train_out, ModelFile(std::move(model)));
                if (!train_log_path.empty()) {
                    std::ofstream out(train_log_path, std::ios::binary);
                    if (!out) throw IoError("cannot write train log: " + train_log_path);
                    write_train_log(out, log);
                }
            }
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cout << "trained " << model_kind_name(kind) << " in "
                      << format_value(seconds) << " s; model written to " << train_out
                      << '\n';
        } else if (*eval_cmd) {
            const ModelFile model = load_model_file(eval_model);
            std::size_t v = 0;
            auto test_split = load_split(eval_test, v);
            {
                Dataset tmp;
                tmp.train = test_split;  // reuse: impute from the split's own means
                tmp.test = std::move(test_split);
                tmp.n_vars = v;
                test_split = impute_mean(tmp).test;
            }
            std::vector<std::string> actual;
            for (const auto& s : test_split) actual.push_back(s.label);
            const auto predicted = std::visit(
                [&](const auto& m) { return predict(m, test_split); }, model);
            // alphabet: model classes first, then any unseen test labels
            auto classes =
                std::visit([](const auto& m) { return m.classes(); }, model);
            for (const auto& label : actual)
                if (std::find(classes.begin(), classes.end(), label) == classes.end())
                    classes.push_back(label);
            const Metrics m =
                compute_metrics(predicted, actual, classes, detail::opt(eval_positive));
            detail::print_metrics(std::cout, m);
            if (!eval_out.empty()) {
                std::ofstream out(eval_out, std::ios::binary);
                if (!out) throw IoError("cannot write metrics file: " + eval_out);
                detail::print_metrics(out, m);
            }
        } else if (*bench_cmd) {
            const Dataset ds = detail::load_and_impute(bench_train, bench_test);
            const ModelConfig cfg =
                bench_config.empty() ? ModelConfig{} : load_config_file(bench_config);
            std::vector<ModelKind> kinds;
            if (bench_model == "both") kinds = {ModelKind::Esn, ModelKind::Bdesn};
            else kinds = {model_kind_from_name(bench_model)};
            std::filesystem::create_directories(bench_out);
            BenchmarkOptions options;
            options.positive_class = detail::opt(bench_positive);
            options.trainlog_dir = bench_out;
            if (!bench_name.empty()) {
                options.dataset_name = bench_name;
            } else {
                const std::filesystem::path train_path(bench_train);
                const auto parent = train_path.parent_path().filename().string();
                options.dataset_name = parent.empty() ? train_path.stem().string() : parent;
            }
            std::vector<BenchmarkReport> reports;
            for (const ModelKind kind : kinds) {
                BenchmarkReport report =
                    run_benchmark(ds, kind, cfg, bench_runs, bench_seed, options);
                std::ofstream runs(bench_out + "/" + report.model_kind + "_runs.csv",
                                   std::ios::binary);
                if (!runs) throw IoError("cannot write runs csv in " + bench_out);
                write_runs_csv(runs, report);
                reports.push_back(std::move(report));
            }
            {
                std::ofstream table(bench_out + "/report.txt", std::ios::binary);
                if (!table) throw IoError("cannot write report in " + bench_out);
                write_report_table(table, reports);
            }
            write_report_table(std::cout, reports);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace bdesn::cli
