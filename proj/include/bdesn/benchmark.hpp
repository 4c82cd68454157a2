// Multi-seed benchmark runs with fit-only wall-clock timing and Table-style
// aggregation (mean +/- std over runs, std with the n-1 denominator).
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "mlp.hpp"
#include "pipeline.hpp"

namespace bdesn {

struct RunResult {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double accuracy = 0.0;
    double f1 = 0.0;
    double train_seconds = 0.0;
    std::string error;
};

struct BenchmarkReport {
    std::string model_kind;
    std::string dataset_name;
    std::size_t n_runs = 0;
    std::vector<RunResult> runs;
    // aggregates over successful runs; NaN when none succeeded
    double mean_accuracy = 0.0, std_accuracy = 0.0;
    double mean_f1 = 0.0, std_f1 = 0.0;
    double mean_train_seconds = 0.0;
};

struct BenchmarkOptions {
    std::optional<std::string> positive_class;
    std::string trainlog_dir;  // when set, BDESN runs export their loss curves here
    std::string dataset_name = "dataset";
};

namespace detail {
inline void aggregate(BenchmarkReport& report) {
    std::vector<const RunResult*> ok;
    for (const auto& r : report.runs)
        if (r.ok) ok.push_back(&r);
    if (ok.empty()) {
        report.mean_accuracy = report.std_accuracy = report.mean_f1 = report.std_f1 =
            report.mean_train_seconds = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    const double n = static_cast<double>(ok.size());
    double sa = 0.0, sf = 0.0, st = 0.0;
    for (const auto* r : ok) {
        sa += r->accuracy;
        sf += r->f1;
        st += r->train_seconds;
    }
    report.mean_accuracy = sa / n;
    report.mean_f1 = sf / n;
    report.mean_train_seconds = st / n;
    // unbiased std; a single run reports 0 by convention
    double va = 0.0, vf = 0.0;
    if (ok.size() > 1) {
        for (const auto* r : ok) {
            va += (r->accuracy - report.mean_accuracy) * (r->accuracy - report.mean_accuracy);
            vf += (r->f1 - report.mean_f1) * (r->f1 - report.mean_f1);
        }
        va /= n - 1.0;
        vf /= n - 1.0;
    }
    report.std_accuracy = std::sqrt(va);
    report.std_f1 = std::sqrt(vf);
}
}  // namespace detail

// Run i trains with seed base_seed + i and is timed around the fit call only
// (loading, embedding of the test set and scoring are excluded). Failed runs
// are kept in the report with their error text rather than dropped.
inline BenchmarkReport run_benchmark(const Dataset& ds, ModelKind kind,
                                     const ModelConfig& cfg, std::size_t n_runs,
                                     std::uint64_t base_seed,
                                     const BenchmarkOptions& options = {}) {
    if (n_runs == 0) throw ParameterError("run_benchmark: n_runs must be >= 1");

    BenchmarkReport report;
    report.model_kind = model_kind_name(kind);
    report.dataset_name = options.dataset_name;
    report.n_runs = n_runs;

    std::vector<std::string> actual;
    for (const auto& s : ds.test) actual.push_back(s.label);

    for (std::size_t i = 0; i < n_runs; ++i) {
        RunResult run;
        run.run = i;
        run.seed = base_seed + i;
        try {
            std::vector<std::string> predicted;
            if (kind == ModelKind::Esn) {
                const auto t0 = std::chrono::steady_clock::now();
                EsnModel model = fit_esn(ds.train, to_esn_config(cfg, run.seed));
                run.train_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                        .count();
                predicted = predict(model, ds.test);
            } else {
                const auto t0 = std::chrono::steady_clock::now();
                auto [model, log] = fit_bdesn(ds.train, to_bdesn_config(cfg, run.seed));
                run.train_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                        .count();
                predicted = predict(model, ds.test);
                if (!options.trainlog_dir.empty()) {
                    const std::string path = options.trainlog_dir + "/trainlog_" +
                                             report.model_kind + "_run" +
                                             std::to_string(i) + ".csv";
                    std::ofstream out(path, std::ios::binary);
                    if (!out) throw IoError("cannot write train log: " + path);
                    write_train_log(out, log);
                }
            }
            const Metrics m =
                compute_metrics(predicted, actual, ds.classes, options.positive_class);
            run.accuracy = m.accuracy;
            run.f1 = m.f1;
            run.ok = true;
        } catch (const std::exception& e) {
            run.ok = false;
            run.error = e.what();
        }
        report.runs.push_back(std::move(run));
    }
    detail::aggregate(report);
    return report;
}

// Machine-readable form: one row per run; the timing column is last so
// consumers comparing reports can strip it off.
inline void write_runs_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "run,seed,status,accuracy,f1,train_seconds\n";
    for (const auto& r : report.runs) {
        std::string status = r.ok ? "ok" : "failed:" + r.error;
        for (auto& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        out << r.run << ',' << r.seed << ',' << status << ',' << format_value(r.accuracy)
            << ',' << format_value(r.f1) << ',' << format_value(r.train_seconds) << '\n';
    }
}

// Aligned table in the spirit of the usual accuracy/time benchmark summaries.
inline void write_report_table(std::ostream& out,
                               const std::vector<BenchmarkReport>& reports) {
    if (reports.empty()) return;
    std::size_t name_width = 9;
    for (const auto& r : reports) name_width = std::max(name_width, r.dataset_name.size());
    name_width += 2;
    out << std::left << std::setw(static_cast<int>(name_width)) << "dataset"
        << std::setw(8) << "model" << std::setw(22) << "accuracy" << std::setw(22) << "f1"
        << std::setw(12) << "time (min)" << '\n';
    out << std::string(name_width + 64, '-') << '\n';
    for (const auto& r : reports) {
        std::ostringstream acc, f1;
        acc << std::fixed << std::setprecision(3) << r.mean_accuracy << " +/- "
            << std::setprecision(3) << r.std_accuracy;
        f1 << std::fixed << std::setprecision(3) << r.mean_f1 << " +/- "
           << std::setprecision(3) << r.std_f1;
        std::ostringstream minutes;
        minutes << std::fixed << std::setprecision(3) << r.mean_train_seconds / 60.0;
        out << std::left << std::setw(static_cast<int>(name_width)) << r.dataset_name
            << std::setw(8) << r.model_kind << std::setw(22) << acc.str() << std::setw(22)
            << f1.str() << std::setw(12) << minutes.str() << '\n';
        std::size_t failed = 0;
        for (const auto& run : r.runs)
            if (!run.ok) ++failed;
        if (failed > 0)
            out << "  (" << failed << '/' << r.runs.size() << " runs failed)" << '\n';
    }
}

}  // namespace bdesn
