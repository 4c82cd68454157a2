// One-way importers from public archive layouts into the canonical CSV
// format. Currently: the UCI Japanese Vowels dataset.
#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"

namespace bdesn {

namespace detail {

// ae.train / ae.test: one utterance per block of lines, blocks separated by
// blank lines, each line 12 whitespace-separated LPC cepstrum coefficients.
inline std::vector<Matrix> parse_ae_blocks(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open archive file: " + path);
    std::vector<Matrix> blocks;
    std::vector<double> current;
    std::size_t current_rows = 0;
    std::string line;
    std::size_t line_no = 0;

    auto flush = [&]() {
        if (current_rows == 0) return;
        blocks.emplace_back(current_rows, 12, std::move(current));
        current = {};
        current_rows = 0;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::vector<double> row;
        double v = 0.0;
        while (ls >> v) row.push_back(v);
        if (row.empty()) {
            flush();
            continue;
        }
        if (row.size() != 12)
            throw FormatError(path + ": expected 12 coefficients, got " +
                                  std::to_string(row.size()),
                              line_no);
        current.insert(current.end(), row.begin(), row.end());
        ++current_rows;
    }
    flush();
    return blocks;
}

}  // namespace detail

// Import recipe: the 270 training utterances are 30 consecutive blocks per
// speaker (speakers labeled "1".."9" in file order); the 370 test utterances
// follow the archive's published per-speaker block counts
// {31, 35, 88, 44, 29, 24, 40, 50, 29}.
inline Dataset import_japanese_vowels(const std::string& train_path,
                                      const std::string& test_path) {
    const auto train_blocks = detail::parse_ae_blocks(train_path);
    const auto test_blocks = detail::parse_ae_blocks(test_path);
    if (train_blocks.size() != 270)
        throw InputError("japanese vowels: expected 270 training utterances, got " +
                         std::to_string(train_blocks.size()));
    if (test_blocks.size() != 370)
        throw InputError("japanese vowels: expected 370 test utterances, got " +
                         std::to_string(test_blocks.size()));

    Dataset ds;
    ds.n_vars = 12;
    for (std::size_t i = 0; i < train_blocks.size(); ++i) {
        const std::size_t speaker = i / 30;
        ds.train.push_back({"jv-train-" + std::to_string(i),
                            std::to_string(speaker + 1), train_blocks[i]});
    }
    constexpr std::array<std::size_t, 9> kTestCounts{31, 35, 88, 44, 29, 24, 40, 50, 29};
    std::size_t block = 0;
    for (std::size_t speaker = 0; speaker < kTestCounts.size(); ++speaker)
        for (std::size_t j = 0; j < kTestCounts[speaker]; ++j, ++block)
            ds.test.push_back({"jv-test-" + std::to_string(block),
                               std::to_string(speaker + 1), test_blocks[block]});
    ds.classes = collect_classes(ds);
    return ds;
}

}  // namespace bdesn
