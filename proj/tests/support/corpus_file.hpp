#pragma once

// Self-contained corpus and config writers for tests that reach the library
// only through the C API or the command line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace malurl::testing {

inline void write_toy_csv(const std::filesystem::path& path, int per_class, std::uint32_t seed) {
    std::mt19937 gen(seed);
    auto num = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
    auto word = [&] {
        static const char* words[] = {"news", "shop", "mail", "cloud", "video", "music", "sport", "travel"};
        return std::string(words[num(0, 7)]);
    };
    std::ofstream out(path, std::ios::binary);
    out << "url,type\n";
    for (int i = 0; i < per_class; ++i) {
        out << word() << word() << i << ".com,benign\n";
        out << "http://www." << word() << i << ".org/index.php?option=com_content&view=article&id=" << num(10, 999)
            << ",defacement\n";
        out << word() << "-" << word() << "-secure" << i << ".net/login/" << num(1000, 9999) << ".php,phishing\n";
        out << "http://" << num(1, 223) << "." << num(0, 255) << "." << num(0, 255) << "." << i << ":8080/x" << i
            << ".exe,malware\n";
    }
}

inline void write_toy_config(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << "som.grid = 4x4\nsom.iterations = 60\nsom.radius = 2\nrbfn.centers = 12\n"
           "rbfn.epochs = 150\nrbfn.learning_rate = 0.05\ntabu.iterations = 25\n";
}

}  // namespace malurl::testing
