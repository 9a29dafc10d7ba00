#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace malurl {

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "benign", "defacement", "phishing", "malware"};

struct UrlRecord {
    std::string url;
    std::string class_name;
    int class_label = 0;
};

/// benign->0, defacement->1, phishing->2, malware->3. Throws on anything else.
int encode_label(std::string_view class_name);
std::optional<int> try_encode_label(std::string_view class_name);
std::string_view decode_label(int label);

// CSV -------------------------------------------------------------------

/// Splits one CSV line into fields. Quoted fields may contain commas and
/// doubled quotes; an unterminated quote or stray text after a closing quote
/// is rejected rather than repaired.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_number);
std::string quote_csv_field(std::string_view field);

struct CsvColumns {
    std::string url = "url";
    std::string label = "type";
};

struct LoadedDataset {
    std::vector<UrlRecord> records;
    std::size_t dropped_missing = 0;  // rows with an empty url or class field
};

LoadedDataset load_csv(const std::filesystem::path& path, const CsvColumns& columns = {});
LoadedDataset parse_csv(std::istream& in, const CsvColumns& columns = {},
                        std::string_view source = "<stream>");

struct DedupResult {
    std::vector<UrlRecord> records;
    std::size_t dropped = 0;
    std::size_t label_conflicts = 0;  // dropped duplicates whose label differed from the kept row
};

DedupResult dedup(std::vector<UrlRecord> records);

// Splits ------------------------------------------------------------------

struct SplitRatios {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct DatasetSplit {
    std::vector<UrlRecord> train;
    std::vector<UrlRecord> validation;
    std::vector<UrlRecord> test;
    std::uint64_t seed = 0;
    SplitRatios ratios;
};

/// Per-class shuffled split; each class contributes round(ratio * count)
/// records to train and validation and the remainder to test. Records keep
/// their input order within each split.
DatasetSplit stratified_split(const std::vector<UrlRecord>& records, const SplitRatios& ratios,
                              std::uint64_t seed);

/// Per-class stratified subsample of `target` records (largest-remainder
/// apportionment), preserving input order.
std::vector<UrlRecord> stratified_subsample(const std::vector<UrlRecord>& records,
                                            std::size_t target, std::uint64_t seed);

std::array<std::size_t, kNumClasses> class_counts(const std::vector<UrlRecord>& records);

void write_labeled_csv(const std::vector<UrlRecord>& records, const std::filesystem::path& path);
void write_split_manifests(const DatasetSplit& split, const std::filesystem::path& dir);
std::string split_summary(const DatasetSplit& split);

}  // namespace malurl
