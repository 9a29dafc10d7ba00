#include "malurl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "malurl/common.hpp"

namespace malurl {

std::optional<int> try_encode_label(std::string_view class_name) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i)
        if (kClassNames[i] == class_name) return static_cast<int>(i);
    return std::nullopt;
}

int encode_label(std::string_view class_name) {
    if (auto label = try_encode_label(class_name)) return *label;
    fail(ErrorKind::data, "unknown class label '" + std::string(class_name) + "'");
}

std::string_view decode_label(int label) {
    if (label < 0 || label >= static_cast<int>(kNumClasses))
        fail(ErrorKind::invalid_argument, "class label out of range: " + std::to_string(label));
    return kClassNames[static_cast<std::size_t>(label)];
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string field;
    std::size_t i = 0;
    const auto malformed = [&](const std::string& why) {
        fail(ErrorKind::data, "row " + std::to_string(line_number) + ": " + why);
    };
    while (true) {
        field.clear();
        if (i < line.size() && line[i] == '"') {
            ++i;
            bool closed = false;
            while (i < line.size()) {
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    closed = true;
                    ++i;
                    break;
                }
                field.push_back(line[i++]);
            }
            if (!closed) malformed("unterminated quoted field");
            if (i < line.size() && line[i] != ',') malformed("unexpected text after closing quote");
        } else {
            while (i < line.size() && line[i] != ',') field.push_back(line[i++]);
        }
        fields.push_back(field);
        if (i >= line.size()) break;
        ++i;  // skip comma
    }
    return fields;
}

std::string quote_csv_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos &&
        (field.empty() || field.front() != ' '))
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

LoadedDataset parse_csv(std::istream& in, const CsvColumns& columns, std::string_view source) {
    std::string line;
    if (!std::getline(in, line))
        fail(ErrorKind::data, std::string(source) + ": missing header row");
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line, 1);
    std::optional<std::size_t> url_col, label_col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = trim(header[i]);
        if (name == columns.url && !url_col) url_col = i;
        if (name == columns.label && !label_col) label_col = i;
    }
    if (!url_col || !label_col)
        fail(ErrorKind::data, std::string(source) + ": header must name columns '" + columns.url +
                                  "' and '" + columns.label + "'");

    LoadedDataset out;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line, line_number);
        if (fields.size() != header.size())
            fail(ErrorKind::data, "row " + std::to_string(line_number) + ": expected " +
                                      std::to_string(header.size()) + " columns, found " +
                                      std::to_string(fields.size()));
        const std::string& url = fields[*url_col];
        const auto class_name = trim(fields[*label_col]);
        if (trim(url).empty() || class_name.empty()) {
            ++out.dropped_missing;
            continue;
        }
        const auto label = try_encode_label(class_name);
        if (!label)
            fail(ErrorKind::data, "row " + std::to_string(line_number) + ": unknown class label '" +
                                      std::string(class_name) + "'");
        out.records.push_back({url, std::string(class_name), *label});
    }
    return out;
}

LoadedDataset load_csv(const std::filesystem::path& path, const CsvColumns& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::data, "cannot open dataset '" + path.string() + "'");
    return parse_csv(in, columns, path.string());
}

DedupResult dedup(std::vector<UrlRecord> records) {
    DedupResult result;
    std::unordered_map<std::string, int> seen;
    seen.reserve(records.size());
    result.records.reserve(records.size());
    for (auto& record : records) {
        auto [it, inserted] = seen.emplace(record.url, record.class_label);
        if (inserted) {
            result.records.push_back(std::move(record));
            continue;
        }
        ++result.dropped;
        if (it->second != record.class_label) ++result.label_conflicts;
    }
    return result;
}

std::array<std::size_t, kNumClasses> class_counts(const std::vector<UrlRecord>& records) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const auto& r : records) ++counts[static_cast<std::size_t>(r.class_label)];
    return counts;
}

namespace {

std::array<std::vector<std::size_t>, kNumClasses> indices_by_class(
    const std::vector<UrlRecord>& records) {
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const int label = records[i].class_label;
        require(label >= 0 && label < static_cast<int>(kNumClasses), "record label out of range");
        by_class[static_cast<std::size_t>(label)].push_back(i);
    }
    return by_class;
}

std::vector<UrlRecord> gather(const std::vector<UrlRecord>& records, std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    std::vector<UrlRecord> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(records[i]);
    return out;
}

}  // namespace

DatasetSplit stratified_split(const std::vector<UrlRecord>& records, const SplitRatios& ratios,
                              std::uint64_t seed) {
    if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0))
        fail(ErrorKind::invalid_argument, "split ratios must be positive");
    if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
        fail(ErrorKind::invalid_argument, "split ratios must sum to 1");

    if (records.empty()) fail(ErrorKind::data, "cannot split an empty dataset");

    auto by_class = indices_by_class(records);
    Rng rng(seed);
    std::vector<std::size_t> train, validation, test;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;  // classes absent from the input are not stratified
        rng.shuffle(idx);
        const auto n = static_cast<double>(idx.size());
        auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
        auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * n));
        n_train = std::min(n_train, idx.size());
        n_val = std::min(n_val, idx.size() - n_train);
        train.insert(train.end(), idx.begin(), idx.begin() + n_train);
        validation.insert(validation.end(), idx.begin() + n_train, idx.begin() + n_train + n_val);
        test.insert(test.end(), idx.begin() + n_train + n_val, idx.end());
    }
    DatasetSplit split;
    split.train = gather(records, std::move(train));
    split.validation = gather(records, std::move(validation));
    split.test = gather(records, std::move(test));
    split.seed = seed;
    split.ratios = ratios;
    return split;
}

std::vector<UrlRecord> stratified_subsample(const std::vector<UrlRecord>& records,
                                            std::size_t target, std::uint64_t seed) {
    if (target >= records.size()) return records;
    auto by_class = indices_by_class(records);
    const double total = static_cast<double>(records.size());

    std::array<std::size_t, kNumClasses> take{};
    std::array<double, kNumClasses> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double exact = static_cast<double>(target) * static_cast<double>(by_class[c].size()) / total;
        take[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - std::floor(exact);
        assigned += take[c];
    }
    std::array<std::size_t, kNumClasses> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < target; k = (k + 1) % kNumClasses) {
        const auto c = order[k];
        if (take[c] < by_class[c].size()) {
            ++take[c];
            ++assigned;
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> chosen;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto& idx = by_class[c];
        rng.shuffle(idx);
        chosen.insert(chosen.end(), idx.begin(), idx.begin() + take[c]);
    }
    return gather(records, std::move(chosen));
}

void write_labeled_csv(const std::vector<UrlRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::data, "cannot write '" + path.string() + "'");
    out << "url,type,class_label\n";
    for (const auto& r : records)
        out << quote_csv_field(r.url) << ',' << r.class_name << ',' << r.class_label << '\n';
    if (!out) fail(ErrorKind::data, "write failed for '" + path.string() + "'");
}

std::string split_summary(const DatasetSplit& split) {
    std::ostringstream s;
    s << "seed " << split.seed << "\nratios " << format_exact(split.ratios.train) << ' '
      << format_exact(split.ratios.validation) << ' ' << format_exact(split.ratios.test) << '\n';
    s << "split       benign  defacement  phishing  malware   total\n";
    const auto row = [&](std::string_view name, const std::vector<UrlRecord>& part) {
        const auto counts = class_counts(part);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-10s %7zu %11zu %9zu %8zu %7zu\n",
                      std::string(name).c_str(), counts[0], counts[1], counts[2], counts[3],
                      part.size());
        s << buf;
    };
    row("train", split.train);
    row("validation", split.validation);
    row("test", split.test);
    return s.str();
}

void write_split_manifests(const DatasetSplit& split, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_labeled_csv(split.train, dir / "train.csv");
    write_labeled_csv(split.validation, dir / "validation.csv");
    write_labeled_csv(split.test, dir / "test.csv");
    std::ofstream summary(dir / "split_summary.txt", std::ios::binary);
    summary << split_summary(split);
}

}  // namespace malurl
