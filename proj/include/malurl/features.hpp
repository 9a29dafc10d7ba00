#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "malurl/common.hpp"
#include "malurl/dataset.hpp"

namespace malurl {

inline constexpr std::size_t kNumLexicalFeatures = 5;
inline constexpr std::array<std::string_view, kNumLexicalFeatures> kLexicalFeatureNames = {
    "url_length", "num_dots", "has_hyphen", "num_special_chars", "has_ip"};

struct RawFeatures {
    std::uint64_t url_length = 0;
    std::uint64_t num_dots = 0;
    std::uint8_t has_hyphen = 0;
    std::uint64_t num_special_chars = 0;
    std::uint8_t has_ip = 0;

    std::array<double, kNumLexicalFeatures> as_array() const;
    bool operator==(const RawFeatures&) const = default;
};

/// Drops a leading "http://" or "https://" (any case).
std::string_view strip_scheme(std::string_view url);

/// True when `host` is a dotted-quad IPv4 address with every octet in 0..255.
bool is_ipv4(std::string_view host);

/// Lexical features of the scheme-stripped URL, counted in Unicode scalar
/// values. Characters other than ASCII alphanumerics, '.' and '-' are special.
RawFeatures extract_lexical(std::string_view url);

/// Per-column divide-by-max scaler. Columns whose maximum is 0 store 1.
class Normalizer {
public:
    Normalizer() = default;
    explicit Normalizer(std::array<double, kNumLexicalFeatures> maxima);

    const std::array<double, kNumLexicalFeatures>& maxima() const { return maxima_; }

    /// raw / max, clamped to [0, 1].
    Vector apply(const RawFeatures& raw) const;

    void save(std::ostream& out) const;
    static Normalizer load(std::istream& in);

    bool operator==(const Normalizer&) const = default;

private:
    std::array<double, kNumLexicalFeatures> maxima_{1, 1, 1, 1, 1};
};

Normalizer fit_normalizer(std::span<const RawFeatures> rows);

inline Vector normalize(const RawFeatures& raw, const Normalizer& norm) { return norm.apply(raw); }

/// Writes url, the five raw features and class_label for each record.
void write_feature_csv(const std::vector<UrlRecord>& records, const std::filesystem::path& path);

}  // namespace malurl
