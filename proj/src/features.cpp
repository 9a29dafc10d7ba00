#include "malurl/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "serialize.hpp"

namespace malurl {

namespace {

bool iequals_prefix(std::string_view text, std::string_view prefix) {
    if (text.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char c = text[i];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[i]) return false;
    }
    return true;
}

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Length of the UTF-8 sequence starting at `lead`; malformed bytes count as one
// scalar each.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    if (len == 1 || i + len > s.size()) return 1;
    for (std::size_t k = 1; k < len; ++k)
        if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
    return len;
}

}  // namespace

std::array<double, kNumLexicalFeatures> RawFeatures::as_array() const {
    return {static_cast<double>(url_length), static_cast<double>(num_dots),
            static_cast<double>(has_hyphen), static_cast<double>(num_special_chars),
            static_cast<double>(has_ip)};
}

std::string_view strip_scheme(std::string_view url) {
    if (iequals_prefix(url, "http://")) return url.substr(7);
    if (iequals_prefix(url, "https://")) return url.substr(8);
    return url;
}

bool is_ipv4(std::string_view host) {
    int octets = 0;
    std::size_t i = 0;
    while (true) {
        std::size_t digits = 0;
        int value = 0;
        while (i < host.size() && host[i] >= '0' && host[i] <= '9' && digits < 4) {
            value = value * 10 + (host[i] - '0');
            ++digits;
            ++i;
        }
        if (digits == 0 || digits > 3 || value > 255) return false;
        ++octets;
        if (i == host.size()) break;
        if (host[i] != '.' || octets == 4) return false;
        ++i;
    }
    return octets == 4;
}

RawFeatures extract_lexical(std::string_view url) {
    require(!url.empty(), "extract_lexical: empty url");
    const std::string_view body = strip_scheme(url);

    RawFeatures f;
    for (std::size_t i = 0; i < body.size();) {
        const auto c = static_cast<unsigned char>(body[i]);
        const std::size_t len = utf8_sequence_length(body, i);
        ++f.url_length;
        if (c == '.') ++f.num_dots;
        else if (c == '-') f.has_hyphen = 1;
        else if (len > 1 || !is_ascii_alnum(c)) ++f.num_special_chars;
        i += len;
    }

    std::string_view host = body.substr(0, body.find('/'));
    if (const auto colon = host.rfind(':'); colon != std::string_view::npos) {
        const auto port = host.substr(colon + 1);
        if (std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; }))
            host = host.substr(0, colon);
    }
    f.has_ip = is_ipv4(host) ? 1 : 0;
    return f;
}

Normalizer::Normalizer(std::array<double, kNumLexicalFeatures> maxima) : maxima_(maxima) {
    for (double& m : maxima_) {
        require(m >= 0 && std::isfinite(m), "normalizer maxima must be finite and non-negative");
        if (m == 0) m = 1;
    }
}

Vector Normalizer::apply(const RawFeatures& raw) const {
    const auto values = raw.as_array();
    Vector out(kNumLexicalFeatures);
    for (std::size_t i = 0; i < kNumLexicalFeatures; ++i)
        out[i] = std::clamp(values[i] / maxima_[i], 0.0, 1.0);
    return out;
}

void Normalizer::save(std::ostream& out) const {
    out << "normalizer";
    for (double m : maxima_) out << ' ' << format_exact(m);
    out << '\n';
}

Normalizer Normalizer::load(std::istream& in) {
    detail::LineReader reader(in);
    auto fields = reader.expect("normalizer", kNumLexicalFeatures);
    std::array<double, kNumLexicalFeatures> maxima{};
    for (std::size_t i = 0; i < kNumLexicalFeatures; ++i) maxima[i] = detail::to_double(fields[i]);
    return Normalizer(maxima);
}

Normalizer fit_normalizer(std::span<const RawFeatures> rows) {
    require(!rows.empty(), "fit_normalizer: empty input");
    std::array<double, kNumLexicalFeatures> maxima{};
    for (const auto& row : rows) {
        const auto values = row.as_array();
        for (std::size_t i = 0; i < kNumLexicalFeatures; ++i) maxima[i] = std::max(maxima[i], values[i]);
    }
    return Normalizer(maxima);
}

void write_feature_csv(const std::vector<UrlRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::data, "cannot write '" + path.string() + "'");
    out << "url,url_length,num_dots,has_hyphen,num_special_chars,has_ip,class_label\n";
    for (const auto& r : records) {
        const auto f = extract_lexical(r.url);
        out << quote_csv_field(r.url) << ',' << f.url_length << ',' << f.num_dots << ','
            << int(f.has_hyphen) << ',' << f.num_special_chars << ',' << int(f.has_ip) << ','
            << r.class_label << '\n';
    }
    if (!out) fail(ErrorKind::data, "write failed for '" + path.string() + "'");
}

}  // namespace malurl
