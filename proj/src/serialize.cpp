#include "serialize.hpp"

#include <charconv>
#include <sstream>

namespace malurl::detail {

std::vector<std::string> LineReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        std::istringstream tokens(line);
        std::vector<std::string> out;
        for (std::string t; tokens >> t;) out.push_back(std::move(t));
        if (!out.empty()) return out;
    }
    fail(ErrorKind::model, "model file truncated");
}

std::vector<std::string> LineReader::expect(std::string_view tag, std::size_t count) {
    auto tokens = next();
    if (tokens.front() != tag)
        fail(ErrorKind::model, "model file: expected '" + std::string(tag) + "', found '" +
                                   tokens.front() + "'");
    tokens.erase(tokens.begin());
    if (count != std::string::npos && tokens.size() != count)
        fail(ErrorKind::model, "model file: '" + std::string(tag) + "' expects " +
                                   std::to_string(count) + " values, found " +
                                   std::to_string(tokens.size()));
    return tokens;
}

double to_double(const std::string& token) {
    try {
        return parse_double(token);
    } catch (const Error&) {
        fail(ErrorKind::model, "model file: bad number '" + token + "'");
    }
}

long long to_integer(const std::string& token) {
    try {
        return parse_integer(token);
    } catch (const Error&) {
        fail(ErrorKind::model, "model file: bad integer '" + token + "'");
    }
}

std::uint64_t to_unsigned(const std::string& token) {
    std::uint64_t value = 0;
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size() || token.empty())
        fail(ErrorKind::model, "model file: bad unsigned integer '" + token + "'");
    return value;
}

}  // namespace malurl::detail
