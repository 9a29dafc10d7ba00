#pragma once

// Line-oriented helpers shared by the model file readers.

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "malurl/common.hpp"

namespace malurl::detail {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-blank line split on whitespace; throws at end of input.
    std::vector<std::string> next();

    /// Reads a line whose first token is `tag` followed by exactly `count`
    /// tokens (any count when `count` is npos) and returns those tokens.
    std::vector<std::string> expect(std::string_view tag, std::size_t count = std::string::npos);

private:
    std::istream& in_;
};

double to_double(const std::string& token);
long long to_integer(const std::string& token);
std::uint64_t to_unsigned(const std::string& token);

}  // namespace malurl::detail
