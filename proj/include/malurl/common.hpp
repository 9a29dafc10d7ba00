#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace malurl {

using Vector = std::vector<double>;

enum class ErrorKind {
    invalid_argument,  // precondition violated by a caller
    data,              // unreadable or malformed input data
    model,             // malformed or incompatible model file
    config,            // bad configuration or usage
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::invalid_argument, what);
}

/// Seeded random source with a platform-independent draw sequence.
///
/// Only the raw mt19937_64 stream is standardized, so the distributions are
/// implemented here rather than taken from <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased integer in [0, n).
    std::size_t index(std::size_t n);

    /// Standard normal draw (Box-Muller, spare value cached).
    double normal();

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Shortest decimal text that parses back to the identical double.
std::string format_exact(double value);
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace malurl
