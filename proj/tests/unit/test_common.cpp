#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "doctest.h"
#include "malurl/common.hpp"

using namespace malurl;

TEST_CASE("rng streams are reproducible from the seed") {
    Rng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        differs = differs || x != c.next();
    }
    CHECK(differs);
}

TEST_CASE("rng uniform01 stays in [0, 1) with a sane mean") {
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("rng index covers the range without leaving it") {
    Rng rng(3);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto k = rng.index(7);
        REQUIRE(k < 7);
        seen.insert(k);
    }
    CHECK(seen.size() == 7);
    CHECK_THROWS_AS(rng.index(0), Error);
}

TEST_CASE("rng normal has roughly zero mean and unit variance") {
    Rng rng(11);
    double sum = 0.0, sq = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.03);
    CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shuffle is a seeded permutation") {
    std::vector<int> a(50), b(50);
    std::iota(a.begin(), a.end(), 0);
    b = a;
    Rng r1(5), r2(5);
    r1.shuffle(a);
    r2.shuffle(b);
    CHECK(a == b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(50);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(sorted == expected);
}

TEST_CASE("format_exact round-trips doubles") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform01() - 0.5) * std::pow(10.0, static_cast<double>(rng.index(30)) - 15);
        CHECK(parse_double(format_exact(x)) == x);
    }
    CHECK(format_exact(0.1) == "0.1");
    CHECK(parse_double(format_exact(std::numeric_limits<double>::denorm_min())) ==
          std::numeric_limits<double>::denorm_min());
}

TEST_CASE("parsers reject trailing garbage") {
    CHECK(parse_double(" 1.5 ") == 1.5);
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
    CHECK_THROWS_AS(parse_double(""), Error);
    CHECK(parse_integer("42") == 42);
    CHECK_THROWS_AS(parse_integer("4.2"), Error);
}

TEST_CASE("squared distance") {
    const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
    CHECK(squared_distance(a, b) == 25.0);
}
