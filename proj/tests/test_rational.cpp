#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <unordered_set>

#include "dtrl/rational.hpp"

using dtrl::Rational;
using dtrl::compare_double_rational;
using dtrl::double_leq_rational;

TEST_CASE("construction reduces to lowest terms") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-6, 9) == Rational(-2, 3));
    CHECK(Rational(3, -9) == Rational(-1, 3));
    CHECK(Rational(0, 7) == Rational(0, 1));
    CHECK(Rational(5, 9).str() == "5/9");
    CHECK_THROWS_AS(Rational(1, 0), dtrl::DomainError);
}

TEST_CASE("arithmetic is exact") {
    // 1/3 + (2/3)*(1/3) = 5/9
    Rational v = Rational(1, 3) + Rational(2, 3) * Rational(1, 3);
    CHECK(v == Rational(5, 9));
    CHECK(Rational(1, 1) - Rational(1, 3) == Rational(2, 3));
    CHECK(Rational(1, 2) * Rational(1, 2) == Rational(1, 4));
    CHECK((Rational(1, 6) + Rational(1, 3)) == Rational(1, 2));
}

TEST_CASE("ordering is exact across denominators") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(2, 3) > Rational(1, 2));
    CHECK(Rational(1, 2) <= Rational(2, 4));
    CHECK(Rational(-1, 2) < Rational(0, 1));
    // magnitudes near the int64 edge still compare correctly via 128-bit
    CHECK(Rational(INT64_MAX / 2, INT64_MAX / 2 + 1) < Rational(1, 1));
}

TEST_CASE("overflow is detected, not wrapped") {
    Rational big(INT64_MAX, 1);
    CHECK_THROWS_AS(big * Rational(2, 1), dtrl::DomainError);
    CHECK_THROWS_AS(big + big, dtrl::DomainError);
}

TEST_CASE("double comparison is exact for representable values") {
    CHECK(compare_double_rational(0.5, Rational(1, 2)) == 0);
    CHECK(compare_double_rational(0.25, Rational(1, 4)) == 0);
    CHECK(compare_double_rational(0.75, Rational(3, 4)) == 0);
    CHECK(compare_double_rational(0.0, Rational(1, 2)) < 0);
    CHECK(compare_double_rational(1.0, Rational(1, 2)) > 0);
    CHECK(compare_double_rational(1.0, Rational(1, 1)) == 0);
    CHECK(double_leq_rational(0.5, Rational(1, 2)));
    CHECK_FALSE(double_leq_rational(0.5000000001, Rational(1, 2)));

    // 1/3 is not a double; the nearest double must compare unequal with the
    // proper sign
    double third = 1.0 / 3.0;
    int c = compare_double_rational(third, Rational(1, 3));
    CHECK(c != 0);
    long double exact = static_cast<long double>(third) - 1.0L / 3.0L;
    CHECK((c < 0) == (exact < 0.0L));
}

TEST_CASE("double comparison guards extreme magnitudes") {
    CHECK(compare_double_rational(1e-300, Rational(1, 729)) < 0);
    CHECK(compare_double_rational(1e300, Rational(1, 2)) > 0);
    CHECK(compare_double_rational(-1e-300, Rational(0, 1)) < 0);
    CHECK_THROWS_AS(compare_double_rational(std::nan(""), Rational(1, 2)), dtrl::DomainError);
}

TEST_CASE("randomized comparison agrees with long double within its precision") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 20000; ++t) {
        std::int64_t den = static_cast<std::int64_t>(rng() % 700) + 1;
        std::int64_t num = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(den + 1));
        double x = (rng() >> 11) * (1.0 / 9007199254740992.0);
        Rational q(num, den);
        int got = compare_double_rational(x, q);
        long double diff = static_cast<long double>(x) - static_cast<long double>(q.num) / q.den;
        // long double has spare precision here, so signs must agree whenever
        // it is decisively nonzero
        if (diff > 1e-15L) CHECK(got > 0);
        if (diff < -1e-15L) CHECK(got < 0);
    }
}

TEST_CASE("hash respects equality") {
    std::hash<Rational> h;
    CHECK(h(Rational(2, 4)) == h(Rational(1, 2)));
    std::unordered_set<std::size_t> seen;
    for (int d = 1; d <= 64; d *= 2)
        for (int n = 0; n <= d; ++n) seen.insert(h(Rational(n, d)));
    CHECK(seen.size() > 60); // distinct values should mostly hash apart
}
