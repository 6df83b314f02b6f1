#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>

#include "dtrl/errors.hpp"

namespace dtrl {

// Exact rational arithmetic for feature bounds and split thresholds.
//
// Reachable bounds have denominators (p+1)^m with m bounded by the depth cap,
// so int64 never comes close to overflowing; intermediates are widened to
// __int128 and checked anyway so a misuse fails loudly instead of silently.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { reduce(); }
    static Rational integer(std::int64_t n) { return Rational(n, 1); }

    void reduce() {
        if (den == 0) throw DomainError("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    std::string str() const {
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

namespace detail {
inline std::int64_t narrow128(__int128 v, const char* what) {
    if (v > INT64_MAX || v < INT64_MIN) throw DomainError(std::string("rational overflow in ") + what);
    return static_cast<std::int64_t>(v);
}
} // namespace detail

inline Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
    __int128 d = static_cast<__int128>(a.den) * b.den;
    return Rational(detail::narrow128(n, "add"), detail::narrow128(d, "add"));
}

inline Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
    __int128 d = static_cast<__int128>(a.den) * b.den;
    return Rational(detail::narrow128(n, "sub"), detail::narrow128(d, "sub"));
}

inline Rational operator*(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num) * b.num;
    __int128 d = static_cast<__int128>(a.den) * b.den;
    return Rational(detail::narrow128(n, "mul"), detail::narrow128(d, "mul"));
}

// Exact comparison of a double against a rational; no rounding anywhere.
// Decomposes x into mantissa * 2^e and cross-multiplies in 128-bit integers.
inline int compare_double_rational(double x, const Rational& q) {
    if (!std::isfinite(x)) throw DomainError("non-finite value in exact comparison");
    if (x == 0.0) return (0 < q.num) ? -1 : (q.num < 0 ? 1 : 0);
    bool neg = x < 0.0;
    int exp = 0;
    double frac = std::frexp(neg ? -x : x, &exp);
    auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53)); // exact: frac has <= 53 significant bits
    int e = exp - 53;
    // x = sign * mant * 2^e. Compare sign*mant*2^e with q.num/q.den.
    __int128 lhs = static_cast<__int128>(neg ? -mant : mant);
    __int128 rhs = q.num;
    if (e >= 0) {
        if (e > 61) return lhs > 0 ? 1 : -1; // |x| >= 2^61 dwarfs any reachable rational
        lhs <<= e;
        lhs *= q.den;
    } else {
        int shift = -e;
        lhs *= q.den;
        if (shift > 125) {
            // |x| < 2^-72 or so: smaller in magnitude than any nonzero reachable rational.
            if (rhs != 0) return rhs > 0 ? -1 : 1;
            return lhs > 0 ? 1 : (lhs < 0 ? -1 : 0);
        }
        // lhs fits in ~53+63 bits, rhs needs |num|*2^shift; guard the shift instead of the product.
        int rhs_bits = 0;
        for (__int128 t = rhs < 0 ? -rhs : rhs; t > 0; t >>= 1) ++rhs_bits;
        if (rhs_bits + shift > 126) return rhs > 0 ? -1 : 1;
        rhs <<= shift;
    }
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

inline bool double_leq_rational(double x, const Rational& q) { return compare_double_rational(x, q) <= 0; }

} // namespace dtrl

template <>
struct std::hash<dtrl::Rational> {
    std::size_t operator()(const dtrl::Rational& r) const noexcept {
        std::size_t h = std::hash<std::int64_t>()(r.num);
        return h ^ (std::hash<std::int64_t>()(r.den) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};
