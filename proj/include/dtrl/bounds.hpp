#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dtrl/rational.hpp"

namespace dtrl {

// Per-feature known ranges (L_k, U_k), kept as exact rationals so that
// observation identity, hashing and threshold replay are exact.
struct FeatureBounds {
    std::vector<Rational> lo;
    std::vector<Rational> hi;

    FeatureBounds() = default;
    explicit FeatureBounds(int d)
        : lo(d, Rational(0, 1)), hi(d, Rational(1, 1)) {}

    int dims() const { return static_cast<int>(lo.size()); }

    bool is_root() const {
        for (int k = 0; k < dims(); ++k)
            if (lo[k].num != 0 || hi[k] != Rational(1, 1)) return false;
        return true;
    }

    friend bool operator==(const FeatureBounds& a, const FeatureBounds& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
    friend bool operator!=(const FeatureBounds& a, const FeatureBounds& b) { return !(a == b); }

    std::string str() const {
        std::string s;
        for (int k = 0; k < dims(); ++k) {
            if (k) s += " ";
            s += "(" + lo[k].str() + "," + hi[k].str() + ")";
        }
        return s;
    }
};

inline FeatureBounds root_bounds(int d) { return FeatureBounds(d); }

// Threshold of the splitting action (k, u/(p+1)) inside the current range:
// v' = u/(p+1) * (U_k - L_k) + L_k, exact.
inline Rational split_threshold(const FeatureBounds& b, int feature, int numerator, int p) {
    if (numerator < 1 || numerator > p) throw DomainError("split numerator out of 1..p");
    Rational frac(numerator, p + 1);
    return frac * (b.hi[feature] - b.lo[feature]) + b.lo[feature];
}

// Refined bounds after observing x_k <= v (low side) or x_k > v (high side).
inline FeatureBounds refine_low(const FeatureBounds& b, int feature, const Rational& v) {
    FeatureBounds out = b;
    out.hi[feature] = v;
    return out;
}

inline FeatureBounds refine_high(const FeatureBounds& b, int feature, const Rational& v) {
    FeatureBounds out = b;
    out.lo[feature] = v;
    return out;
}

// Whether a sample routes into this box. Lower bounds come from strict "x > v"
// comparisons and upper bounds from "x <= v", so membership is L_k < x_k <= U_k,
// with the root lower bound 0 inclusive (features live in [0,1]).
inline bool routes_into(const FeatureBounds& b, const double* x) {
    for (int k = 0; k < b.dims(); ++k) {
        if (compare_double_rational(x[k], b.hi[k]) > 0) return false;
        if (b.lo[k].num != 0 && compare_double_rational(x[k], b.lo[k]) <= 0) return false;
    }
    return true;
}

// Number of consecutive splitting actions taken since the last prediction,
// recovered from the bounds alone. Valid whenever p+1 is prime: each split
// multiplies the range length by c/(p+1) with c coprime to p+1, so the reduced
// denominator of U_k - L_k is exactly (p+1)^(splits on k).
inline int igas_since_base(const FeatureBounds& b, int p) {
    const std::int64_t base = p + 1;
    // primality of p+1 (tiny values only)
    for (std::int64_t f = 2; f * f <= base; ++f)
        if (base % f == 0)
            throw DomainError("depth recovery needs p+1 prime, got p+1=" + std::to_string(base));
    int total = 0;
    for (int k = 0; k < b.dims(); ++k) {
        std::int64_t den = (b.hi[k] - b.lo[k]).den;
        while (den % base == 0) {
            den /= base;
            ++total;
        }
        if (den != 1)
            throw DomainError("bounds not reachable under p=" + std::to_string(p) +
                              ": range denominator " + std::to_string((b.hi[k] - b.lo[k]).den));
    }
    return total;
}

} // namespace dtrl

template <>
struct std::hash<dtrl::FeatureBounds> {
    std::size_t operator()(const dtrl::FeatureBounds& b) const noexcept {
        std::size_t h = 0x811c9dc5;
        auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
        std::hash<dtrl::Rational> hr;
        for (int k = 0; k < b.dims(); ++k) {
            mix(hr(b.lo[k]));
            mix(hr(b.hi[k]));
        }
        return h;
    }
};
