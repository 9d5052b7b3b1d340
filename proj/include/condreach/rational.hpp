#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace condreach {

// Arbitrary-precision rational, canonical form (lowest terms, positive denominator).
// mpq_class arithmetic keeps operands canonical; anything built from raw parts below
// is canonicalized before it escapes.
using Rational = mpq_class;

inline Rational make_rational(long num, long den) {
    if (den == 0) {
        throw std::invalid_argument("rational with zero denominator");
    }
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Accepts "p/q", integer literals, and decimal literals ("0.25" -> 1/4, exactly).
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& r);

inline double to_double(const Rational& r) { return r.get_d(); }

inline int sign_of(const Rational& r) { return sgn(r); }

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }

inline bool is_one(const Rational& r) { return r == 1; }

// Value abstraction for the solver layer: exact rationals or binary64.
template <typename V>
struct ValueOps;

template <>
struct ValueOps<Rational> {
    static constexpr bool exact = true;
    static Rational from(const Rational& r) { return r; }
    static int sign(const Rational& v, double /*zeroTolerance*/) { return sgn(v); }
    static Rational to_rational(const Rational& v) { return v; }
    static double to_float(const Rational& v) { return v.get_d(); }
};

template <>
struct ValueOps<double> {
    static constexpr bool exact = false;
    static double from(const Rational& r) { return r.get_d(); }
    static int sign(double v, double zeroTolerance) {
        if (v > zeroTolerance) return 1;
        if (v < -zeroTolerance) return -1;
        return 0;
    }
    static Rational to_rational(double v) {
        Rational r(v);  // binary64 -> rational is exact
        r.canonicalize();
        return r;
    }
    static double to_float(double v) { return v; }
};

}  // namespace condreach
