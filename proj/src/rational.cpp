#include "condreach/rational.hpp"

#include <algorithm>
#include <cctype>

namespace condreach {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

mpz_class parse_integer(std::string_view digits, bool negative) {
    mpz_class v(std::string(digits), 10);
    return negative ? mpz_class(-v) : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);

    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) {
        throw std::invalid_argument("empty rational literal");
    }

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        std::string_view num = s.substr(0, slash);
        std::string_view den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) {
            throw std::invalid_argument("malformed rational literal: " + std::string(text));
        }
        mpz_class d = parse_integer(den, false);
        if (d == 0) {
            throw std::invalid_argument("rational with zero denominator: " + std::string(text));
        }
        Rational r(parse_integer(num, negative), d);
        r.canonicalize();
        return r;
    }

    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view intPart = s.substr(0, dot);
        std::string_view fracPart = s.substr(dot + 1);
        if ((intPart.empty() && fracPart.empty()) || (!intPart.empty() && !all_digits(intPart)) ||
            (!fracPart.empty() && !all_digits(fracPart))) {
            throw std::invalid_argument("malformed decimal literal: " + std::string(text));
        }
        // d.f  ->  (d * 10^k + f) / 10^k, exactly
        mpz_class scale = 1;
        for (std::size_t i = 0; i < fracPart.size(); ++i) scale *= 10;
        mpz_class numerator = intPart.empty() ? mpz_class(0) : parse_integer(intPart, false);
        numerator *= scale;
        if (!fracPart.empty()) numerator += parse_integer(fracPart, false);
        if (negative) numerator = -numerator;
        Rational r(numerator, scale);
        r.canonicalize();
        return r;
    }

    if (!all_digits(s)) {
        throw std::invalid_argument("malformed rational literal: " + std::string(text));
    }
    return Rational(parse_integer(s, negative));
}

std::string to_string(const Rational& r) {
    return r.get_str();
}

}  // namespace condreach
