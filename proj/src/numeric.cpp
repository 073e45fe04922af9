#include "rankone/numeric.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace rankone {

namespace {

bool is_decimal_integer(std::string_view s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

}  // namespace

BigInt parse_bigint(std::string_view text) {
    if (!is_decimal_integer(text)) {
        throw ParseError("not a decimal integer: '" + std::string(text) + "'");
    }
    return BigInt(std::string(text), 10);
}

Rational parse_rational(std::string_view text) {
    const size_t slash = text.find('/');
    if (slash == std::string_view::npos) {
        return Rational(parse_bigint(text));
    }
    BigInt num = parse_bigint(text.substr(0, slash));
    BigInt den = parse_bigint(text.substr(slash + 1));
    if (den <= 0) {
        throw ParseError("rational denominator must be positive: '" + std::string(text) + "'");
    }
    return make_rational(std::move(num), std::move(den));
}

double to_double_nearest(const Rational& q) {
    if (q == 0) return 0.0;
    mpf_class f(q, 256);
    mp_exp_t exp10 = 0;
    std::string digits = f.get_str(exp10, 10, 25);
    std::string text;
    if (!digits.empty() && digits[0] == '-') {
        text = "-0." + digits.substr(1);
    } else {
        text = "0." + digits;
    }
    text += "e" + std::to_string(static_cast<long>(exp10));
    return std::strtod(text.c_str(), nullptr);
}

std::string format_double17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace rankone
