#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rankone {

// Exact arithmetic backbone: heights and spacer counts outgrow any fixed-width
// type after a handful of stages, and the zero-correlation verdicts require
// exact equality, so everything measure-related is mpz/mpq.
using BigInt = mpz_class;
using Rational = mpq_class;

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline Rational make_rational(BigInt num, BigInt den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational q;
    q.get_num() = std::move(num);
    q.get_den() = std::move(den);
    q.canonicalize();
    return q;
}

inline std::string to_decimal(const BigInt& z) { return z.get_str(); }

// Canonical rational rendering: "p" when integral, else "p/q" with q > 0.
inline std::string to_decimal(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

BigInt parse_bigint(std::string_view text);
Rational parse_rational(std::string_view text);

// Nearest double for an exact rational (mpq_get_d truncates, so go through a
// high-precision decimal rendering and glibc's correctly rounded strtod).
double to_double_nearest(const Rational& q);

// %.17g: shortest-ish rendering that round-trips a double exactly.
std::string format_double17(double v);

inline Rational rational_pow(const Rational& base, unsigned long exp) {
    Rational r;
    mpz_pow_ui(r.get_num().get_mpz_t(), base.get_num().get_mpz_t(), exp);
    mpz_pow_ui(r.get_den().get_mpz_t(), base.get_den().get_mpz_t(), exp);
    r.canonicalize();
    return r;
}

inline BigInt factorial(unsigned long n) {
    BigInt z;
    mpz_fac_ui(z.get_mpz_t(), n);
    return z;
}

inline std::optional<int64_t> to_i64(const BigInt& z) {
    if (!z.fits_slong_p()) return std::nullopt;
    return static_cast<int64_t>(z.get_si());
}

inline BigInt abs(const BigInt& z) {
    BigInt r;
    mpz_abs(r.get_mpz_t(), z.get_mpz_t());
    return r;
}

}  // namespace rankone
