#include "rankone/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rankone {

BigInt rankone::RandomStream::uniform_below_big(const BigInt& n) {
    if (n <= 0) throw std::invalid_argument("uniform_below_big: bound must be positive");
    if (n.fits_ulong_p()) return BigInt(uniform_below(n.get_ui()));

    const size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    const size_t words = (bits + 63) / 64;
    const unsigned top_bits = static_cast<unsigned>(bits - (words - 1) * 64);
    const uint64_t top_mask = (top_bits >= 64) ? ~0ULL : ((1ULL << top_bits) - 1);

    std::vector<uint64_t> buf(words);
    BigInt candidate;
    do {
        for (size_t i = 0; i < words; ++i) buf[i] = next_u64();
        buf[words - 1] &= top_mask;
        mpz_import(candidate.get_mpz_t(), words, -1, sizeof(uint64_t), 0, 0, buf.data());
    } while (candidate >= n);
    return candidate;
}

int64_t RandomStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be nonnegative");
    int64_t total = 0;
    double remaining = mean;
    while (remaining > 0.0) {
        const double chunk = remaining > 12.0 ? 12.0 : remaining;
        remaining -= chunk;
        const double threshold = std::exp(-chunk);
        double product = 1.0;
        int64_t count = -1;
        do {
            product *= next_unit();
            ++count;
        } while (product > threshold);
        total += count;
    }
    return total;
}

}  // namespace rankone
