#include "rankone/spectral.hpp"

#include <cmath>

#include "rankone/correlation.hpp"

namespace rankone {

const SpectralCoefficient* SpectralSequence::find(const BigInt& lag) const {
    const BigInt wanted = lag < 0 ? BigInt(-lag) : lag;  // symmetric sequence
    for (const SpectralCoefficient& c : coeffs) {
        if (c.lag == wanted) return &c;
    }
    return nullptr;
}

SpectralSequence spectral_coefficients(const ConstructionSchedule& schedule, const LevelSet& a,
                                       const std::vector<BigInt>& lags) {
    if (a.empty()) throw std::invalid_argument("spectral vector needs mu(A) > 0");
    CorrelationEvaluator eval(schedule, a, a);

    SpectralSequence seq;
    seq.vector_stage = a.stage();
    seq.norm = eval.measure_a();

    for (const BigInt& m : lags) {
        if (m < 0) throw std::invalid_argument("spectral lags must be >= 0");
        const CorrelationResult corr = eval.refine(m, Rational(0));
        SpectralCoefficient c;
        c.lag = m;
        c.lo = corr.lo / seq.norm;
        c.hi = corr.hi / seq.norm;
        c.exact = corr.exact();
        c.stage_used = corr.stage_used;
        seq.coeffs.push_back(std::move(c));
    }
    return seq;
}

FejerDensity fejer_density(const SpectralSequence& seq, int order, int grid_points,
                           double tolerance) {
    if (order < 0 || grid_points < 1) throw std::invalid_argument("bad Fejér parameters");

    std::vector<double> coeff(static_cast<size_t>(order) + 1);
    for (int m = 0; m <= order; ++m) {
        const SpectralCoefficient* c = seq.find(BigInt(m));
        if (c == nullptr) {
            throw std::invalid_argument("Fejér density needs coefficients for all |m| <= " +
                                        std::to_string(order) + "; lag " + std::to_string(m) +
                                        " missing");
        }
        const double weight = 1.0 - static_cast<double>(m) / (order + 1);
        coeff[static_cast<size_t>(m)] = weight * to_double_nearest(c->midpoint());
    }

    FejerDensity out;
    out.order = order;
    out.points.reserve(static_cast<size_t>(grid_points));
    const double two_pi = 2.0 * M_PI;
    double sum = 0.0;
    for (int g = 0; g < grid_points; ++g) {
        const double theta = two_pi * g / grid_points;
        double v = coeff[0];
        for (int m = 1; m <= order; ++m) v += 2.0 * coeff[static_cast<size_t>(m)] * std::cos(m * theta);
        v /= two_pi;
        if (v < 0.0) {
            if (v < -tolerance) {
                throw std::runtime_error("Fejér density negative beyond tolerance at theta = " +
                                         format_double17(theta) + ": " + format_double17(v));
            }
            v = 0.0;  // floating-point dust on a provably nonnegative value
        }
        out.points.emplace_back(theta, v);
        sum += v;
    }
    out.integral = sum * two_pi / grid_points;
    return out;
}

bool rational_psd(std::vector<std::vector<Rational>> m) {
    const size_t n = m.size();
    for (const auto& row : m) {
        if (row.size() != n) throw std::invalid_argument("matrix must be square");
    }
    std::vector<bool> done(n, false);
    for (size_t step = 0; step < n; ++step) {
        // Largest remaining diagonal entry as pivot.
        size_t pivot = n;
        for (size_t i = 0; i < n; ++i) {
            if (!done[i] && (pivot == n || m[i][i] > m[pivot][pivot])) pivot = i;
        }
        if (pivot == n) break;
        const Rational d = m[pivot][pivot];
        if (d < 0) return false;
        if (d == 0) {
            // All remaining diagonals are <= 0, hence must be exactly 0, and a
            // PSD matrix with zero diagonal is zero on those rows.
            for (size_t i = 0; i < n; ++i) {
                if (done[i]) continue;
                for (size_t j = 0; j < n; ++j) {
                    if (!done[j] && m[i][j] != 0) return false;
                }
            }
            return true;
        }
        done[pivot] = true;
        for (size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            const Rational f = m[i][pivot] / d;
            for (size_t j = 0; j < n; ++j) {
                if (done[j]) continue;
                m[i][j] -= f * m[pivot][j];
            }
        }
    }
    return true;
}

bool toeplitz_minor_psd(const ConstructionSchedule& schedule, const LevelSet& a,
                        const std::vector<BigInt>& lags) {
    CorrelationEvaluator eval(schedule, a, a);
    const Rational norm = eval.measure_a();
    const size_t d = lags.size();

    std::vector<std::vector<Rational>> gram(d, std::vector<Rational>(d));
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            BigInt diff = lags[i] - lags[j];
            if (diff < 0) diff = -diff;
            const Rational value = eval.exact_value(diff) / norm;
            gram[i][j] = value;
            gram[j][i] = value;
        }
    }
    return rational_psd(std::move(gram));
}

}  // namespace rankone
