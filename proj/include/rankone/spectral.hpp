#pragma once

#include <utility>
#include <vector>

#include "rankone/construction.hpp"
#include "rankone/numeric.hpp"

namespace rankone {

// One Fourier coefficient of the spectral measure of the normalized indicator
// of a level set: sigma_hat(m) = mu(R^m A /\ A) / mu(A).
struct SpectralCoefficient {
    BigInt lag;
    Rational lo;
    Rational hi;
    bool exact = false;
    int stage_used = 0;

    Rational midpoint() const { return (lo + hi) / 2; }
};

struct SpectralSequence {
    int vector_stage = 0;           // reference stage of the defining level set
    Rational norm;                  // mu(A)
    std::vector<SpectralCoefficient> coeffs;

    const SpectralCoefficient* find(const BigInt& lag) const;
};

// Exact coefficients at the requested nonnegative lags. sigma_hat(0) = 1 by
// normalization; the sequence is symmetric, so negative lags are read off the
// positive ones.
SpectralSequence spectral_coefficients(const ConstructionSchedule& schedule, const LevelSet& a,
                                       const std::vector<BigInt>& lags);

struct FejerDensity {
    int order = 0;  // N: coefficients |m| <= N entered the kernel
    std::vector<std::pair<double, double>> points;  // (theta, density)
    double integral = 0.0;  // trapezoid over the periodic grid, should be ~1
};

// Cesàro/Fejér mean of the coefficient sequence sampled on a uniform grid of
// [0, 2pi). A visual aid: the measure itself is never constructed. Values are
// clamped at zero when floating-point evaluation dips within tolerance below
// it; a dip past the tolerance throws (the sequence would not be positive
// definite).
FejerDensity fejer_density(const SpectralSequence& seq, int order, int grid_points,
                           double tolerance = 1e-9);

// Exact positive-semidefiniteness of the Gram matrix [sigma_hat(m_a - m_b)]
// via pivoted rational LDL^T. All needed coefficients must be exact.
bool toeplitz_minor_psd(const ConstructionSchedule& schedule, const LevelSet& a,
                        const std::vector<BigInt>& lags);

// Exact PSD test for a symmetric rational matrix.
bool rational_psd(std::vector<std::vector<Rational>> m);

}  // namespace rankone
