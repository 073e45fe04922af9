#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankone/correlation.hpp"
#include "rankone/spectral.hpp"
#include "rankone/suspension.hpp"

namespace rankone {

// Worker pool size: R1LAB_WORKERS overrides, otherwise hardware concurrency
// clamped to [1, 8]. Output assembly is ordered, so the count never changes
// results.
int worker_count();

struct VerifyOutput {
    std::string csv;
    Verdict verdict = Verdict::Pass;
    std::string summary;
};

// Correlation sweep fanned out over a worker pool (one evaluator per worker).
// Columns: lag, lo, hi, method, stage_used; exact rationals, full decimal.
std::string correlation_sweep_csv(const ConstructionSchedule& schedule, const LevelSet& a,
                                  const LevelSet& b, const std::vector<BigInt>& lags,
                                  const Rational& tolerance, int workers);

enum class RigidityExpectation { RigidMixing, TwoColumn, None };

// Rigidity along the stage heights h_j. RigidMixing expects the exact defect
// 2 mu(A)/j; TwoColumn expects corr/mu(A) within `half_tolerance` of 1/2.
VerifyOutput rigidity_report(const ConstructionSchedule& schedule, const LevelSet& a,
                             const std::vector<int>& stages, RigidityExpectation expect,
                             const Rational& half_tolerance = Rational(1, 20));

VerifyOutput mixing_report_output(const MixingReport& report);

VerifyOutput kappa_report_output(const KappaReport& report);

// Desk-scale (sp) completeness: sweep every lag below h_J by brute force,
// demand a decomposition wherever correlation is certainly positive, and an
// exact zero wherever no decomposition exists beyond the cutoff.
VerifyOutput sp_report(const ConstructionSchedule& schedule, const LevelSet& a, const LevelSet& b,
                       int J, const BigInt& s_max, int p_max,
                       int64_t guard = ConstructionSchedule::kDefaultWordGuard);

struct SuspensionCheckConfig {
    int64_t k = 1;
    int64_t n = 1;
    uint64_t samples = 100000;
    uint64_t seed = 1;
};

// Inheritance table plus per-row Monte Carlo cross-checks; columns follow
// (lag, k, n, analytic_prob, mc_freq, ci_lo, ci_hi).
VerifyOutput suspension_report(const ConstructionSchedule& schedule, const LevelSet& a,
                               const LevelSet& b, const std::vector<int>& rigidity_stages,
                               const std::vector<BigInt>& mixing_lags,
                               const SuspensionCheckConfig& cfg);

// Coefficient CSV: m, coefficient_numerator, coefficient_denominator, float.
std::string spectral_csv(const SpectralSequence& seq);
// theta, density.
std::string fejer_csv(const FejerDensity& density);

// Spectral verdict: sigma_hat(0) = 1, |sigma_hat| <= 1, Fejér nonnegative,
// random Toeplitz minors PSD (exact arithmetic).
VerifyOutput spectral_report(const ConstructionSchedule& schedule, const LevelSet& a,
                             int max_lag, int grid_points, int psd_trials, uint64_t seed);

}  // namespace rankone
