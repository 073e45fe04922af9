#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rankone/construction.hpp"
#include "rankone/correlation.hpp"
#include "rankone/numeric.hpp"

namespace rankone {

// Exact probability of the form coeff * e^{exponent}, plus a float rendering.
struct ExpTerm {
    Rational coeff;
    Rational exponent;

    double value() const;
    bool operator==(const ExpTerm& other) const {
        return coeff == other.coeff && exponent == other.exponent;
    }
    ExpTerm operator*(const ExpTerm& other) const {
        return ExpTerm{coeff * other.coeff, exponent + other.exponent};
    }
};

// Poisson pmf at k for an exact rational mean.
ExpTerm poisson_pmf(const Rational& mean, int64_t k);

// Cylinder event: exactly `count` configuration points inside `region`.
struct ConfigurationEvent {
    LevelSet region;
    int64_t count = 0;
};

// Product formula for events over pairwise disjoint finite-measure regions.
// Disjointness is checked at a common reference stage.
ExpTerm poisson_event_prob(const ConstructionSchedule& schedule,
                           const std::vector<ConfigurationEvent>& events);

// P(|x /\ A| = k, |x /\ R^{-m}B| = n) for the Poisson suspension, driven by
// the single exact scalar c = mu(R^m A /\ B): the three disjoint pieces
// A \ R^{-m}B, A /\ R^{-m}B, R^{-m}B \ A carry independent Poisson counts
// with means mu(A)-c, c, mu(B)-c, and the joint is their convolution.
ExpTerm joint_event_prob_from_c(const Rational& mu_a, const Rational& mu_b, const Rational& c,
                                int64_t k, int64_t n);

ExpTerm joint_shifted_event_prob(const ConstructionSchedule& schedule, const LevelSet& a,
                                 int64_t k, const LevelSet& b, int64_t n, const BigInt& m);

enum class JointSampleMode { ThreeRegion, FullSimulation };

struct JointDistribution {
    std::map<std::pair<int64_t, int64_t>, uint64_t> counts;
    uint64_t samples = 0;

    double frequency(int64_t k, int64_t n) const;
};

// Empirical joint law of (|x /\ A|, |x /\ R^{-m}B|). ThreeRegion draws the
// piece counts directly from the exact c; FullSimulation lays a Poisson
// process on the covering positions of the stage-J tower and transports
// points by p -> p + m, which requires every involved position to resolve at
// stage J (errors otherwise, asking for a deeper stage).
JointDistribution sample_joint_counts(const ConstructionSchedule& schedule, const LevelSet& a,
                                      const LevelSet& b, const BigInt& m, int J,
                                      uint64_t samples, uint64_t seed,
                                      JointSampleMode mode = JointSampleMode::ThreeRegion);

struct InheritanceRow {
    BigInt lag;
    int64_t k = 0;
    int64_t n = 0;
    Rational c;
    bool c_exact = false;
    ExpTerm joint;
    ExpTerm reference;    // rigidity: mu_*(C_{A,k}); mixing: product of marginals
    bool exact_match = false;  // mixing rows with c = 0: joint == product exactly
    double abs_error = 0.0;
    double bound = 0.0;   // rigidity rows: 2(mu(A) - c)
};

struct InheritanceReport {
    std::vector<InheritanceRow> rigidity_rows;
    std::vector<InheritanceRow> mixing_rows;
    Verdict verdict = Verdict::Pass;
    std::string summary;
};

// Tabulates the joint probability along the rigidity heights h_j (expects
// convergence to mu_*(C_{A,k}) within the coupling bound 2(mu(A)-c)) and along
// mixing lags (expects exact factorization whenever c = 0).
InheritanceReport suspension_inheritance_report(const ConstructionSchedule& schedule,
                                                const LevelSet& a, int64_t k, const LevelSet& b,
                                                int64_t n,
                                                const std::vector<int>& rigidity_stages,
                                                const std::vector<BigInt>& mixing_lags);

}  // namespace rankone
