#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankone/construction.hpp"
#include "rankone/numeric.hpp"

namespace rankone {

// Certified value of mu(R^m A /\ B). Exact when lo == hi; otherwise the true
// value lies in [lo, hi] and hi - lo is the top-of-tower uncertainty at the
// evaluation stage.
struct CorrelationResult {
    enum class Method { ExactDp, BruteForce, MonteCarlo, Windowed };

    BigInt lag;
    Rational lo;
    Rational hi;
    int stage_used = 0;
    Method method = Method::ExactDp;
    bool met_tolerance = true;

    bool exact() const { return lo == hi; }
    Rational width() const { return hi - lo; }
};

const char* method_name(CorrelationResult::Method m);

struct ToleranceUnreachable : std::runtime_error {
    ToleranceUnreachable(std::string what, CorrelationResult best_so_far)
        : std::runtime_error(std::move(what)), best(std::move(best_so_far)) {}
    CorrelationResult best;
};

// Pair-counting engine over one (schedule, A, B) triple. Counts at stage j+1
// split into within-copy counts and cross-copy counts at shifted lags; signed
// sub-lags carry the A/B orientation, and every (stage, lag) count is
// memoized. Instances are not thread-safe; parallel sweeps use one evaluator
// per worker.
class CorrelationEvaluator {
  public:
    CorrelationEvaluator(const ConstructionSchedule& schedule, const LevelSet& a,
                         const LevelSet& b, size_t memo_cap = 1 << 24);

    // Windowed certified interval at evaluation stage J.
    CorrelationResult at_stage(const BigInt& m, int J);

    // Walks evaluation stages upward until the certified width reaches
    // `tolerance`; when the built stages run out first the best result is
    // returned with met_tolerance = false.
    CorrelationResult refine(const BigInt& m, const Rational& tolerance);

    // Exact value or ToleranceUnreachable.
    Rational exact_value(const BigInt& m);

    int base_stage() const { return base_; }
    const Rational& measure_a() const { return mu_a_; }
    const Rational& measure_b() const { return mu_b_; }
    Rational measure_ab() const;  // mu(A intersect B)
    const ConstructionSchedule& schedule() const { return sched_; }

    // D_j(lag): ordered pairs (x, x+lag) inside the stage-j word whose labels
    // land in A and B respectively. Signed lag; negative lags mirror the
    // orientation. Exposed for the oracle-agreement tests.
    BigInt pair_count(int j, const BigInt& lag);

    // Number of A-labeled positions among the first `bound` positions of the
    // stage-j word, and in the whole word.
    BigInt a_positions_below(int j, const BigInt& bound);
    const BigInt& a_positions_total(int j);

  private:
    const ConstructionSchedule& sched_;
    int base_;
    LevelSet a_;
    LevelSet b_;
    Rational mu_a_;
    Rational mu_b_;
    std::vector<std::map<BigInt, BigInt>> pair_memo_;  // [j - base_] -> lag -> count
    std::vector<BigInt> full_a_;                       // [j - base_] -> total A positions
    size_t memo_cap_;
    size_t memo_entries_ = 0;
};

// Direct count over the materialized stage-J word; the oracle path. Refuses
// (GuardExceeded) when h_J exceeds the guard.
CorrelationResult correlation_bruteforce(const ConstructionSchedule& schedule, const LevelSet& a,
                                         const LevelSet& b, const BigInt& m, int J,
                                         int64_t guard = ConstructionSchedule::kDefaultWordGuard);

// Brute force for every lag 0 <= m < h_J at once (bit-parallel popcounts over
// the same materialized word). sweep[m] equals correlation_bruteforce at m.
std::vector<CorrelationResult> correlation_bruteforce_sweep(
    const ConstructionSchedule& schedule, const LevelSet& a, const LevelSet& b, int J,
    int64_t guard = ConstructionSchedule::kDefaultWordGuard);

struct MonteCarloCorrelation {
    BigInt lag;
    int stage_used = 0;
    uint64_t samples = 0;
    uint64_t hits = 0;
    uint64_t seed = 0;
    double estimate = 0.0;  // windowed-count estimate, measure units
    double ci_lo = 0.0;     // 99% confidence interval (Hoeffding bound)
    double ci_hi = 0.0;
};

MonteCarloCorrelation correlation_montecarlo(const ConstructionSchedule& schedule,
                                             const LevelSet& a, const LevelSet& b,
                                             const BigInt& m, int J, uint64_t samples,
                                             uint64_t seed);

// 2 mu(A) - 2 mu(A /\ R^{h_j} A): measure preservation turns the symmetric
// difference into a correlation. Throws ToleranceUnreachable when the exact
// value is not certified within the built stages.
Rational rigidity_defect(const ConstructionSchedule& schedule, const LevelSet& a, int j);

enum class Verdict { Pass, Fail, Inconclusive };
const char* verdict_name(Verdict v);

struct MixingLagRow {
    CorrelationResult corr;
    bool beyond_cutoff = false;
    Verdict verdict = Verdict::Pass;
};

struct MixingReport {
    BigInt cutoff;
    Rational target;  // 0 in infinite mode, mu(A)mu(B)/mu(X) in finite mode
    bool finite_mode = false;
    std::vector<MixingLagRow> rows;
    Verdict verdict = Verdict::Pass;
    int checked = 0;
    int failed = 0;
    int inconclusive = 0;
};

// Per-lag correlations over sorted sample lags with a verdict. Infinite mode
// demands exact zeros beyond the cutoff; finite mode compares against
// mu(A)mu(B)/mu(X) within `threshold`. Default cutoff is h_{n0+1} for the
// common reference stage n0 of A and B.
MixingReport verify_mixing_along(const ConstructionSchedule& schedule,
                                 const std::vector<BigInt>& lags, const LevelSet& a,
                                 const LevelSet& b, const Rational& threshold,
                                 std::optional<BigInt> cutoff_override = std::nullopt,
                                 std::optional<Rational> total_measure = std::nullopt);

struct KappaRow {
    BigInt lag;
    Rational lo;
    Rational hi;
    bool exact = false;
};

struct KappaReport {
    std::vector<KappaRow> rows;
    Rational total_measure;
    Rational spread;  // max - min of the last three midpoints
    bool converged = false;
};

// Solves mu(R^k A /\ B) = kappa mu(A)mu(B)/mu(X) + (1 - kappa) mu(A /\ B)
// per lag. Finite mode only; throws when mu(A /\ B) == mu(A)mu(B)/mu(X)
// (kappa unidentifiable).
KappaReport kappa_mixing_check(const ConstructionSchedule& schedule,
                               const std::vector<BigInt>& lags, const LevelSet& a,
                               const LevelSet& b, const Rational& convergence_tol);

struct SpForm {
    std::vector<int> indices;  // 1-based into the height list, strictly decreasing
    std::vector<int> signs;    // +1/-1 per index, signs[0] == +1
    BigInt residual;           // s

    int terms() const { return static_cast<int>(indices.size()); }
    BigInt reconstruct(const std::vector<BigInt>& heights) const;
    std::string render(const std::vector<BigInt>& heights) const;
};

// Greedy signed decomposition m = h_{j1} +- h_{j2} ... +- h_{jp} + s with
// |s| <= s_max and p <= p_max, falling back to an exhaustive search over
// p <= 3 when the greedy walk misses. nullopt when no decomposition exists
// within the bounds.
std::optional<SpForm> sp_decompose(const BigInt& m, const std::vector<BigInt>& heights,
                                   const BigInt& s_max, int p_max);

}  // namespace rankone
