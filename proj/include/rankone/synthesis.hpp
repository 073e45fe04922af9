#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rankone/construction.hpp"
#include "rankone/numeric.hpp"

namespace rankone {

struct SynthesisStall : std::runtime_error {
    explicit SynthesisStall(const std::string& what) : std::runtime_error(what) {}
};

// Entry i of an interval family: the complement of the mixing set contains
// [n*a, n*a + L] for n = 1..multiplicity.
struct IntervalFamilyEntry {
    BigInt a;
    BigInt L;
    int multiplicity = 1;
};

struct IntervalFamily {
    std::vector<IntervalFamilyEntry> entries;

    void validate() const;  // a_i, L_i strictly increasing, multiplicities >= 1
    // Is m inside some [n*a_i, n*a_i + L_i], n <= multiplicity_i?
    bool contains_point(const BigInt& m) const;
};

// Explicit zero-density set prefix: the sparse set the construction must mix
// along; safety windows must avoid it.
struct ExplicitSet {
    BigInt horizon;
    bool zero_density_attested = false;
    std::vector<BigInt> elements;  // sorted, within [1, horizon]

    void validate() const;
    bool contains(const BigInt& m) const;
    // No element inside [lo, hi]?
    bool window_clear(const BigInt& lo, const BigInt& hi) const;
    // First element inside [lo, hi], if any.
    std::optional<BigInt> first_in(const BigInt& lo, const BigInt& hi) const;
};

struct MixingSetSpec {
    enum class Kind { IntervalFamily, ExplicitSet };
    Kind kind = Kind::IntervalFamily;
    IntervalFamily family;
    ExplicitSet set;

    void validate() const;
    // Is m a lag the synthesized construction is expected to mix along?
    // Interval-family: anything outside the interval union. Explicit-set: the
    // listed elements themselves (claims hold within the horizon).
    bool candidate_mixing_lag(const BigInt& m) const;
};

struct SynthesisOptions {
    int stages = 6;  // heights h_1..h_stages, i.e. stages-1 cuts
    BigInt h1 = 1;
    Rational w1 = Rational(1);
    // Growth contracts: s_j >= rigid_growth_scale * j * h_j for the
    // rigid-mixing construction, s_j >= plain_growth_scale * h_j for the
    // two-column and subset-heights ones.
    Rational rigid_growth_scale = Rational(1);
    Rational plain_growth_scale = Rational(1);
    BigInt subset_growth_factor = 8;  // G for subset-heights selection
};

struct SafetyWindow {
    int n = 0;  // window around n * h_{j+1}
    BigInt lo;
    BigInt hi;
    std::string container;  // what the window was checked against
    bool ok = false;
};

struct CutAudit {
    int j = 0;
    int64_t r = 0;
    BigInt radius;  // half-width used for the safety windows
    BigInt h_next;
    BigInt spacer;
    bool growth_ok = false;
    std::optional<size_t> family_entry;  // index into the family, when used
    std::vector<SafetyWindow> windows;
};

struct SynthesisResult {
    ConstructionSchedule schedule;
    std::vector<CutAudit> cuts;
    std::string construction;  // "rigid-mixing", "two-column", ...
    std::string notes;

    std::string report_text() const;
};

// Rigid construction mixing along the specified set: r_1 = 2, r_j = j for
// j >= 2, all spacer mass on the last column, the next height chosen so the
// windows [n h_{j+1} - radius, n h_{j+1} + radius] (n = 1..j) miss the
// target set. radius = max(j h_j, exact positive-lag envelope).
SynthesisResult synthesize_rigid_mixing(const MixingSetSpec& spec, const SynthesisOptions& opt);

// Two-column construction (r_j = 2, spacers (0, s_j)): each stage consumes the
// smallest unused family entry with L_i >= 2 h_j, placing the non-mixing
// window [h_{j+1} - h_j, h_{j+1} + h_j] inside [a_i, a_i + L_i].
SynthesisResult synthesize_two_column(const IntervalFamily& family, const SynthesisOptions& opt);

// Heights drawn from a supplied pool: h_{j+1} = smallest pool element
// >= G * h_j, giving r_j = 2 and s_j = h_{j+1} - 2 h_j. An empty pool with
// all_integers = true selects exactly G * h_j.
SynthesisResult synthesize_subset_heights(const std::vector<BigInt>& pool, bool all_integers,
                                          const SynthesisOptions& opt);

// Smallest a > a_min with [n*a, n*a + L] disjoint from the explicit set for
// all n = 1..i, staying within the horizon. Throws SynthesisStall when the
// horizon is exhausted.
BigInt embed_zero_density(const ExplicitSet& m, int i, const BigInt& L_target,
                          const BigInt& a_min = BigInt(0));

// Stage parameters for the finite-measure staircase class: mixing stage j has
// r = j and spacers (1..j); a rigid stage has r = N*q and the staircase
// repeated N times.
std::pair<int64_t, SpacerSchedule> staircase_stage_params(bool mixing_stage, int j, int64_t q,
                                                          int64_t repetitions);

struct StaircasePlanEntry {
    bool mixing = false;
    int64_t q = 0;     // rigid stages
    int64_t reps = 0;  // rigid stages
};

// Builds the finite-measure schedule from a per-cut plan and reports the
// admissibility sum over r_j / h_j against the budget (reported, not
// enforced).
SynthesisResult build_staircase_schedule(const std::vector<StaircasePlanEntry>& plan,
                                         const SynthesisOptions& opt,
                                         const Rational& budget = Rational(10));

struct AuditCheck {
    std::string description;
    bool ok = false;
};

struct AuditReport {
    bool ok = true;
    std::vector<AuditCheck> checks;
    std::string text() const;
};

// Post-hoc audits: recompute every safety window and growth contract from the
// final schedule alone and re-check them against the mixing-set input.
// Deliberately a separate code path from the synthesizers.
AuditReport audit_rigid_mixing(const ConstructionSchedule& schedule, const MixingSetSpec& spec);
AuditReport audit_two_column(const ConstructionSchedule& schedule, const IntervalFamily& family);

}  // namespace rankone
