#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankone/numeric.hpp"

namespace rankone {

struct GuardExceeded : std::runtime_error {
    explicit GuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Spacer counts placed on top of the r columns of one cut, kept in the shape
// they were specified in so closed-form column geometry stays available even
// when r is large.
class SpacerSchedule {
  public:
    enum class Kind { Explicit, LastColumn, TwoColumn, Staircase, RepeatedStaircase };

    static SpacerSchedule explicit_list(std::vector<BigInt> entries);
    static SpacerSchedule last_column(BigInt s);      // (0, ..., 0, s), any r >= 2
    static SpacerSchedule two_column(BigInt s);       // (0, s), pins r = 2
    static SpacerSchedule staircase(int64_t q);       // (1, 2, ..., q), pins r = q
    static SpacerSchedule repeated_staircase(int64_t repetitions, int64_t q);  // pins r = N*q

    Kind kind() const { return kind_; }

    // Column count this schedule forces, or nullopt when any r fits.
    std::optional<int64_t> implied_columns() const;

    // Spacer count above column i (1-based) of r columns.
    BigInt entry(int64_t i, int64_t r) const;
    // Sum of spacers over columns 1..k (prefix), and over all r columns.
    BigInt prefix_total(int64_t k, int64_t r) const;
    BigInt total(int64_t r) const { return prefix_total(r, r); }
    std::vector<BigInt> expand(int64_t r) const;

    const std::vector<BigInt>& explicit_entries() const { return entries_; }
    const BigInt& single_spacer() const { return s_; }
    int64_t staircase_q() const { return q_; }
    int64_t repetitions() const { return reps_; }

  private:
    SpacerSchedule() = default;

    Kind kind_ = Kind::Explicit;
    std::vector<BigInt> entries_;       // Explicit
    std::vector<BigInt> prefix_;        // Explicit: prefix sums, prefix_[k] = sum of first k
    BigInt s_;                          // LastColumn / TwoColumn
    int64_t q_ = 0;                     // Staircase / RepeatedStaircase
    int64_t reps_ = 0;                  // RepeatedStaircase
};

// One cut: stage j is sliced into `cuts` columns, spacers stacked per column,
// columns restacked left to right into stage j+1.
struct StageRecord {
    int index = 0;  // 1-based stage index j of the tower being cut
    int64_t cuts = 0;
    SpacerSchedule spacers;
    BigInt height;         // h_j
    Rational width;        // w_j
    BigInt next_height;    // h_{j+1} = h_j * r + sum of spacers
    BigInt spacer_total;   // sum of spacers at this cut
};

// The full stage-by-stage parameter record. Immutable once built except for
// advance_stage, which is the single-writer append; every query is const and
// safe to call concurrently. Stage indices are 1-based throughout; positions
// and level indices are 0-based.
class ConstructionSchedule {
  public:
    enum class Mode { Infinite, Finite };

    ConstructionSchedule(BigInt h1, Rational w1, Mode mode = Mode::Infinite,
                         std::optional<Rational> declared_total = std::nullopt);

    const StageRecord& advance_stage(int64_t r, SpacerSchedule spacers);

    Mode mode() const { return mode_; }
    const std::optional<Rational>& declared_total() const { return declared_total_; }

    // Number of stages with a defined height (cut records + 1).
    int stages() const { return static_cast<int>(cuts_.size()) + 1; }
    int cut_records() const { return static_cast<int>(cuts_.size()); }
    const StageRecord& cut(int j) const;  // 1-based, 1 <= j <= cut_records()

    const BigInt& height(int j) const;    // h_j, 1 <= j <= stages()
    const Rational& width(int j) const;
    Rational stage_measure(int j) const;  // h_j * w_j, exact

    // Lebesgue mass of the spacers added at cut j, and the running total
    // measure through stage j.
    Rational spacer_mass(int j) const;
    Rational running_total(int j) const { return stage_measure(j); }

    // Start position of copy k (1-based) of stage j inside stage j+1.
    BigInt copy_start(int cut_index, int64_t k) const;
    // Copy containing position p of stage j+1: (k, offset into the block);
    // offset >= h_j means p sits in the spacer run above copy k.
    std::pair<int64_t, BigInt> locate_copy(int cut_index, const BigInt& p) const;
    // Inclusive range of copies k whose start lies in [lo, hi]; empty when first > last.
    std::pair<int64_t, int64_t> copies_with_start_in(int cut_index, const BigInt& lo,
                                                     const BigInt& hi) const;

    // Stage-n label of position p in the stage-J tower; nullopt = spacer added
    // after stage n. Decodes one cut at a time, J down to n.
    std::optional<BigInt> level_label(int J, const BigInt& p, int n) const;

    // Full label word of stage J relative to stage n; -1 marks spacers.
    // Refuses when h_J > max_len so callers fall back to positional decoding.
    std::vector<int64_t> materialize_word(int J, int n, int64_t max_len = kDefaultWordGuard) const;

    static constexpr int64_t kDefaultWordGuard = 1'000'000;

  private:
    void check_stage_index(int j, int max) const;

    Mode mode_;
    std::optional<Rational> declared_total_;
    std::vector<BigInt> heights_;     // heights_[j-1] = h_j, size cuts+1
    std::vector<Rational> widths_;
    std::vector<StageRecord> cuts_;
};

// A finite union of tower levels at a fixed reference stage, stored as sorted
// disjoint half-open index ranges.
class LevelSet {
  public:
    using Range = std::pair<BigInt, BigInt>;  // [lo, hi)

    LevelSet(int stage, std::vector<Range> ranges);

    static LevelSet single(int stage, BigInt level);
    static LevelSet whole_stage(const ConstructionSchedule& s, int stage);

    int stage() const { return stage_; }
    const std::vector<Range>& ranges() const { return ranges_; }
    bool empty() const { return ranges_.empty(); }
    const BigInt& level_count() const { return count_; }

    Rational measure(const ConstructionSchedule& s) const;
    bool contains(const BigInt& level) const;
    // Number of own levels strictly below `bound`.
    BigInt count_below(const BigInt& bound) const;
    // Largest level index present; empty() must be false.
    BigInt max_level() const;
    BigInt min_level() const;

    // Same set of points re-expressed at a later stage: each level maps to its
    // copy positions. Range count multiplies by the number of copies, hence
    // the guard.
    LevelSet lifted(const ConstructionSchedule& s, int to_stage,
                    size_t max_ranges = 1 << 22) const;

    // |{x : x in a, x + shift in b}| for same-stage sets, exact.
    static BigInt overlap_count(const LevelSet& a, const LevelSet& b, const BigInt& shift);

    bool disjoint_with(const LevelSet& other) const;

    // Validates indices against [0, h_stage) of the given schedule.
    void validate_against(const ConstructionSchedule& s) const;

  private:
    int stage_;
    std::vector<Range> ranges_;
    BigInt count_;
};

}  // namespace rankone
