#include "rankone/construction.hpp"

#include <algorithm>

namespace rankone {

// ---------------------------------------------------------------------------
// SpacerSchedule

SpacerSchedule SpacerSchedule::explicit_list(std::vector<BigInt> entries) {
    if (entries.empty()) throw std::invalid_argument("explicit spacer list must be nonempty");
    SpacerSchedule s;
    s.kind_ = Kind::Explicit;
    s.prefix_.reserve(entries.size() + 1);
    s.prefix_.emplace_back(0);
    for (const BigInt& e : entries) {
        if (e < 0) throw std::invalid_argument("spacer counts must be nonnegative");
        s.prefix_.push_back(s.prefix_.back() + e);
    }
    s.entries_ = std::move(entries);
    return s;
}

SpacerSchedule SpacerSchedule::last_column(BigInt s) {
    if (s < 0) throw std::invalid_argument("spacer counts must be nonnegative");
    SpacerSchedule sp;
    sp.kind_ = Kind::LastColumn;
    sp.s_ = std::move(s);
    return sp;
}

SpacerSchedule SpacerSchedule::two_column(BigInt s) {
    if (s < 0) throw std::invalid_argument("spacer counts must be nonnegative");
    SpacerSchedule sp;
    sp.kind_ = Kind::TwoColumn;
    sp.s_ = std::move(s);
    return sp;
}

SpacerSchedule SpacerSchedule::staircase(int64_t q) {
    if (q < 1) throw std::invalid_argument("staircase needs q >= 1");
    SpacerSchedule sp;
    sp.kind_ = Kind::Staircase;
    sp.q_ = q;
    return sp;
}

SpacerSchedule SpacerSchedule::repeated_staircase(int64_t repetitions, int64_t q) {
    if (q < 1 || repetitions < 1) throw std::invalid_argument("repeated staircase needs N, q >= 1");
    SpacerSchedule sp;
    sp.kind_ = Kind::RepeatedStaircase;
    sp.q_ = q;
    sp.reps_ = repetitions;
    return sp;
}

std::optional<int64_t> SpacerSchedule::implied_columns() const {
    switch (kind_) {
        case Kind::Explicit: return static_cast<int64_t>(entries_.size());
        case Kind::LastColumn: return std::nullopt;
        case Kind::TwoColumn: return 2;
        case Kind::Staircase: return q_;
        case Kind::RepeatedStaircase: return reps_ * q_;
    }
    return std::nullopt;
}

BigInt SpacerSchedule::entry(int64_t i, int64_t r) const {
    if (i < 1 || i > r) throw std::out_of_range("spacer column index out of range");
    switch (kind_) {
        case Kind::Explicit: return entries_[static_cast<size_t>(i - 1)];
        case Kind::LastColumn: return i == r ? s_ : BigInt(0);
        case Kind::TwoColumn: return i == 2 ? s_ : BigInt(0);
        case Kind::Staircase: return BigInt(i);
        case Kind::RepeatedStaircase: return BigInt((i - 1) % q_ + 1);
    }
    return BigInt(0);
}

BigInt SpacerSchedule::prefix_total(int64_t k, int64_t r) const {
    if (k < 0 || k > r) throw std::out_of_range("spacer prefix length out of range");
    switch (kind_) {
        case Kind::Explicit: return prefix_[static_cast<size_t>(k)];
        case Kind::LastColumn: return k == r ? s_ : BigInt(0);
        case Kind::TwoColumn: return k == 2 ? s_ : BigInt(0);
        case Kind::Staircase: {
            BigInt z(k);
            return z * (z + 1) / 2;
        }
        case Kind::RepeatedStaircase: {
            const int64_t full = k / q_;
            const int64_t rem = k % q_;
            BigInt stair = BigInt(q_) * (q_ + 1) / 2;
            BigInt part = BigInt(rem) * (rem + 1) / 2;
            return BigInt(full) * stair + part;
        }
    }
    return BigInt(0);
}

std::vector<BigInt> SpacerSchedule::expand(int64_t r) const {
    if (const auto pinned = implied_columns(); pinned && *pinned != r) {
        throw std::invalid_argument("spacer schedule pins " + std::to_string(*pinned) +
                                    " columns, cut has " + std::to_string(r));
    }
    std::vector<BigInt> out;
    out.reserve(static_cast<size_t>(r));
    for (int64_t i = 1; i <= r; ++i) out.push_back(entry(i, r));
    return out;
}

// ---------------------------------------------------------------------------
// ConstructionSchedule

ConstructionSchedule::ConstructionSchedule(BigInt h1, Rational w1, Mode mode,
                                           std::optional<Rational> declared_total)
    : mode_(mode), declared_total_(std::move(declared_total)) {
    if (h1 < 1) throw std::invalid_argument("h1 must be >= 1");
    if (w1 <= 0) throw std::invalid_argument("w1 must be positive");
    if (mode_ == Mode::Infinite && declared_total_) {
        throw std::invalid_argument("declared total measure only applies to finite mode");
    }
    heights_.push_back(std::move(h1));
    widths_.push_back(std::move(w1));
}

const StageRecord& ConstructionSchedule::advance_stage(int64_t r, SpacerSchedule spacers) {
    if (r < 2) throw std::invalid_argument("cut count must be >= 2");
    if (const auto pinned = spacers.implied_columns(); pinned && *pinned != r) {
        throw std::invalid_argument("spacer schedule pins " + std::to_string(*pinned) +
                                    " columns, cut has " + std::to_string(r));
    }

    StageRecord rec{stages(), r,       std::move(spacers), heights_.back(),
                    widths_.back(), BigInt(0), BigInt(0)};
    rec.spacer_total = rec.spacers.total(r);
    rec.next_height = rec.height * r + rec.spacer_total;

    Rational next_width = rec.width / r;
    if (mode_ == Mode::Finite && declared_total_) {
        Rational next_total = Rational(rec.next_height) * next_width;
        if (next_total > *declared_total_) {
            throw std::invalid_argument("stage measure " + to_decimal(next_total) +
                                        " exceeds declared finite total " +
                                        to_decimal(*declared_total_));
        }
    }

    heights_.push_back(rec.next_height);
    widths_.push_back(std::move(next_width));
    cuts_.push_back(std::move(rec));
    return cuts_.back();
}

void ConstructionSchedule::check_stage_index(int j, int max) const {
    if (j < 1 || j > max) {
        throw std::out_of_range("stage index " + std::to_string(j) + " outside [1, " +
                                std::to_string(max) + "]");
    }
}

const StageRecord& ConstructionSchedule::cut(int j) const {
    check_stage_index(j, cut_records());
    return cuts_[static_cast<size_t>(j - 1)];
}

const BigInt& ConstructionSchedule::height(int j) const {
    check_stage_index(j, stages());
    return heights_[static_cast<size_t>(j - 1)];
}

const Rational& ConstructionSchedule::width(int j) const {
    check_stage_index(j, stages());
    return widths_[static_cast<size_t>(j - 1)];
}

Rational ConstructionSchedule::stage_measure(int j) const {
    return Rational(height(j)) * width(j);
}

Rational ConstructionSchedule::spacer_mass(int j) const {
    const StageRecord& rec = cut(j);
    return Rational(rec.spacer_total) * width(j + 1);
}

BigInt ConstructionSchedule::copy_start(int cut_index, int64_t k) const {
    const StageRecord& rec = cut(cut_index);
    if (k < 1 || k > rec.cuts) throw std::out_of_range("copy index out of range");
    return rec.height * (k - 1) + rec.spacers.prefix_total(k - 1, rec.cuts);
}

std::pair<int64_t, BigInt> ConstructionSchedule::locate_copy(int cut_index,
                                                             const BigInt& p) const {
    const StageRecord& rec = cut(cut_index);
    if (p < 0 || p >= rec.next_height) throw std::out_of_range("position outside stage word");
    // Largest k with copy_start(k) <= p.
    int64_t lo = 1, hi = rec.cuts;
    while (lo < hi) {
        const int64_t mid = lo + (hi - lo + 1) / 2;
        if (copy_start(cut_index, mid) <= p) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return {lo, p - copy_start(cut_index, lo)};
}

std::pair<int64_t, int64_t> ConstructionSchedule::copies_with_start_in(int cut_index,
                                                                       const BigInt& lo,
                                                                       const BigInt& hi) const {
    const StageRecord& rec = cut(cut_index);
    // first = smallest k with start(k) >= lo; last = largest k with start(k) <= hi.
    int64_t a = 1, b = rec.cuts + 1;
    while (a < b) {
        const int64_t mid = a + (b - a) / 2;
        if (copy_start(cut_index, mid) >= lo) {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    const int64_t first = a;
    a = 0;
    b = rec.cuts;
    while (a < b) {
        const int64_t mid = a + (b - a + 1) / 2;
        if (copy_start(cut_index, mid) <= hi) {
            a = mid;
        } else {
            b = mid - 1;
        }
    }
    return {first, a};
}

std::optional<BigInt> ConstructionSchedule::level_label(int J, const BigInt& p, int n) const {
    check_stage_index(J, stages());
    check_stage_index(n, J);
    if (p < 0 || p >= height(J)) {
        throw std::out_of_range("position " + to_decimal(p) + " outside stage " +
                                std::to_string(J));
    }
    BigInt pos = p;
    for (int j = J - 1; j >= n; --j) {
        const auto [k, offset] = locate_copy(j, pos);
        (void)k;
        if (offset >= height(j)) return std::nullopt;  // spacer run above copy k
        pos = offset;
    }
    return pos;
}

std::vector<int64_t> ConstructionSchedule::materialize_word(int J, int n,
                                                            int64_t max_len) const {
    check_stage_index(J, stages());
    check_stage_index(n, J);
    const auto len = to_i64(height(J));
    if (!len || *len > max_len) {
        throw GuardExceeded("stage " + std::to_string(J) + " word has " + to_decimal(height(J)) +
                            " symbols, guard is " + std::to_string(max_len));
    }

    std::vector<int64_t> word(static_cast<size_t>(*to_i64(height(n))));
    for (size_t i = 0; i < word.size(); ++i) word[i] = static_cast<int64_t>(i);

    for (int j = n; j < J; ++j) {
        const StageRecord& rec = cut(j);
        std::vector<int64_t> next;
        next.reserve(static_cast<size_t>(*to_i64(rec.next_height)));
        for (int64_t k = 1; k <= rec.cuts; ++k) {
            next.insert(next.end(), word.begin(), word.end());
            const int64_t spacer_run = *to_i64(rec.spacers.entry(k, rec.cuts));
            next.insert(next.end(), static_cast<size_t>(spacer_run), int64_t{-1});
        }
        word = std::move(next);
    }
    return word;
}

// ---------------------------------------------------------------------------
// LevelSet

LevelSet::LevelSet(int stage, std::vector<Range> ranges) : stage_(stage), count_(0) {
    if (stage < 1) throw std::invalid_argument("level set stage must be >= 1");
    std::sort(ranges.begin(), ranges.end(),
              [](const Range& a, const Range& b) { return a.first < b.first; });
    for (Range& r : ranges) {
        if (r.first < 0 || r.second <= r.first) {
            throw std::invalid_argument("level range [" + to_decimal(r.first) + ", " +
                                        to_decimal(r.second) + ") is invalid");
        }
        if (!ranges_.empty() && r.first <= ranges_.back().second) {
            if (r.second > ranges_.back().second) ranges_.back().second = std::move(r.second);
        } else {
            ranges_.push_back(std::move(r));
        }
    }
    for (const Range& r : ranges_) count_ += r.second - r.first;
}

LevelSet LevelSet::single(int stage, BigInt level) {
    BigInt hi = level + 1;
    std::vector<Range> rs;
    rs.emplace_back(std::move(level), std::move(hi));
    return LevelSet(stage, std::move(rs));
}

LevelSet LevelSet::whole_stage(const ConstructionSchedule& s, int stage) {
    std::vector<Range> rs;
    rs.emplace_back(BigInt(0), s.height(stage));
    return LevelSet(stage, std::move(rs));
}

Rational LevelSet::measure(const ConstructionSchedule& s) const {
    return Rational(count_) * s.width(stage_);
}

bool LevelSet::contains(const BigInt& level) const {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), level,
                               [](const BigInt& v, const Range& r) { return v < r.first; });
    if (it == ranges_.begin()) return false;
    --it;
    return level < it->second;
}

BigInt LevelSet::count_below(const BigInt& bound) const {
    BigInt total = 0;
    for (const Range& r : ranges_) {
        if (r.first >= bound) break;
        total += (r.second <= bound ? r.second : bound) - r.first;
    }
    return total;
}

BigInt LevelSet::max_level() const {
    if (ranges_.empty()) throw std::logic_error("max_level of empty set");
    return ranges_.back().second - 1;
}

BigInt LevelSet::min_level() const {
    if (ranges_.empty()) throw std::logic_error("min_level of empty set");
    return ranges_.front().first;
}

LevelSet LevelSet::lifted(const ConstructionSchedule& s, int to_stage, size_t max_ranges) const {
    if (to_stage < stage_ || to_stage > s.stages()) {
        throw std::out_of_range("cannot lift level set from stage " + std::to_string(stage_) +
                                " to stage " + std::to_string(to_stage));
    }
    if (to_stage == stage_) return *this;

    // Cumulative offsets of the stage_ copies inside to_stage, ascending.
    std::vector<BigInt> offsets{BigInt(0)};
    for (int j = stage_; j < to_stage; ++j) {
        const StageRecord& rec = s.cut(j);
        const size_t grown = offsets.size() * static_cast<size_t>(rec.cuts);
        if (grown > max_ranges || grown * ranges_.size() > max_ranges) {
            throw GuardExceeded("lifting to stage " + std::to_string(to_stage) + " needs " +
                                std::to_string(grown * ranges_.size()) + " ranges");
        }
        std::vector<BigInt> next;
        next.reserve(grown);
        for (int64_t k = 1; k <= rec.cuts; ++k) {
            const BigInt start = s.copy_start(j, k);
            for (const BigInt& o : offsets) next.push_back(start + o);
        }
        std::sort(next.begin(), next.end());
        offsets = std::move(next);
    }

    std::vector<Range> out;
    out.reserve(offsets.size() * ranges_.size());
    for (const BigInt& o : offsets) {
        for (const Range& r : ranges_) out.emplace_back(o + r.first, o + r.second);
    }
    return LevelSet(to_stage, std::move(out));
}

BigInt LevelSet::overlap_count(const LevelSet& a, const LevelSet& b, const BigInt& shift) {
    if (a.stage_ != b.stage_) {
        throw std::invalid_argument("overlap_count requires a common reference stage");
    }
    BigInt total = 0;
    size_t i = 0, j = 0;
    while (i < a.ranges_.size() && j < b.ranges_.size()) {
        const BigInt blo = b.ranges_[j].first - shift;
        const BigInt bhi = b.ranges_[j].second - shift;
        const BigInt lo = a.ranges_[i].first >= blo ? a.ranges_[i].first : blo;
        const BigInt hi = a.ranges_[i].second <= bhi ? a.ranges_[i].second : bhi;
        if (lo < hi) total += hi - lo;
        if (a.ranges_[i].second < bhi) {
            ++i;
        } else {
            ++j;
        }
    }
    return total;
}

bool LevelSet::disjoint_with(const LevelSet& other) const {
    return overlap_count(*this, other, BigInt(0)) == 0;
}

void LevelSet::validate_against(const ConstructionSchedule& s) const {
    if (stage_ > s.stages()) {
        throw std::out_of_range("level set references stage " + std::to_string(stage_) +
                                " of a " + std::to_string(s.stages()) + "-stage schedule");
    }
    if (!ranges_.empty() && ranges_.back().second > s.height(stage_)) {
        throw std::out_of_range("level index " + to_decimal(BigInt(ranges_.back().second - 1)) +
                                " outside stage " + std::to_string(stage_) + " of height " +
                                to_decimal(s.height(stage_)));
    }
}

}  // namespace rankone
