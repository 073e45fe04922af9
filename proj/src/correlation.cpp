#include "rankone/correlation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rankone/rng.hpp"

namespace rankone {

const char* method_name(CorrelationResult::Method m) {
    switch (m) {
        case CorrelationResult::Method::ExactDp: return "exact-dp";
        case CorrelationResult::Method::BruteForce: return "brute-force";
        case CorrelationResult::Method::MonteCarlo: return "monte-carlo";
        case CorrelationResult::Method::Windowed: return "windowed";
    }
    return "?";
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// CorrelationEvaluator

namespace {

int validated_base_stage(const ConstructionSchedule& schedule, const LevelSet& a,
                         const LevelSet& b) {
    a.validate_against(schedule);
    b.validate_against(schedule);
    return std::max(a.stage(), b.stage());
}

}  // namespace

CorrelationEvaluator::CorrelationEvaluator(const ConstructionSchedule& schedule,
                                           const LevelSet& a, const LevelSet& b,
                                           size_t memo_cap)
    : sched_(schedule),
      base_(validated_base_stage(schedule, a, b)),
      a_(a.lifted(schedule, base_)),
      b_(b.lifted(schedule, base_)),
      mu_a_(a_.measure(schedule)),
      mu_b_(b_.measure(schedule)),
      memo_cap_(memo_cap) {
    pair_memo_.resize(static_cast<size_t>(sched_.stages() - base_) + 1);
    full_a_.push_back(a_.level_count());
}

Rational CorrelationEvaluator::measure_ab() const {
    return Rational(LevelSet::overlap_count(a_, b_, BigInt(0))) * sched_.width(base_);
}

const BigInt& CorrelationEvaluator::a_positions_total(int j) {
    while (static_cast<int>(full_a_.size()) <= j - base_) {
        const int built = base_ + static_cast<int>(full_a_.size()) - 1;
        full_a_.push_back(full_a_.back() * sched_.cut(built).cuts);
    }
    return full_a_[static_cast<size_t>(j - base_)];
}

BigInt CorrelationEvaluator::a_positions_below(int j, const BigInt& bound) {
    if (bound <= 0) return BigInt(0);
    if (bound >= sched_.height(j)) return a_positions_total(j);
    if (j == base_) return a_.count_below(bound);

    const auto [k, offset] = sched_.locate_copy(j - 1, bound - 1);
    BigInt total = a_positions_total(j - 1) * (k - 1);
    const BigInt& h_prev = sched_.height(j - 1);
    const BigInt end_offset = offset + 1;  // bound - copy_start(k)
    if (end_offset >= h_prev) {
        total += a_positions_total(j - 1);
    } else {
        total += a_positions_below(j - 1, end_offset);
    }
    return total;
}

BigInt CorrelationEvaluator::pair_count(int j, const BigInt& lag) {
    const BigInt& h = sched_.height(j);
    if (lag >= h || lag <= -h) return BigInt(0);
    if (j == base_) return LevelSet::overlap_count(a_, b_, lag);

    auto& memo = pair_memo_[static_cast<size_t>(j - base_)];
    if (auto it = memo.find(lag); it != memo.end()) return it->second;

    const int cut_index = j - 1;
    const StageRecord& rec = sched_.cut(cut_index);
    const BigInt& h_prev = rec.height;

    BigInt total = 0;
    for (int64_t k = 1; k <= rec.cuts; ++k) {
        const BigInt start_k = sched_.copy_start(cut_index, k);
        const BigInt target = start_k + lag;
        const auto [first, last] =
            sched_.copies_with_start_in(cut_index, target - h_prev + 1, target + h_prev - 1);
        for (int64_t k2 = first; k2 <= last; ++k2) {
            total += pair_count(j - 1, lag + start_k - sched_.copy_start(cut_index, k2));
        }
    }

    if (memo_entries_ < memo_cap_) {
        memo.emplace(lag, total);
        ++memo_entries_;
    }
    return total;
}

CorrelationResult CorrelationEvaluator::at_stage(const BigInt& m, int J) {
    if (m < 0) throw std::invalid_argument("correlation lag must be >= 0");
    if (J < base_ || J > sched_.stages()) {
        throw std::out_of_range("evaluation stage " + std::to_string(J) +
                                " outside [" + std::to_string(base_) + ", " +
                                std::to_string(sched_.stages()) + "]");
    }

    const BigInt& h = sched_.height(J);
    const Rational& w = sched_.width(J);

    BigInt window_pairs(0);
    BigInt unresolved(0);
    if (m >= h) {
        unresolved = a_positions_total(J);
    } else {
        window_pairs = pair_count(J, m);
        unresolved = a_positions_total(J) - a_positions_below(J, h - m);
    }

    CorrelationResult result;
    result.lag = m;
    result.stage_used = J;
    result.method = CorrelationResult::Method::Windowed;  // raw fixed-stage evaluation
    result.lo = Rational(window_pairs) * w;
    result.hi = result.lo + Rational(unresolved) * w;
    // The true value never exceeds min(mu(A), mu(B)); R^m is injective, so
    // unresolved A mass can only land on the B mass not already matched.
    if (result.hi > mu_a_) result.hi = mu_a_;
    if (result.hi > mu_b_) result.hi = mu_b_;
    return result;
}

CorrelationResult CorrelationEvaluator::refine(const BigInt& m, const Rational& tolerance) {
    int start = base_;
    while (start < sched_.stages() && sched_.height(start) <= m) ++start;
    CorrelationResult best = at_stage(m, start);
    for (int J = start; best.width() > tolerance && J < sched_.stages();) {
        ++J;
        best = at_stage(m, J);
    }
    best.method = CorrelationResult::Method::ExactDp;
    best.met_tolerance = best.width() <= tolerance;
    return best;
}

Rational CorrelationEvaluator::exact_value(const BigInt& m) {
    CorrelationResult r = refine(m, Rational(0));
    if (!r.exact()) {
        throw ToleranceUnreachable(
            "correlation at lag " + to_decimal(m) + " not exact within " +
                std::to_string(sched_.stages()) + " built stages; achieved width " +
                to_decimal(r.width()),
            r);
    }
    return r.lo;
}

// ---------------------------------------------------------------------------
// Brute force

namespace {

// Membership bitmap of the stage-J word for one level set.
std::vector<char> word_membership(const ConstructionSchedule& schedule, const LevelSet& set,
                                  int J, int64_t guard) {
    const std::vector<int64_t> word = schedule.materialize_word(J, set.stage(), guard);
    std::vector<char> in(word.size(), 0);
    for (size_t i = 0; i < word.size(); ++i) {
        if (word[i] >= 0 && set.contains(BigInt(word[i]))) in[i] = 1;
    }
    return in;
}

CorrelationResult windowed_from_counts(const ConstructionSchedule& schedule, const BigInt& m,
                                       int J, const BigInt& pairs, const BigInt& top_a,
                                       const Rational& mu_a, const Rational& mu_b) {
    CorrelationResult r;
    r.lag = m;
    r.stage_used = J;
    r.method = CorrelationResult::Method::BruteForce;
    const Rational& w = schedule.width(J);
    r.lo = Rational(pairs) * w;
    r.hi = r.lo + Rational(top_a) * w;
    if (r.hi > mu_a) r.hi = mu_a;
    if (r.hi > mu_b) r.hi = mu_b;
    return r;
}

}  // namespace

CorrelationResult correlation_bruteforce(const ConstructionSchedule& schedule, const LevelSet& a,
                                         const LevelSet& b, const BigInt& m, int J,
                                         int64_t guard) {
    if (m < 0) throw std::invalid_argument("correlation lag must be >= 0");
    a.validate_against(schedule);
    b.validate_against(schedule);
    const std::vector<char> in_a = word_membership(schedule, a, J, guard);
    const std::vector<char> in_b = word_membership(schedule, b, J, guard);
    const int64_t h = static_cast<int64_t>(in_a.size());

    const int64_t lag = m.fits_slong_p() ? m.get_si() : h;  // lag >= h: no window
    BigInt pairs(0);
    BigInt top_a(0);
    long hits = 0, top = 0;
    for (int64_t i = 0; i + lag < h; ++i) {
        if (in_a[static_cast<size_t>(i)] && in_b[static_cast<size_t>(i + lag)]) ++hits;
    }
    for (int64_t i = std::max<int64_t>(0, h - lag); i < h; ++i) {
        if (in_a[static_cast<size_t>(i)]) ++top;
    }
    pairs = hits;
    top_a = top;
    return windowed_from_counts(schedule, m, J, pairs, top_a, a.measure(schedule),
                                b.measure(schedule));
}

std::vector<CorrelationResult> correlation_bruteforce_sweep(const ConstructionSchedule& schedule,
                                                            const LevelSet& a, const LevelSet& b,
                                                            int J, int64_t guard) {
    a.validate_against(schedule);
    b.validate_against(schedule);
    const std::vector<char> in_a = word_membership(schedule, a, J, guard);
    const std::vector<char> in_b = word_membership(schedule, b, J, guard);
    const size_t h = in_a.size();
    const size_t words = (h + 63) / 64;

    std::vector<uint64_t> bits_a(words, 0), bits_b(words, 0);
    for (size_t i = 0; i < h; ++i) {
        if (in_a[i]) bits_a[i / 64] |= 1ULL << (i % 64);
        if (in_b[i]) bits_b[i / 64] |= 1ULL << (i % 64);
    }

    // suffix_a[p] = number of A positions at index >= p
    std::vector<int64_t> suffix_a(h + 1, 0);
    for (size_t i = h; i-- > 0;) suffix_a[i] = suffix_a[i + 1] + (in_a[i] ? 1 : 0);

    const Rational mu_a = a.measure(schedule);
    const Rational mu_b = b.measure(schedule);

    std::vector<CorrelationResult> out;
    out.reserve(h);
    std::vector<uint64_t> shifted(words);
    for (size_t m = 0; m < h; ++m) {
        // shifted = bits_b >> m
        const size_t word_shift = m / 64;
        const unsigned bit_shift = static_cast<unsigned>(m % 64);
        int64_t hits = 0;
        for (size_t i = 0; i + word_shift < words; ++i) {
            uint64_t v = bits_b[i + word_shift] >> bit_shift;
            if (bit_shift != 0 && i + word_shift + 1 < words) {
                v |= bits_b[i + word_shift + 1] << (64 - bit_shift);
            }
            hits += std::popcount(bits_a[i] & v);
        }
        out.push_back(windowed_from_counts(schedule, BigInt(static_cast<long>(m)), J,
                                           BigInt(static_cast<long>(hits)),
                                           BigInt(static_cast<long>(suffix_a[h - m])), mu_a,
                                           mu_b));
    }
    return out;
}

MonteCarloCorrelation correlation_montecarlo(const ConstructionSchedule& schedule,
                                             const LevelSet& a, const LevelSet& b,
                                             const BigInt& m, int J, uint64_t samples,
                                             uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("monte carlo needs samples >= 1");
    if (m < 0) throw std::invalid_argument("correlation lag must be >= 0");
    a.validate_against(schedule);
    b.validate_against(schedule);

    MonteCarloCorrelation mc;
    mc.lag = m;
    mc.stage_used = J;
    mc.samples = samples;
    mc.seed = seed;

    const BigInt& h = schedule.height(J);
    if (m >= h) {  // empty window: the estimate is trivially zero-width
        return mc;
    }
    const BigInt window = h - m;
    RandomStream rng(seed, 0);
    uint64_t hits = 0;
    for (uint64_t i = 0; i < samples; ++i) {
        const BigInt pos = rng.uniform_below_big(window);
        const auto la = schedule.level_label(J, pos, a.stage());
        if (!la || !a.contains(*la)) continue;
        const auto lb = schedule.level_label(J, pos + m, b.stage());
        if (lb && b.contains(*lb)) ++hits;
    }
    mc.hits = hits;

    const double scale = to_double_nearest(Rational(window) * schedule.width(J));
    const double p_hat = static_cast<double>(hits) / static_cast<double>(samples);
    // Hoeffding two-sided bound at 99%: P(|p_hat - p| > eps) <= 2 exp(-2 N eps^2).
    const double eps = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(samples)));
    mc.estimate = p_hat * scale;
    mc.ci_lo = std::max(0.0, p_hat - eps) * scale;
    mc.ci_hi = std::min(1.0, p_hat + eps) * scale;
    return mc;
}

// ---------------------------------------------------------------------------
// Rigidity / mixing / kappa

Rational rigidity_defect(const ConstructionSchedule& schedule, const LevelSet& a, int j) {
    CorrelationEvaluator eval(schedule, a, a);
    const Rational mu = eval.measure_a();
    const Rational corr = eval.exact_value(schedule.height(j));
    return 2 * mu - 2 * corr;
}

MixingReport verify_mixing_along(const ConstructionSchedule& schedule,
                                 const std::vector<BigInt>& lags, const LevelSet& a,
                                 const LevelSet& b, const Rational& threshold,
                                 std::optional<BigInt> cutoff_override,
                                 std::optional<Rational> total_measure) {
    if (!std::is_sorted(lags.begin(), lags.end())) {
        throw std::invalid_argument("mixing lags must be sorted ascending");
    }
    for (const BigInt& m : lags) {
        if (m <= 0) throw std::invalid_argument("mixing lags must be positive");
    }

    CorrelationEvaluator eval(schedule, a, b);
    MixingReport report;
    report.finite_mode = schedule.mode() == ConstructionSchedule::Mode::Finite;

    const int n0 = eval.base_stage();
    report.cutoff = cutoff_override
                        ? *cutoff_override
                        : (n0 + 1 <= schedule.stages() ? schedule.height(n0 + 1)
                                                       : schedule.height(schedule.stages()));

    if (report.finite_mode) {
        Rational total = total_measure ? *total_measure
                                       : (schedule.declared_total()
                                              ? *schedule.declared_total()
                                              : schedule.stage_measure(schedule.stages()));
        report.target = eval.measure_a() * eval.measure_b() / total;
    } else {
        report.target = Rational(0);
    }

    for (const BigInt& m : lags) {
        MixingLagRow row;
        row.corr = eval.refine(m, Rational(0));
        row.beyond_cutoff = m >= report.cutoff;
        if (!row.beyond_cutoff) {
            row.verdict = Verdict::Pass;  // informational lag, not part of the claim
        } else if (report.finite_mode) {
            const Rational lo_dev = row.corr.lo - report.target;
            const Rational hi_dev = row.corr.hi - report.target;
            const Rational lo_abs = lo_dev < 0 ? Rational(-lo_dev) : lo_dev;
            const Rational hi_abs = hi_dev < 0 ? Rational(-hi_dev) : hi_dev;
            const Rational worst = lo_abs > hi_abs ? lo_abs : hi_abs;
            const Rational best = (lo_dev <= 0 && hi_dev >= 0) ? Rational(0)
                                  : (lo_abs < hi_abs ? lo_abs : hi_abs);
            if (worst <= threshold) {
                row.verdict = Verdict::Pass;
            } else if (best > threshold) {
                row.verdict = Verdict::Fail;
            } else {
                row.verdict = Verdict::Inconclusive;
            }
        } else {
            if (row.corr.exact() && row.corr.lo == 0) {
                row.verdict = Verdict::Pass;
            } else if (row.corr.lo > 0) {
                row.verdict = Verdict::Fail;
            } else {
                row.verdict = Verdict::Inconclusive;
            }
        }
        if (row.beyond_cutoff) {
            ++report.checked;
            if (row.verdict == Verdict::Fail) ++report.failed;
            if (row.verdict == Verdict::Inconclusive) ++report.inconclusive;
        }
        report.rows.push_back(std::move(row));
    }

    report.verdict = report.failed > 0
                         ? Verdict::Fail
                         : (report.inconclusive > 0 ? Verdict::Inconclusive : Verdict::Pass);
    return report;
}

KappaReport kappa_mixing_check(const ConstructionSchedule& schedule,
                               const std::vector<BigInt>& lags, const LevelSet& a,
                               const LevelSet& b, const Rational& convergence_tol) {
    if (schedule.mode() != ConstructionSchedule::Mode::Finite) {
        throw std::invalid_argument("kappa-mixing requires a finite-measure schedule");
    }
    CorrelationEvaluator eval(schedule, a, b);
    KappaReport report;
    report.total_measure = schedule.declared_total() ? *schedule.declared_total()
                                                     : schedule.stage_measure(schedule.stages());

    const Rational mu_ab = eval.measure_ab();
    const Rational product = eval.measure_a() * eval.measure_b() / report.total_measure;
    const Rational denom = mu_ab - product;
    if (denom == 0) {
        throw std::invalid_argument(
            "kappa unidentifiable: mu(A /\\ B) equals mu(A)mu(B)/mu(X)");
    }

    for (const BigInt& m : lags) {
        const CorrelationResult corr = eval.refine(m, Rational(0));
        // kappa = (mu(A /\ B) - c) / denom, monotone in c, so the interval
        // endpoints map to endpoints.
        Rational k1 = (mu_ab - corr.lo) / denom;
        Rational k2 = (mu_ab - corr.hi) / denom;
        if (k1 > k2) std::swap(k1, k2);
        report.rows.push_back(KappaRow{m, std::move(k1), std::move(k2), corr.exact()});
    }

    if (report.rows.size() >= 3) {
        std::vector<Rational> mids;
        for (size_t i = report.rows.size() - 3; i < report.rows.size(); ++i) {
            mids.push_back((report.rows[i].lo + report.rows[i].hi) / 2);
        }
        const Rational mx = std::max({mids[0], mids[1], mids[2]});
        const Rational mn = std::min({mids[0], mids[1], mids[2]});
        report.spread = mx - mn;
        report.converged = report.spread <= convergence_tol;
    } else {
        report.spread = Rational(0);
        report.converged = false;
    }
    return report;
}

// ---------------------------------------------------------------------------
// (sp) decomposition

BigInt SpForm::reconstruct(const std::vector<BigInt>& heights) const {
    BigInt v = residual;
    for (size_t t = 0; t < indices.size(); ++t) {
        const BigInt& h = heights[static_cast<size_t>(indices[t] - 1)];
        v += signs[t] > 0 ? h : BigInt(-h);
    }
    return v;
}

std::string SpForm::render(const std::vector<BigInt>& heights) const {
    std::string out;
    for (size_t t = 0; t < indices.size(); ++t) {
        if (t == 0) {
            out += "h" + std::to_string(indices[t]);
        } else {
            out += (signs[t] > 0 ? "+h" : "-h") + std::to_string(indices[t]);
        }
        out += "(" + to_decimal(heights[static_cast<size_t>(indices[t] - 1)]) + ")";
    }
    if (residual != 0 || indices.empty()) {
        out += (residual >= 0 ? "+" : "") + to_decimal(residual);
    }
    return out;
}

namespace {

std::optional<SpForm> sp_greedy(const BigInt& m, const std::vector<BigInt>& heights,
                                const BigInt& s_max, int p_max) {
    SpForm form;
    BigInt remainder = m;
    int bound = static_cast<int>(heights.size());  // indices must stay below this
    while (form.indices.empty() || rankone::abs(remainder) > s_max) {
        if (form.terms() == p_max || bound < 1) return std::nullopt;
        const BigInt magnitude = rankone::abs(remainder);
        int best = 0;
        BigInt best_dist;
        for (int j = 1; j <= bound; ++j) {  // ties prefer the larger height
            BigInt dist = rankone::abs(magnitude - heights[static_cast<size_t>(j - 1)]);
            if (best == 0 || dist <= best_dist) {
                best = j;
                best_dist = std::move(dist);
            }
        }
        const int sign = remainder >= 0 ? 1 : -1;
        form.indices.push_back(best);
        form.signs.push_back(sign);
        remainder -= sign > 0 ? heights[static_cast<size_t>(best - 1)]
                              : BigInt(-heights[static_cast<size_t>(best - 1)]);
        bound = best - 1;
    }
    form.residual = std::move(remainder);
    return form;
}

std::optional<SpForm> sp_exhaustive(const BigInt& m, const std::vector<BigInt>& heights,
                                    const BigInt& s_max, int p_max) {
    const int n = static_cast<int>(heights.size());
    auto fits = [&](const BigInt& value) { return rankone::abs(m - value) <= s_max; };

    for (int j1 = n; j1 >= 1; --j1) {
        const BigInt& h1 = heights[static_cast<size_t>(j1 - 1)];
        if (p_max >= 1 && fits(h1)) {
            return SpForm{{j1}, {1}, m - h1};
        }
    }
    if (p_max < 2) return std::nullopt;
    for (int j1 = n; j1 >= 2; --j1) {
        const BigInt& h1 = heights[static_cast<size_t>(j1 - 1)];
        for (int j2 = j1 - 1; j2 >= 1; --j2) {
            const BigInt& h2 = heights[static_cast<size_t>(j2 - 1)];
            for (int s2 : {1, -1}) {
                const BigInt v = s2 > 0 ? BigInt(h1 + h2) : BigInt(h1 - h2);
                if (fits(v)) return SpForm{{j1, j2}, {1, s2}, m - v};
            }
        }
    }
    if (p_max < 3) return std::nullopt;
    for (int j1 = n; j1 >= 3; --j1) {
        for (int j2 = j1 - 1; j2 >= 2; --j2) {
            for (int j3 = j2 - 1; j3 >= 1; --j3) {
                for (int s2 : {1, -1}) {
                    for (int s3 : {1, -1}) {
                        BigInt v = heights[static_cast<size_t>(j1 - 1)];
                        v += s2 > 0 ? heights[static_cast<size_t>(j2 - 1)]
                                    : BigInt(-heights[static_cast<size_t>(j2 - 1)]);
                        v += s3 > 0 ? heights[static_cast<size_t>(j3 - 1)]
                                    : BigInt(-heights[static_cast<size_t>(j3 - 1)]);
                        if (fits(v)) return SpForm{{j1, j2, j3}, {1, s2, s3}, m - v};
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<SpForm> sp_decompose(const BigInt& m, const std::vector<BigInt>& heights,
                                   const BigInt& s_max, int p_max) {
    if (m <= 0) throw std::invalid_argument("sp decomposition needs m > 0");
    if (s_max < 0 || p_max < 1) throw std::invalid_argument("sp bounds must be positive");
    if (!std::is_sorted(heights.begin(), heights.end()) ||
        std::adjacent_find(heights.begin(), heights.end()) != heights.end()) {
        throw std::invalid_argument("heights must be strictly increasing");
    }
    if (heights.empty()) return std::nullopt;

    if (auto greedy = sp_greedy(m, heights, s_max, p_max)) return greedy;
    return sp_exhaustive(m, heights, s_max, std::min(p_max, 3));
}

}  // namespace rankone
