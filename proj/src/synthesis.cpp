#include "rankone/synthesis.hpp"

#include <algorithm>
#include <sstream>

namespace rankone {

namespace {

BigInt ceil_rational(const Rational& q) {
    BigInt out;
    mpz_cdiv_q(out.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return out;
}

// Largest |signed lag| that can carry a positive correlation inside the
// stage-j word, over every base stage: sum of (r_i - 1) h_i below j plus the
// base-word diameter h_1 - 1.
BigInt envelope_through(const ConstructionSchedule& s, int j) {
    BigInt env = s.height(1) - 1;
    for (int i = 1; i < j; ++i) env += (s.cut(i).cuts - 1) * s.height(i);
    return env;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec types

void IntervalFamily::validate() const {
    if (entries.empty()) throw std::invalid_argument("interval family must be nonempty");
    for (size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].a < 1 || entries[i].L < 1 || entries[i].multiplicity < 1) {
            throw std::invalid_argument("interval family entries need a, L, multiplicity >= 1");
        }
        if (i > 0 && (entries[i].a <= entries[i - 1].a || entries[i].L <= entries[i - 1].L)) {
            throw std::invalid_argument("interval family a_i, L_i must be strictly increasing");
        }
    }
}

bool IntervalFamily::contains_point(const BigInt& m) const {
    for (const IntervalFamilyEntry& e : entries) {
        if (e.a > m) break;  // entries sorted by a; n >= 1 needs a <= m
        BigInt n = m / e.a;
        if (n > e.multiplicity) n = e.multiplicity;
        for (; n >= 1; --n) {
            const BigInt lo = n * e.a;
            if (lo > m) continue;
            if (m <= lo + e.L) return true;
            break;  // smaller n only moves the interval further down
        }
    }
    return false;
}

void ExplicitSet::validate() const {
    if (horizon < 1) throw std::invalid_argument("explicit set horizon must be >= 1");
    for (size_t i = 0; i < elements.size(); ++i) {
        if (elements[i] < 1 || elements[i] > horizon) {
            throw std::invalid_argument("explicit set elements must lie in [1, horizon]");
        }
        if (i > 0 && elements[i] <= elements[i - 1]) {
            throw std::invalid_argument("explicit set must be sorted strictly increasing");
        }
    }
}

bool ExplicitSet::contains(const BigInt& m) const {
    return std::binary_search(elements.begin(), elements.end(), m);
}

std::optional<BigInt> ExplicitSet::first_in(const BigInt& lo, const BigInt& hi) const {
    auto it = std::lower_bound(elements.begin(), elements.end(), lo);
    if (it != elements.end() && *it <= hi) return *it;
    return std::nullopt;
}

bool ExplicitSet::window_clear(const BigInt& lo, const BigInt& hi) const {
    return !first_in(lo, hi).has_value();
}

void MixingSetSpec::validate() const {
    if (kind == Kind::IntervalFamily) {
        family.validate();
    } else {
        set.validate();
    }
}

bool MixingSetSpec::candidate_mixing_lag(const BigInt& m) const {
    if (kind == Kind::IntervalFamily) return !family.contains_point(m);
    return m <= set.horizon && set.contains(m);
}

// ---------------------------------------------------------------------------
// Rigid-mixing construction

SynthesisResult synthesize_rigid_mixing(const MixingSetSpec& spec, const SynthesisOptions& opt) {
    spec.validate();
    if (opt.stages < 2) throw std::invalid_argument("synthesis needs at least 2 stages");

    SynthesisResult result{ConstructionSchedule(opt.h1, opt.w1), {}, "rigid-mixing", ""};
    ConstructionSchedule& sched = result.schedule;

    for (int j = 1; j < opt.stages; ++j) {
        const int64_t r = j == 1 ? 2 : j;  // a tower cannot be cut into one column
        const BigInt& h = sched.height(j);
        const BigInt env_next = envelope_through(sched, j) + (r - 1) * h;
        BigInt radius = j * h;
        if (env_next > radius) radius = env_next;
        const Rational growth_floor = opt.rigid_growth_scale * j * h;

        CutAudit audit;
        audit.j = j;
        audit.r = r;
        audit.radius = radius;

        BigInt h_next;
        if (spec.kind == MixingSetSpec::Kind::IntervalFamily) {
            const auto& entries = spec.family.entries;
            bool placed = false;
            for (size_t i = 0; i < entries.size() && !placed; ++i) {
                const IntervalFamilyEntry& e = entries[i];
                if (e.multiplicity < j) continue;
                if (e.L < (j + 1) * radius) continue;
                h_next = e.a + radius;
                const BigInt spacer = h_next - r * h;
                if (spacer < 0 || Rational(spacer) < growth_floor) continue;

                std::vector<SafetyWindow> windows;
                bool all_ok = true;
                for (int n = 1; n <= j; ++n) {
                    SafetyWindow w;
                    w.n = n;
                    w.lo = n * h_next - radius;
                    w.hi = n * h_next + radius;
                    const BigInt clo = n * e.a;
                    const BigInt chi = clo + e.L;
                    w.container = "[" + to_decimal(clo) + ", " + to_decimal(chi) + "]";
                    w.ok = clo <= w.lo && w.hi <= chi;
                    all_ok = all_ok && w.ok;
                    windows.push_back(std::move(w));
                }
                if (!all_ok) continue;

                audit.family_entry = i;
                audit.windows = std::move(windows);
                audit.h_next = h_next;
                audit.spacer = spacer;
                audit.growth_ok = true;
                placed = true;
            }
            if (!placed) {
                throw SynthesisStall(
                    "rigid-mixing stage " + std::to_string(j) +
                    ": no family entry with multiplicity >= " + std::to_string(j) +
                    " and L >= " + to_decimal(BigInt((j + 1) * radius)) +
                    " (and a large enough for spacer growth)");
            }
        } else {
            const ExplicitSet& m_set = spec.set;
            BigInt lb = r * h + ceil_rational(growth_floor);
            if (lb <= h) lb = h + 1;
            BigInt candidate = lb;
            while (true) {
                if (j * candidate + radius > m_set.horizon) {
                    throw SynthesisStall("rigid-mixing stage " + std::to_string(j) +
                                         ": scan exceeded horizon " + to_decimal(m_set.horizon) +
                                         "; blocking window [" +
                                         to_decimal(BigInt(j * candidate - radius)) + ", " +
                                         to_decimal(BigInt(j * candidate + radius)) + "]");
                }
                bool clear = true;
                for (int n = 1; n <= j && clear; ++n) {
                    const BigInt lo = n * candidate - radius;
                    const BigInt hi = n * candidate + radius;
                    if (auto e = m_set.first_in(lo, hi)) {
                        clear = false;
                        // jump to the smallest candidate moving this window past *e
                        BigInt next = (*e + radius) / n + 1;
                        if (next <= candidate) next = candidate + 1;
                        candidate = std::move(next);
                    }
                }
                if (clear) break;
            }
            h_next = candidate;
            audit.h_next = h_next;
            audit.spacer = h_next - r * h;
            audit.growth_ok = Rational(audit.spacer) >= growth_floor;
            for (int n = 1; n <= j; ++n) {
                SafetyWindow w;
                w.n = n;
                w.lo = n * h_next - radius;
                w.hi = n * h_next + radius;
                w.container = "explicit set scan";
                w.ok = m_set.window_clear(w.lo, w.hi);
                audit.windows.push_back(std::move(w));
            }
        }

        sched.advance_stage(r, SpacerSchedule::last_column(audit.spacer));
        if (sched.height(j + 1) != audit.h_next) {
            throw std::logic_error("height recursion mismatch in rigid-mixing synthesis");
        }
        result.cuts.push_back(std::move(audit));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Two-column construction

SynthesisResult synthesize_two_column(const IntervalFamily& family, const SynthesisOptions& opt) {
    family.validate();
    if (opt.stages < 2) throw std::invalid_argument("synthesis needs at least 2 stages");

    SynthesisResult result{ConstructionSchedule(opt.h1, opt.w1), {}, "two-column", ""};
    ConstructionSchedule& sched = result.schedule;
    std::vector<bool> used(family.entries.size(), false);

    for (int j = 1; j < opt.stages; ++j) {
        const BigInt& h = sched.height(j);
        const Rational growth_floor = opt.plain_growth_scale * h;

        CutAudit audit;
        audit.j = j;
        audit.r = 2;
        audit.radius = h;

        bool placed = false;
        for (size_t i = 0; i < family.entries.size() && !placed; ++i) {
            if (used[i]) continue;
            const IntervalFamilyEntry& e = family.entries[i];
            if (e.L < 2 * h) continue;
            const BigInt h_next = e.a + h;
            const BigInt spacer = h_next - 2 * h;  // = a_i - h_j
            if (spacer < 0 || Rational(spacer) < growth_floor) continue;

            SafetyWindow w;
            w.n = 1;
            w.lo = h_next - h;
            w.hi = h_next + h;
            w.container = "[" + to_decimal(e.a) + ", " + to_decimal(BigInt(e.a + e.L)) + "]";
            w.ok = e.a <= w.lo && w.hi <= e.a + e.L;
            if (!w.ok) continue;

            used[i] = true;
            audit.family_entry = i;
            audit.h_next = h_next;
            audit.spacer = spacer;
            audit.growth_ok = true;
            audit.windows.push_back(std::move(w));
            placed = true;
        }
        if (!placed) {
            throw SynthesisStall("two-column stage " + std::to_string(j) +
                                 ": no unused family entry with L >= " + to_decimal(BigInt(2 * h)) +
                                 " and a >= " + to_decimal(BigInt(h + ceil_rational(growth_floor))));
        }

        sched.advance_stage(2, SpacerSchedule::two_column(audit.spacer));
        if (sched.height(j + 1) != audit.h_next) {
            throw std::logic_error("height recursion mismatch in two-column synthesis");
        }
        result.cuts.push_back(std::move(audit));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Subset heights

SynthesisResult synthesize_subset_heights(const std::vector<BigInt>& pool, bool all_integers,
                                          const SynthesisOptions& opt) {
    if (opt.stages < 2) throw std::invalid_argument("synthesis needs at least 2 stages");
    if (opt.subset_growth_factor < 3) {
        throw std::invalid_argument("subset-heights growth factor must be >= 3 so spacers stay positive");
    }
    if (!all_integers) {
        if (!std::is_sorted(pool.begin(), pool.end()) ||
            std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
            throw std::invalid_argument("height pool must be sorted strictly increasing");
        }
        if (!std::binary_search(pool.begin(), pool.end(), opt.h1)) {
            throw std::invalid_argument("h1 must be an element of the height pool");
        }
    }

    SynthesisResult result{ConstructionSchedule(opt.h1, opt.w1), {}, "subset-heights", ""};
    ConstructionSchedule& sched = result.schedule;

    for (int j = 1; j < opt.stages; ++j) {
        const BigInt& h = sched.height(j);
        const BigInt target = opt.subset_growth_factor * h;

        BigInt h_next;
        if (all_integers) {
            h_next = target;
        } else {
            auto it = std::lower_bound(pool.begin(), pool.end(), target);
            if (it == pool.end()) {
                throw SynthesisStall("subset-heights stage " + std::to_string(j) +
                                     ": pool exhausted before an element >= " + to_decimal(target));
            }
            h_next = *it;
        }

        CutAudit audit;
        audit.j = j;
        audit.r = 2;
        audit.radius = h;
        audit.h_next = h_next;
        audit.spacer = h_next - 2 * h;
        audit.growth_ok = Rational(audit.spacer) >= opt.plain_growth_scale * h;
        if (audit.spacer < 0) {
            throw SynthesisStall("subset-heights stage " + std::to_string(j) +
                                 ": selected height " + to_decimal(h_next) +
                                 " leaves negative spacer");
        }

        sched.advance_stage(2, SpacerSchedule::two_column(audit.spacer));
        result.cuts.push_back(std::move(audit));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Zero-density embedding

BigInt embed_zero_density(const ExplicitSet& m, int i, const BigInt& L_target,
                          const BigInt& a_min) {
    m.validate();
    if (i < 1 || L_target < 1) throw std::invalid_argument("embed needs i >= 1, L >= 1");

    BigInt a = a_min + 1;
    if (a < 1) a = 1;
    while (true) {
        if (i * a + L_target > m.horizon) {
            throw SynthesisStall("embed: horizon " + to_decimal(m.horizon) +
                                 " exhausted before a window family of length " +
                                 to_decimal(L_target) + " (prefix too dense or horizon too small)");
        }
        bool clear = true;
        for (int n = 1; n <= i && clear; ++n) {
            if (auto e = m.first_in(n * a, n * a + L_target)) {
                clear = false;
                BigInt next = *e / n + 1;
                if (next <= a) next = a + 1;
                a = std::move(next);
            }
        }
        if (clear) return a;
    }
}

// ---------------------------------------------------------------------------
// Staircase class

std::pair<int64_t, SpacerSchedule> staircase_stage_params(bool mixing_stage, int j, int64_t q,
                                                          int64_t repetitions) {
    if (mixing_stage) {
        if (j < 2) {
            throw std::invalid_argument("mixing staircase stage needs j >= 2 (r = j columns)");
        }
        return {j, SpacerSchedule::staircase(j)};
    }
    if (q < 1 || repetitions < 1 || repetitions * q < 2) {
        throw std::invalid_argument("rigid staircase stage needs N, q >= 1 and N*q >= 2");
    }
    return {repetitions * q, SpacerSchedule::repeated_staircase(repetitions, q)};
}

SynthesisResult build_staircase_schedule(const std::vector<StaircasePlanEntry>& plan,
                                         const SynthesisOptions& opt, const Rational& budget) {
    if (plan.empty()) throw std::invalid_argument("staircase plan must be nonempty");

    SynthesisResult result{
        ConstructionSchedule(opt.h1, opt.w1, ConstructionSchedule::Mode::Finite), {},
        "staircase", ""};
    ConstructionSchedule& sched = result.schedule;

    Rational ratio_sum(0);
    for (size_t t = 0; t < plan.size(); ++t) {
        const int j = static_cast<int>(t) + 1;
        const StaircasePlanEntry& entry = plan[t];
        auto [r, spacers] =
            entry.mixing ? staircase_stage_params(true, j, j, 0)
                         : staircase_stage_params(false, j, entry.q, entry.reps);

        CutAudit audit;
        audit.j = j;
        audit.r = r;
        audit.radius = 0;
        ratio_sum += Rational(BigInt(r)) / sched.height(j);

        sched.advance_stage(r, std::move(spacers));
        audit.h_next = sched.height(j + 1);
        audit.spacer = sched.cut(j).spacer_total;
        audit.growth_ok = true;
        result.cuts.push_back(std::move(audit));
    }

    std::ostringstream note;
    note << "finite-measure admissibility: sum r_j/h_j = " << to_decimal(ratio_sum) << " ("
         << format_double17(to_double_nearest(ratio_sum)) << ")";
    if (ratio_sum > budget) {
        note << " EXCEEDS budget " << to_decimal(budget);
    } else {
        note << " within budget " << to_decimal(budget);
    }
    note << "; total measure through stage " << sched.stages() << " = "
         << to_decimal(sched.stage_measure(sched.stages()));
    result.notes = note.str();
    return result;
}

// ---------------------------------------------------------------------------
// Post-hoc audits (independent re-derivation)

namespace {

// Containment of [lo, hi] in some family interval, searched from scratch.
bool family_window_covered(const IntervalFamily& family, const BigInt& lo, const BigInt& hi) {
    for (const IntervalFamilyEntry& e : family.entries) {
        for (int n = 1; n <= e.multiplicity; ++n) {
            if (n * e.a <= lo && hi <= n * e.a + e.L) return true;
        }
    }
    return false;
}

void audit_push(AuditReport& report, std::string description, bool ok) {
    report.ok = report.ok && ok;
    report.checks.push_back(AuditCheck{std::move(description), ok});
}

}  // namespace

AuditReport audit_rigid_mixing(const ConstructionSchedule& schedule, const MixingSetSpec& spec) {
    AuditReport report;
    // Recompute the positive-lag envelope from the raw parameters as we walk.
    BigInt env = schedule.height(1) - 1;
    for (int j = 1; j <= schedule.cut_records(); ++j) {
        const StageRecord& rec = schedule.cut(j);
        const int64_t expected_r = j == 1 ? 2 : j;
        audit_push(report, "cut " + std::to_string(j) + " has r = " + std::to_string(expected_r),
                   rec.cuts == expected_r);
        audit_push(report,
                   "cut " + std::to_string(j) + " spacers ride the last column only",
                   rec.spacers.prefix_total(rec.cuts - 1, rec.cuts) == 0);
        audit_push(report,
                   "cut " + std::to_string(j) + " growth s_j >= j h_j",
                   rec.spacer_total >= j * rec.height);

        env += (rec.cuts - 1) * rec.height;
        BigInt radius = j * rec.height;
        if (env > radius) radius = env;

        const BigInt& h_next = schedule.height(j + 1);
        for (int n = 1; n <= j; ++n) {
            const BigInt lo = n * h_next - radius;
            const BigInt hi = n * h_next + radius;
            bool ok;
            if (spec.kind == MixingSetSpec::Kind::IntervalFamily) {
                ok = family_window_covered(spec.family, lo, hi);
            } else {
                ok = spec.set.window_clear(lo, hi) && hi <= spec.set.horizon;
            }
            audit_push(report,
                       "window [" + to_decimal(lo) + ", " + to_decimal(hi) + "] around " +
                           std::to_string(n) + "*h_" + std::to_string(j + 1) + " protected",
                       ok);
        }
    }
    return report;
}

AuditReport audit_two_column(const ConstructionSchedule& schedule, const IntervalFamily& family) {
    AuditReport report;
    for (int j = 1; j <= schedule.cut_records(); ++j) {
        const StageRecord& rec = schedule.cut(j);
        audit_push(report, "cut " + std::to_string(j) + " has r = 2", rec.cuts == 2);
        audit_push(report, "cut " + std::to_string(j) + " spacers on the second column only",
                   rec.spacers.prefix_total(1, rec.cuts) == 0);
        audit_push(report, "cut " + std::to_string(j) + " growth s_j >= h_j",
                   rec.spacer_total >= rec.height);

        const BigInt& h_next = schedule.height(j + 1);
        const BigInt lo = h_next - rec.height;
        const BigInt hi = h_next + rec.height;
        audit_push(report,
                   "window [" + to_decimal(lo) + ", " + to_decimal(hi) +
                       "] sits inside a family interval",
                   family_window_covered(family, lo, hi));
    }
    return report;
}

std::string AuditReport::text() const {
    std::ostringstream out;
    out << "audit: " << (ok ? "all checks passed" : "FAILED") << "\n";
    for (const AuditCheck& c : checks) {
        out << "  [" << (c.ok ? "ok" : "FAIL") << "] " << c.description << "\n";
    }
    return out.str();
}

std::string SynthesisResult::report_text() const {
    std::ostringstream out;
    out << "construction: " << construction << "\n";
    out << "stages: " << schedule.stages() << "\n";
    for (const CutAudit& c : cuts) {
        out << "cut " << c.j << ": r=" << c.r << " h_next=" << to_decimal(c.h_next)
            << " s=" << to_decimal(c.spacer) << " radius=" << to_decimal(c.radius)
            << (c.growth_ok ? "" : " GROWTH-VIOLATION");
        if (c.family_entry) out << " family-entry=" << (*c.family_entry + 1);
        out << "\n";
        for (const SafetyWindow& w : c.windows) {
            out << "  window n=" << w.n << " [" << to_decimal(w.lo) << ", " << to_decimal(w.hi)
                << "] in " << w.container << (w.ok ? " ok" : " VIOLATED") << "\n";
        }
    }
    if (!notes.empty()) out << notes << "\n";
    return out.str();
}

}  // namespace rankone
