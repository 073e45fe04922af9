#include "rankone/synthesis.hpp"

#include <algorithm>

#include "doctest.h"
#include "rankone/correlation.hpp"

using namespace rankone;

namespace {

// Family whose entry i is sized for cut i of the rigid-mixing construction:
// multiplicity i, L large enough for the j+1 windows, a large enough for the
// spacer growth contract.
IntervalFamily growing_family(int cuts, const BigInt& h1 = BigInt(1)) {
    IntervalFamily fam;
    BigInt h = h1;
    BigInt env = h1 - 1;  // positive-lag envelope through the current stage
    for (int j = 1; j <= cuts; ++j) {
        const int64_t r = j == 1 ? 2 : j;
        env += (r - 1) * h;
        BigInt radius = j * h;
        if (env > radius) radius = env;

        IntervalFamilyEntry e;
        e.a = (r + j) * h;  // gives s_j = a + radius - r h >= j h
        e.L = (j + 1) * radius + j;
        e.multiplicity = j;
        if (!fam.entries.empty()) {
            if (e.a <= fam.entries.back().a) e.a = fam.entries.back().a + 1;
            if (e.L <= fam.entries.back().L) e.L = fam.entries.back().L + 1;
        }
        fam.entries.push_back(e);
        h = fam.entries.back().a + radius;
    }
    return fam;
}

std::vector<BigInt> squares_up_to(const BigInt& horizon) {
    std::vector<BigInt> out;
    for (BigInt k = 1; k * k <= horizon; ++k) out.push_back(k * k);
    return out;
}

}  // namespace

TEST_CASE("rigid-mixing synthesis reproduces the worked family example") {
    // Entry (4, 2, 1) drives cut 1 to h_2 = 5; entry (100, 40, 2) must then
    // place h_3 = 110 with windows [100,120] in [100,140] and [210,230] in
    // [200,240], s_2 = 100.
    MixingSetSpec spec;
    spec.kind = MixingSetSpec::Kind::IntervalFamily;
    spec.family.entries = {{BigInt(4), BigInt(2), 1}, {BigInt(100), BigInt(40), 2}};

    SynthesisOptions opt;
    opt.stages = 3;
    const SynthesisResult result = synthesize_rigid_mixing(spec, opt);

    CHECK(result.schedule.height(2) == 5);  // a_1 + h_1
    CHECK(result.schedule.height(3) == 110);
    CHECK(result.schedule.cut(2).spacer_total == 100);
    CHECK(result.schedule.cut(2).cuts == 2);

    REQUIRE(result.cuts.size() == 2);
    const CutAudit& cut2 = result.cuts[1];
    REQUIRE(cut2.windows.size() == 2);
    CHECK(cut2.windows[0].lo == 100);
    CHECK(cut2.windows[0].hi == 120);
    CHECK(cut2.windows[1].lo == 210);
    CHECK(cut2.windows[1].hi == 230);
    CHECK(cut2.windows[0].ok);
    CHECK(cut2.windows[1].ok);

    const AuditReport audit = audit_rigid_mixing(result.schedule, spec);
    CHECK(audit.ok);
}

TEST_CASE("rigid-mixing synthesis stalls with a diagnostic when the family runs out") {
    MixingSetSpec spec;
    spec.kind = MixingSetSpec::Kind::IntervalFamily;
    spec.family.entries = {{BigInt(4), BigInt(2), 1}, {BigInt(100), BigInt(40), 2}};
    SynthesisOptions opt;
    opt.stages = 5;
    CHECK_THROWS_AS(synthesize_rigid_mixing(spec, opt), SynthesisStall);
    try {
        synthesize_rigid_mixing(spec, opt);
    } catch (const SynthesisStall& e) {
        CHECK(std::string(e.what()).find("L >=") != std::string::npos);
    }
}

TEST_CASE("rigid-mixing synthesis on a generated family: contracts, audit, determinism") {
    MixingSetSpec spec;
    spec.kind = MixingSetSpec::Kind::IntervalFamily;
    spec.family = growing_family(8);
    SynthesisOptions opt;
    opt.stages = 9;

    const SynthesisResult result = synthesize_rigid_mixing(spec, opt);
    const ConstructionSchedule& s = result.schedule;
    REQUIRE(s.stages() == 9);

    for (int j = 1; j <= 8; ++j) {
        CHECK(s.cut(j).cuts == (j == 1 ? 2 : j));
        CHECK(s.cut(j).spacer_total >= j * s.height(j));  // growth contract
        CHECK(s.height(j + 1) > s.height(j));
        CHECK(s.width(j + 1) < s.width(j));
        CHECK(s.stage_measure(j + 1) > s.stage_measure(j));  // infinite mode grows
    }

    CHECK(audit_rigid_mixing(s, spec).ok);

    // determinism: identical inputs give identical schedules
    const SynthesisResult again = synthesize_rigid_mixing(spec, opt);
    for (int j = 1; j <= 9; ++j) CHECK(s.height(j) == again.schedule.height(j));
}

TEST_CASE("rigid-mixing synthesis from an explicit sparse set keeps windows clear") {
    MixingSetSpec spec;
    spec.kind = MixingSetSpec::Kind::ExplicitSet;
    spec.set.horizon = BigInt(1000000);
    spec.set.zero_density_attested = true;
    for (BigInt k = 1; k * k * k <= spec.set.horizon; ++k) spec.set.elements.push_back(k * k * k);

    SynthesisOptions opt;
    opt.stages = 4;
    const SynthesisResult result = synthesize_rigid_mixing(spec, opt);

    // independent membership scan of every safety segment
    for (const CutAudit& cut : result.cuts) {
        for (const SafetyWindow& w : cut.windows) {
            CHECK(w.ok);
            for (BigInt v = w.lo; v <= w.hi; ++v) CHECK(!spec.set.contains(v));
        }
        CHECK(cut.growth_ok);
    }
    CHECK(audit_rigid_mixing(result.schedule, spec).ok);
}

TEST_CASE("two-column synthesis reproduces the worked example, boundary included") {
    IntervalFamily fam;
    fam.entries = {{BigInt(4), BigInt(2), 1}, {BigInt(30), BigInt(12), 1}};
    SynthesisOptions opt;
    opt.stages = 3;

    const SynthesisResult result = synthesize_two_column(fam, opt);
    const ConstructionSchedule& s = result.schedule;

    // cut 1 uses (4, 2): window [4, 6] fits [4, 6] with zero slack
    CHECK(s.height(2) == 5);
    REQUIRE(result.cuts[0].windows.size() == 1);
    CHECK(result.cuts[0].windows[0].lo == 4);
    CHECK(result.cuts[0].windows[0].hi == 6);

    // cut 2 uses (30, 12): h_3 = 35, window [30, 40] in [30, 42], s_2 = 25
    CHECK(s.height(3) == 35);
    CHECK(s.cut(2).spacer_total == 25);
    CHECK(result.cuts[1].windows[0].lo == 30);
    CHECK(result.cuts[1].windows[0].hi == 40);

    CHECK(audit_two_column(s, fam).ok);

    // entries are consumed: a third stage has nothing left
    opt.stages = 4;
    CHECK_THROWS_AS(synthesize_two_column(fam, opt), SynthesisStall);
}

TEST_CASE("two-column schedules satisfy exact partial rigidity at tower level sets") {
    IntervalFamily fam;
    BigInt h(1), a_prev(0), l_prev(0);
    for (int j = 1; j <= 6; ++j) {
        IntervalFamilyEntry e;
        e.a = 3 * h + j;
        e.L = 2 * h + j;
        e.multiplicity = 1;
        if (e.a <= a_prev) e.a = a_prev + 1;
        if (e.L <= l_prev) e.L = l_prev + 1;
        fam.entries.push_back(e);
        a_prev = e.a;
        l_prev = e.L;
        h = e.a + h;
    }
    SynthesisOptions opt;
    opt.stages = 7;
    const SynthesisResult result = synthesize_two_column(fam, opt);
    const ConstructionSchedule& s = result.schedule;

    const LevelSet set(2, {{BigInt(0), BigInt(2)}});
    CorrelationEvaluator eval(s, set, set);
    const Rational mu = eval.measure_a();
    for (int j = 2; j <= 6; ++j) {
        CHECK(eval.exact_value(s.height(j)) == mu / 2);
    }
}

TEST_CASE("subset-heights selection: geometric and squares prefixes") {
    SynthesisOptions opt;
    opt.stages = 4;
    opt.subset_growth_factor = 8;

    const SynthesisResult geometric = synthesize_subset_heights({}, true, opt);
    CHECK(geometric.schedule.height(2) == 8);
    CHECK(geometric.schedule.height(3) == 64);
    CHECK(geometric.schedule.height(4) == 512);

    opt.stages = 5;
    const SynthesisResult squares =
        synthesize_subset_heights(squares_up_to(BigInt(10000)), false, opt);
    CHECK(squares.schedule.height(2) == 9);     // first square >= 8
    CHECK(squares.schedule.height(3) == 81);    // first square >= 72
    CHECK(squares.schedule.height(4) == 676);   // first square >= 648
    CHECK(squares.schedule.height(5) == 5476);  // first square >= 5408

    for (int j = 1; j <= 4; ++j) {
        CHECK(squares.schedule.cut(j).cuts == 2);
        CHECK(squares.schedule.cut(j).spacer_total ==
              squares.schedule.height(j + 1) - 2 * squares.schedule.height(j));
        CHECK(squares.schedule.cut(j).spacer_total > 0);
    }

    opt.stages = 8;
    CHECK_THROWS_AS(synthesize_subset_heights(squares_up_to(BigInt(10000)), false, opt),
                    SynthesisStall);
}

TEST_CASE("zero-density embedding: parity obstruction, tiny example, powers oracle") {
    ExplicitSet evens;
    evens.horizon = BigInt(2000);
    for (BigInt v = 2; v <= 2000; v += 2) evens.elements.push_back(v);
    CHECK_THROWS_AS(embed_zero_density(evens, 1, BigInt(3)), SynthesisStall);

    ExplicitSet one;
    one.horizon = BigInt(100);
    one.elements = {BigInt(1)};
    CHECK(embed_zero_density(one, 2, BigInt(2)) == 2);

    ExplicitSet powers;
    powers.horizon = BigInt(1000000);
    for (BigInt k = 2; k * k <= 1000000; ++k) {
        BigInt v = k * k;
        while (v <= 1000000) {
            powers.elements.push_back(v);
            v *= k;
        }
    }
    std::sort(powers.elements.begin(), powers.elements.end());
    powers.elements.erase(std::unique(powers.elements.begin(), powers.elements.end()),
                          powers.elements.end());

    const BigInt a = embed_zero_density(powers, 3, BigInt(10));
    for (int n = 1; n <= 3; ++n) {
        for (BigInt v = n * a; v <= n * a + 10; ++v) CHECK(!powers.contains(v));
    }
}

TEST_CASE("staircase stage parameters and finite-measure budget report") {
    const auto mixing = staircase_stage_params(true, 4, 4, 0);
    CHECK(mixing.first == 4);
    CHECK(mixing.second.expand(4) ==
          std::vector<BigInt>{BigInt(1), BigInt(2), BigInt(3), BigInt(4)});

    const auto rigid = staircase_stage_params(false, 3, 2, 3);
    CHECK(rigid.first == 6);
    CHECK(rigid.second.expand(6) ==
          std::vector<BigInt>{BigInt(1), BigInt(2), BigInt(1), BigInt(2), BigInt(1), BigInt(2)});

    CHECK_THROWS_AS(staircase_stage_params(true, 1, 1, 0), std::invalid_argument);

    std::vector<StaircasePlanEntry> plan;
    plan.push_back({false, 2, 2});  // rigid q=2 N=2 at cut 1: r=4, (1,2,1,2)
    plan.push_back({true, 0, 0});   // mixing at cut 2: r=2, (1,2)
    plan.push_back({true, 0, 0});   // mixing at cut 3: r=3, (1,2,3)
    plan.push_back({false, 2, 3});  // rigid q=2 N=3 at cut 4: r=6

    SynthesisOptions opt;
    const SynthesisResult result = build_staircase_schedule(plan, opt);
    CHECK(result.schedule.mode() == ConstructionSchedule::Mode::Finite);
    CHECK(result.schedule.stages() == 5);
    // h2 = 4 + 6 = 10, h3 = 2*10 + 3 = 23, h4 = 3*23 + 6 = 75, h5 = 6*75 + 9 = 459
    CHECK(result.schedule.height(2) == 10);
    CHECK(result.schedule.height(3) == 23);
    CHECK(result.schedule.height(4) == 75);
    CHECK(result.schedule.height(5) == 459);
    CHECK(result.notes.find("within budget") != std::string::npos);

    // finite mode: the running total stays bounded
    const Rational total = result.schedule.stage_measure(result.schedule.stages());
    CHECK(total < Rational(4));
}

TEST_CASE("audits catch tampered schedules") {
    MixingSetSpec spec;
    spec.kind = MixingSetSpec::Kind::IntervalFamily;
    spec.family = growing_family(5);
    SynthesisOptions opt;
    opt.stages = 6;
    const SynthesisResult result = synthesize_rigid_mixing(spec, opt);

    // same heights but spacers moved off the last column: audit must flag it
    ConstructionSchedule tampered(1, Rational(1));
    for (int j = 1; j <= result.schedule.cut_records(); ++j) {
        const StageRecord& rec = result.schedule.cut(j);
        std::vector<BigInt> entries(static_cast<size_t>(rec.cuts), BigInt(0));
        entries.front() = rec.spacer_total;  // first column instead of last
        tampered.advance_stage(rec.cuts, SpacerSchedule::explicit_list(std::move(entries)));
    }
    CHECK(!audit_rigid_mixing(tampered, spec).ok);
}

TEST_CASE("two-column non-mixing window: nonzero inside, exact zeros just outside") {
    IntervalFamily fam;
    BigInt h(1), a_prev(0), l_prev(0);
    for (int j = 1; j <= 6; ++j) {
        IntervalFamilyEntry e;
        e.a = 3 * h + j;
        e.L = 2 * h + j;
        e.multiplicity = 1;
        if (e.a <= a_prev) e.a = a_prev + 1;
        if (e.L <= l_prev) e.L = l_prev + 1;
        fam.entries.push_back(e);
        a_prev = e.a;
        l_prev = e.L;
        h = e.a + h;
    }
    SynthesisOptions opt;
    opt.stages = 7;
    const SynthesisResult result = synthesize_two_column(fam, opt);
    const ConstructionSchedule& s = result.schedule;

    // single stage-2 level: positive lags are exactly the signed height sums,
    // so the window edges are sharp up to h_2 - 1
    const LevelSet a = LevelSet::single(2, 0);
    CorrelationEvaluator eval(s, a, a);
    const Rational mu = eval.measure_a();

    const int j = 5;
    const BigInt center = s.height(j);
    const BigInt radius = s.height(j - 1);
    CHECK(eval.exact_value(center) == mu / 2);                 // window center
    CHECK(eval.exact_value(center - radius) == mu / 4);        // window edges
    CHECK(eval.exact_value(center + radius) == mu / 4);
    for (BigInt t = 1; t < s.height(2); ++t) {                 // just outside
        CHECK(eval.exact_value(center + radius + t) == 0);
        CHECK(eval.exact_value(center - radius - t) == 0);
    }
}

TEST_CASE("staircase rigid stage: candidate lags placed in intervals, block lag elevated") {
    ConstructionSchedule s(1, Rational(1), ConstructionSchedule::Mode::Finite);
    s.advance_stage(4, SpacerSchedule::repeated_staircase(2, 2));
    s.advance_stage(2, SpacerSchedule::staircase(2));
    s.advance_stage(3, SpacerSchedule::staircase(3));
    s.advance_stage(9, SpacerSchedule::repeated_staircase(3, 3));  // rigid: q=3, N=3
    for (int j = 5; j <= 8; ++j) s.advance_stage(j, SpacerSchedule::staircase(j));

    // candidates n (h_4 + 1 + 2 + 3) for 0 <= n < N land in a target interval
    const BigInt base = s.height(4) + 6;
    CHECK(base == 81);
    const IntervalFamilyEntry target{BigInt(80), BigInt(90), 1};
    for (int n = 1; n < 3; ++n) {
        CHECK(n * base >= target.a);
        CHECK(n * base <= target.a + target.L);
    }

    // the exact block-period lag q h_4 + (1+2+3) shows strong partial
    // alignment; a mid-gap lag sits near the product level
    const LevelSet a = LevelSet::single(1, 0);
    CorrelationEvaluator eval(s, a, a);
    const Rational product =
        eval.measure_a() * eval.measure_a() / s.stage_measure(s.stages());
    const CorrelationResult block = eval.refine(BigInt(3 * 75 + 6), Rational(0));
    const CorrelationResult gap = eval.refine(BigInt(300), Rational(0));
    CHECK(block.lo > 2 * product);
    CHECK(gap.hi < Rational(3, 2) * product);
}

TEST_CASE("synthesis report lists every safety window checked") {
    MixingSetSpec spec;
    spec.kind = MixingSetSpec::Kind::IntervalFamily;
    spec.family = growing_family(5);
    SynthesisOptions opt;
    opt.stages = 6;
    const SynthesisResult result = synthesize_rigid_mixing(spec, opt);
    const std::string text = result.report_text();

    size_t windows = 0;
    for (size_t at = text.find("window n="); at != std::string::npos;
         at = text.find("window n=", at + 1)) {
        ++windows;
    }
    // cut j checks j windows
    CHECK(windows == 1 + 2 + 3 + 4 + 5);
    CHECK(text.find("VIOLATED") == std::string::npos);
}
