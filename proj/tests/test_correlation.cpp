#include "rankone/correlation.hpp"

#include "doctest.h"
#include "rankone/rng.hpp"

using namespace rankone;

namespace {

ConstructionSchedule spec_toy() {
    // h1 = 1, one cut r = 2 with spacers (0, 3): word (l0, l0, s, s, s)
    ConstructionSchedule s(1, Rational(1));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(3)}));
    return s;
}

// Rigid-mixing-shaped schedule by hand: r_1 = 2, r_j = j, last-column spacers
// with s_j >= j h_j.
ConstructionSchedule rigid_shape() {
    ConstructionSchedule s(1, Rational(1));
    s.advance_stage(2, SpacerSchedule::last_column(3));     // h2 = 5
    s.advance_stage(2, SpacerSchedule::last_column(20));    // h3 = 30
    s.advance_stage(3, SpacerSchedule::last_column(100));   // h4 = 190
    s.advance_stage(4, SpacerSchedule::last_column(900));   // h5 = 1660
    s.advance_stage(5, SpacerSchedule::last_column(9000));  // h6 = 17300
    return s;
}

ConstructionSchedule random_schedule(RandomStream& rng, int64_t height_cap) {
    ConstructionSchedule s(BigInt(1 + static_cast<long>(rng.uniform_below(3))), Rational(1));
    for (int c = 0; c < 7; ++c) {
        const int64_t r = 2 + static_cast<int64_t>(rng.uniform_below(4));
        std::vector<BigInt> entries;
        for (int64_t i = 0; i < r; ++i) {
            entries.emplace_back(static_cast<long>(rng.uniform_below(6)));
        }
        SpacerSchedule sp = SpacerSchedule::explicit_list(std::move(entries));
        if (s.height(s.stages()) * r + sp.total(r) > height_cap) break;
        s.advance_stage(r, std::move(sp));
    }
    return s;
}

LevelSet random_set(RandomStream& rng, const ConstructionSchedule& s, int max_stage) {
    const int n = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(max_stage)));
    const int64_t h = *to_i64(s.height(n));
    std::vector<LevelSet::Range> ranges;
    const int pieces = 1 + static_cast<int>(rng.uniform_below(3));
    for (int i = 0; i < pieces; ++i) {
        const int64_t lo = static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(h)));
        const int64_t len =
            1 + static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(h - lo)));
        ranges.emplace_back(BigInt(lo), BigInt(lo + len));
    }
    return LevelSet(n, std::move(ranges));
}

}  // namespace

TEST_CASE("brute force reproduces the hand-counted toy values") {
    const ConstructionSchedule s = spec_toy();
    const LevelSet a = LevelSet::single(1, 0);

    const CorrelationResult m1 = correlation_bruteforce(s, a, a, BigInt(1), 2);
    CHECK(m1.lo == Rational(1, 2));
    CHECK(m1.hi == Rational(1, 2));

    const CorrelationResult m0 = correlation_bruteforce(s, a, a, BigInt(0), 2);
    CHECK(m0.lo == a.measure(s));
    CHECK(m0.hi == a.measure(s));

    const CorrelationResult m3 = correlation_bruteforce(s, a, a, BigInt(3), 2);
    CHECK(m3.lo == 0);
    CHECK(m3.hi == 0);
}

TEST_CASE("exact engine matches the same windowed counts") {
    const ConstructionSchedule s = spec_toy();
    const LevelSet a = LevelSet::single(1, 0);
    CorrelationEvaluator eval(s, a, a);

    for (long m = 0; m <= 5; ++m) {  // includes m == h_2 (empty window)
        const CorrelationResult exact = eval.at_stage(BigInt(m), 2);
        const CorrelationResult brute = correlation_bruteforce(s, a, a, BigInt(m), 2);
        CHECK(exact.lo == brute.lo);
        CHECK(exact.hi == brute.hi);
    }
}

TEST_CASE("oracle equivalence on randomized schedules, every lag, both bounds") {
    RandomStream rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const ConstructionSchedule s = random_schedule(rng, 700);
        const int J = s.stages();
        const LevelSet a = random_set(rng, s, J);
        const LevelSet b = random_set(rng, s, J);

        const auto sweep = correlation_bruteforce_sweep(s, a, b, J);
        CorrelationEvaluator eval(s, a, b);
        const int64_t h = *to_i64(s.height(J));
        REQUIRE(static_cast<int64_t>(sweep.size()) == h);
        for (int64_t m = 0; m < h; ++m) {
            const CorrelationResult exact = eval.at_stage(BigInt(m), J);
            CHECK(exact.lo == sweep[static_cast<size_t>(m)].lo);
            CHECK(exact.hi == sweep[static_cast<size_t>(m)].hi);
        }
        // the sweep is the same computation as the pointwise brute force
        for (int check = 0; check < 10; ++check) {
            const int64_t m = static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(h)));
            const CorrelationResult one = correlation_bruteforce(s, a, b, BigInt(m), J);
            CHECK(one.lo == sweep[static_cast<size_t>(m)].lo);
            CHECK(one.hi == sweep[static_cast<size_t>(m)].hi);
        }
    }
}

TEST_CASE("orientation symmetry: D_AB(m) = D_BA(-m)") {
    RandomStream rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const ConstructionSchedule s = random_schedule(rng, 500);
        const int J = s.stages();
        const LevelSet a = random_set(rng, s, J);
        const LevelSet b = random_set(rng, s, J);
        CorrelationEvaluator forward(s, a, b);
        CorrelationEvaluator backward(s, b, a);
        for (int check = 0; check < 15; ++check) {
            const int64_t h = *to_i64(s.height(J));
            const int64_t m = static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(h)));
            CHECK(forward.pair_count(J, BigInt(m)) == backward.pair_count(J, BigInt(-m)));
        }
    }
}

TEST_CASE("certified width never grows with the evaluation stage") {
    RandomStream rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const ConstructionSchedule s = random_schedule(rng, 2000);
        const LevelSet a = random_set(rng, s, 1);
        const LevelSet b = random_set(rng, s, 1);
        CorrelationEvaluator eval(s, a, b);
        const int64_t m = static_cast<int64_t>(rng.uniform_below(40));
        Rational last_width(-1);
        for (int J = 1; J <= s.stages(); ++J) {
            const CorrelationResult r = eval.at_stage(BigInt(m), J);
            if (last_width >= 0) CHECK(r.width() <= last_width);
            last_width = r.width();
        }
    }
}

TEST_CASE("refine walks stages until exact and reports unreachable tolerances") {
    const ConstructionSchedule s = rigid_shape();
    const LevelSet a(2, {{BigInt(0), BigInt(2)}});
    CorrelationEvaluator eval(s, a, a);

    const CorrelationResult r = eval.refine(BigInt(7), Rational(0));
    CHECK(r.met_tolerance);
    CHECK(r.exact());

    // a lag just below the top height cannot resolve within the built stages
    const BigInt huge = s.height(6) - 1;
    const CorrelationResult wide = eval.refine(huge, Rational(0));
    CHECK(!wide.met_tolerance);
    CHECK(wide.width() > 0);
    CHECK_THROWS_AS(eval.exact_value(huge), ToleranceUnreachable);
}

TEST_CASE("rigidity identity and defect on a rigid-mixing-shaped schedule") {
    const ConstructionSchedule s = rigid_shape();
    const LevelSet a(2, {{BigInt(1), BigInt(2)}, {BigInt(3), BigInt(4)}});
    CorrelationEvaluator eval(s, a, a);
    const Rational mu = a.measure(s);
    CHECK(mu == Rational(1));

    for (int j = 3; j <= 5; ++j) {
        const Rational corr = eval.exact_value(s.height(j));
        CHECK(corr == mu * (j - 1) / j);
        CHECK(rigidity_defect(s, a, j) == 2 * mu / j);
    }

    // degenerate endpoint of the defect formula: full overlap gives zero
    CHECK(2 * mu - 2 * eval.exact_value(BigInt(0)) == 0);
}

TEST_CASE("monte carlo is deterministic, calibrated, and tight on zero lags") {
    const ConstructionSchedule s = rigid_shape();
    const LevelSet a(2, {{BigInt(0), BigInt(3)}});
    CorrelationEvaluator eval(s, a, a);

    const MonteCarloCorrelation one = correlation_montecarlo(s, a, a, BigInt(5), 5, 4000, 99);
    const MonteCarloCorrelation two = correlation_montecarlo(s, a, a, BigInt(5), 5, 4000, 99);
    CHECK(one.hits == two.hits);
    CHECK(one.estimate == two.estimate);

    // calibration: the 99% interval catches the exact value virtually always
    const BigInt lag(5);
    const double exact = to_double_nearest(eval.exact_value(lag));
    int covered = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
        const MonteCarloCorrelation mc = correlation_montecarlo(s, a, a, lag, 5, 800, seed);
        if (mc.ci_lo <= exact && exact <= mc.ci_hi) ++covered;
    }
    CHECK(covered >= 198);

    // an exactly-zero lag yields estimate 0 with a one-sided interval
    const Rational zero = eval.exact_value(BigInt(8));
    CHECK(zero == 0);
    const MonteCarloCorrelation mc0 = correlation_montecarlo(s, a, a, BigInt(8), 5, 2000, 7);
    CHECK(mc0.estimate == 0.0);
    CHECK(mc0.ci_lo == 0.0);
    CHECK(mc0.ci_hi > 0.0);

    // m = 0 over the whole stage-2 tower estimates mu(A)
    const LevelSet whole = LevelSet::whole_stage(s, 2);
    const double mu = to_double_nearest(whole.measure(s));
    const MonteCarloCorrelation full =
        correlation_montecarlo(s, whole, whole, BigInt(0), 4, 4000, 3);
    CHECK(full.ci_lo <= mu);
    CHECK(mu <= full.ci_hi);
}

TEST_CASE("mixing verdicts follow the ground truth of a brute sweep") {
    const ConstructionSchedule s = rigid_shape();
    const LevelSet a = LevelSet::single(1, 0);
    const auto sweep = correlation_bruteforce_sweep(s, a, a, 5);
    const BigInt cutoff = s.height(2);

    std::vector<BigInt> zero_lags, positive_lags;
    for (size_t m = 1; m < sweep.size(); ++m) {
        if (sweep[m].lag < cutoff) continue;
        if (sweep[m].hi == 0 && zero_lags.size() < 6) zero_lags.push_back(sweep[m].lag);
        if (sweep[m].lo > 0 && positive_lags.size() < 2) positive_lags.push_back(sweep[m].lag);
    }
    REQUIRE(zero_lags.size() == 6);
    REQUIRE(positive_lags.size() == 2);

    const MixingReport pass = verify_mixing_along(s, zero_lags, a, a, Rational(0));
    CHECK(pass.verdict == Verdict::Pass);
    CHECK(pass.cutoff == cutoff);
    CHECK(pass.checked == 6);

    const MixingReport fail = verify_mixing_along(s, positive_lags, a, a, Rational(0));
    CHECK(fail.verdict == Verdict::Fail);

    CHECK_THROWS_AS(verify_mixing_along(s, {BigInt(0)}, a, a, Rational(0)),
                    std::invalid_argument);
}

TEST_CASE("kappa rows invert the correlation exactly and flag unidentifiable input") {
    ConstructionSchedule s(2, Rational(1), ConstructionSchedule::Mode::Finite, Rational(4));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(1), BigInt(1)}));  // h2 = 6
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(1)}));  // h3 = 13

    const LevelSet a(1, {{BigInt(0), BigInt(1)}});
    const LevelSet b(1, {{BigInt(0), BigInt(2)}});
    CorrelationEvaluator eval(s, a, b);

    const KappaReport report =
        kappa_mixing_check(s, {BigInt(2), BigInt(3), BigInt(5)}, a, b, Rational(1));
    REQUIRE(report.rows.size() == 3);
    const Rational mu_ab = eval.measure_ab();
    const Rational denom = mu_ab - eval.measure_a() * eval.measure_b() / Rational(4);
    for (const KappaRow& row : report.rows) {
        const CorrelationResult corr = eval.refine(row.lag, Rational(0));
        const Rational k_from_hi = (mu_ab - corr.hi) / denom;
        const Rational k_from_lo = (mu_ab - corr.lo) / denom;
        CHECK(row.lo == std::min(k_from_hi, k_from_lo));
        CHECK(row.hi == std::max(k_from_hi, k_from_lo));
    }

    // A = B = the whole stage-1 tower with mu(X) declared equal to its measure
    // makes mu(A /\ B) = mu(A)mu(B)/mu(X): unidentifiable.
    ConstructionSchedule t(2, Rational(1), ConstructionSchedule::Mode::Finite, Rational(2));
    const LevelSet whole = LevelSet::whole_stage(t, 1);
    CHECK_THROWS_AS(kappa_mixing_check(t, {BigInt(1)}, whole, whole, Rational(1)),
                    std::invalid_argument);
}

TEST_CASE("sp decomposition: frozen examples and reconstruction") {
    const std::vector<BigInt> heights{BigInt(1), BigInt(4), BigInt(20)};

    const auto sum = sp_decompose(BigInt(24), heights, BigInt(0), 4);
    REQUIRE(sum);
    CHECK(sum->indices == std::vector<int>{3, 2});
    CHECK(sum->signs == std::vector<int>{1, 1});
    CHECK(sum->residual == 0);
    CHECK(sum->reconstruct(heights) == 24);

    const auto diff = sp_decompose(BigInt(16), heights, BigInt(0), 4);
    REQUIRE(diff);
    CHECK(diff->indices == std::vector<int>{3, 2});
    CHECK(diff->signs == std::vector<int>{1, -1});
    CHECK(diff->residual == 0);

    // residual bound behavior on heights without a unit rescue
    const std::vector<BigInt> coarse{BigInt(10), BigInt(40), BigInt(200)};
    const auto with_slack = sp_decompose(BigInt(202), coarse, BigInt(2), 3);
    REQUIRE(with_slack);
    CHECK(with_slack->indices == std::vector<int>{3});
    CHECK(with_slack->residual == 2);
    CHECK(!sp_decompose(BigInt(202), coarse, BigInt(1), 3));

    RandomStream rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<BigInt> hs;
        BigInt h(1 + static_cast<long>(rng.uniform_below(5)));
        for (int i = 0; i < 7; ++i) {
            hs.push_back(h);
            h = h * (3 + static_cast<long>(rng.uniform_below(6))) +
                static_cast<long>(rng.uniform_below(10));
        }
        const BigInt m(1 + static_cast<long>(rng.uniform_below(100000)));
        const auto form = sp_decompose(m, hs, BigInt(6), 5);
        if (form) {
            CHECK(form->reconstruct(hs) == m);
            CHECK(form->signs.front() == 1);
            CHECK(rankone::abs(form->residual) <= 6);
            CHECK(form->terms() <= 5);
            for (size_t i = 1; i < form->indices.size(); ++i) {
                CHECK(form->indices[i] < form->indices[i - 1]);
            }
        }
    }
}

TEST_CASE("kappa regression baseline on a finite staircase schedule") {
    // cuts: rigid q=2 N=2, mixing, mixing, rigid q=3 N=3, then four mixing
    ConstructionSchedule s(1, Rational(1), ConstructionSchedule::Mode::Finite);
    s.advance_stage(4, SpacerSchedule::repeated_staircase(2, 2));
    s.advance_stage(2, SpacerSchedule::staircase(2));
    s.advance_stage(3, SpacerSchedule::staircase(3));
    s.advance_stage(9, SpacerSchedule::repeated_staircase(3, 3));
    for (int j = 5; j <= 8; ++j) s.advance_stage(j, SpacerSchedule::staircase(j));
    CHECK(s.height(9) == 1170716);

    const LevelSet a = LevelSet::single(1, 0);
    const KappaReport report = kappa_mixing_check(s, {BigInt(11), BigInt(24)}, a, a,
                                                  Rational(1, 100));
    REQUIRE(report.rows.size() == 2);
    CHECK(report.total_measure == Rational(BigInt(292679), BigInt(90720)));

    // regression values computed by this engine on this frozen schedule
    CHECK(report.rows[0].exact);
    CHECK(report.rows[0].lo == Rational(BigInt(21365567), BigInt(43623144)));
    CHECK(report.rows[1].exact);
    CHECK(report.rows[1].lo == Rational(BigInt(3852533677), BigInt(4580430120)));
    for (const KappaRow& row : report.rows) {
        CHECK(row.lo > 0);
        CHECK(row.hi < 1);
    }
}
