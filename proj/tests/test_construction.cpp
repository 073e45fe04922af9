#include "rankone/construction.hpp"

#include "doctest.h"
#include "rankone/rng.hpp"

using namespace rankone;

namespace {

// Random schedule with h_J kept under the cap; used by the property tests.
ConstructionSchedule random_schedule(RandomStream& rng, int64_t height_cap, int max_cuts = 6) {
    ConstructionSchedule s(BigInt(1 + static_cast<long>(rng.uniform_below(3))), Rational(1));
    const int cuts = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(max_cuts)));
    for (int c = 0; c < cuts; ++c) {
        const int64_t r = 2 + static_cast<int64_t>(rng.uniform_below(4));
        SpacerSchedule sp = SpacerSchedule::last_column(0);
        switch (rng.uniform_below(5)) {
            case 0: {
                std::vector<BigInt> entries;
                for (int64_t i = 0; i < r; ++i) {
                    entries.emplace_back(static_cast<long>(rng.uniform_below(5)));
                }
                sp = SpacerSchedule::explicit_list(std::move(entries));
                break;
            }
            case 1:
                sp = SpacerSchedule::last_column(
                    BigInt(static_cast<long>(rng.uniform_below(12))));
                break;
            case 2:
                if (r == 2) {
                    sp = SpacerSchedule::two_column(
                        BigInt(static_cast<long>(rng.uniform_below(12))));
                } else {
                    sp = SpacerSchedule::staircase(r);
                }
                break;
            case 3:
                sp = SpacerSchedule::staircase(r);
                break;
            default:
                if (r % 2 == 0) {
                    sp = SpacerSchedule::repeated_staircase(2, r / 2);
                } else {
                    sp = SpacerSchedule::last_column(BigInt(static_cast<long>(rng.uniform_below(6))));
                }
                break;
        }
        BigInt next = s.height(s.stages()) * r + sp.total(r);
        if (next > height_cap) break;
        s.advance_stage(r, std::move(sp));
    }
    return s;
}

}  // namespace

TEST_CASE("spacer schedules expand to their documented shapes") {
    CHECK(SpacerSchedule::last_column(85).expand(3) ==
          std::vector<BigInt>{BigInt(0), BigInt(0), BigInt(85)});
    CHECK(SpacerSchedule::two_column(25).expand(2) == std::vector<BigInt>{BigInt(0), BigInt(25)});
    CHECK(SpacerSchedule::staircase(4).expand(4) ==
          std::vector<BigInt>{BigInt(1), BigInt(2), BigInt(3), BigInt(4)});
    CHECK(SpacerSchedule::repeated_staircase(3, 2).expand(6) ==
          std::vector<BigInt>{BigInt(1), BigInt(2), BigInt(1), BigInt(2), BigInt(1), BigInt(2)});

    CHECK_THROWS_AS(SpacerSchedule::staircase(3).expand(4), std::invalid_argument);
    CHECK_THROWS_AS(SpacerSchedule::explicit_list({BigInt(0)}).expand(2), std::invalid_argument);
    CHECK_THROWS_AS(SpacerSchedule::explicit_list({BigInt(-1), BigInt(0)}),
                    std::invalid_argument);
}

TEST_CASE("advance_stage follows the height and width recursions") {
    ConstructionSchedule s(1, Rational(1));
    const StageRecord& r1 = s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(3)}));
    CHECK(r1.next_height == 5);
    CHECK(s.width(2) == Rational(1, 2));

    const StageRecord& r2 = s.advance_stage(3, SpacerSchedule::last_column(85));
    CHECK(r2.next_height == 100);  // 5*3 + 85
    CHECK(s.width(3) == Rational(1, 6));

    ConstructionSchedule t(10, Rational(1));
    t.advance_stage(4, SpacerSchedule::staircase(4));
    CHECK(t.height(2) == 50);  // 40 + (1+2+3+4)

    CHECK_THROWS_AS(s.advance_stage(1, SpacerSchedule::last_column(0)), std::invalid_argument);
}

TEST_CASE("stage measures are exact rationals") {
    ConstructionSchedule s(1, Rational(1));
    CHECK(s.stage_measure(1) == Rational(1));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(3)}));
    CHECK(s.stage_measure(2) == Rational(5, 2));
    CHECK(s.spacer_mass(1) == Rational(3, 2));
}

TEST_CASE("level_label decodes the documented words") {
    // W_2 = W_1 W_1 sss for h1=1, r=2, spacers (0,3)
    ConstructionSchedule s(1, Rational(1));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(3)}));
    const std::vector<int64_t> want{0, 0, -1, -1, -1};
    for (int64_t p = 0; p < 5; ++p) {
        const auto label = s.level_label(2, BigInt(p), 1);
        if (want[static_cast<size_t>(p)] < 0) {
            CHECK(!label);
        } else {
            REQUIRE(label);
            CHECK(*label == want[static_cast<size_t>(p)]);
        }
    }

    // identity case J = n
    for (int64_t p = 0; p < 5; ++p) {
        const auto label = s.level_label(2, BigInt(p), 2);
        REQUIRE(label);
        CHECK(*label == p);
    }

    // W_2 = (0, 1, s, 0, 1) for h1=2, r=2, spacers (1, 0): position 3 -> level 0
    ConstructionSchedule t(2, Rational(1));
    t.advance_stage(2, SpacerSchedule::explicit_list({BigInt(1), BigInt(0)}));
    const auto label = t.level_label(2, BigInt(3), 1);
    REQUIRE(label);
    CHECK(*label == 0);

    CHECK_THROWS_AS(s.level_label(2, BigInt(5), 1), std::out_of_range);
    CHECK_THROWS_AS(s.level_label(1, BigInt(0), 2), std::out_of_range);
}

TEST_CASE("materialize_word matches the hand expansions") {
    ConstructionSchedule s(1, Rational(1));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(3)}));
    CHECK(s.materialize_word(2, 1) == std::vector<int64_t>{0, 0, -1, -1, -1});

    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(1), BigInt(0)}));
    // W_3 = W_2 s W_2 with h_3 = 11
    CHECK(s.height(3) == 11);
    CHECK(s.materialize_word(3, 1) ==
          std::vector<int64_t>{0, 0, -1, -1, -1, -1, 0, 0, -1, -1, -1});

    // identity case
    CHECK(s.materialize_word(2, 2) == std::vector<int64_t>{0, 1, 2, 3, 4});

    // guard refusal
    CHECK_THROWS_AS(s.materialize_word(3, 1, 10), GuardExceeded);
}

TEST_CASE("word agrees with positional decoding everywhere, occurrences count right") {
    RandomStream rng(20240901);
    for (int trial = 0; trial < 40; ++trial) {
        const ConstructionSchedule s = random_schedule(rng, 4000);
        const int J = s.stages();
        for (int n = 1; n <= J; ++n) {
            const auto word = s.materialize_word(J, n);
            BigInt copies(1);
            for (int i = n; i < J; ++i) copies *= s.cut(i).cuts;

            std::vector<int64_t> occurrences(static_cast<size_t>(*to_i64(s.height(n))), 0);
            for (size_t p = 0; p < word.size(); ++p) {
                const auto label = s.level_label(J, BigInt(static_cast<long>(p)), n);
                if (word[p] < 0) {
                    CHECK(!label);
                } else {
                    REQUIRE(label);
                    CHECK(*label == word[p]);
                    ++occurrences[static_cast<size_t>(word[p])];
                }
            }
            // every stage-n level appears exactly prod r_i times; the rest are spacers
            for (int64_t c : occurrences) CHECK(BigInt(static_cast<long>(c)) == copies);
            const BigInt spacers = s.height(J) - s.height(n) * copies;
            int64_t spacer_seen = 0;
            for (int64_t v : word) {
                if (v < 0) ++spacer_seen;
            }
            CHECK(BigInt(spacer_seen) == spacers);
            // measure conservation: occurrences * w_J = w_n per level
            CHECK(Rational(copies) * s.width(J) == s.width(n));
        }
    }
}

TEST_CASE("level sets normalize, lift, and count overlaps") {
    ConstructionSchedule s(4, Rational(1));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(1), BigInt(2)}));
    // W_2 = (0,1,2,3,s,0,1,2,3,s,s), h_2 = 11

    LevelSet a(1, {{BigInt(0), BigInt(2)}, {BigInt(1), BigInt(3)}});  // merges to [0,3)
    CHECK(a.ranges().size() == 1);
    CHECK(a.level_count() == 3);
    CHECK(a.measure(s) == Rational(3));
    CHECK(a.contains(BigInt(2)));
    CHECK(!a.contains(BigInt(3)));
    CHECK(a.count_below(BigInt(2)) == 2);

    const LevelSet lifted = a.lifted(s, 2);
    CHECK(lifted.level_count() == 6);
    CHECK(lifted.measure(s) == a.measure(s));
    CHECK(lifted.contains(BigInt(5)));   // second copy starts at 5
    CHECK(!lifted.contains(BigInt(4)));  // spacer

    LevelSet b(1, {{BigInt(2), BigInt(4)}});
    CHECK(LevelSet::overlap_count(a, b, BigInt(0)) == 1);   // x = 2
    CHECK(LevelSet::overlap_count(a, b, BigInt(-1)) == 0);  // x - 1 in b forces x >= 3
    CHECK(LevelSet::overlap_count(a, b, BigInt(1)) == 2);   // x in {1, 2}
    CHECK(LevelSet::overlap_count(a, b, BigInt(2)) == 2);   // x in {0, 1}

    CHECK_THROWS_AS(LevelSet(1, {{BigInt(-1), BigInt(2)}}), std::invalid_argument);
    LevelSet oob(2, {{BigInt(10), BigInt(12)}});
    CHECK_THROWS_AS(oob.validate_against(s), std::out_of_range);
}

TEST_CASE("lifted sets land exactly on the label positions") {
    RandomStream rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const ConstructionSchedule s = random_schedule(rng, 3000);
        const int J = s.stages();
        const int n = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(J)));
        const int64_t h_n = *to_i64(s.height(n));
        const int64_t lo = static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(h_n)));
        const int64_t hi = lo + 1 +
                           static_cast<int64_t>(rng.uniform_below(static_cast<uint64_t>(h_n - lo)));
        const LevelSet set(n, {{BigInt(lo), BigInt(hi)}});
        const LevelSet lifted = set.lifted(s, J);

        const auto word = s.materialize_word(J, n);
        for (size_t p = 0; p < word.size(); ++p) {
            const bool in_lifted = lifted.contains(BigInt(static_cast<long>(p)));
            const bool in_set = word[p] >= 0 && set.contains(BigInt(word[p]));
            CHECK(in_lifted == in_set);
        }
    }
}

TEST_CASE("finite mode rejects stage measures above the declared total") {
    ConstructionSchedule s(1, Rational(1), ConstructionSchedule::Mode::Finite, Rational(2));
    s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(0), BigInt(1)}));  // measure 3/2
    CHECK(s.stage_measure(2) == Rational(3, 2));
    CHECK_THROWS_AS(s.advance_stage(2, SpacerSchedule::explicit_list({BigInt(4), BigInt(4)})),
                    std::invalid_argument);
}
