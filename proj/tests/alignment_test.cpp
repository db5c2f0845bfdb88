#include <gtest/gtest.h>

#include <cstdlib>
#include <vector>

#include "cqpolar/cqpolar.hpp"

using namespace cqpolar;

namespace {

PolarizationProfile profile_of(std::vector<double> z, const char* ctx) {
    PolarizationProfile p;
    p.n = z.size();
    p.z = std::move(z);
    p.context = ctx;
    return p;
}

// eight hand-picked profiles at n = 8 whose derived sets are known explicitly
ProfileSet hand_profiles() {
    ProfileSet ps;
    ps.v = profile_of({1, 1, 1, 1, 1, 0.5, 0, 0}, "v|none");           // high {1..5}
    ps.v_b1 = profile_of({0, 1, 0, 0, 1, 0, 0, 0}, "v|b1");            // low {1,3,4,6,7,8}
    ps.v_b2 = profile_of({0, 0, 1, 0.5, 0, 1, 1, 1}, "v|b2");          // low {1,2,5}
    ps.v1_v = profile_of({1, 1, 1, 1, 1, 1, 0, 1}, "v1|v");            // high {1..6,8}
    ps.v2_v = profile_of({1, 1, 0, 0, 1, 1, 1, 1}, "v2|v");            // high {1,2,5,6,7,8}
    ps.v1_v_b1 = profile_of({0, 0, 0, 0, 0, 1, 0, 1}, "v1|v,b1");      // low {1,2,3,4,5,7}
    ps.v2_v_b2 = profile_of({0, 1, 0, 1, 0, 0, 1, 1}, "v2|v,b2");      // low {1,3,5,6}
    ps.v1_v_v2 = profile_of({1, 0, 1, 0, 0, 0.5, 0, 0}, "v1|v,v2");    // low {2,4,5,7,8}
    return ps;
}

std::vector<std::size_t> ids(const IndexSet& s) { return s.idx; }

} // namespace

TEST(Alignment, SetBundleFromHandProfiles) {
    ProfileSet ps = hand_profiles();
    Threshold t;
    SetBundle b = derive_set_bundle(ps, t);
    EXPECT_EQ(ids(b.I_sup2), (std::vector<std::size_t>{1, 2, 5}));
    EXPECT_EQ(ids(b.I_v1), (std::vector<std::size_t>{1, 3, 4}));
    EXPECT_EQ(ids(b.I_bin2), (std::vector<std::size_t>{1, 5, 6}));
    EXPECT_EQ(ids(b.I_1), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
    EXPECT_EQ(ids(b.F_1), (std::vector<std::size_t>{8}));
    b.validate();

    // the literal variant conditions the low sets on the superposition layer
    SetBundle lit = derive_set_bundle(ps, t, {true});
    EXPECT_EQ(ids(lit.I_bin2), (std::vector<std::size_t>{1, 2, 5}));
    EXPECT_EQ(ids(lit.I_1), (std::vector<std::size_t>{1, 3, 4, 6, 8}));
    EXPECT_EQ(ids(lit.I_sup2), ids(b.I_sup2));
    EXPECT_EQ(ids(lit.F_1), ids(b.F_1));

    ProfileSet bad = hand_profiles();
    bad.v2_v.n = 4;
    bad.v2_v.z.resize(4);
    EXPECT_THROW(derive_set_bundle(bad, t), StateError);
}

TEST(Alignment, BuildScheduleSelection) {
    SetBundle b = derive_set_bundle(hand_profiles(), {});
    ChainingSchedule s = build_schedule(b, 3);
    EXPECT_EQ(s.k, 3u);
    EXPECT_EQ(ids(s.B2), (std::vector<std::size_t>{2, 5}));
    EXPECT_EQ(ids(s.F1), (std::vector<std::size_t>{8}));
    // no selection profile: pool order is index order
    EXPECT_EQ(ids(s.B1), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(ids(s.Rbin), (std::vector<std::size_t>{3}));

    // lowest Z first, ties broken by index
    std::vector<double> sel = {0.9, 0.8, 0.7, 0.1, 0.1, 0.0, 0.0, 0.0};
    ChainingSchedule sz = build_schedule(b, 3, {}, sel);
    EXPECT_EQ(ids(sz.B1), (std::vector<std::size_t>{4, 5}));
    EXPECT_EQ(ids(sz.Rbin), (std::vector<std::size_t>{3}));

    // eligibility restricts the pool
    ChainingSchedule se = build_schedule(b, 2, IndexSet(8, {2, 3, 4}));
    EXPECT_EQ(ids(se.B1), (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(ids(se.Rbin), (std::vector<std::size_t>{4}));

    try {
        build_schedule(b, 2, IndexSet(8, {2, 3}));
        FAIL() << "expected InfeasibleError";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.deficit, 1);
    }
    EXPECT_THROW(build_schedule(b, 1), ConfigError);
    EXPECT_THROW(build_schedule(b, 2, {}, std::vector<double>(3, 0.0)), StateError);
}

TEST(Alignment, ScheduleValidateInvariants) {
    SetBundle b = derive_set_bundle(hand_profiles(), {});
    ChainingSchedule s = build_schedule(b, 2);

    ChainingSchedule wrong = s;
    wrong.B1 = IndexSet(8, {1});
    EXPECT_THROW(wrong.validate(b), StateError); // |B1| != |B2|

    wrong = s;
    wrong.Rbin = IndexSet(8, {1}); // collides with B1 = {1,2}
    EXPECT_THROW(wrong.validate(b), StateError);

    wrong = s;
    wrong.B1 = IndexSet(8, {6, 7}); // outside I_1
    EXPECT_THROW(wrong.validate(b), StateError);

    wrong = s;
    wrong.k = 1;
    EXPECT_THROW(wrong.validate(b), StateError);

    EXPECT_NO_THROW(s.validate(b));
}

TEST(Alignment, RateAccountingFormulas) {
    SetBundle b = derive_set_bundle(hand_profiles(), {});
    ChainingSchedule s = build_schedule(b, 4);
    RateAccounting r = rate_accounting(b, s, 4, 8);
    // |I_1| = 5 minus 2 + 1 repeat positions, over n = 8
    EXPECT_DOUBLE_EQ(r.r1, 0.25);
    // |I_sup2| + |I_bin2| = 3 + 3
    EXPECT_DOUBLE_EQ(r.r2, 0.75);
    EXPECT_DOUBLE_EQ(r.r1_finite, 0.25);
    // first block's B2 carries shared randomness: lose |B2|/(nk)
    EXPECT_DOUBLE_EQ(r.r2_finite, 0.75 - 2.0 / (8.0 * 4.0));

    EXPECT_THROW(rate_accounting(b, s, 4, 16), StateError);
    EXPECT_THROW(rate_accounting(b, s, 3, 8), StateError);
}

TEST(Alignment, RecursiveAlignmentCountModel) {
    // doubling then pairing opposite types leaves |type1 - type2| unpaired
    // bits per original block from the first round on
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto a = static_cast<std::size_t>(seed_to_unit(derive_seed(0xa117, seed, 1)) * 40);
        auto b = static_cast<std::size_t>(seed_to_unit(derive_seed(0xa117, seed, 2)) * 40);
        auto rounds = recursive_alignment(a, b, 6);
        ASSERT_EQ(rounds.size(), 7u);
        EXPECT_EQ(rounds[0].type1, a);
        EXPECT_EQ(rounds[0].type2, b);
        EXPECT_DOUBLE_EQ(rounds[0].per_original_block, static_cast<double>(a + b));
        double gap = std::abs(static_cast<double>(a) - static_cast<double>(b));
        for (int j = 1; j <= 6; ++j) {
            EXPECT_EQ(rounds[j].originals, std::size_t{1} << j);
            EXPECT_EQ(std::min(rounds[j].type1, rounds[j].type2), 0u);
            EXPECT_DOUBLE_EQ(rounds[j].per_original_block, gap) << "a=" << a << " b=" << b;
        }
    }
    // balanced counts align completely in one round
    auto bal = recursive_alignment(5, 5, 2);
    EXPECT_DOUBLE_EQ(bal[1].per_original_block, 0.0);
    EXPECT_DOUBLE_EQ(bal[2].per_original_block, 0.0);
    EXPECT_THROW(recursive_alignment(1, 1, -1), ConfigError);
}

TEST(Alignment, ScheduleDirectionDefaults) {
    ChainingSchedule s;
    EXPECT_EQ(s.encode_v, Direction::forward);
    EXPECT_EQ(s.encode_v1, Direction::backward);
    EXPECT_EQ(s.encode_v2, Direction::forward);
    EXPECT_EQ(s.rx1_v, Direction::forward);
    EXPECT_EQ(s.rx1_v1, Direction::forward);
    EXPECT_EQ(s.rx2_v, Direction::backward);
    EXPECT_EQ(s.rx2_v2, Direction::backward);
    EXPECT_STREQ(direction_name(Direction::forward), "forward");
    EXPECT_STREQ(direction_name(Direction::backward), "backward");
}
