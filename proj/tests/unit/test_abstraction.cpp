#include <random>

#include <gtest/gtest.h>

#include "mpps/abstraction.hpp"
#include "mpps/mapgen.hpp"
#include "mpps/prototypes.hpp"

using namespace mpps;

namespace {

const RecipeTable kRecipes = RecipeTable::defaults();

int count_seen(const Observation& o) {
    int n = 0;
    for (auto s : o.seen) n += s != 0;
    return n;
}

}  // namespace

TEST(Abstraction, MotivatingFixture) {
    const auto w = motivating_fixture();
    const auto s = std::get<AbstractState>(abstract_full(w));
    ASSERT_EQ(s.zones, 2);
    const int other = 1 - s.z;
    EXPECT_EQ(s.boundary(s.z, other), Boundary::Stone);
    EXPECT_EQ(s.rho[s.z][index_of(Object::Iron)], 2);
    EXPECT_EQ(s.rho[s.z][index_of(Object::Wood)], 1);
    EXPECT_EQ(s.rho[s.z][index_of(Object::Gem)], 0);
    EXPECT_TRUE(s.has_workshop(s.z, Workshop::Workbench));
    EXPECT_TRUE(s.has_workshop(s.z, Workshop::Factory));
    EXPECT_EQ(s.rho[other][index_of(Object::Iron)], 1);
    EXPECT_EQ(s.rho[other][index_of(Object::Gem)], 1);
    EXPECT_EQ(s.omega[other], 0);
    EXPECT_EQ(s.iota, Inventory{});
    EXPECT_TRUE(eval_goal(GoalSpec::get(Object::Wood, 0), s));
    EXPECT_FALSE(eval_goal(GoalSpec::get(Object::Gem), s));
}

TEST(Abstraction, BridgedCellJoinsAZoneAndMergesBoundaries) {
    // . ~ . with a bridge in hand: two zones across water, then one
    std::vector<Cell> cells = {Cell::empty(), Cell::water(), Cell::resource(Object::Gold)};
    auto w = make_world(Domain::Craft, 1, 3, cells, {0, 0}, 100, 3);
    w.inventory[index_of(Object::Bridge)] = 1;
    const auto before = std::get<AbstractState>(abstract_full(w));
    ASSERT_EQ(before.zones, 2);
    EXPECT_EQ(before.boundary(0, 1), Boundary::Water);
    apply(w, Action::Right, kRecipes);
    apply(w, Action::Use, kRecipes);
    const auto zm = zone_map(w);
    EXPECT_EQ(zm.label[1], 0);
    const auto after = std::get<AbstractState>(abstract_full(w));
    EXPECT_TRUE(after.connected(0, 1));
    EXPECT_EQ(after.iota[index_of(Object::Bridge)], 0);
    EXPECT_EQ(after.z, 0);
}

TEST(Abstraction, BoxFixture) {
    const auto bm = trivial_box_fixture();
    const auto s = std::get<BoxAbstractState>(abstract_full(bm.world));
    EXPECT_EQ(std::popcount(s.loose), 1);
    EXPECT_EQ(s.held, 0);
    const int loose = std::countr_zero(s.loose);
    EXPECT_EQ(s.box_count(bm.goal_color, loose), 1);
    EXPECT_FALSE(eval_goal(GoalSpec::key(bm.goal_color), s));
    EXPECT_NO_THROW(s.validate());
}

TEST(Abstraction, ValidateRejectsBrokenStates) {
    BoxAbstractState b;
    b.loose = 0b11;
    EXPECT_THROW(b.validate(), Error);
    b.loose = 1u << 10;
    EXPECT_THROW(b.validate(), Error);
    auto s = AbstractState::with_zones(2);
    EXPECT_NO_THROW(s.validate());
    s.z = 2;
    EXPECT_THROW(s.validate(), Error);
}

TEST(Abstraction, ObservedAbstractionIsExactWhenEverythingIsSeen) {
    auto env = EnvConfig::craft_default();
    env.view_radius = 8;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto w = generate_map(env, seed);
        const auto pa = abstract_observed(reset(w));
        EXPECT_TRUE(pa.all_seen);
        EXPECT_EQ(pa.unknown_field_count, 0);
        EXPECT_EQ(pa.view, abstract_full(w)) << seed;
    }
}

TEST(Abstraction, UnknownFieldCountNeverIncreases) {
    const auto env = EnvConfig::craft_default();
    std::mt19937 rng(3);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto w = generate_map(env, seed);
        auto o = reset(w);
        int last = abstract_observed(o).unknown_field_count;
        for (int t = 0; t < 60; ++t) {
            apply(w, static_cast<Action>(rng() % kNumCraftActions), kRecipes);
            o = observe(w);
            const auto pa = abstract_observed(o);
            const int unseen = o.rows * o.cols - count_seen(o);
            EXPECT_EQ(pa.unseen_cells, unseen);
            EXPECT_EQ(pa.unknown_field_count, unseen + (unseen > 0));
            EXPECT_LE(pa.unknown_field_count, last);
            last = pa.unknown_field_count;
        }
    }
}

TEST(Abstraction, CompleteZonesHaveExactCounts) {
    const auto env = EnvConfig::craft_default();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto w = generate_map(env, seed);
        const auto pa = abstract_observed(reset(w));
        const auto full = std::get<AbstractState>(abstract_full(w));
        const auto zm = zone_map(w);
        const auto& v = pa.craft();
        for (int i = 0; i < v.zones; ++i) {
            const int tz = zm.label[w.index(pa.zone_anchor[i])];
            for (int r = 0; r < kNumResources; ++r) {
                if (pa.zone_complete[i]) {
                    EXPECT_EQ(v.rho[i][r], full.rho[tz][r]);
                } else {
                    EXPECT_LE(v.rho[i][r], full.rho[tz][r]);
                }
            }
        }
    }
}
