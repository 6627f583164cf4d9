#include <gtest/gtest.h>

#include "mpps/mapgen.hpp"
#include "mpps/prototypes.hpp"

using namespace mpps;

namespace {

const RecipeTable kRecipes = RecipeTable::defaults();
constexpr int kWood = index_of(Object::Wood);

// zone 0 -- zone 1 connected, zone 0 | zone 2 stone, zone 1 / zone 2 not adjacent
AbstractState three_zones() {
    auto s = AbstractState::with_zones(3);
    s.set_boundary(0, 1, Boundary::Connected);
    s.set_boundary(0, 2, Boundary::Stone);
    s.set_boundary(1, 2, Boundary::NotAdjacent);
    for (int i = 0; i < 3; ++i) s.rho[i][kWood] = 1;
    return s;
}

}  // namespace

TEST(Prototype, NamesAndRoster) {
    ASSERT_EQ(roster(Domain::Craft).size(), 10u);
    ASSERT_EQ(roster(Domain::Box).size(), 10u);
    EXPECT_EQ(roster(Domain::Craft)[0].name(), "get-wood");
    EXPECT_EQ(roster(Domain::Craft)[5].name(), "use-bridge");
    for (Domain d : {Domain::Craft, Domain::Box}) {
        for (const auto& p : roster(d)) EXPECT_EQ(parse_prototype(p.name()), p);
    }
    const Program prog = parse_program("get-wood; use-workbench");
    EXPECT_EQ(to_string(prog), "get-wood; use-workbench");
    EXPECT_FALSE(parse_prototype("get-diamond"));
}

TEST(Prototype, GetResourceReachesConnectedZonesOnly) {
    const auto s = three_zones();
    const auto next = successors(Prototype::get(Object::Wood), s, kRecipes);
    ASSERT_EQ(next.size(), 2u);
    std::vector<int> zs;
    for (const auto& n : next) {
        zs.push_back(n.z);
        EXPECT_EQ(n.iota[kWood], 1);
        EXPECT_EQ(n.rho[n.z][kWood], 0);
        EXPECT_TRUE(check_transition(Prototype::get(Object::Wood), s, n, kRecipes));
    }
    EXPECT_EQ(zs, (std::vector<int>{0, 1}));
    auto across = s;
    across.z = 2;
    across.rho[2][kWood] = 0;
    across.iota[kWood] = 1;
    EXPECT_FALSE(check_transition(Prototype::get(Object::Wood), s, across, kRecipes));
    auto twice = next[0];
    twice.iota[kWood] = 2;
    EXPECT_FALSE(check_transition(Prototype::get(Object::Wood), s, twice, kRecipes));
    auto frame = next[0];
    frame.rho[2][kWood] = 0;
    EXPECT_FALSE(check_transition(Prototype::get(Object::Wood), s, frame, kRecipes));
}

TEST(Prototype, UseToolConnectsThroughTheCrossedBoundary) {
    auto s = three_zones();
    EXPECT_TRUE(successors(Prototype::use_tool(Object::Axe), s, kRecipes).empty());
    s.iota[index_of(Object::Axe)] = 1;
    const auto next = successors(Prototype::use_tool(Object::Axe), s, kRecipes);
    ASSERT_EQ(next.size(), 1u);
    const auto& n = next[0];
    EXPECT_EQ(n.z, 2);
    EXPECT_EQ(n.iota[index_of(Object::Axe)], 0);
    // 0-2 opened, so 1 reaches 2 through 0
    EXPECT_TRUE(n.connected(0, 2));
    EXPECT_TRUE(n.connected(1, 2));
    EXPECT_TRUE(check_transition(Prototype::use_tool(Object::Axe), s, n, kRecipes));
    EXPECT_TRUE(successors(Prototype::use_tool(Object::Bridge), s, kRecipes).empty());
}

TEST(Prototype, UseWorkshopCraftsToDepletion) {
    auto s = AbstractState::with_zones(2);
    s.set_boundary(0, 1, Boundary::Water);
    s.omega[1] = 1u << index_of(Workshop::Workbench);
    s.iota[kWood] = 3;
    EXPECT_TRUE(successors(Prototype::use(Workshop::Workbench), s, kRecipes).empty());
    s.omega[0] = s.omega[1];
    const auto next = successors(Prototype::use(Workshop::Workbench), s, kRecipes);
    ASSERT_EQ(next.size(), 1u);
    EXPECT_EQ(next[0].iota[index_of(Object::Plank)], 1);
    EXPECT_EQ(next[0].iota[index_of(Object::Stick)], 1);
    EXPECT_EQ(next[0].iota[kWood], 0);
    const auto w = check_transition(Prototype::use(Workshop::Workbench), s, next[0], kRecipes);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->made[index_of(Object::Plank)], 1);
}

TEST(Prototype, GetKeyBranches) {
    BoxAbstractState s;
    s.loose = 1u << 2;
    s.boxes[5][2] = 1;
    s.boxes[6][3] = 1;
    auto a = successors(Prototype::get_key(2), s);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].held, 1u << 2);
    EXPECT_EQ(a[0].loose, 0);
    EXPECT_TRUE(check_transition(Prototype::get_key(2), s, a[0], kRecipes)->loose_branch);
    auto b = successors(Prototype::get_key(5), a[0]);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].held, 1u << 5);
    EXPECT_EQ(b[0].box_count(5, 2), 0);
    EXPECT_EQ(check_transition(Prototype::get_key(5), a[0], b[0], kRecipes)->unlocked_with, 2);
    EXPECT_TRUE(successors(Prototype::get_key(6), a[0]).empty());
    EXPECT_THROW(successors(Prototype::get_key(1), AbstractWorld(AbstractState::with_zones(1)), kRecipes), Error);
}

TEST(Monitor, FiresWhenTheResourceIsCollected) {
    // agent . wood
    std::vector<Cell> cells = {Cell::empty(), Cell::empty(), Cell::resource(Object::Wood)};
    auto w = make_world(Domain::Craft, 1, 3, cells, {0, 0}, 100, 1);
    const auto o0 = reset(w);
    const Monitor m(Prototype::get(Object::Wood), o0, kRecipes);
    EXPECT_FALSE(m(o0));
    apply(w, Action::Right, kRecipes);
    EXPECT_FALSE(m(observe(w)));
    apply(w, Action::Use, kRecipes);
    EXPECT_TRUE(m(observe(w)));
    const Monitor other(Prototype::get(Object::Iron), o0, kRecipes);
    EXPECT_FALSE(other(observe(w)));
}
