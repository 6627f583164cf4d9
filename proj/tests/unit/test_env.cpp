#include <numeric>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mpps/mapgen.hpp"
#include "mpps/world.hpp"

using namespace mpps;

namespace {

const RecipeTable kRecipes = RecipeTable::defaults();

ConcreteWorld craft_world(std::vector<Cell> cells, Pos agent, int rows = 3, int cols = 3) {
    return make_world(Domain::Craft, rows, cols, std::move(cells), agent, 100, 2);
}

int inv(const ConcreteWorld& w, Object o) { return w.inventory[index_of(o)]; }

}  // namespace

TEST(Craft, MovementStopsAtObstaclesAndEdges) {
    const Cell E = Cell::empty(), W = Cell::water(), S = Cell::stone();
    auto w = craft_world({E, W, E, E, E, S, E, E, E}, {1, 1});
    apply(w, Action::Up, kRecipes);
    EXPECT_EQ(w.agent, (Pos{1, 1}));
    EXPECT_EQ(w.facing, Action::Up);
    apply(w, Action::Right, kRecipes);
    EXPECT_EQ(w.agent, (Pos{1, 1}));
    apply(w, Action::Left, kRecipes);
    apply(w, Action::Left, kRecipes);
    EXPECT_EQ(w.agent, (Pos{1, 0}));
    EXPECT_EQ(w.t, 4);
}

TEST(Craft, UsePrefersFacingCellThenNeighbourOrder) {
    const Cell E = Cell::empty();
    const Cell wood = Cell::resource(Object::Wood), iron = Cell::resource(Object::Iron),
               gold = Cell::resource(Object::Gold);
    auto w = craft_world({E, wood, E, iron, E, gold, E, E, E}, {1, 1});
    w.facing = Action::Right;
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(inv(w, Object::Gold), 1);
    apply(w, Action::Use, kRecipes);  // facing cell now empty: up comes first
    EXPECT_EQ(inv(w, Object::Wood), 1);
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(inv(w, Object::Iron), 1);
    EXPECT_EQ(w.at({1, 0}), Cell::empty());
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(std::accumulate(w.inventory.begin(), w.inventory.end(), 0), 3);
}

TEST(Craft, WorkbenchCraftsToDepletion) {
    // 5 wood: plank (2), plank (2), stick (1)
    auto w = craft_world({Cell::workshop(Workshop::Workbench), Cell::empty(), Cell::empty(), Cell::empty()}, {0, 1}, 2, 2);
    w.inventory[index_of(Object::Wood)] = 5;
    apply(w, Action::Left, kRecipes);
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(inv(w, Object::Plank), 2);
    EXPECT_EQ(inv(w, Object::Stick), 1);
    EXPECT_EQ(inv(w, Object::Wood), 0);
    EXPECT_EQ(w.consumed[index_of(Object::Wood)], 5);
}

TEST(Craft, FactoryFollowsRecipePriority) {
    // stick 1, iron 2, wood 1: axe takes stick+iron, bridge takes wood+iron
    auto w = craft_world({Cell::workshop(Workshop::Factory), Cell::empty(), Cell::empty(), Cell::empty()}, {0, 1}, 2, 2);
    w.inventory[index_of(Object::Stick)] = 1;
    w.inventory[index_of(Object::Iron)] = 2;
    w.inventory[index_of(Object::Wood)] = 1;
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(inv(w, Object::Axe), 1);
    EXPECT_EQ(inv(w, Object::Bridge), 1);
    EXPECT_EQ(inv(w, Object::Iron), 0);
    EXPECT_EQ(inv(w, Object::Stick), 0);
    EXPECT_EQ(w.consumed[index_of(Object::Iron)], 2);
}

TEST(Craft, BridgeAndAxeClearObstacles) {
    auto w = craft_world({Cell::water(), Cell::empty(), Cell::stone(), Cell::empty()}, {0, 1}, 2, 2);
    apply(w, Action::Left, kRecipes);
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(w.at({0, 0}), Cell::water());
    w.inventory[index_of(Object::Bridge)] = 1;
    apply(w, Action::Use, kRecipes);
    EXPECT_EQ(w.at({0, 0}), Cell::empty());
    EXPECT_EQ(inv(w, Object::Bridge), 0);
    w.inventory[index_of(Object::Axe)] = 1;
    apply(w, Action::Down, kRecipes);
    apply(w, Action::Use, kRecipes);  // stone is a neighbour, not the facing cell
    EXPECT_EQ(w.at({1, 0}), Cell::empty());
}

TEST(Craft, HorizonEndsTheEpisode) {
    auto w = craft_world(std::vector<Cell>(4), {0, 0}, 2, 2);
    w.horizon = 2;
    apply(w, Action::Use, kRecipes);
    apply(w, Action::Use, kRecipes);
    try {
        apply(w, Action::Use, kRecipes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "episode-over");
    }
}

TEST(Box, LocksNeedTheMatchingKeyAndReleaseTheBox) {
    // row 0: loose key 1 . box(key 2, lock 1) lock 1
    std::vector<Cell> cells(8);
    cells[0] = Cell::loose_key(1);
    cells[2] = Cell::box_key(2, 1);
    cells[3] = Cell::lock(1);
    auto w = make_world(Domain::Box, 2, 4, cells, {1, 3}, 100, 0);
    apply(w, Action::Up, kRecipes);
    EXPECT_EQ(w.agent, (Pos{1, 3}));
    for (Action a : {Action::Left, Action::Left, Action::Left, Action::Up}) apply(w, a, kRecipes);
    EXPECT_EQ(w.held_key, 1);
    EXPECT_EQ(w.keys_obtained, 1u << 1);
    for (Action a : {Action::Down, Action::Right, Action::Right, Action::Right, Action::Up}) apply(w, a, kRecipes);
    EXPECT_EQ(w.agent, (Pos{0, 3}));
    EXPECT_EQ(w.at({0, 2}).kind, CellKind::OpenKey);
    apply(w, Action::Left, kRecipes);
    EXPECT_EQ(w.held_key, 2);
    EXPECT_TRUE(goal_satisfied(w, GoalSpec::key(2)));
    EXPECT_TRUE(goal_satisfied(w, GoalSpec::key(1)));
    EXPECT_FALSE(goal_satisfied(w, GoalSpec::key(3)));
}

TEST(Observe, UnseenCellsAndHiddenLocks) {
    std::vector<Cell> cells(5 * 5);
    cells[2 * 5 + 3] = Cell::box_key(4, 6);
    cells[2 * 5 + 4] = Cell::lock(6);
    auto w = make_world(Domain::Box, 5, 5, cells, {2, 0}, 100, 1);
    auto o = reset(w);
    EXPECT_EQ(o.unseen_count(), 25 - 6);
    EXPECT_EQ(o.at({0, 0}), Cell::unknown());
    apply(w, Action::Right, kRecipes);
    EXPECT_EQ(observe(w).at({2, 3}), Cell::unknown());
    apply(w, Action::Right, kRecipes);
    o = observe(w);
    EXPECT_EQ(o.at({2, 3}).kind, CellKind::BoxKey);
    EXPECT_EQ(o.at({2, 3}).b, kHiddenColor);
    w.view_radius = 2;
    reveal(w);
    o = observe(w);
    EXPECT_EQ(o.at({2, 3}), Cell::box_key(4, 6));
    EXPECT_EQ(o.first_seen[o.index({2, 3})], Cell::box_key(4, 6));
}

TEST(Goal, ParseAndPrint) {
    const auto g = GoalSpec::parse("inv(gold) >= 2 & inv(gem) >= 1");
    ASSERT_EQ(g.atoms.size(), 2u);
    EXPECT_EQ(g.atoms[0].what, index_of(Object::Gold));
    EXPECT_EQ(g.atoms[0].at_least, 2);
    EXPECT_EQ(GoalSpec::parse(g.to_string()), g);
    EXPECT_EQ(GoalSpec::parse(GoalSpec::key(3).to_string()), GoalSpec::key(3));
    EXPECT_THROW(GoalSpec::parse("inv(diamond) >= 1"), Error);
    EXPECT_THROW(GoalSpec::parse("inv(gold >= 1"), Error);
}

TEST(Recipes, JsonRoundTripAndValidation) {
    const auto j = kRecipes.to_json();
    EXPECT_EQ(RecipeTable::from_json(j).to_json(), j);
    auto cyclic = j;
    cyclic["workbench"].push_back({{"make", "ladder"}, {"from", {{"ladder", 1}}}});
    cyclic["factory"] = nlohmann::json::array();
    EXPECT_THROW(RecipeTable::from_json(cyclic), Error);
    EXPECT_TRUE(kRecipes.makes(Workshop::Toolshed, Object::Rope));
    EXPECT_FALSE(kRecipes.makes(Workshop::Toolshed, Object::Axe));
}

TEST(MapGen, LayoutWeightsAndZoneLabels) {
    const auto layouts = craft_layouts(CraftGenConfig{});
    double total = 0;
    for (const auto& l : layouts) total += l.weight;
    EXPECT_NEAR(total, 1.0, 1e-9);
    const Cell E = Cell::empty(), S = Cell::stone();
    int n = 0;
    const auto z = label_zones({E, S, E, E, S, E, S, S, S}, 3, 3, &n);
    EXPECT_EQ(n, 2);
    EXPECT_EQ(z, (std::vector<int>{0, -1, 1, 0, -1, 1, -1, -1, -1}));
}

TEST(MapGen, SeededAndWithinTheSupport) {
    const auto cfg = EnvConfig::craft_default();
    EXPECT_EQ(generate_map(cfg, 17), generate_map(cfg, 17));
    EXPECT_NE(generate_map(cfg, 17).grid, generate_map(cfg, 18).grid);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto w = generate_map(cfg, s);
        int zones = 0;
        const auto z = label_zones(w.initial, w.rows, w.cols, &zones);
        EXPECT_TRUE(craft_contents_ok(w.initial, z, z[w.index(w.start)], cfg.craft.cap));
        EXPECT_LE(zones, 3);
    }
    const auto box = generate_box(EnvConfig::box_default(), 3, 2);
    EXPECT_EQ(box.shape.goal_length, 2);
    EXPECT_EQ(box.world.domain, Domain::Box);
}

TEST(EnvConfig, JsonRoundTrip) {
    auto c = EnvConfig::box_default();
    c.view_radius = 4;
    EXPECT_EQ(EnvConfig::from_json(c.to_json()).to_json(), c.to_json());
}
