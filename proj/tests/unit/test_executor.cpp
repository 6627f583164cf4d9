#include <deque>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mpps/executor.hpp"
#include "mpps/io.hpp"

using namespace mpps;

namespace {

ConcreteWorld fixture(const std::string& header, const std::vector<std::string>& rows) {
    std::string text = "mpps-map 1\n" + header + "grid\n";
    for (const auto& r : rows) text += r + "\n";
    ConcreteWorld w = read_fixture(text).world;
    reset(w);
    return w;
}

// Independent shortest path over cells that are not water or stone.
int bfs_distance(const ConcreteWorld& w, Pos to) {
    std::vector<int> dist(w.grid.size(), -1);
    std::deque<Pos> q = {w.agent};
    dist[w.index(w.agent)] = 0;
    while (!q.empty()) {
        const Pos p = q.front();
        q.pop_front();
        if (p == to) return dist[w.index(p)];
        const Pos next[4] = {{p.row - 1, p.col}, {p.row + 1, p.col}, {p.row, p.col - 1}, {p.row, p.col + 1}};
        for (Pos n : next) {
            if (!w.in_bounds(n) || w.at(n).is_obstacle() || dist[w.index(n)] >= 0) continue;
            dist[w.index(n)] = dist[w.index(p)] + 1;
            q.push_back(n);
        }
    }
    return -1;
}

const RecipeTable kRecipes = RecipeTable::defaults();

}  // namespace

TEST(ScriptedOption, GetWoodThreeCellsAway) {
    ConcreteWorld w = fixture("domain craft\nagent 0 0\n",
                              {"...W....", "........", "........", "........", "........", "........",
                               "........", "........"});
    ScriptedOptions opts;
    const auto run = run_program(w, {Prototype::get(Object::Wood)}, opts, 20, kRecipes);
    EXPECT_TRUE(run.finished);
    EXPECT_EQ(run.steps, 4);
    EXPECT_EQ(w.inventory[index_of(Object::Wood)], 1);
}

TEST(ScriptedOption, GetGemMatchesShortestPath) {
    ConcreteWorld w = fixture("domain craft\nagent 6 1\nradius 8\n",
                              {"........", "..#.....", "..#..E..", "..#.....", "..####..", "........",
                               "........", "........"});
    const int d = bfs_distance(w, {2, 5});
    ASSERT_GT(d, 0);
    ScriptedOptions opts;
    const GoalSpec goal = GoalSpec::get(Object::Gem);
    const auto run = run_program(w, {Prototype::get(Object::Gem)}, opts, 40, kRecipes);
    EXPECT_TRUE(run.finished);
    EXPECT_TRUE(goal_satisfied(w, goal));
    EXPECT_EQ(run.steps, d + 1);
}

TEST(ScriptedOption, BudgetStopsExactlyAtN) {
    ConcreteWorld w = fixture("domain craft\nagent 0 0\n",
                              {"........", "........", "........", "........", "........", "........",
                               "........", ".......E"});
    ScriptedOptions opts;
    const auto run = run_program(w, {Prototype::get(Object::Gem)}, opts, 5, kRecipes);
    EXPECT_FALSE(run.finished);
    EXPECT_EQ(run.steps, 5);
    EXPECT_EQ(w.t, 5);
}

TEST(ScriptedOption, UnreachableGemBurnsBudgetWhenStrict) {
    ConcreteWorld w = motivating_fixture();
    reset(w);
    ScriptedOptions opts;
    const auto run = run_program(w, {Prototype::get(Object::Gem)}, opts, 20, kRecipes, nullptr, false);
    EXPECT_FALSE(run.finished);
    EXPECT_TRUE(run.stuck);
    EXPECT_EQ(run.steps, 20);
    EXPECT_EQ(w.inventory[index_of(Object::Gem)], 0);
}

TEST(ScriptedOption, UnreachableGemStopsEarlyByDefault) {
    ConcreteWorld w = motivating_fixture();
    reset(w);
    ScriptedOptions opts;
    const auto run = run_program(w, {Prototype::get(Object::Gem)}, opts, 20, kRecipes);
    EXPECT_TRUE(run.stuck);
    EXPECT_LT(run.steps, 20);
    // The whole agent zone (columns 0-4) has been seen.
    const Observation o = observe(w);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 6; ++c) EXPECT_TRUE(o.is_seen({r, c})) << r << "," << c;
    }
}

TEST(ScriptedOption, MissingFactoryIsStuck) {
    ConcreteWorld w = fixture("domain craft\nagent 1 1\n",
                              {"...#....", ".W.#....", "...#..f.", "####....", "........", "........",
                               "........", "........"});
    ScriptedOptions opts;
    w.inventory[index_of(Object::Wood)] = 1;
    w.inventory[index_of(Object::Iron)] = 1;
    const auto run = run_program(w, {Prototype::use(Workshop::Factory)}, opts, 20, kRecipes);
    EXPECT_TRUE(run.stuck);
    EXPECT_EQ(run.completed, 0);
}

TEST(ScriptedOption, BoxKeyThroughMatchingLock) {
    BoxMap m = trivial_box_fixture();
    m.world.view_radius = 12;
    reset(m.world);
    ScriptedOptions opts;
    const Program p = {Prototype::get_key(0), Prototype::get_key(m.goal_color)};
    const auto run = run_program(m.world, p, opts, 60, kRecipes);
    EXPECT_TRUE(run.finished);
    EXPECT_EQ(m.world.held_key, m.goal_color);
    EXPECT_TRUE(goal_satisfied(m.world, GoalSpec::key(m.goal_color)));
}

TEST(ScriptedOption, IdleChangesNothing) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (const auto& cfg : {EnvConfig::craft_default(), EnvConfig::box_default()}) {
            ConcreteWorld w = generate_map(cfg, seed);
            reset(w);
            const ConcreteWorld before = w;
            apply(w, ScriptedOptions::idle(observe(w)), kRecipes);
            EXPECT_EQ(w.grid, before.grid);
            EXPECT_EQ(w.inventory, before.inventory);
            EXPECT_EQ(w.held_key, before.held_key);
            EXPECT_EQ(w.keys_obtained, before.keys_obtained);
        }
    }
}

TEST(Episode, MotivatingFixtureSucceeds) {
    ExactSampler sampler(EnvConfig::craft_default());
    ScriptedOptions opts;
    const auto r = mpps_episode(motivating_fixture(), GoalSpec::get(Object::Gem), AgentConfig::defaults(Domain::Craft),
                                &sampler, opts);
    EXPECT_TRUE(r.success);
    EXPECT_LE(r.steps, 100);
    bool axe_plan = false;
    for (const auto& rp : r.replans) {
        for (const auto& c : rp.program) axe_plan = axe_plan || c == Prototype::use_tool(Object::Axe);
    }
    EXPECT_TRUE(axe_plan);
}

TEST(Episode, FullyObservedNeedsOneSynthesis) {
    ConcreteWorld w = motivating_fixture();
    w.view_radius = 8;
    ExactSampler sampler(EnvConfig::craft_default());
    ScriptedOptions opts;
    auto cfg = AgentConfig::defaults(Domain::Craft);
    cfg.n = 100;
    const auto r = mpps_episode(w, GoalSpec::get(Object::Gem), cfg, &sampler, opts);
    EXPECT_TRUE(r.success);
    ASSERT_EQ(r.replans.size(), 1u);
    EXPECT_EQ(r.replans[0].program.size(), 6u);
    EXPECT_TRUE(r.replans[0].finished);
}

TEST(Episode, InvariantsHoldAndReplayVerifies) {
    ScriptedOptions opts;
    for (const auto& env : {EnvConfig::craft_default(), EnvConfig::box_default()}) {
        ExactSampler sampler(env);
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            ConcreteWorld w;
            GoalSpec goal;
            if (env.domain == Domain::Craft) {
                w = generate_map(env, seed);
                goal = GoalSpec::get(seed % 2 ? Object::Plank : Object::Gold);
            } else {
                const BoxMap m = generate_box(env, seed, 1 + static_cast<int>(seed % 4));
                w = m.world;
                goal = GoalSpec::key(m.goal_color);
            }
            auto cfg = AgentConfig::defaults(env.domain);
            cfg.seed = seed;
            cfg.early_replan = seed % 3 != 0;
            const auto r = mpps_episode(w, goal, cfg, &sampler, opts);
            EXPECT_LE(r.steps, w.horizon);
            for (const auto& rp : r.replans) EXPECT_LE(rp.steps, cfg.n);
            for (const auto& c : r.completions) {
                EXPECT_TRUE(check_transition(c.proto, c.view_before, c.view_after, kRecipes));
                EXPECT_TRUE(check_transition(c.proto, c.full_before, c.full_after, kRecipes)) << c.proto.name();
            }
            const auto check = verify_replay(replay_json(w, seed, goal, cfg, r));
            EXPECT_TRUE(check.ok) << (check.failures.empty() ? "" : check.failures.front());
        }
    }
}

TEST(Episode, TamperedReplayIsCaught) {
    ExactSampler sampler(EnvConfig::craft_default());
    ScriptedOptions opts;
    const auto goal = GoalSpec::get(Object::Gem);
    const auto cfg = AgentConfig::defaults(Domain::Craft);
    const auto r = mpps_episode(motivating_fixture(), goal, cfg, &sampler, opts);
    auto j = replay_json(motivating_fixture(), 0, goal, cfg, r);
    ASSERT_TRUE(verify_replay(j).ok);
    j["actions"].erase(j["actions"].size() - 1);
    EXPECT_FALSE(verify_replay(j).ok);
}

TEST(Episode, OptimisticPlannerRuns) {
    ScriptedOptions opts;
    auto cfg = AgentConfig::defaults(Domain::Craft);
    cfg.planner = Planner::Optimistic;
    const auto r = mpps_episode(motivating_fixture(), GoalSpec::get(Object::Gem), cfg, nullptr, opts);
    EXPECT_TRUE(r.success);
    ASSERT_FALSE(r.replans.empty());
    EXPECT_EQ(r.replans[0].backend, "optimistic");
    EXPECT_EQ(to_string(r.replans[0].program), "get-gem");
}

TEST(AgentConfig, Validation) {
    auto c = AgentConfig::defaults(Domain::Box);
    EXPECT_EQ(c.n, 10);
    EXPECT_EQ(c.m, 3);
    EXPECT_EQ(AgentConfig::defaults(Domain::Craft).n, 20);
    c.n = 0;
    EXPECT_THROW(c.validate(), Error);
    c = AgentConfig{};
    c.hallucinator = "oracle";
    EXPECT_THROW(c.validate(), Error);
}
