#include <random>

#include <gtest/gtest.h>

#include "mpps/abstraction.hpp"
#include "mpps/mapgen.hpp"
#include "mpps/synthesizer.hpp"

using namespace mpps;

namespace {

SynthesisProblem motivating_problem(int k_max) {
    SynthesisProblem p;
    p.goal = GoalSpec::get(Object::Gem);
    p.worlds = {abstract_full(motivating_fixture())};
    p.k_max = k_max;
    return p;
}

}  // namespace

TEST(Synthesizer, MotivatingMapNeedsSixSteps) {
    const auto p = motivating_problem(7);
    for (int k = 1; k <= 5; ++k) EXPECT_EQ(solve_length(p, k).solved_count, 0) << "k=" << k;
    const auto r = solve_length(p, 6);
    EXPECT_EQ(r.solved_count, 1);
    EXPECT_EQ(to_string(r.program),
              "get-wood; get-iron; use-workbench; use-factory; use-axe; get-gem");
}

TEST(Synthesizer, OracleAgreesOnMotivatingMap) {
    const auto p = motivating_problem(7);
    for (int k = 1; k <= 6; ++k) {
        const auto o = enumerate_oracle(p, k);
        EXPECT_EQ(o.solved_count, solve_length(p, k).solved_count) << "k=" << k;
    }
}

TEST(Synthesizer, MatchesOracleOnRandomCraftProblems) {
    const auto cfg = EnvConfig::craft_default();
    const Object goals[] = {Object::Gold, Object::Gem, Object::Plank, Object::Axe, Object::Bridge};
    for (int trial = 0; trial < 20; ++trial) {
        SynthesisProblem p;
        p.goal = GoalSpec::get(goals[trial % 5]);
        for (int w = 0; w < 3; ++w) p.worlds.push_back(abstract_full(generate_map(cfg, 1000 + trial * 3 + w)));
        p.k_max = 4;
        for (int k = 1; k <= 4; ++k) {
            const auto r = solve_length(p, k);
            const auto o = enumerate_oracle(p, k);
            ASSERT_EQ(r.solved_count, o.solved_count) << "trial " << trial << " k=" << k;
            ASSERT_EQ(certify(r.program, p), r.solved);
        }
    }
}

TEST(Synthesizer, MatchesOracleOnRandomBoxProblems) {
    const auto cfg = EnvConfig::box_default();
    for (int trial = 0; trial < 20; ++trial) {
        SynthesisProblem p;
        const auto first = generate_box(cfg, 5000 + trial, 1 + trial % 3, trial % 3);
        p.goal = GoalSpec::key(first.goal_color);
        p.worlds.push_back(abstract_full(first.world));
        for (int w = 1; w < 3; ++w) p.worlds.push_back(abstract_full(generate_box(cfg, 7000 + trial * 3 + w, 1 + trial % 3, trial % 3).world));
        p.k_max = 4;
        for (int k = 1; k <= 4; ++k) {
            const auto r = solve_length(p, k);
            const auto o = enumerate_oracle(p, k);
            ASSERT_EQ(r.solved_count, o.solved_count) << "trial " << trial << " k=" << k;
        }
    }
}

namespace {

AbstractState random_state(std::mt19937& rng) {
    std::uniform_int_distribution<int> zones(1, 3), count(0, 2), bit(0, 1);
    AbstractState s = AbstractState::with_zones(zones(rng));
    s.z = std::uniform_int_distribution<int>(0, s.zones - 1)(rng);
    const Boundary kinds[] = {Boundary::Connected, Boundary::Water, Boundary::Stone, Boundary::NotAdjacent};
    for (int i = 0; i < s.zones; ++i) {
        for (int j = i + 1; j < s.zones; ++j) s.set_boundary(i, j, kinds[std::uniform_int_distribution<int>(1, 3)(rng)]);
        for (int r = 0; r < kNumResources; ++r) s.rho[i][r] = count(rng) * bit(rng);
        s.omega[i] = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, 7)(rng));
    }
    for (int o = 0; o < kNumObjects; ++o) s.iota[o] = bit(rng) * bit(rng) * count(rng);
    return s;
}

}  // namespace

TEST(Synthesizer, MatchesOracleOnRandomAbstractStates) {
    std::mt19937 rng(42);
    const Object goals[] = {Object::Gold, Object::Gem, Object::Axe, Object::Cloth, Object::Bed, Object::Ladder};
    int nontrivial = 0;
    for (int trial = 0; trial < 60; ++trial) {
        SynthesisProblem p;
        p.goal = GoalSpec::get(goals[trial % 6]);
        for (int w = 0; w < 4; ++w) p.worlds.push_back(random_state(rng));
        p.k_max = 3;
        for (int k = 1; k <= 3; ++k) {
            const auto r = solve_length(p, k);
            const auto o = enumerate_oracle(p, k);
            ASSERT_EQ(r.solved_count, o.solved_count) << "trial " << trial << " k=" << k;
            if (r.solved_count > 0 && r.solved_count < 4) ++nontrivial;
        }
    }
    EXPECT_GT(nontrivial, 10);
}
