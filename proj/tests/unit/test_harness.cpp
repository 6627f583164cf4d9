#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mpps/harness.hpp"

using namespace mpps;
namespace fs = std::filesystem;

namespace {

EpisodeRecord rec(const std::string& task, bool success, int steps, std::vector<double> secs = {}) {
    EpisodeRecord r;
    r.task = task;
    r.goal = "inv(" + task + ") >= 1";
    r.success = success;
    r.steps = steps;
    r.replan_seconds = std::move(secs);
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mpps-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Evaluate, SevenOfTenIsPointSeven) {
    std::vector<EpisodeRecord> rs;
    for (int i = 0; i < 10; ++i) rs.push_back(rec("gem", i < 7, 10));
    const auto m = evaluate(rs, 100);
    EXPECT_DOUBLE_EQ(m.avg_reward, 0.7);
    EXPECT_DOUBLE_EQ(m.avg_finish_step, (7 * 10 + 3 * 100) / 10.0);
}

TEST(Evaluate, AllFailuresFinishAtHorizon) {
    const auto m = evaluate({rec("gold", false, 37), rec("gold", false, 100)}, 100);
    EXPECT_EQ(m.avg_reward, 0.0);
    EXPECT_EQ(m.avg_finish_step, 100.0);
}

TEST(Evaluate, MatchesHandComputedFixture) {
    // task a: success 12, failure, success 30 -> reward 2/3, finish (12+100+30)/3
    // task b: success 5, success 9            -> reward 1,   finish 7
    // all: 4/5, (12+100+30+5+9)/5 = 31.2; replans 0.5 0.25 1.0 -> mean 0.5833.., max 1
    const std::vector<EpisodeRecord> rs = {rec("a", true, 12, {0.5}), rec("b", true, 5), rec("a", false, 60, {0.25, 1.0}),
                                           rec("b", true, 9), rec("a", true, 30)};
    const auto m = evaluate(rs, 100);
    EXPECT_EQ(m.episodes, 5);
    EXPECT_EQ(m.successes, 4);
    EXPECT_DOUBLE_EQ(m.avg_reward, 0.8);
    EXPECT_DOUBLE_EQ(m.avg_finish_step, 31.2);
    ASSERT_EQ(m.per_task.size(), 2u);
    EXPECT_EQ(m.per_task[0].task, "a");
    EXPECT_DOUBLE_EQ(m.per_task[0].avg_reward, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.per_task[0].avg_finish_step, 142.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.per_task[1].avg_finish_step, 7.0);
    EXPECT_EQ(m.replans, 3);
    EXPECT_DOUBLE_EQ(m.mean_replan_seconds, 1.75 / 3.0);
    EXPECT_DOUBLE_EQ(m.max_replan_seconds, 1.0);
    EXPECT_THROW(evaluate({}, 100), Error);
}

TEST(Evaluate, DigestIgnoresTiming) {
    auto a = evaluate({rec("a", true, 4, {0.1})}, 100);
    auto b = evaluate({rec("a", true, 4, {0.9})}, 100);
    EXPECT_EQ(a.digest(), b.digest());
    auto c = evaluate({rec("a", true, 5, {0.1})}, 100);
    EXPECT_NE(a.digest(), c.digest());
}

TEST(EpisodesCsv, RoundTripPreservesMetrics) {
    std::vector<EpisodeRecord> rs = {rec("a", true, 12, {0.5, 0.125}), rec("b", false, 100)};
    rs[0].goal = "inv(wood) >= 1 & inv(iron) >= 2";
    rs[1].map_seed = 18446744073709551615ull;
    std::stringstream s;
    write_episodes_csv(s, rs);
    const auto back = read_episodes_csv(s);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].goal, rs[0].goal);
    EXPECT_EQ(back[0].replan_seconds, rs[0].replan_seconds);
    EXPECT_EQ(back[1].map_seed, rs[1].map_seed);
    EXPECT_EQ(evaluate(back, 100).to_json().dump(), evaluate(rs, 100).to_json().dump());
    std::stringstream bad("nope\n");
    EXPECT_THROW(read_episodes_csv(bad), Error);
}

TEST(Scenarios, CraftTasksAreSolvableAndDistinct) {
    const auto env = EnvConfig::craft_default();
    const auto sc = make_scenarios(env, 2, 5);
    ASSERT_EQ(sc.size(), 28u);
    const RecipeTable recipes = RecipeTable::defaults();
    for (const auto& s : sc) {
        SynthesisProblem p;
        p.goal = s.goal;
        p.worlds = {abstract_full(scenario_world(env, s))};
        EXPECT_TRUE(certify(synthesize(p).program, p)[0]) << s.task << " " << s.map_seed;
    }
    EXPECT_NE(sc[0].map_seed, sc[1].map_seed);
    EXPECT_EQ(make_scenarios(env, 3, 5, {"gem", "gold"}).size(), 6u);
    EXPECT_THROW(make_scenarios(env, 1, 5, {"diamond"}), Error);
}

TEST(Scenarios, BoxGoalLengths) {
    const auto env = EnvConfig::box_default();
    const auto sc = make_scenarios(env, 2, 5);
    ASSERT_EQ(sc.size(), 8u);
    for (const auto& s : sc) {
        EXPECT_EQ(s.task, "length-" + std::to_string(s.goal_length));
        EXPECT_EQ(s.goal.domain, Domain::Box);
        EXPECT_EQ(scenario_world(env, s).domain, Domain::Box);
    }
}

TEST(ExperimentSpec, JsonRoundTripAndValidation) {
    ExperimentSpec s;
    s.name = "t";
    s.per_task = 3;
    s.tasks = {"gem"};
    s.agent.m = 2;
    s.agent.planner = Planner::Optimistic;
    s.thresholds.min_success = 0.5;
    const auto back = ExperimentSpec::from_json(s.to_json());
    EXPECT_EQ(back.to_json(), s.to_json());

    nlohmann::json j = {{"domain", "box"}};
    EXPECT_EQ(ExperimentSpec::from_json(j).agent.n, 10);
    j["agent"] = {{"hallucinator", "cvae"}};
    EXPECT_THROW(ExperimentSpec::from_json(j), Error);
    j["backends"] = {{"cvae_checkpoint", "/nonexistent/c.ckpt"}};
    EXPECT_THROW(ExperimentSpec::from_json(j), Error);
    EXPECT_THROW(ExperimentSpec::from_json({{"agent", {{"m", 0}}}}), Error);
    EXPECT_THROW(ExperimentSpec::from_json({{"scenarios", {{"per_task", "many"}}}}), Error);
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
    ExperimentSpec s;
    s.per_task = 1;
    s.tasks = {"wood", "gold", "bridge"};
    const auto a = run_experiment(s);
    s.workers = 3;
    const auto b = run_experiment(s);
    EXPECT_EQ(a.report.digest(), b.report.digest());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].steps, b.records[i].steps);
        EXPECT_EQ(a.records[i].agent_seed, episode_seed(s.agent.seed, static_cast<int>(i)));
    }
}

TEST(Experiment, OutputsReloadAndReplay) {
    ExperimentSpec s;
    s.per_task = 1;
    s.tasks = {"plank", "gem"};
    s.save_replays = true;
    s.output_dir = scratch_dir("outputs").string();
    const auto run = run_experiment(s);
    write_outputs(s, run);
    for (const char* f : {"manifest.json", "metrics.json", "episodes.csv", "tasks.csv", "replays.jsonl"}) {
        EXPECT_TRUE(fs::exists(fs::path(s.output_dir) / f)) << f;
    }
    std::ifstream ef(fs::path(s.output_dir) / "episodes.csv");
    EXPECT_EQ(evaluate(read_episodes_csv(ef), 100).digest(), run.report.digest());

    const auto again = ExperimentSpec::load((fs::path(s.output_dir) / "manifest.json").string());
    EXPECT_EQ(again.to_json(), s.to_json());
    std::ifstream rf(fs::path(s.output_dir) / "replays.jsonl");
    int n = 0;
    for (std::string line; std::getline(rf, line); ++n) EXPECT_TRUE(verify_replay(nlohmann::json::parse(line)).ok);
    EXPECT_EQ(n, 2);
    fs::remove_all(s.output_dir);
}

TEST(Experiment, PairingRequiresTheSameScenarios) {
    ExperimentSpec s;
    s.per_task = 1;
    s.tasks = {"gem"};
    const auto a = run_experiment(s);
    s.agent.planner = Planner::Optimistic;
    const auto b = run_experiment(s);
    const auto rows = pair_runs(a, b);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].map_seed, a.records[0].map_seed);
    s.scenario_seed = 2;
    EXPECT_THROW(pair_runs(a, run_experiment(s)), Error);
}
