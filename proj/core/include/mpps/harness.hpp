#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpps/executor.hpp"
#include "mpps/mapgen.hpp"

namespace mpps {

// One evaluation episode: a generated map and a goal. Craft task names are
// object names ("gem"); box task names are "length-<L>".
struct Scenario {
    std::string task;
    GoalSpec goal;
    std::uint64_t map_seed = 0;
    int goal_length = 0;  // box only
};

// Craft: `per_task` maps per object whose task is solvable on the full map
// (k <= k_max). Box: `per_task` maps per goal length 1-4. `tasks` restricts
// the task names; empty means all.
std::vector<Scenario> make_scenarios(const EnvConfig& env, int per_task, std::uint64_t seed,
                                     const std::vector<std::string>& tasks = {}, int k_max = 7);
ConcreteWorld scenario_world(const EnvConfig& env, const Scenario& s);

struct Thresholds {
    double min_success = 0.0;
    double max_replan_seconds = 5.0;
};

struct ExperimentSpec {
    std::string name = "experiment";
    EnvConfig env = EnvConfig::craft_default();
    int per_task = 10;
    std::uint64_t scenario_seed = 1;
    std::vector<std::string> tasks;
    AgentConfig agent = AgentConfig::defaults(Domain::Craft);
    std::string cvae_checkpoint;     // hallucinator "cvae"
    std::string options_checkpoint;  // executor "learned"
    std::string output_dir = "mpps-out";
    int workers = 1;
    bool save_replays = false;
    Thresholds thresholds;

    // Relative checkpoint paths resolve against `base_dir`. Throws
    // Error("invalid-config").
    static ExperimentSpec from_json(const nlohmann::json& j, const std::string& base_dir = "");
    static ExperimentSpec load(const std::string& path);
    nlohmann::json to_json() const;
    // Checks the agent config and that referenced checkpoints exist.
    void validate() const;
};

struct EpisodeRecord {
    int index = 0;
    std::string task;
    std::string goal;
    std::uint64_t map_seed = 0;
    std::uint64_t agent_seed = 0;
    bool success = false;
    int steps = 0;
    std::vector<double> replan_seconds;
};

struct TaskMetrics {
    std::string task;
    int episodes = 0;
    int successes = 0;
    double avg_reward = 0.0;
    double avg_finish_step = 0.0;
};

// Finish step of a failed episode counts as the horizon T.
struct MetricsReport {
    int episodes = 0;
    int successes = 0;
    int horizon = 0;
    double avg_reward = 0.0;
    double avg_finish_step = 0.0;
    std::vector<TaskMetrics> per_task;  // first-appearance order
    // Wall clock; excluded from digest().
    int replans = 0;
    double mean_replan_seconds = 0.0;
    double max_replan_seconds = 0.0;

    nlohmann::json to_json(bool timing = true) const;
    // FNV-1a over the timing-free JSON.
    std::uint64_t digest() const;
};

// Throws Error("invalid-argument") on empty results.
MetricsReport evaluate(const std::vector<EpisodeRecord>& results, int horizon);

struct ExperimentRun {
    std::vector<Scenario> scenarios;
    std::vector<EpisodeRecord> records;
    std::vector<nlohmann::json> replays;  // when save_replays
    MetricsReport report;
};

// Seed of episode `index`'s agent.
std::uint64_t episode_seed(std::uint64_t agent_seed, int index);

using Progress = std::function<void(int done, int total)>;

// Runs every scenario with `spec.workers` threads; results do not depend on
// the worker count.
ExperimentRun run_experiment(const ExperimentSpec& spec, const Progress& progress = {});

// Writes manifest.json, episodes.csv, metrics.json and tasks.csv (and
// replays.jsonl) into spec.output_dir.
void write_outputs(const ExperimentSpec& spec, const ExperimentRun& run);
nlohmann::json manifest(const ExperimentSpec& spec, const ExperimentRun& run);

void write_episodes_csv(std::ostream& out, const std::vector<EpisodeRecord>& records);
// Throws Error("parse-error").
std::vector<EpisodeRecord> read_episodes_csv(std::istream& in);

struct PairedRow {
    std::string task;
    std::uint64_t map_seed = 0;
    bool success_a = false;
    int steps_a = 0;
    bool success_b = false;
    int steps_b = 0;
};

// `a` and `b` must come from the same scenario list.
std::vector<PairedRow> pair_runs(const ExperimentRun& a, const ExperimentRun& b);
void write_paired_csv(std::ostream& out, const std::vector<PairedRow>& rows);

std::uint64_t fnv1a(const std::string& s);
std::string hex(std::uint64_t v);

}  // namespace mpps
