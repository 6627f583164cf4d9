#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mpps/cvae.hpp"
#include "mpps/hallucinator.hpp"
#include "mpps/prototypes.hpp"
#include "mpps/synthesizer.hpp"

namespace mpps {

// Low-level policies for the component library. act() returns nullopt when
// the option cannot make progress from `o` (stuck).
class OptionPolicy {
public:
    virtual ~OptionPolicy() = default;
    // Called when component `tau` of `program` starts.
    virtual void begin(const Program& program, int tau, const Observation& o) { (void)program, (void)tau, (void)o; }
    virtual std::optional<Action> act(const Prototype& p, const Observation& o) = 0;
};

// Breadth-first over known passable cells to the nearest cell enabling the
// prototype's effect; walks to the nearest frontier cell of the reachable
// region when no target is visible. use-tool prefers an obstacle whose far
// side shows a target of a later program component.
class ScriptedOptions final : public OptionPolicy {
public:
    explicit ScriptedOptions(RecipeTable recipes = RecipeTable::defaults());

    void begin(const Program& program, int tau, const Observation& o) override;
    std::optional<Action> act(const Prototype& p, const Observation& o) override;
    // Toward the nearest reachable cell next to an unseen one.
    std::optional<Action> explore(const Observation& o) const;
    // An action that leaves the world unchanged apart from time and facing.
    static Action idle(const Observation& o);

private:
    RecipeTable recipes_;
    std::vector<Cell> wanted_;  // targets of later components
    // use-tool: cells reachable and tools held when the option began.
    std::vector<std::uint8_t> reach_at_begin_;
    int tools_at_begin_ = 0;
};

struct OptionImpl {
    Prototype proto;
    OptionPolicy* policy = nullptr;
    int budget = 0;  // env steps; 0 means unbounded within the caller's N

    std::optional<Action> act(const Observation& o) const { return policy->act(proto, o); }
};

OptionImpl scripted_option(const Prototype& p, ScriptedOptions& options, int budget = 0);

struct StepRecord {
    int t = 0;  // time before the action
    Action action = Action::Up;
    int tau = -1;  // program component being executed; -1 while exploring
};

// An option completion. `full_before` / `full_after` are ground-truth
// abstractions at the snapshot and at completion, kept for offline checks;
// the agent never reads them.
struct Completion {
    int t_begin = 0;  // snapshot time
    int t = 0;
    Prototype proto;
    AbstractWorld view_before;
    AbstractWorld view_after;
    AbstractWorld full_before;
    AbstractWorld full_after;
};

struct ProgramRun {
    int steps = 0;
    int completed = 0;
    bool finished = false;
    bool stuck = false;
    bool goal_reached = false;
    std::vector<StepRecord> trace;
    std::vector<Completion> completions;
};

// Executes `program` in `w` for at most n env steps, checking each option's
// monitor before every action. Stops early once the goal holds (when given).
// A stuck option ends the run when `stop_when_stuck`, otherwise it idles out
// the remaining budget.
ProgramRun run_program(ConcreteWorld& w, const Program& program, OptionPolicy& options, int n,
                       const RecipeTable& recipes, const GoalSpec* goal = nullptr,
                       bool stop_when_stuck = true);

// Frontier exploration for at most n steps.
ProgramRun run_exploration(ConcreteWorld& w, const ScriptedOptions& options, int n,
                           const RecipeTable& recipes, const GoalSpec* goal = nullptr,
                           bool stop_when_stuck = true);

// Source of sampled completions for the planner.
class WorldSampler {
public:
    virtual ~WorldSampler() = default;
    // Called once per episode with the task being attempted.
    virtual void set_task(const GoalSpec& goal, int k_max, const RecipeTable& recipes) {
        (void)goal, (void)k_max, (void)recipes;
    }
    virtual SampledWorldSet sample(const Observation& o, int m, std::uint64_t seed) = 0;
};

// Exact posterior. With `condition_on_task`, craft maps are also conditioned
// on the task being solvable from the initial map, which is how scenarios
// are drawn.
class ExactSampler final : public WorldSampler {
public:
    explicit ExactSampler(EnvConfig cfg, bool condition_on_task = true, std::uint64_t budget = 200000);

    void set_task(const GoalSpec& goal, int k_max, const RecipeTable& recipes) override;
    SampledWorldSet sample(const Observation& o, int m, std::uint64_t seed) override;

private:
    ExactPosterior posterior_;
    bool condition_;
    std::optional<GoalSpec> goal_;
    int k_max_ = 7;
    RecipeTable recipes_ = RecipeTable::defaults();
};

class CvaeSampler final : public WorldSampler {
public:
    explicit CvaeSampler(const CvaeModel& model) : model_(&model) {}
    SampledWorldSet sample(const Observation& o, int m, std::uint64_t seed) override {
        SampledWorldSet s = model_->sample(abstract_observed(o), m, seed);
        s.obs_digest = digest(o);
        return s;
    }

private:
    const CvaeModel* model_;
};

enum class Planner : std::uint8_t { Mpps, Optimistic };

struct AgentConfig {
    int m = 3;
    int n = 20;  // replan interval
    int k_max = 7;
    double theta = 1.0;
    std::string hallucinator = "exact";  // exact | cvae
    std::string executor = "scripted";   // scripted | learned
    Planner planner = Planner::Mpps;
    // Replan as soon as an option is stuck; off means strict N-step replanning
    // with stuck options idling.
    bool early_replan = true;
    double solver_time_limit_s = 60.0;
    std::uint64_t seed = 1;

    static AgentConfig defaults(Domain d);
    // Missing keys keep the domain defaults. Throws Error("invalid-config").
    static AgentConfig from_json(const nlohmann::json& j, Domain d);
    nlohmann::json to_json() const;
    // Throws Error("invalid-config").
    void validate() const;
};

struct ReplanRecord {
    int t = 0;
    std::uint64_t obs_digest = 0;
    std::string backend;
    std::vector<AbstractWorld> worlds;
    Program program;  // empty when exploring
    int k = 0;
    double objective = 0.0;
    double seconds = 0.0;
    int steps = 0;
    int completed = 0;
    bool finished = false;
    bool stuck = false;
};

struct EpisodeResult {
    bool success = false;
    int steps = 0;
    std::vector<ReplanRecord> replans;
    std::vector<StepRecord> trace;
    std::vector<Completion> completions;

    nlohmann::json to_json() const;
};

// Hallucinate, synthesize, execute up to N steps, repeat until the goal holds
// or the horizon is reached. `sampler` may be null for the optimistic planner.
EpisodeResult mpps_episode(ConcreteWorld world, const GoalSpec& goal, const AgentConfig& cfg,
                           WorldSampler* sampler, OptionPolicy& options,
                           const RecipeTable& recipes = RecipeTable::defaults());

// Self-contained replay file: the initial map, goal, config and episode.
nlohmann::json replay_json(const ConcreteWorld& initial, std::uint64_t map_seed, const GoalSpec& goal,
                           const AgentConfig& cfg, const EpisodeResult& r);

struct ReplayCheck {
    bool ok = true;
    std::vector<std::string> failures;
};

// Re-executes the recorded actions and re-checks the episode invariants:
// observation digests at every replan, the N-step budget, option soundness on
// every completion, the horizon and the success flag.
ReplayCheck verify_replay(const nlohmann::json& replay, const RecipeTable& recipes = RecipeTable::defaults());

}  // namespace mpps
