#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpps/executor.hpp"

namespace mpps {

// Policy input. Craft: egocentric crop of the known map (one-hot cell
// channels, off-map counts as unknown) followed by inventory / cap and
// facing. Box: whole-grid channels (unknown, empty, agent, and one channel
// per colour for loose keys, locks, boxed keys and opened keys) followed by
// the held key.
class PolicyFeaturizer {
public:
    PolicyFeaturizer(Domain d, int rows, int cols, int crop_radius = 2);

    Domain domain() const { return domain_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int crop_radius() const { return radius_; }
    int grid_channels() const;
    int grid_rows() const;
    int grid_cols() const;
    int extra_dim() const;
    int dim() const { return grid_channels() * grid_rows() * grid_cols() + extra_dim(); }
    int actions() const { return domain_ == Domain::Craft ? kNumCraftActions : kNumBoxActions; }

    std::vector<double> features(const Observation& o) const;

private:
    Domain domain_;
    int rows_;
    int cols_;
    int radius_;
};

struct ModuleShape {
    int hidden = 128;        // actor
    int critic_hidden = 32;
    int conv_kernels = 0;    // box: 32
};

// Actor and critic of one prototype. Actor: [conv 3x3 + ReLU] -> tanh hidden
// -> softmax over actions. Critic: tanh hidden -> scalar, on the raw features.
class ModuleNet {
public:
    ModuleNet(const PolicyFeaturizer& f, ModuleShape shape, std::uint64_t seed);

    const ModuleShape& shape() const { return shape_; }
    std::vector<double>& actor() { return actor_; }
    const std::vector<double>& actor() const { return actor_; }
    std::vector<double>& critic() { return critic_; }
    const std::vector<double>& critic() const { return critic_; }

    std::vector<double> policy(const std::vector<double>& x) const;
    double value(const std::vector<double>& x) const;

    // Mean over the batch of -(A log pi(a|x)) - beta H(pi(.|x)); adds the
    // actor gradient to `grad` when non-null.
    double actor_loss(const std::vector<std::vector<double>>& xs, const std::vector<int>& actions,
                      const std::vector<double>& advantages, double entropy_beta,
                      std::vector<double>* grad = nullptr) const;
    // Mean of (V(x) - target)^2 / 2.
    double critic_loss(const std::vector<std::vector<double>>& xs, const std::vector<double>& targets,
                       std::vector<double>* grad = nullptr) const;

    void save(std::ostream& out) const;
    static ModuleNet load(std::istream& in, const PolicyFeaturizer& f);

private:
    struct Cache;
    void actor_forward(const std::vector<double>& x, Cache& c) const;

    PolicyFeaturizer f_;
    ModuleShape shape_;
    std::vector<double> actor_;
    std::vector<double> critic_;
};

struct TrainingTask {
    ConcreteWorld world;
    GoalSpec goal;
    Program program;
};

// Random maps and tasks whose program comes from synthesize on the true
// abstract world and passes certification; unsolvable samples are skipped.
std::vector<TrainingTask> make_training_tasks(const EnvConfig& cfg, int n, std::uint64_t seed, int k_max = 7);

struct TrainingConfig {
    double reward = 1.0;  // r~ per completed component
    int episodes = 20000;
    std::vector<int> tiers{1, 2, 3, 4, 5, 6, 7};  // admitted program length per tier
    int tier_episodes = 4000;     // tier advances after this many episodes
    double advance_success = 0.9;  // or once recent task success reaches this
    int success_window = 200;
    double discount = 0.95;
    double entropy = 0.01;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    int batch_episodes = 4;
    int log_every = 100;
    int horizon = 0;  // per episode; 0 uses the world's
    int crop_radius = 2;
    ModuleShape shape;
    std::uint64_t seed = 1;

    // Throws Error("invalid-config").
    void validate() const;
};

struct CurvePoint {
    int episode = 0;
    int tier = 0;
    int admitted = 0;
    double mean_reward = 0.0;
    std::vector<double> module_success;  // per roster entry; -1 when unused
};

// One learned module per roster entry of the domain.
class LearnedOptions final : public OptionPolicy {
public:
    LearnedOptions(Domain d, int rows, int cols, const TrainingConfig& cfg);

    std::optional<Action> act(const Prototype& p, const Observation& o) override;

    const PolicyFeaturizer& featurizer() const { return f_; }
    ModuleNet& module(const Prototype& p);
    const ModuleNet& module(const Prototype& p) const;
    Rng& rng() { return rng_; }

    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static LearnedOptions load(std::istream& in);
    static LearnedOptions load(const std::string& path);

private:
    LearnedOptions(PolicyFeaturizer f, std::vector<ModuleNet> nets);
    int slot(const Prototype& p) const;

    PolicyFeaturizer f_;
    std::vector<ModuleNet> nets_;
    Rng rng_{1};
};

struct RolloutStep {
    int tau = 0;
    Action action = Action::Up;
    double reward = 0.0;
    bool beta_fired = false;  // the monitor of component tau fired after this action
};

struct Rollout {
    std::vector<RolloutStep> steps;
    int completed = 0;
    bool success = false;  // whole program completed
};

// One training-style episode: the task's program executed with the learned
// options, r~ paid on every monitor fire.
Rollout rollout(const TrainingTask& task, LearnedOptions& options, double reward, int horizon,
                const RecipeTable& recipes = RecipeTable::defaults());

struct TrainingResult {
    std::vector<CurvePoint> curve;
    std::vector<int> admitted_per_episode;  // size of the admitted task set
};

// Actor-critic with subgoal rewards and a program-length curriculum. Throws
// Error("divergence") on non-finite parameters.
TrainingResult train_modules(const std::vector<TrainingTask>& tasks, const TrainingConfig& cfg,
                             LearnedOptions& options, const RecipeTable& recipes = RecipeTable::defaults());

// Fraction of tasks whose first component's module fires within `horizon`.
double module_success(const std::vector<TrainingTask>& tasks, LearnedOptions& options, int horizon,
                      const RecipeTable& recipes = RecipeTable::defaults());

void write_policy_curve(std::ostream& out, const std::vector<CurvePoint>& curve, Domain d);

}  // namespace mpps
