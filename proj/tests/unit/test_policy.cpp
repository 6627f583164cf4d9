#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mpps/mapgen.hpp"
#include "mpps/policy.hpp"

using namespace mpps;

namespace {

const RecipeTable kRecipes = RecipeTable::defaults();

// Observations from a few steps of random play on generated maps.
std::vector<Observation> sample_observations(const EnvConfig& cfg, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Observation> out;
    const int actions = cfg.domain == Domain::Craft ? kNumCraftActions : kNumBoxActions;
    for (int i = 0; i < count; ++i) {
        ConcreteWorld w = generate_map(cfg, seed + i);
        reset(w);
        const int steps = std::uniform_int_distribution<int>(0, 8)(rng);
        for (int s = 0; s < steps; ++s) {
            apply(w, static_cast<Action>(std::uniform_int_distribution<int>(0, actions - 1)(rng)), kRecipes);
        }
        out.push_back(observe(w));
    }
    return out;
}

void expect_gradient_matches(ModuleNet& net, const std::vector<std::vector<double>>& xs, const std::vector<int>& acts,
                             const std::vector<double>& adv, const std::vector<double>& targets) {
    constexpr double beta = 0.01;
    std::vector<double> ga, gc;
    net.actor_loss(xs, acts, adv, beta, &ga);
    net.critic_loss(xs, targets, &gc);
    auto check = [&](std::vector<double>& theta, const std::vector<double>& g, auto loss, const char* what) {
        double worst = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double keep = theta[i];
            const double h = 1e-5 * std::max(1.0, std::abs(keep));
            theta[i] = keep + h;
            const double up = loss();
            theta[i] = keep - h;
            const double down = loss();
            theta[i] = keep;
            const double num = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(g[i] - num) / std::max({std::abs(g[i]), std::abs(num), 1e-2}));
        }
        EXPECT_LT(worst, 1e-4) << what;
    };
    check(net.actor(), ga, [&] { return net.actor_loss(xs, acts, adv, beta); }, "actor");
    check(net.critic(), gc, [&] { return net.critic_loss(xs, targets); }, "critic");
}

std::vector<TrainingTask> length_one(const std::vector<TrainingTask>& tasks) {
    std::vector<TrainingTask> out;
    for (const auto& t : tasks) {
        if (t.program.size() == 1) out.push_back(t);
    }
    return out;
}

}  // namespace

TEST(PolicyNet, CraftGradientMatchesFiniteDifferences) {
    const PolicyFeaturizer f(Domain::Craft, 8, 8, 2);
    ModuleNet net(f, {16, 8, 0}, 3);
    Rng rng(5);
    std::vector<std::vector<double>> xs;
    std::vector<int> acts;
    std::vector<double> adv, targets;
    for (const auto& o : sample_observations(EnvConfig::craft_default(), 6, 40)) {
        xs.push_back(f.features(o));
        acts.push_back(std::uniform_int_distribution<int>(0, kNumCraftActions - 1)(rng));
        adv.push_back(std::normal_distribution<double>(0.0, 1.0)(rng));
        targets.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    }
    expect_gradient_matches(net, xs, acts, adv, targets);
}

TEST(PolicyNet, BoxConvGradientMatchesFiniteDifferences) {
    const auto cfg = EnvConfig::box_default();
    const PolicyFeaturizer f(Domain::Box, 12, 12);
    ModuleNet net(f, {8, 4, 3}, 4);
    Rng rng(6);
    std::vector<std::vector<double>> xs;
    std::vector<int> acts;
    std::vector<double> adv, targets;
    for (const auto& o : sample_observations(cfg, 3, 70)) {
        xs.push_back(f.features(o));
        acts.push_back(std::uniform_int_distribution<int>(0, kNumBoxActions - 1)(rng));
        adv.push_back(std::normal_distribution<double>(0.0, 1.0)(rng));
        targets.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    }
    expect_gradient_matches(net, xs, acts, adv, targets);
}

TEST(PolicyNet, PolicyIsADistribution) {
    const PolicyFeaturizer f(Domain::Craft, 8, 8);
    const ModuleNet net(f, {}, 1);
    for (const auto& o : sample_observations(EnvConfig::craft_default(), 5, 9)) {
        const auto pi = net.policy(f.features(o));
        ASSERT_EQ(pi.size(), 5u);
        double sum = 0.0;
        for (double p : pi) {
            EXPECT_GT(p, 0.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(PolicyFeatures, CropIsEgocentric) {
    ConcreteWorld w = motivating_fixture();
    w.view_radius = 8;
    reset(w);
    const PolicyFeaturizer f(Domain::Craft, 8, 8, 2);
    const Observation o = observe(w);
    const auto x = f.features(o);
    ASSERT_EQ(static_cast<int>(x.size()), f.dim());
    const int plane = 25;
    for (int dr = -2; dr <= 2; ++dr) {
        for (int dc = -2; dc <= 2; ++dc) {
            const Pos p{o.agent.row + dr, o.agent.col + dc};
            double ones = 0.0;
            for (int ch = 0; ch < f.grid_channels(); ++ch) ones += x[ch * plane + (dr + 2) * 5 + dc + 2];
            EXPECT_EQ(ones, 1.0);
            const double unknown = x[(dr + 2) * 5 + dc + 2];
            EXPECT_EQ(unknown, o.in_bounds(p) ? 0.0 : 1.0);
        }
    }
}

TEST(TrainingTasks, ProgramsSolveTheTrueWorld) {
    const auto tasks = make_training_tasks(EnvConfig::craft_default(), 30, 3);
    ASSERT_EQ(tasks.size(), 30u);
    for (const auto& t : tasks) {
        ASSERT_FALSE(t.program.empty());
        EXPECT_LE(t.program.size(), 7u);
        EXPECT_TRUE(program_solves(t.program, abstract_full(t.world), t.goal, kRecipes));
    }
    const auto box = make_training_tasks(EnvConfig::box_default(), 8, 3);
    ASSERT_EQ(box.size(), 8u);
    for (const auto& t : box) EXPECT_TRUE(program_solves(t.program, abstract_full(t.world), t.goal, kRecipes));
}

TEST(Rollout, RewardExactlyWhenTheComponentCompletes) {
    TrainingConfig cfg;
    cfg.crop_radius = 2;
    cfg.shape.hidden = 16;
    LearnedOptions opts(Domain::Craft, 8, 8, cfg);
    const auto tasks = length_one(make_training_tasks(EnvConfig::craft_default(), 150, 21));
    ASSERT_GE(tasks.size(), 20u);
    int fired = 0;
    for (const auto& task : tasks) {
        ASSERT_EQ(task.program[0].kind, Prototype::Kind::GetResource);
        const int r = task.program[0].arg;
        const Rollout roll = rollout(task, opts, 0.5, 100);
        // Independent replay: the first step after which r is held and
        // nothing else is.
        ConcreteWorld w = task.world;
        reset(w);
        int expected = -1;
        for (std::size_t i = 0; i < roll.steps.size(); ++i) {
            apply(w, roll.steps[i].action, kRecipes);
            bool only_r = w.inventory[r] == 1;
            for (int o = 0; o < kNumObjects; ++o) only_r = only_r && (o == r || w.inventory[o] == 0);
            if (only_r && expected < 0) expected = static_cast<int>(i);
        }
        double total = 0.0;
        for (std::size_t i = 0; i < roll.steps.size(); ++i) {
            total += roll.steps[i].reward;
            EXPECT_EQ(roll.steps[i].beta_fired, static_cast<int>(i) == expected);
            EXPECT_EQ(roll.steps[i].reward, static_cast<int>(i) == expected ? 0.5 : 0.0);
        }
        EXPECT_EQ(roll.success, expected >= 0);
        EXPECT_EQ(total, roll.completed * 0.5);
        if (expected >= 0) {
            EXPECT_EQ(expected + 1, static_cast<int>(roll.steps.size()));
        }
        fired += expected >= 0;
    }
    EXPECT_GT(fired, 0);
}

TEST(Training, CurriculumAdmitsLongerProgramsInOrder) {
    const auto tasks = make_training_tasks(EnvConfig::craft_default(), 60, 8);
    TrainingConfig cfg;
    cfg.crop_radius = 2;
    cfg.shape.hidden = 16;
    cfg.episodes = 60;
    cfg.tiers = {1, 3, 7};
    cfg.tier_episodes = 20;
    cfg.log_every = 10;
    LearnedOptions opts(Domain::Craft, 8, 8, cfg);
    const auto res = train_modules(tasks, cfg, opts);
    ASSERT_EQ(res.admitted_per_episode.size(), 60u);
    auto count = [&](int len) {
        return static_cast<int>(std::count_if(tasks.begin(), tasks.end(),
                                              [&](const auto& t) { return static_cast<int>(t.program.size()) <= len; }));
    };
    EXPECT_EQ(res.admitted_per_episode.front(), count(1));
    EXPECT_EQ(res.admitted_per_episode[20], count(3));
    EXPECT_EQ(res.admitted_per_episode.back(), count(7));
    EXPECT_TRUE(std::is_sorted(res.admitted_per_episode.begin(), res.admitted_per_episode.end()));
    EXPECT_EQ(res.curve.size(), 6u);
    std::ostringstream csv;
    write_policy_curve(csv, res.curve, Domain::Craft);
    EXPECT_EQ(csv.str().substr(0, 40), "episode,tier,admitted,mean_reward,get-wo");
}

TEST(LearnedOptions, CheckpointRoundTrip) {
    TrainingConfig cfg;
    cfg.crop_radius = 3;
    cfg.shape.hidden = 12;
    for (Domain d : {Domain::Craft, Domain::Box}) {
        if (d == Domain::Box) cfg.shape.conv_kernels = 2;
        const auto env = d == Domain::Craft ? EnvConfig::craft_default() : EnvConfig::box_default();
        const int side = d == Domain::Craft ? 8 : 12;
        LearnedOptions a(d, side, side, cfg);
        std::stringstream s;
        a.save(s);
        LearnedOptions b = LearnedOptions::load(s);
        const Observation o = sample_observations(env, 1, 2)[0];
        for (const auto& p : roster(d)) {
            EXPECT_EQ(a.module(p).actor(), b.module(p).actor());
            EXPECT_EQ(a.module(p).critic(), b.module(p).critic());
            EXPECT_EQ(a.module(p).policy(a.featurizer().features(o)), b.module(p).policy(b.featurizer().features(o)));
        }
    }
    std::stringstream bad("mpps-options 1\ndomain craft\ngrid 8 8\ncrop 3\nmodules 10\nmodule 12 32 0\nactor 5\n1 2");
    EXPECT_THROW(LearnedOptions::load(bad), Error);
}

TEST(LearnedOptions, DropInForTheExecutor) {
    TrainingConfig cfg;
    cfg.crop_radius = 2;
    cfg.shape.hidden = 8;
    LearnedOptions opts(Domain::Craft, 8, 8, cfg);
    ConcreteWorld w = motivating_fixture();
    reset(w);
    const auto run = run_program(w, {Prototype::get(Object::Wood), Prototype::get(Object::Iron)}, opts, 15, kRecipes);
    EXPECT_LE(run.steps, 15);
    EXPECT_FALSE(run.stuck);
    for (const auto& c : run.completions) EXPECT_TRUE(check_transition(c.proto, c.full_before, c.full_after, kRecipes));
}

TEST(TrainingConfig, Validation) {
    TrainingConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.shape.hidden, 128);
    EXPECT_EQ(c.shape.critic_hidden, 32);
    EXPECT_EQ(c.discount, 0.95);
    EXPECT_EQ(c.entropy, 0.01);
    c.tiers = {3, 1};
    EXPECT_THROW(c.validate(), Error);
    c = TrainingConfig{};
    c.discount = 0.0;
    EXPECT_THROW(c.validate(), Error);
    LearnedOptions opts(Domain::Craft, 8, 8, TrainingConfig{});
    EXPECT_THROW(train_modules({}, TrainingConfig{}, opts), Error);
}

TEST(Training, GetResourceGeneralizesToHeldOutTasks) {
    const auto env = EnvConfig::craft_default();
    const auto train = make_training_tasks(env, 3000, 11, 1);
    const auto held = make_training_tasks(env, 300, 99, 1);
    ASSERT_EQ(held.size(), 300u);
    TrainingConfig cfg;
    cfg.episodes = 100000;
    cfg.log_every = 10000;
    LearnedOptions opts(Domain::Craft, 8, 8, cfg);
    const double before = module_success(held, opts, 100);
    train_modules(train, cfg, opts);
    const double after = module_success(held, opts, 100);
    EXPECT_GE(after, 0.8) << "before training " << before;
}
