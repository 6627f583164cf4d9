#include <benchmark/benchmark.h>

#include "mpps/executor.hpp"
#include "mpps/mapgen.hpp"
#include "mpps/policy.hpp"
#include "mpps/synthesizer.hpp"

using namespace mpps;

namespace {

const RecipeTable kRecipes = RecipeTable::defaults();

SynthesisProblem sampled_problem(int m, std::uint64_t seed) {
    const auto env = EnvConfig::craft_default();
    ExactSampler sampler(env);
    sampler.set_task(GoalSpec::get(Object::Gem), 7, kRecipes);
    auto w = generate_map(env, seed);
    SynthesisProblem p;
    p.goal = GoalSpec::get(Object::Gem);
    p.worlds = sampler.sample(reset(w), m, seed).worlds;
    return p;
}

void BM_SynthesizeFixture(benchmark::State& st) {
    SynthesisProblem p;
    p.goal = GoalSpec::get(Object::Gem);
    p.worlds = {abstract_full(motivating_fixture())};
    for (auto _ : st) benchmark::DoNotOptimize(synthesize(p));
}
BENCHMARK(BM_SynthesizeFixture)->Unit(benchmark::kMillisecond);

// One replan's solver call over m sampled worlds.
void BM_SynthesizeSampled(benchmark::State& st) {
    const auto p = sampled_problem(static_cast<int>(st.range(0)), 8001);
    for (auto _ : st) {
        try {
            benchmark::DoNotOptimize(synthesize(p));
        } catch (const Error&) {
        }
    }
}
BENCHMARK(BM_SynthesizeSampled)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ExactPosteriorSample(benchmark::State& st) {
    const auto env = EnvConfig::craft_default();
    const ExactPosterior post(env);
    auto w = generate_map(env, 31);
    const auto o = reset(w);
    std::uint64_t seed = 0;
    for (auto _ : st) benchmark::DoNotOptimize(post.sample(o, static_cast<int>(st.range(0)), ++seed));
}
BENCHMARK(BM_ExactPosteriorSample)->Arg(1)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_PolicyForward(benchmark::State& st) {
    const auto d = st.range(0) ? Domain::Box : Domain::Craft;
    const auto env = d == Domain::Box ? EnvConfig::box_default() : EnvConfig::craft_default();
    auto w = d == Domain::Box ? generate_box(env, 5).world : generate_map(env, 5);
    const auto o = reset(w);
    const PolicyFeaturizer f(d, w.rows, w.cols);
    ModuleShape shape;
    if (d == Domain::Box) shape.conv_kernels = 32;
    const ModuleNet net(f, shape, 1);
    const auto x = f.features(o);
    for (auto _ : st) benchmark::DoNotOptimize(net.policy(x));
}
BENCHMARK(BM_PolicyForward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Episode(benchmark::State& st) {
    const auto env = EnvConfig::craft_default();
    ExactSampler sampler(env);
    ScriptedOptions opts;
    std::uint64_t seed = 100;
    for (auto _ : st) {
        auto w = generate_map(env, ++seed);
        auto cfg = AgentConfig::defaults(Domain::Craft);
        cfg.seed = seed;
        benchmark::DoNotOptimize(mpps_episode(w, GoalSpec::get(Object::Gold), cfg, &sampler, opts));
    }
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
