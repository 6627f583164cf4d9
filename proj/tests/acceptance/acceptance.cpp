// Acceptance runner: one PASS/FAIL line per criterion. Exit status is 0 when
// every criterion passes, except those named with --known-failures, which
// are still run and reported.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "enum_posterior.hpp"
#include "mpps/cvae.hpp"
#include "mpps/harness.hpp"

using namespace mpps;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const RecipeTable kRecipes = RecipeTable::defaults();

// Longest replan seen by criteria 3 and 8.
double g_max_replan = 0.0;

// ---------------------------------------------------------------- 1

AbstractState random_craft_state(std::mt19937& rng) {
    std::uniform_int_distribution<int> zones(1, 3), count(0, 4), bit(0, 1);
    AbstractState s = AbstractState::with_zones(zones(rng));
    s.z = std::uniform_int_distribution<int>(0, s.zones - 1)(rng);
    const Boundary kinds[] = {Boundary::Water, Boundary::Stone, Boundary::NotAdjacent};
    for (int i = 0; i < s.zones; ++i) {
        for (int j = i + 1; j < s.zones; ++j) s.set_boundary(i, j, kinds[std::uniform_int_distribution<int>(0, 2)(rng)]);
        for (int r = 0; r < kNumResources; ++r) s.rho[i][r] = count(rng) * bit(rng);
        s.omega[i] = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, 7)(rng));
    }
    for (int o = 0; o < kNumObjects; ++o) s.iota[o] = bit(rng) * bit(rng) * count(rng);
    s.validate();
    return s;
}

BoxAbstractState random_box_state(std::mt19937& rng) {
    std::uniform_int_distribution<int> color(0, kNumColors - 1);
    BoxAbstractState s;
    const int boxes = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int b = 0; b < boxes; ++b) {
        const int k = color(rng), l = color(rng);
        if (k != l) s.boxes[k][l] = std::min(s.boxes[k][l] + 1, kCountCap);
    }
    if (std::uniform_int_distribution<int>(0, 1)(rng)) s.loose = static_cast<std::uint16_t>(1u << color(rng));
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) s.held = static_cast<std::uint16_t>(1u << color(rng));
    s.validate();
    return s;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    std::mt19937 rng(2024);
    const auto craft = EnvConfig::craft_default();
    const auto box = EnvConfig::box_default();
    const Object goals[] = {Object::Gold, Object::Gem, Object::Plank, Object::Axe, Object::Bridge,
                            Object::Cloth, Object::Bed, Object::Ladder, Object::Stick};
    int problems = 0, comparisons = 0, mismatches = 0, nontrivial = 0;
    for (int trial = 0; trial < 240; ++trial) {
        SynthesisProblem p;
        p.k_max = 3;
        const int m = 1 + trial % 3;
        const int kind = trial % 4;
        if (kind < 2) {
            p.goal = GoalSpec::get(goals[trial % 9]);
            for (int w = 0; w < m; ++w) {
                p.worlds.push_back(kind == 0 ? AbstractWorld(abstract_full(generate_map(craft, 90000 + trial * 7 + w)))
                                             : AbstractWorld(random_craft_state(rng)));
            }
        } else {
            BoxAbstractState first;
            int goal_color = 0;
            if (kind == 2) {
                const BoxMap bm = generate_box(box, 50000 + trial, 1 + trial % 3, trial % 3);
                goal_color = bm.goal_color;
                first = std::get<BoxAbstractState>(abstract_full(bm.world));
            } else {
                first = random_box_state(rng);
                goal_color = std::uniform_int_distribution<int>(0, kNumColors - 1)(rng);
            }
            p.goal = GoalSpec::key(goal_color);
            p.worlds.push_back(first);
            for (int w = 1; w < m; ++w) {
                if (kind == 2) {
                    p.worlds.push_back(abstract_full(generate_box(box, 60000 + trial * 7 + w, 1 + trial % 3, trial % 3).world));
                } else {
                    p.worlds.push_back(random_box_state(rng));
                }
            }
        }
        ++problems;
        for (int k = 1; k <= 3; ++k) {
            const auto r = solve_length(p, k);
            const auto o = enumerate_oracle(p, k);
            ++comparisons;
            if (r.solved_count != o.solved_count || r.objective != o.objective) {
                ++mismatches;
                if (std::getenv("MPPS_ACCEPT_VERBOSE")) std::fprintf(stderr, "mismatch trial %d kind %d m %d k %d: solver %d/%g oracle %d/%g\n", trial, kind, m, k, r.solved_count, r.objective, o.solved_count, o.objective);
            }
            if (r.solved_count > 0) ++nontrivial;
        }
    }
    const double secs = since(t0);
    return {mismatches == 0 && problems >= 200 && secs < 600,
            fmt("%d problems, %d (problem,k) optima compared, %d mismatches, %d with solutions, %.1f s", problems,
                comparisons, mismatches, nontrivial, secs)};
}

// ---------------------------------------------------------------- 2

Outcome criterion2() {
    SynthesisProblem p;
    p.goal = GoalSpec::get(Object::Gem);
    p.worlds = {abstract_full(motivating_fixture())};
    p.k_max = 7;
    p.theta = 1.0;
    const auto r = synthesize(p);
    const bool certified = certify(r.program, p) == std::vector<bool>{true};
    const bool achieves = program_solves(r.program, p.worlds[0], p.goal, kRecipes);
    bool shorter = false;
    for (int k = 1; k <= 5; ++k) shorter = shorter || enumerate_oracle(p, k).solved_count > 0;
    return {r.program.size() == 6 && certified && achieves && !shorter,
            fmt("program [%s] length %zu, certified %d, no program of length <= 5: %d", to_string(r.program).c_str(),
                r.program.size(), certified, !shorter)};
}

// ---------------------------------------------------------------- 3

Outcome criterion3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    const auto craft = EnvConfig::craft_default();
    const auto box = EnvConfig::box_default();
    ExactSampler craft_sampler(craft), box_sampler(box);
    int episodes = 0, fires = 0, violations = 0, successes = 0;
    for (; episodes < 1000; ++episodes) {
        const bool is_box = episodes % 3 == 2;
        const std::uint64_t seed = rng();
        ConcreteWorld w;
        GoalSpec goal;
        if (is_box) {
            const BoxMap m = generate_box(box, seed, 1 + static_cast<int>(rng() % 4));
            w = m.world;
            goal = GoalSpec::key(m.goal_color);
        } else {
            w = generate_map(craft, seed);
            goal = GoalSpec::get(static_cast<Object>(rng() % kNumObjects));
        }
        auto cfg = AgentConfig::defaults(w.domain);
        cfg.seed = seed;
        cfg.early_replan = rng() % 4 != 0;
        ScriptedOptions opts;
        const auto r = mpps_episode(w, goal, cfg, is_box ? &box_sampler : &craft_sampler, opts);
        successes += r.success;
        for (const auto& rp : r.replans) g_max_replan = std::max(g_max_replan, rp.seconds);
        for (const auto& c : r.completions) {
            ++fires;
            if (!check_transition(c.proto, c.view_before, c.view_after, kRecipes)) ++violations;
            if (!check_transition(c.proto, c.full_before, c.full_after, kRecipes)) ++violations;
        }
    }
    return {violations == 0 && fires > 0,
            fmt("%d episodes (%d successful), %d monitor fires, %d violations over view and full abstractions, %.1f s",
                episodes, successes, fires, violations, since(t0))};
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
    ExperimentSpec c;
    c.env.view_radius = 12;
    c.per_task = 30;
    c.scenario_seed = 404;
    const auto rc = run_experiment(c);
    ExperimentSpec b;
    b.env = EnvConfig::box_default();
    b.env.view_radius = 12;
    b.agent = AgentConfig::defaults(Domain::Box);
    b.per_task = 25;
    b.scenario_seed = 404;
    const auto rb = run_experiment(b);
    const double cr = rc.report.avg_reward, br = rb.report.avg_reward;
    return {cr >= 0.99 && br >= 0.95, fmt("craft %d/%d solved (%.3f >= 0.99), box lengths 1-4 %d/%d (%.3f >= 0.95)",
                                          rc.report.successes, rc.report.episodes, cr, rb.report.successes,
                                          rb.report.episodes, br)};
}

// ---------------------------------------------------------------- 5

Outcome criterion5() {
    const auto t0 = Clock::now();
    // Gradient check on a micro-dataset.
    const auto micro = collect_dataset(EnvConfig::craft_default(), 16, 5);
    CvaeModel small(Domain::Craft, 24, 4, 0.01, 3);
    const CvaeBatch batch = small.make_batch(micro);
    std::vector<double> eps(static_cast<std::size_t>(4) * batch.n);
    Rng er(9);
    std::normal_distribution<double> nd;
    for (auto& e : eps) e = nd(er);
    std::vector<double> grad;
    small.elbo(batch, eps, &grad);
    double worst = 0.0;
    auto& th = small.params();
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double keep = th[i], h = 1e-5 * std::max(1.0, std::abs(keep));
        th[i] = keep + h;
        const double up = small.elbo(batch, eps);
        th[i] = keep - h;
        const double down = small.elbo(batch, eps);
        th[i] = keep;
        const double num = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(grad[i] - num) / std::max({std::abs(grad[i]), std::abs(num), 1e-2}));
    }
    // Held-out ELBO on the 10,000-pair craft dataset.
    const auto data = collect_dataset(EnvConfig::craft_default(), 10000, 11);
    CvaeConfig cfg;
    cfg.seed = 11;
    std::vector<CvaeEpoch> curve;
    const CvaeModel model = CvaeModel::train(data, cfg, &curve);
    const double before = curve.front().elbo_heldout, after = curve.back().elbo_heldout;
    // Projected samples.
    int samples = 0, invalid = 0;
    for (std::size_t i = 0; i < data.size(); i += 50) {
        for (const auto& s : model.sample(data[i].o, 3, i).worlds) {
            ++samples;
            try {
                std::visit([](const auto& st) { st.validate(); }, s);
            } catch (const Error&) {
                ++invalid;
            }
        }
    }
    return {worst < 1e-4 && after >= before && invalid == 0 && samples > 0,
            fmt("max gradient rel. error %.2e on %zu params, held-out ELBO %.3f -> %.3f, %d/%d projected samples "
                "invalid, %.1f s",
                worst, th.size(), before, after, invalid, samples, since(t0))};
}

// ---------------------------------------------------------------- 6

Outcome criterion6() {
    const auto cfg = oracle::reduced_craft_config();
    const ExactPosterior post(cfg, 10'000'000);
    double worst = 0.0;
    int checks = 0;
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const Observation o = oracle::reduced_observation(seed * 100);
        const auto exact = oracle::enumerate_events(o);
        Rng rng(seed);
        const auto maps = post.sample_maps(o, 1000, rng);
        std::array<double, oracle::kNumEvents> freq{};
        for (const auto& m : maps) {
            const auto ev = oracle::map_events(m, o);
            for (int e = 0; e < oracle::kNumEvents; ++e) freq[e] += ev[e] / 1000.0;
        }
        for (int e = 0; e < oracle::kNumEvents; ++e, ++checks) worst = std::max(worst, std::abs(freq[e] - exact[e]));
    }
    return {worst <= 0.03, fmt("%d (observation, event) marginals over 1000 samples each, max |sampled - "
                               "enumerated| = %.4f (<= 0.03)",
                               checks, worst)};
}

// ---------------------------------------------------------------- 7

Outcome criterion7() {
    ExperimentSpec a;
    a.per_task = 50;
    a.tasks = {"gold", "gem"};
    a.scenario_seed = 707;
    ExperimentSpec b = a;
    b.agent.planner = Planner::Optimistic;
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    const auto rows = pair_runs(ra, rb);
    const double diff = ra.report.avg_reward - rb.report.avg_reward;
    return {diff >= 0.10 && ra.report.avg_finish_step < rb.report.avg_finish_step,
            fmt("%zu paired scenarios: MPPS %.2f vs optimistic %.2f (diff %+.2f, need >= +0.10); finish steps "
                "%.1f vs %.1f (need lower)",
                rows.size(), ra.report.avg_reward, rb.report.avg_reward, diff, ra.report.avg_finish_step,
                rb.report.avg_finish_step)};
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
    // A single replan from a fresh view of each motivating and generated map.
    const auto env = EnvConfig::craft_default();
    ExactSampler sampler(env);
    double worst_single = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ConcreteWorld w = seed == 0 ? motivating_fixture() : generate_map(env, 8000 + seed);
        const Observation o = reset(w);
        sampler.set_task(GoalSpec::get(Object::Gem), 7, kRecipes);
        const auto t0 = Clock::now();
        SynthesisProblem p;
        p.goal = GoalSpec::get(Object::Gem);
        p.worlds = sampler.sample(o, 3, seed).worlds;
        try {
            synthesize(p);
        } catch (const Error& e) {
            if (e.code() != "no-program") throw;
        }
        worst_single = std::max(worst_single, since(t0));
    }
    const auto t0 = Clock::now();
    ExperimentSpec c;
    c.per_task = 10;
    c.scenario_seed = 808;
    const auto rc = run_experiment(c);
    ExperimentSpec b;
    b.env = EnvConfig::box_default();
    b.agent = AgentConfig::defaults(Domain::Box);
    b.per_task = 10;
    b.scenario_seed = 808;
    const auto rb = run_experiment(b);
    const double full = since(t0);
    g_max_replan = std::max({g_max_replan, rc.report.max_replan_seconds, rb.report.max_replan_seconds});
    const double worst = std::max(worst_single, g_max_replan);
    return {worst < 5.0 && full < 1800.0,
            fmt("slowest replan (m=3, k_max=7) %.3f s (< 5 s); 10-per-task evaluation of %d craft + %d box episodes "
                "in %.1f s (< 1800 s)",
                worst, rc.report.episodes, rb.report.episodes, full)};
}

// ---------------------------------------------------------------- 9

Outcome criterion9() {
    const fs::path dir = fs::temp_directory_path() / "mpps-acceptance-repro";
    fs::remove_all(dir);
    ExperimentSpec s;
    s.per_task = 3;
    s.scenario_seed = 909;
    s.output_dir = (dir / "first").string();
    const auto first = run_experiment(s);
    write_outputs(s, first);
    ExperimentSpec again = ExperimentSpec::load((dir / "first" / "manifest.json").string());
    again.output_dir = (dir / "second").string();
    again.workers = 2;
    const auto second = run_experiment(again);
    const bool same = first.report.to_json(false).dump() == second.report.to_json(false).dump();
    ExperimentSpec box;
    box.env = EnvConfig::box_default();
    box.agent = AgentConfig::defaults(Domain::Box);
    box.per_task = 3;
    const bool box_same = run_experiment(box).report.digest() == run_experiment(box).report.digest();
    fs::remove_all(dir);
    return {same && box_same, fmt("manifest re-run digest %s vs %s, box re-run identical: %d",
                                  hex(first.report.digest()).c_str(), hex(second.report.digest()).c_str(), box_same)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only, known;
    app.add_option("--only", only, "criteria to run (default all)");
    app.add_option("--known-failures", known, "criteria whose failure does not fail the run");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"solver-oracle equivalence", criterion1},
        {"motivating example", criterion2},
        {"abstraction/option soundness", criterion3},
        {"end-to-end soundness, full observation", criterion4},
        {"CVAE correctness", criterion5},
        {"exact-posterior calibration", criterion6},
        {"ablation direction vs optimistic", criterion7},
        {"performance envelope", criterion8},
        {"reproducibility", criterion9},
    };
    const std::set<int> allowed(known.begin(), known.end());
    int failed = 0;
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
        if (!only.empty() && std::find(only.begin(), only.end(), i) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i - 1].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const bool excused = !o.pass && allowed.count(i);
        if (!o.pass && !excused) ++failed;
        std::printf("criterion %d (%s): %s  %s\n", i, criteria[i - 1].first,
                    o.pass ? "PASS" : (excused ? "FAIL (known failure)" : "FAIL"), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
