// mpps command-line tool.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mpps/cvae.hpp"
#include "mpps/harness.hpp"
#include "mpps/io.hpp"
#include "mpps/policy.hpp"

using namespace mpps;
namespace fs = std::filesystem;

namespace {

struct RunFlags {
    std::string config;
    std::string domain;
    int per_task = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> tasks;
    std::string hallucinator, executor, planner, cvae, options, out;
    int workers = 0, m = 0, n = 0;
    bool save_replays = false;
    bool strict = false;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
    app->add_option("-c,--config", f.config, "experiment JSON or a manifest.json to re-run");
    app->add_option("--domain", f.domain, "craft | box")->check(CLI::IsMember({"craft", "box"}));
    app->add_option("--per-task", f.per_task, "scenarios per task");
    app->add_option("--seed", f.seed, "scenario seed");
    app->add_option("--tasks", f.tasks, "task names (craft objects or length-<L>)");
    app->add_option("--hallucinator", f.hallucinator, "exact | cvae")->check(CLI::IsMember({"exact", "cvae"}));
    app->add_option("--executor", f.executor, "scripted | learned")->check(CLI::IsMember({"scripted", "learned"}));
    app->add_option("--planner", f.planner, "mpps | optimistic")->check(CLI::IsMember({"mpps", "optimistic"}));
    app->add_option("--cvae", f.cvae, "CVAE checkpoint");
    app->add_option("--options", f.options, "learned options checkpoint");
    app->add_option("-o,--out", f.out, "output directory");
    app->add_option("--workers", f.workers, "parallel episodes");
    app->add_option("-m", f.m, "sampled worlds per replan");
    app->add_option("-n", f.n, "replan interval N");
    app->add_flag("--save-replays", f.save_replays, "write replays.jsonl");
    app->add_flag("--strict-replan", f.strict, "replan only every N steps");
}

ExperimentSpec build_spec(const RunFlags& f) {
    ExperimentSpec s;
    if (!f.config.empty()) {
        s = ExperimentSpec::load(f.config);
    } else if (!f.domain.empty()) {
        s = ExperimentSpec::from_json({{"domain", f.domain}});
    }
    nlohmann::json j = s.to_json();
    if (!f.domain.empty() && f.domain != std::string(name_of(s.env.domain))) {
        throw Error("invalid-config", "--domain conflicts with the config file");
    }
    if (f.per_task) j["scenarios"]["per_task"] = f.per_task;
    if (f.seed) j["scenarios"]["seed"] = f.seed;
    if (!f.tasks.empty()) j["scenarios"]["tasks"] = f.tasks;
    if (!f.hallucinator.empty()) j["agent"]["hallucinator"] = f.hallucinator;
    if (!f.executor.empty()) j["agent"]["executor"] = f.executor;
    if (!f.planner.empty()) j["agent"]["planner"] = f.planner;
    if (f.m) j["agent"]["m"] = f.m;
    if (f.n) j["agent"]["n"] = f.n;
    if (f.strict) j["agent"]["early_replan"] = false;
    if (!f.cvae.empty()) j["backends"]["cvae_checkpoint"] = f.cvae;
    if (!f.options.empty()) j["backends"]["options_checkpoint"] = f.options;
    if (!f.out.empty()) j["output_dir"] = f.out;
    if (f.workers) j["workers"] = f.workers;
    if (f.save_replays) j["save_replays"] = true;
    return ExperimentSpec::from_json(j);
}

void print_report(const MetricsReport& r) {
    std::cout << std::fixed << std::setprecision(3);
    std::cout << std::left << std::setw(12) << "task" << std::right << std::setw(6) << "n" << std::setw(10)
              << "reward" << std::setw(12) << "finish" << "\n";
    for (const auto& t : r.per_task) {
        std::cout << std::left << std::setw(12) << t.task << std::right << std::setw(6) << t.episodes << std::setw(10)
                  << t.avg_reward << std::setw(12) << t.avg_finish_step << "\n";
    }
    std::cout << std::left << std::setw(12) << "all" << std::right << std::setw(6) << r.episodes << std::setw(10)
              << r.avg_reward << std::setw(12) << r.avg_finish_step << "\n";
    std::cout << "replans " << r.replans << "  mean " << r.mean_replan_seconds << " s  max " << r.max_replan_seconds
              << " s  (failures count as T=" << r.horizon << ")\n";
}

Progress stderr_progress() {
    return [](int done, int total) {
        if (done == total || done % 10 == 0) std::cerr << "\r" << done << "/" << total << std::flush;
        if (done == total) std::cerr << "\n";
    };
}

int cmd_run(const RunFlags& f) {
    const ExperimentSpec spec = build_spec(f);
    const ExperimentRun run = run_experiment(spec, stderr_progress());
    write_outputs(spec, run);
    print_report(run.report);
    std::cout << "metrics digest " << hex(run.report.digest()) << "  -> " << spec.output_dir << "\n";
    const bool ok = run.report.avg_reward >= spec.thresholds.min_success &&
                    run.report.max_replan_seconds <= spec.thresholds.max_replan_seconds;
    if (!ok) std::cout << "thresholds not met\n";
    return ok ? 0 : 2;
}

int cmd_ablate(const RunFlags& f) {
    ExperimentSpec a = build_spec(f);
    a.agent.planner = Planner::Mpps;
    ExperimentSpec b = a;
    b.agent.planner = Planner::Optimistic;
    const fs::path root(a.output_dir);
    a.output_dir = (root / "mpps").string();
    b.output_dir = (root / "optimistic").string();
    const ExperimentRun ra = run_experiment(a, stderr_progress());
    write_outputs(a, ra);
    const ExperimentRun rb = run_experiment(b, stderr_progress());
    write_outputs(b, rb);
    const auto rows = pair_runs(ra, rb);
    std::ofstream csv(root / "paired.csv");
    if (!csv) throw Error("io-error", "cannot write " + (root / "paired.csv").string());
    write_paired_csv(csv, rows);
    int both = 0, only_a = 0, only_b = 0, neither = 0;
    for (const auto& r : rows) {
        both += r.success_a && r.success_b;
        only_a += r.success_a && !r.success_b;
        only_b += !r.success_a && r.success_b;
        neither += !r.success_a && !r.success_b;
    }
    std::cout << std::fixed << std::setprecision(3);
    std::cout << "planner      reward   finish\n";
    std::cout << "mpps         " << ra.report.avg_reward << "    " << ra.report.avg_finish_step << "\n";
    std::cout << "optimistic   " << rb.report.avg_reward << "    " << rb.report.avg_finish_step << "\n";
    std::cout << "paired: both " << both << "  mpps only " << only_a << "  optimistic only " << only_b
              << "  neither " << neither << "  -> " << (root / "paired.csv").string() << "\n";
    return 0;
}

int cmd_train_cvae(const std::string& domain, int pairs, const CvaeConfig& cfg, const std::string& out,
                   const std::string& curve_path, const std::string& dataset_path) {
    const auto d = parse_domain(domain);
    if (!d) throw Error("invalid-config", "unknown domain " + domain);
    const EnvConfig env = *d == Domain::Craft ? EnvConfig::craft_default() : EnvConfig::box_default();
    const auto data = collect_dataset(env, pairs, cfg.seed);
    std::vector<CvaeEpoch> curve;
    const CvaeModel model = CvaeModel::train(data, cfg, &curve);
    model.save(out);
    if (!curve_path.empty()) {
        std::ofstream f(curve_path);
        if (!f) throw Error("io-error", "cannot write " + curve_path);
        write_training_curve(f, curve);
    }
    if (!dataset_path.empty()) {
        std::ofstream f(dataset_path);
        if (!f) throw Error("io-error", "cannot write " + dataset_path);
        const StateCodec codec(*d);
        f << "# mpps-cvae-dataset 1 " << domain << " state_dim " << codec.state_dim() << " obs_dim "
          << codec.obs_dim() << "\n";
        for (const auto& p : data) {
            const auto s = codec.encode_state(p.s);
            const auto o = codec.encode_obs(p.o);
            for (std::size_t i = 0; i < s.size(); ++i) f << (i ? "," : "") << s[i];
            for (double v : o) f << "," << v;
            f << "\n";
        }
    }
    const auto& last = curve.back();
    std::cout << "epochs " << curve.size() - 1 << "  elbo train " << last.elbo_train << "  heldout " << last.elbo_heldout
              << "  -> " << out << "\n";
    return 0;
}

int cmd_train_modules(const std::string& domain, int tasks, int max_length, TrainingConfig cfg, const std::string& out,
                      const std::string& curve_path) {
    const auto d = parse_domain(domain);
    if (!d) throw Error("invalid-config", "unknown domain " + domain);
    const EnvConfig env = *d == Domain::Craft ? EnvConfig::craft_default() : EnvConfig::box_default();
    if (*d == Domain::Box && cfg.shape.conv_kernels == 0) cfg.shape.conv_kernels = 32;
    const auto set = make_training_tasks(env, tasks, cfg.seed, max_length);
    const int side = *d == Domain::Craft ? 8 : 12;
    LearnedOptions opts(*d, side, side, cfg);
    const auto res = train_modules(set, cfg, opts);
    opts.save(out);
    if (!curve_path.empty()) {
        std::ofstream f(curve_path);
        if (!f) throw Error("io-error", "cannot write " + curve_path);
        write_policy_curve(f, res.curve, *d);
    }
    std::cout << "tasks " << set.size() << "  episodes " << cfg.episodes;
    if (!res.curve.empty()) std::cout << "  final mean reward " << res.curve.back().mean_reward;
    std::cout << "  -> " << out << "\n";
    return 0;
}

int cmd_export_wcnf(const std::string& fixture, const std::string& domain, std::uint64_t seed,
                    const std::string& goal_text, int k, int m, const std::string& out) {
    ConcreteWorld w;
    if (!fixture.empty()) {
        w = load_fixture(fixture).world;
    } else {
        const auto d = parse_domain(domain);
        if (!d) throw Error("invalid-config", "unknown domain " + domain);
        w = generate_map(*d == Domain::Craft ? EnvConfig::craft_default() : EnvConfig::box_default(), seed);
    }
    reset(w);
    SynthesisProblem p;
    p.goal = GoalSpec::parse(goal_text);
    if (p.goal.domain != w.domain) throw Error("domain-mismatch", "goal and map domains differ");
    if (m == 0) {
        p.worlds = {abstract_full(w)};
    } else {
        const EnvConfig env = w.domain == Domain::Craft ? EnvConfig::craft_default() : EnvConfig::box_default();
        ExactSampler sampler(env);
        sampler.set_task(p.goal, p.k_max, p.recipes);
        p.worlds = sampler.sample(observe(w), m, seed).worlds;
    }
    p.k_max = std::max(p.k_max, k);
    const GroundedEncoding enc = encode(p, k);
    std::ofstream f(out);
    if (!f) throw Error("io-error", "cannot write " + out);
    enc.wcnf.write(f);
    std::cout << "k " << k << "  worlds " << p.worlds.size() << "  -> " << out << "\n";
    return 0;
}

int cmd_replay(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("io-error", "cannot read " + path);
    int total = 0, bad = 0;
    auto check = [&](const nlohmann::json& j) {
        ++total;
        const ReplayCheck c = verify_replay(j);
        if (!c.ok) {
            ++bad;
            for (const auto& msg : c.failures) std::cout << "episode " << total - 1 << ": " << msg << "\n";
        }
    };
    try {
        if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
            for (std::string line; std::getline(f, line);) {
                if (!line.empty()) check(nlohmann::json::parse(line));
            }
        } else {
            check(nlohmann::json::parse(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse-error", path + ": " + e.what());
    }
    std::cout << total - bad << "/" << total << " replays verified\n";
    return bad == 0 ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    const fs::path root(dir);
    std::ifstream mf(root / "manifest.json");
    std::ifstream ef(root / "episodes.csv");
    if (!mf || !ef) throw Error("io-error", "need manifest.json and episodes.csv in " + dir);
    const nlohmann::json man = nlohmann::json::parse(mf);
    const int horizon = man.at("spec").at("env").at("horizon").get<int>();
    const MetricsReport r = evaluate(read_episodes_csv(ef), horizon);
    print_report(r);
    const std::string recorded = man.value("metrics_digest", "");
    const bool same = recorded == hex(r.digest());
    std::cout << "recomputed digest " << hex(r.digest()) << (same ? " matches" : " DIFFERS from") << " the manifest\n";
    return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model predictive program synthesis experiments"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "evaluate MPPS on a scenario set");
    add_run_flags(run, run_flags);

    RunFlags ab_flags;
    auto* ablate = app.add_subcommand("ablate-optimistic", "paired MPPS vs optimistic-synthesis comparison");
    add_run_flags(ablate, ab_flags);

    std::string tc_domain = "craft", tc_out = "cvae.ckpt", tc_curve, tc_data;
    int tc_pairs = 10000;
    CvaeConfig tc;
    auto* train_cvae = app.add_subcommand("train-cvae", "train the CVAE hallucinator");
    train_cvae->add_option("--domain", tc_domain)->check(CLI::IsMember({"craft", "box"}));
    train_cvae->add_option("--pairs", tc_pairs, "training pairs");
    train_cvae->add_option("--epochs", tc.epochs);
    train_cvae->add_option("--hidden", tc.hidden, "0 picks the domain default");
    train_cvae->add_option("--latent", tc.latent);
    train_cvae->add_option("--lr", tc.lr);
    train_cvae->add_option("--seed", tc.seed);
    train_cvae->add_option("-o,--out", tc_out, "checkpoint path");
    train_cvae->add_option("--curve", tc_curve, "training curve CSV");
    train_cvae->add_option("--dataset", tc_data, "also write the encoded dataset CSV");

    std::string tm_domain = "craft", tm_out = "options.ckpt", tm_curve;
    int tm_tasks = 3000, tm_len = 7;
    TrainingConfig tm;
    auto* train_mod = app.add_subcommand("train-modules", "train learned options with actor-critic");
    train_mod->add_option("--domain", tm_domain)->check(CLI::IsMember({"craft", "box"}));
    train_mod->add_option("--tasks", tm_tasks, "training tasks");
    train_mod->add_option("--max-length", tm_len, "longest program admitted");
    train_mod->add_option("--episodes", tm.episodes);
    train_mod->add_option("--tier-episodes", tm.tier_episodes);
    train_mod->add_option("--actor-lr", tm.actor_lr);
    train_mod->add_option("--critic-lr", tm.critic_lr);
    train_mod->add_option("--seed", tm.seed);
    train_mod->add_option("-o,--out", tm_out, "checkpoint path");
    train_mod->add_option("--curve", tm_curve, "training curve CSV");

    std::string ew_fixture, ew_domain = "craft", ew_goal = "inv(gem) >= 1", ew_out = "problem.wcnf";
    std::uint64_t ew_seed = 1;
    int ew_k = 6, ew_m = 0;
    auto* export_wcnf = app.add_subcommand("export-wcnf", "write a grounded synthesis problem as WCNF");
    export_wcnf->add_option("--fixture", ew_fixture, "map fixture file");
    export_wcnf->add_option("--domain", ew_domain)->check(CLI::IsMember({"craft", "box"}));
    export_wcnf->add_option("--seed", ew_seed, "map seed (without --fixture), sampler seed with -m");
    export_wcnf->add_option("--goal", ew_goal);
    export_wcnf->add_option("-k", ew_k, "program length");
    export_wcnf->add_option("-m", ew_m, "posterior samples of the start view; 0 uses the true map");
    export_wcnf->add_option("-o,--out", ew_out);

    std::string rp_file;
    auto* replay = app.add_subcommand("replay", "re-verify a replay (.json) or replay set (.jsonl)");
    replay->add_option("file", rp_file)->required();

    std::string rep_dir;
    auto* report = app.add_subcommand("report", "recompute metrics from a run directory");
    report->add_option("dir", rep_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        if (*run) return cmd_run(run_flags);
        if (*ablate) return cmd_ablate(ab_flags);
        if (*train_cvae) return cmd_train_cvae(tc_domain, tc_pairs, tc, tc_out, tc_curve, tc_data);
        if (*train_mod) {
            tm.tiers.clear();
            for (int l = 1; l <= tm_len; ++l) tm.tiers.push_back(l);
            return cmd_train_modules(tm_domain, tm_tasks, tm_len, tm, tm_out, tm_curve);
        }
        if (*export_wcnf) return cmd_export_wcnf(ew_fixture, ew_domain, ew_seed, ew_goal, ew_k, ew_m, ew_out);
        if (*replay) return cmd_replay(rp_file);
        if (*report) return cmd_report(rep_dir);
    } catch (const Error& e) {
        std::cerr << nlohmann::json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 1;
}
