#include "mpps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "mpps/policy.hpp"

namespace mpps {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

// ---------------------------------------------------------------- scenarios

namespace {

bool wanted(const std::vector<std::string>& tasks, const std::string& name) {
    return tasks.empty() || std::find(tasks.begin(), tasks.end(), name) != tasks.end();
}

}  // namespace

std::vector<Scenario> make_scenarios(const EnvConfig& env, int per_task, std::uint64_t seed,
                                     const std::vector<std::string>& tasks, int k_max) {
    if (per_task < 1) throw Error("invalid-config", "per_task must be positive");
    std::vector<Scenario> out;
    if (env.domain == Domain::Craft) {
        for (std::string t : tasks) {
            if (!parse_object(t)) throw Error("invalid-config", "unknown craft task " + t);
        }
        const RecipeTable recipes = RecipeTable::defaults();
        for (int o = 0; o < kNumObjects; ++o) {
            const std::string name(name_of(static_cast<Object>(o)));
            if (!wanted(tasks, name)) continue;
            const GoalSpec goal = GoalSpec::get(static_cast<Object>(o));
            int found = 0;
            for (std::uint64_t i = 0; found < per_task; ++i) {
                if (i > 200ull * per_task) throw Error("generation-retry-exhausted", "too few solvable maps for " + name);
                const std::uint64_t s = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(o + 1) * 1000003ull + i;
                const ConcreteWorld w = generate_map(env, s);
                if (!solvable(abstract_full(w), goal, k_max, recipes)) continue;
                out.push_back({name, goal, s, 0});
                ++found;
            }
        }
    } else {
        for (int len = 1; len <= 4; ++len) {
            const std::string name = "length-" + std::to_string(len);
            if (!wanted(tasks, name)) continue;
            for (int i = 0; i < per_task; ++i) {
                const std::uint64_t s = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(len) * 1000003ull + i;
                const BoxMap m = generate_box(env, s, len);
                out.push_back({name, GoalSpec::key(m.goal_color), s, len});
            }
        }
    }
    if (out.empty()) throw Error("invalid-config", "no scenario matches the task filter");
    return out;
}

ConcreteWorld scenario_world(const EnvConfig& env, const Scenario& s) {
    if (env.domain == Domain::Craft) return generate_map(env, s.map_seed);
    return generate_box(env, s.map_seed, s.goal_length).world;
}

// ---------------------------------------------------------------- spec

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j, const std::string& base_dir) {
    ExperimentSpec s;
    auto resolve = [&](const std::string& p) {
        if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
        return (fs::path(base_dir) / p).string();
    };
    try {
        s.name = j.value("name", s.name);
        if (j.contains("env")) {
            s.env = EnvConfig::from_json(j.at("env"));
        } else {
            const auto d = parse_domain(j.value("domain", std::string("craft")));
            if (!d) throw Error("invalid-config", "unknown domain");
            s.env = *d == Domain::Craft ? EnvConfig::craft_default() : EnvConfig::box_default();
        }
        const auto sc = j.value("scenarios", nlohmann::json::object());
        s.per_task = sc.value("per_task", s.per_task);
        s.scenario_seed = sc.value("seed", s.scenario_seed);
        s.tasks = sc.value("tasks", s.tasks);
        s.agent = AgentConfig::from_json(j.value("agent", nlohmann::json::object()), s.env.domain);
        const auto be = j.value("backends", nlohmann::json::object());
        s.cvae_checkpoint = resolve(be.value("cvae_checkpoint", std::string()));
        s.options_checkpoint = resolve(be.value("options_checkpoint", std::string()));
        s.output_dir = j.value("output_dir", s.output_dir);
        s.workers = j.value("workers", s.workers);
        s.save_replays = j.value("save_replays", s.save_replays);
        const auto th = j.value("thresholds", nlohmann::json::object());
        s.thresholds.min_success = th.value("min_success", s.thresholds.min_success);
        s.thresholds.max_replan_seconds = th.value("max_replan_seconds", s.thresholds.max_replan_seconds);
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid-config", std::string("experiment spec: ") + e.what());
    }
    s.validate();
    return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse-error", path + ": " + e.what());
    }
    // A manifest embeds its spec.
    if (j.value("format", "") == "mpps-manifest") j = j.at("spec");
    return from_json(j, fs::path(path).parent_path().string());
}

nlohmann::json ExperimentSpec::to_json() const {
    return {{"format", "mpps-experiment"},
            {"version", 1},
            {"name", name},
            {"env", env.to_json()},
            {"scenarios", {{"per_task", per_task}, {"seed", scenario_seed}, {"tasks", tasks}}},
            {"agent", agent.to_json()},
            {"backends", {{"cvae_checkpoint", cvae_checkpoint}, {"options_checkpoint", options_checkpoint}}},
            {"output_dir", output_dir},
            {"workers", workers},
            {"save_replays", save_replays},
            {"thresholds",
             {{"min_success", thresholds.min_success}, {"max_replan_seconds", thresholds.max_replan_seconds}}}};
}

void ExperimentSpec::validate() const {
    agent.validate();
    if (per_task < 1) throw Error("invalid-config", "per_task must be positive");
    if (workers < 1) throw Error("invalid-config", "workers must be positive");
    if (agent.hallucinator == "cvae" && agent.planner == Planner::Mpps) {
        if (cvae_checkpoint.empty()) throw Error("invalid-config", "cvae hallucinator needs backends.cvae_checkpoint");
        if (!fs::exists(cvae_checkpoint)) throw Error("invalid-config", "missing checkpoint " + cvae_checkpoint);
    }
    if (agent.executor == "learned") {
        if (options_checkpoint.empty()) {
            throw Error("invalid-config", "learned executor needs backends.options_checkpoint");
        }
        if (!fs::exists(options_checkpoint)) throw Error("invalid-config", "missing checkpoint " + options_checkpoint);
    }
}

// ---------------------------------------------------------------- metrics

MetricsReport evaluate(const std::vector<EpisodeRecord>& results, int horizon) {
    if (results.empty()) throw Error("invalid-argument", "no episode results");
    MetricsReport m;
    m.horizon = horizon;
    std::map<std::string, std::size_t> slot;
    std::vector<double> finish;
    double total_finish = 0.0, total_replan = 0.0;
    for (const auto& r : results) {
        const double f = r.success ? r.steps : horizon;
        auto [it, fresh] = slot.try_emplace(r.task, m.per_task.size());
        if (fresh) {
            m.per_task.push_back({r.task, 0, 0, 0.0, 0.0});
            finish.push_back(0.0);
        }
        TaskMetrics& t = m.per_task[it->second];
        ++t.episodes;
        t.successes += r.success;
        finish[it->second] += f;
        ++m.episodes;
        m.successes += r.success;
        total_finish += f;
        for (double s : r.replan_seconds) {
            ++m.replans;
            total_replan += s;
            m.max_replan_seconds = std::max(m.max_replan_seconds, s);
        }
    }
    m.avg_reward = static_cast<double>(m.successes) / m.episodes;
    m.avg_finish_step = total_finish / m.episodes;
    for (std::size_t i = 0; i < m.per_task.size(); ++i) {
        auto& t = m.per_task[i];
        t.avg_reward = static_cast<double>(t.successes) / t.episodes;
        t.avg_finish_step = finish[i] / t.episodes;
    }
    m.mean_replan_seconds = m.replans ? total_replan / m.replans : 0.0;
    return m;
}

nlohmann::json MetricsReport::to_json(bool timing) const {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : per_task) {
        tasks.push_back({{"task", t.task},
                         {"episodes", t.episodes},
                         {"successes", t.successes},
                         {"avg_reward", t.avg_reward},
                         {"avg_finish_step", t.avg_finish_step}});
    }
    nlohmann::json j = {{"episodes", episodes},
                        {"successes", successes},
                        {"horizon", horizon},
                        {"avg_reward", avg_reward},
                        {"avg_finish_step", avg_finish_step},
                        {"failures_count_as_horizon", true},
                        {"per_task", tasks}};
    if (timing) {
        j["timing"] = {{"replans", replans},
                       {"mean_replan_seconds", mean_replan_seconds},
                       {"max_replan_seconds", max_replan_seconds}};
    }
    return j;
}

std::uint64_t MetricsReport::digest() const { return fnv1a(to_json(false).dump()); }

// ---------------------------------------------------------------- running

std::uint64_t episode_seed(std::uint64_t agent_seed, int index) {
    std::uint64_t z = agent_seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(index) + 1;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

ExperimentRun run_experiment(const ExperimentSpec& spec, const Progress& progress) {
    spec.validate();
    ExperimentRun run;
    run.scenarios = make_scenarios(spec.env, spec.per_task, spec.scenario_seed, spec.tasks, spec.agent.k_max);
    const int n = static_cast<int>(run.scenarios.size());
    run.records.resize(n);
    if (spec.save_replays) run.replays.resize(n);

    std::optional<CvaeModel> cvae;
    if (spec.agent.hallucinator == "cvae" && spec.agent.planner == Planner::Mpps) {
        cvae.emplace(CvaeModel::load(spec.cvae_checkpoint));
    }
    std::optional<LearnedOptions> learned;
    if (spec.agent.executor == "learned") learned.emplace(LearnedOptions::load(spec.options_checkpoint));

    std::atomic<int> next{0}, done{0};
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
        while (true) {
            const int i = next++;
            if (i >= n) return;
            try {
                const Scenario& sc = run.scenarios[i];
                AgentConfig cfg = spec.agent;
                cfg.seed = episode_seed(spec.agent.seed, i);
                const ConcreteWorld world = scenario_world(spec.env, sc);
                std::unique_ptr<WorldSampler> sampler;
                if (cfg.planner == Planner::Mpps) {
                    if (cvae) {
                        sampler = std::make_unique<CvaeSampler>(*cvae);
                    } else {
                        sampler = std::make_unique<ExactSampler>(spec.env);
                    }
                }
                EpisodeResult r;
                if (learned) {
                    LearnedOptions opts = *learned;
                    opts.rng().seed(cfg.seed);
                    r = mpps_episode(world, sc.goal, cfg, sampler.get(), opts);
                } else {
                    ScriptedOptions opts;
                    r = mpps_episode(world, sc.goal, cfg, sampler.get(), opts);
                }
                EpisodeRecord& rec = run.records[i];
                rec = {i, sc.task, sc.goal.to_string(), sc.map_seed, cfg.seed, r.success, r.steps, {}};
                for (const auto& rp : r.replans) rec.replan_seconds.push_back(rp.seconds);
                if (spec.save_replays) run.replays[i] = replay_json(world, sc.map_seed, sc.goal, cfg, r);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = n;
                return;
            }
            const int d = ++done;
            if (progress) {
                std::lock_guard lock(mu);
                progress(d, n);
            }
        }
    };
    const int threads = std::min(spec.workers, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    run.report = evaluate(run.records, spec.env.horizon);
    return run;
}

// ---------------------------------------------------------------- outputs

void write_episodes_csv(std::ostream& out, const std::vector<EpisodeRecord>& records) {
    out << "index,task,goal,map_seed,agent_seed,success,steps,replans,replan_seconds\n";
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << r.index << "," << r.task << ",\"" << r.goal << "\"," << r.map_seed << "," << r.agent_seed << ","
            << (r.success ? 1 : 0) << "," << r.steps << "," << r.replan_seconds.size() << ",";
        for (std::size_t i = 0; i < r.replan_seconds.size(); ++i) out << (i ? ";" : "") << r.replan_seconds[i];
        out << "\n";
    }
}

std::vector<EpisodeRecord> read_episodes_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,task,goal,", 0) != 0) {
        throw Error("parse-error", "not an episodes CSV");
    }
    std::vector<EpisodeRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // The goal is quoted; it may hold commas.
        std::vector<std::string> f;
        std::string cur;
        bool quoted = false;
        for (char c : line) {
            if (c == '"') {
                quoted = !quoted;
            } else if (c == ',' && !quoted) {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 9) throw Error("parse-error", "bad episodes row: " + line);
        try {
            EpisodeRecord r;
            r.index = std::stoi(f[0]);
            r.task = f[1];
            r.goal = f[2];
            r.map_seed = std::stoull(f[3]);
            r.agent_seed = std::stoull(f[4]);
            r.success = f[5] == "1";
            r.steps = std::stoi(f[6]);
            std::istringstream secs(f[8]);
            for (std::string s; std::getline(secs, s, ';');) r.replan_seconds.push_back(std::stod(s));
            if (static_cast<int>(r.replan_seconds.size()) != std::stoi(f[7])) {
                throw Error("parse-error", "replan count mismatch: " + line);
            }
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw Error("parse-error", "bad episodes row: " + line);
        }
    }
    return out;
}

nlohmann::json manifest(const ExperimentSpec& spec, const ExperimentRun& run) {
    const nlohmann::json sj = spec.to_json();
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& r : run.records) seeds.push_back({{"map", r.map_seed}, {"agent", r.agent_seed}});
    return {{"format", "mpps-manifest"},
            {"version", 1},
            {"spec", sj},
            {"config_digest", hex(fnv1a(sj.dump()))},
            {"seeds", {{"scenario_seed", spec.scenario_seed}, {"agent_seed", spec.agent.seed}, {"episodes", seeds}}},
            {"metrics_digest", hex(run.report.digest())},
            {"versions",
             {{"mpps", "0.1.0"},
              {"compiler", __VERSION__},
              {"cplusplus", __cplusplus},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
}

void write_outputs(const ExperimentSpec& spec, const ExperimentRun& run) {
    const fs::path dir(spec.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("io-error", "cannot create " + dir.string());
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw Error("io-error", "cannot write " + (dir / name).string());
        return f;
    };
    open("manifest.json") << manifest(spec, run).dump(2) << "\n";
    open("metrics.json") << run.report.to_json().dump(2) << "\n";
    {
        auto f = open("episodes.csv");
        write_episodes_csv(f, run.records);
    }
    {
        auto f = open("tasks.csv");
        f << "task,episodes,successes,avg_reward,avg_finish_step\n" << std::setprecision(17);
        for (const auto& t : run.report.per_task) {
            f << t.task << "," << t.episodes << "," << t.successes << "," << t.avg_reward << "," << t.avg_finish_step
              << "\n";
        }
    }
    if (!run.replays.empty()) {
        auto f = open("replays.jsonl");
        for (const auto& r : run.replays) f << r.dump() << "\n";
    }
}

std::vector<PairedRow> pair_runs(const ExperimentRun& a, const ExperimentRun& b) {
    if (a.records.size() != b.records.size()) throw Error("invalid-argument", "runs differ in size");
    std::vector<PairedRow> out;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.map_seed != y.map_seed || x.goal != y.goal) throw Error("invalid-argument", "runs are not paired");
        out.push_back({x.task, x.map_seed, x.success, x.steps, y.success, y.steps});
    }
    return out;
}

void write_paired_csv(std::ostream& out, const std::vector<PairedRow>& rows) {
    out << "task,map_seed,mpps_success,mpps_steps,optimistic_success,optimistic_steps\n";
    for (const auto& r : rows) {
        out << r.task << "," << r.map_seed << "," << r.success_a << "," << r.steps_a << "," << r.success_b << ","
            << r.steps_b << "\n";
    }
}

}  // namespace mpps
