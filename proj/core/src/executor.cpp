#include "mpps/executor.hpp"

#include <chrono>
#include <algorithm>
#include <deque>
#include <optional>

#include <nlohmann/json.hpp>

#include "mpps/io.hpp"

namespace mpps {

namespace {

Action direction(Pos from, Pos to) {
    if (to.row < from.row) return Action::Up;
    if (to.row > from.row) return Action::Down;
    return to.col < from.col ? Action::Left : Action::Right;
}

bool craft_walkable(const Cell& c) {
    return c.kind != CellKind::Water && c.kind != CellKind::Stone && c.kind != CellKind::Unknown;
}

// BFS over cells satisfying `walk` from the agent. dist -1 when unreached.
struct Search {
    const Observation* o = nullptr;
    std::vector<int> dist;
    std::vector<int> parent;
    std::vector<int> order;  // visit order

    template <class Walk>
    Search(const Observation& obs, Walk&& walk) : o(&obs) {
        const int n = obs.rows * obs.cols;
        dist.assign(n, -1);
        parent.assign(n, -1);
        const int s = obs.index(obs.agent);
        dist[s] = 0;
        std::deque<int> q = {s};
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            order.push_back(u);
            for (Pos p : neighbours(obs.pos_of(u))) {
                if (!obs.in_bounds(p)) continue;
                const int v = obs.index(p);
                if (dist[v] >= 0 || !obs.seen[v] || !walk(obs.known[v])) continue;
                dist[v] = dist[u] + 1;
                parent[v] = u;
                q.push_back(v);
            }
        }
    }

    bool reached(int i) const { return dist[i] >= 0; }

    // First move on the path to reached cell i (i != agent).
    Action first_step(int i) const {
        if (i == o->index(o->agent) || !reached(i)) throw Error("internal", "first_step target is not a reached cell");
        while (parent[i] != o->index(o->agent)) i = parent[i];
        return direction(o->agent, o->pos_of(i));
    }

    // Nearest reached cell satisfying `pred`, in BFS order.
    template <class Pred>
    std::optional<int> nearest(Pred&& pred) const {
        for (int u : order) {
            if (pred(u)) return u;
        }
        return std::nullopt;
    }

    // Nearest seen cell satisfying `pred` that is entered from a reached
    // cell; returns the move toward it.
    template <class Pred>
    std::optional<Action> toward_entry(Pred&& pred) const {
        for (int u : order) {
            for (Pos p : neighbours(o->pos_of(u))) {
                if (!o->in_bounds(p) || !o->is_seen(p) || !pred(o->index(p))) continue;
                if (u == o->index(o->agent)) return direction(o->agent, p);
                return first_step(u);
            }
        }
        return std::nullopt;
    }
};

bool frontier(const Observation& o, int i) {
    for (Pos p : neighbours(o.pos_of(i))) {
        if (o.in_bounds(p) && !o.is_seen(p)) return true;
    }
    return false;
}

std::optional<Action> explore_from(const Observation& o, const Search& s) {
    const int here = o.index(o.agent);
    if (frontier(o, here)) {
        for (Pos p : neighbours(o.agent)) {
            if (o.in_bounds(p) && !o.is_seen(p)) return direction(o.agent, p);
        }
    }
    const auto f = s.nearest([&](int u) { return frontier(o, u); });
    if (!f) return std::nullopt;
    return s.first_step(*f);
}

std::optional<Action> craft_get(const Observation& o, int resource) {
    const Search s(o, craft_walkable);
    const auto is_target = [&](int u) {
        return o.known[u].kind == CellKind::Resource && o.known[u].a == resource;
    };
    if (is_target(o.index(o.agent))) return Action::Use;
    if (const auto t = s.nearest(is_target)) return s.first_step(*t);
    return explore_from(o, s);
}

std::optional<Action> craft_use_workshop(const Observation& o, int workshop, const RecipeTable& recipes) {
    if (recipes.depleted(static_cast<Workshop>(workshop), o.inventory)) return std::nullopt;
    const Search s(o, craft_walkable);
    const auto is_target = [&](int u) {
        return o.known[u].kind == CellKind::Workshop && o.known[u].a == workshop;
    };
    if (is_target(o.index(o.agent))) return Action::Use;
    if (const auto t = s.nearest(is_target)) return s.first_step(*t);
    return explore_from(o, s);
}

std::optional<Action> craft_use_tool(const Observation& o, int tool, const std::vector<Cell>& wanted,
                                     const std::vector<std::uint8_t>& reach_at_begin, int tools_at_begin) {
    if (o.inventory[tool] < tools_at_begin) {
        // Opened: cross into the region that was cut off.
        const Search s(o, craft_walkable);
        const int here = o.index(o.agent);
        const auto fresh = s.nearest(
            [&](int u) { return u != here && !reach_at_begin[u] && craft_walkable(o.first_seen[u]); });
        if (!fresh) return std::nullopt;
        return s.first_step(*fresh);
    }
    if (o.inventory[tool] <= 0) return std::nullopt;
    const CellKind obstacle = tool_boundary(static_cast<Object>(tool)) == Boundary::Water ? CellKind::Water
                                                                                          : CellKind::Stone;
    const Search s(o, craft_walkable);
    // An obstacle worth opening leads somewhere the agent cannot reach yet.
    const auto opens = [&](Pos v, Pos from) {
        for (Pos q : neighbours(v)) {
            if (q == from || !o.in_bounds(q)) continue;
            if (!o.is_seen(q)) return true;
            if (craft_walkable(o.at(q)) && !s.reached(o.index(q))) return true;
        }
        return false;
    };
    const auto target_of = [&](int u) -> std::optional<Pos> {
        if (o.known[u].kind != CellKind::Empty) return std::nullopt;
        const Pos p = o.pos_of(u);
        for (Pos v : neighbours(p)) {
            if (o.in_bounds(v) && o.is_seen(v) && o.at(v).kind == obstacle && opens(v, p)) return v;
        }
        return std::nullopt;
    };
    // Known cells beyond v that the agent cannot reach yet.
    const auto leads_to_wanted = [&](Pos v) {
        std::vector<std::uint8_t> mark(o.known.size(), 0);
        std::vector<int> stack = {o.index(v)};
        mark[o.index(v)] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (Pos q : neighbours(o.pos_of(u))) {
                if (!o.in_bounds(q)) continue;
                const int i = o.index(q);
                if (mark[i] || !o.seen[i] || !craft_walkable(o.known[i]) || s.reached(i)) continue;
                if (std::find(wanted.begin(), wanted.end(), o.known[i]) != wanted.end()) return true;
                mark[i] = 1;
                stack.push_back(i);
            }
        }
        return false;
    };
    auto stand = s.nearest([&](int u) {
        const auto v = target_of(u);
        return v && leads_to_wanted(*v);
    });
    if (!stand) stand = s.nearest([&](int u) { return target_of(u).has_value(); });
    if (!stand) return explore_from(o, s);
    if (*stand != o.index(o.agent)) return s.first_step(*stand);
    // The preferred obstacle at this stand cell, else any.
    std::optional<Pos> v;
    for (Pos q : neighbours(o.agent)) {
        if (o.in_bounds(q) && o.is_seen(q) && o.at(q).kind == obstacle && opens(q, o.agent) && leads_to_wanted(q)) {
            v = q;
            break;
        }
    }
    if (!v) v = target_of(*stand);
    const Action face = direction(o.agent, *v);
    return o.facing == face ? Action::Use : face;
}

std::optional<Action> box_get_key(const Observation& o, int color) {
    const Search s(o, [](const Cell& c) { return c.kind == CellKind::Empty; });
    const auto key_cell = [&](int u) {
        const Cell& c = o.known[u];
        return (c.kind == CellKind::LooseKey || c.kind == CellKind::OpenKey) && c.a == color;
    };
    if (const auto a = s.toward_entry(key_cell)) return a;
    if (o.held_key >= 0) {
        const auto lock_cell = [&](int u) {
            const Cell& c = o.known[u];
            if (c.kind != CellKind::Lock || c.a != o.held_key) return false;
            const Pos k = {o.pos_of(u).row, o.pos_of(u).col - 1};
            return o.in_bounds(k) && o.at(k).kind == CellKind::BoxKey && o.at(k).a == color;
        };
        if (const auto a = s.toward_entry(lock_cell)) return a;
    }
    return explore_from(o, s);
}

}  // namespace

ScriptedOptions::ScriptedOptions(RecipeTable recipes) : recipes_(std::move(recipes)) {}

void ScriptedOptions::begin(const Program& program, int tau, const Observation& o) {
    wanted_.clear();
    reach_at_begin_.clear();
    if (program[tau].kind == Prototype::Kind::UseTool) {
        const Search s(o, craft_walkable);
        reach_at_begin_.resize(o.known.size());
        for (std::size_t i = 0; i < o.known.size(); ++i) reach_at_begin_[i] = s.reached(static_cast<int>(i));
        tools_at_begin_ = o.inventory[program[tau].arg];
    }
    for (std::size_t i = static_cast<std::size_t>(tau) + 1; i < program.size(); ++i) {
        const Prototype& p = program[i];
        if (p.kind == Prototype::Kind::GetResource) wanted_.push_back(Cell::resource(static_cast<Object>(p.arg)));
        if (p.kind == Prototype::Kind::UseWorkshop) wanted_.push_back(Cell::workshop(static_cast<Workshop>(p.arg)));
    }
}

std::optional<Action> ScriptedOptions::act(const Prototype& p, const Observation& o) {
    switch (p.kind) {
        case Prototype::Kind::GetResource: return craft_get(o, p.arg);
        case Prototype::Kind::UseWorkshop: return craft_use_workshop(o, p.arg, recipes_);
        case Prototype::Kind::UseTool:
            if (reach_at_begin_.size() != o.known.size()) begin({p}, 0, o);
            return craft_use_tool(o, p.arg, wanted_, reach_at_begin_, tools_at_begin_);
        case Prototype::Kind::GetKey: return box_get_key(o, p.arg);
    }
    return std::nullopt;
}

std::optional<Action> ScriptedOptions::explore(const Observation& o) const {
    if (o.domain == Domain::Craft) return explore_from(o, Search(o, craft_walkable));
    return explore_from(o, Search(o, [](const Cell& c) { return c.kind == CellKind::Empty; }));
}

Action ScriptedOptions::idle(const Observation& o) {
    const auto inert = [&](Pos p) {
        if (!o.in_bounds(p)) return true;
        const Cell& c = o.at(p);
        if (o.domain == Domain::Craft) return c.is_obstacle() || c.kind == CellKind::Unknown;
        return c.kind == CellKind::BoxKey || c.kind == CellKind::Unknown ||
               (c.kind == CellKind::Lock && c.a != o.held_key);
    };
    if (o.domain == Domain::Craft) {
        const auto eligible = [&](Pos p) {
            if (!o.in_bounds(p)) return false;
            const Cell& c = o.at(p);
            return c.kind == CellKind::Resource || c.kind == CellKind::Workshop ||
                   (c.kind == CellKind::Water && o.inventory[index_of(Object::Bridge)] > 0) ||
                   (c.kind == CellKind::Stone && o.inventory[index_of(Object::Axe)] > 0);
        };
        bool any = eligible(o.agent) || eligible(step_toward(o.agent, o.facing));
        for (Pos p : neighbours(o.agent)) any = any || eligible(p);
        if (!any) return Action::Use;
    }
    for (Action a : {Action::Up, Action::Left, Action::Right, Action::Down}) {
        if (inert(step_toward(o.agent, a))) return a;
    }
    // Every neighbour is enterable: step to an empty one. Craft moves change
    // nothing but position.
    for (Pos p : neighbours(o.agent)) {
        if (o.domain == Domain::Craft || o.at(p).kind == CellKind::Empty) return direction(o.agent, p);
    }
    return Action::Up;
}

OptionImpl scripted_option(const Prototype& p, ScriptedOptions& options, int budget) {
    return {p, &options, budget};
}

ProgramRun run_program(ConcreteWorld& w, const Program& program, OptionPolicy& options, int n,
                       const RecipeTable& recipes, const GoalSpec* goal, bool stop_when_stuck) {
    if (program.empty()) throw Error("invalid-program", "empty program");
    ProgramRun r;
    Observation o = observe(w);
    int tau = 0;
    std::optional<Monitor> mon(std::in_place, program[0], o, recipes);
    AbstractWorld full_before = abstract_full(w);
    int t_begin = w.t;
    options.begin(program, 0, o);
    while (true) {
        while (mon->check(o)) {
            auto [vb, va] = mon->abstract_pair(o);
            AbstractWorld full_after = abstract_full(w);
            r.completions.push_back({t_begin, w.t, program[tau], std::move(vb), std::move(va), full_before, full_after});
            ++r.completed;
            if (++tau == static_cast<int>(program.size())) {
                r.finished = true;
                r.goal_reached = goal && goal_satisfied(w, *goal);
                return r;
            }
            mon.emplace(program[tau], o, recipes);
            full_before = std::move(full_after);
            t_begin = w.t;
            options.begin(program, tau, o);
        }
        if (goal && goal_satisfied(w, *goal)) {
            r.goal_reached = true;
            break;
        }
        if (r.steps >= n || w.t >= w.horizon) break;
        auto a = r.stuck ? std::nullopt : options.act(program[tau], o);
        if (!a) {
            r.stuck = true;
            if (stop_when_stuck) break;
            a = ScriptedOptions::idle(o);
        }
        r.trace.push_back({w.t, *a, tau});
        apply(w, *a, recipes);
        ++r.steps;
        o = observe(w);
    }
    return r;
}

ProgramRun run_exploration(ConcreteWorld& w, const ScriptedOptions& options, int n, const RecipeTable& recipes,
                           const GoalSpec* goal, bool stop_when_stuck) {
    ProgramRun r;
    while (r.steps < n && w.t < w.horizon) {
        if (goal && goal_satisfied(w, *goal)) {
            r.goal_reached = true;
            break;
        }
        const Observation o = observe(w);
        auto a = r.stuck ? std::nullopt : options.explore(o);
        if (!a) {
            r.stuck = true;
            if (stop_when_stuck) break;
            a = ScriptedOptions::idle(o);
        }
        r.trace.push_back({w.t, *a, -1});
        apply(w, *a, recipes);
        ++r.steps;
    }
    return r;
}

ExactSampler::ExactSampler(EnvConfig cfg, bool condition_on_task, std::uint64_t budget)
    : posterior_(std::move(cfg), budget), condition_(condition_on_task) {}

void ExactSampler::set_task(const GoalSpec& goal, int k_max, const RecipeTable& recipes) {
    goal_ = goal;
    k_max_ = k_max;
    recipes_ = recipes;
}

SampledWorldSet ExactSampler::sample(const Observation& o, int m, std::uint64_t seed) {
    if (!condition_ || !goal_ || o.domain != Domain::Craft) return posterior_.sample(o, m, seed);
    const EnvConfig& cfg = posterior_.config();
    const MapFilter keep = [&](const std::vector<Cell>& cells) {
        const ConcreteWorld w = make_world(Domain::Craft, o.rows, o.cols, cells, o.start, cfg.horizon, cfg.view_radius);
        return solvable(abstract_full(w), *goal_, k_max_, recipes_);
    };
    return posterior_.sample(o, m, seed, keep);
}

AgentConfig AgentConfig::defaults(Domain d) {
    AgentConfig c;
    c.n = d == Domain::Craft ? 20 : 10;
    return c;
}

AgentConfig AgentConfig::from_json(const nlohmann::json& j, Domain d) {
    AgentConfig c = defaults(d);
    try {
        c.m = j.value("m", c.m);
        c.n = j.value("n", c.n);
        c.k_max = j.value("k_max", c.k_max);
        c.theta = j.value("theta", c.theta);
        c.hallucinator = j.value("hallucinator", c.hallucinator);
        c.executor = j.value("executor", c.executor);
        const std::string planner = j.value("planner", std::string("mpps"));
        if (planner != "mpps" && planner != "optimistic") throw Error("invalid-config", "unknown planner " + planner);
        c.planner = planner == "mpps" ? Planner::Mpps : Planner::Optimistic;
        c.early_replan = j.value("early_replan", c.early_replan);
        c.solver_time_limit_s = j.value("solver_time_limit_s", c.solver_time_limit_s);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid-config", std::string("agent config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json AgentConfig::to_json() const {
    return {{"m", m},
            {"n", n},
            {"k_max", k_max},
            {"theta", theta},
            {"hallucinator", hallucinator},
            {"executor", executor},
            {"planner", planner == Planner::Mpps ? "mpps" : "optimistic"},
            {"early_replan", early_replan},
            {"solver_time_limit_s", solver_time_limit_s},
            {"seed", seed}};
}

void AgentConfig::validate() const {
    if (m < 1) throw Error("invalid-config", "m must be at least 1");
    if (n < 1) throw Error("invalid-config", "N must be at least 1");
    if (k_max < 1) throw Error("invalid-config", "k_max must be at least 1");
    if (theta <= 0.0 || theta > 1.0) throw Error("invalid-config", "theta must be in (0, 1]");
    if (hallucinator != "exact" && hallucinator != "cvae") throw Error("invalid-config", "unknown hallucinator " + hallucinator);
    if (executor != "scripted" && executor != "learned") throw Error("invalid-config", "unknown executor " + executor);
}

EpisodeResult mpps_episode(ConcreteWorld world, const GoalSpec& goal, const AgentConfig& cfg, WorldSampler* sampler,
                           OptionPolicy& options, const RecipeTable& recipes) {
    cfg.validate();
    if (cfg.planner == Planner::Mpps && !sampler) throw Error("invalid-config", "MPPS planner needs a sampler");
    ConcreteWorld& w = world;
    if (w.t == 0) reset(w);
    const ScriptedOptions explorer(recipes);
    if (sampler) sampler->set_task(goal, cfg.k_max, recipes);
    EpisodeResult res;
    int idle = 0;
    std::uint64_t round = 0;
    while (w.t < w.horizon && !goal_satisfied(w, goal)) {
        const Observation o = observe(w);
        ReplanRecord rec;
        rec.t = w.t;
        rec.obs_digest = digest(o);
        const auto start = std::chrono::steady_clock::now();
        std::optional<SynthesisResult> syn;
        try {
            if (cfg.planner == Planner::Mpps) {
                SampledWorldSet set = sampler->sample(o, cfg.m, cfg.seed * 1000003ull + round);
                rec.backend = set.backend;
                rec.worlds = std::move(set.worlds);
                SynthesisProblem prob;
                prob.goal = goal;
                prob.worlds = rec.worlds;
                prob.k_max = cfg.k_max;
                prob.theta = cfg.theta;
                prob.recipes = recipes;
                prob.time_limit_s = cfg.solver_time_limit_s;
                syn = synthesize(prob);
            } else {
                const PartialAbstractState pa = abstract_observed(o);
                rec.backend = "optimistic";
                rec.worlds = optimistic_worlds(pa);
                syn = synthesize_optimistic(pa, goal, cfg.k_max, recipes);
            }
        } catch (const Error& e) {
            if (e.code() != "no-program") throw;
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ++round;

        ProgramRun run;
        if (syn) {
            rec.program = syn->program;
            rec.k = syn->k;
            rec.objective = syn->objective;
            run = run_program(w, syn->program, options, cfg.n, recipes, &goal, cfg.early_replan);
        }
        const bool fall_back = !syn || (run.stuck && run.steps == 0);
        if (fall_back && !run.goal_reached) {
            ProgramRun ex = run_exploration(w, explorer, cfg.n - run.steps, recipes, &goal, cfg.early_replan);
            run.steps += ex.steps;
            run.stuck = run.stuck || ex.stuck;
            run.trace.insert(run.trace.end(), ex.trace.begin(), ex.trace.end());
        }
        rec.steps = run.steps;
        rec.completed = run.completed;
        rec.finished = run.finished;
        rec.stuck = run.stuck;
        res.trace.insert(res.trace.end(), run.trace.begin(), run.trace.end());
        for (auto& c : run.completions) res.completions.push_back(std::move(c));
        res.replans.push_back(std::move(rec));
        // Nothing moves and nothing is learned: give a few fresh samples a
        // chance, then stop.
        idle = run.steps == 0 ? idle + 1 : 0;
        if (idle >= 3) break;
    }
    res.success = goal_satisfied(w, goal);
    res.steps = w.t;
    return res;
}

nlohmann::json EpisodeResult::to_json() const {
    nlohmann::json j;
    j["success"] = success;
    j["steps"] = steps;
    auto& rp = j["replans"] = nlohmann::json::array();
    for (const auto& r : replans) {
        nlohmann::json worlds = nlohmann::json::array();
        for (const auto& s : r.worlds) worlds.push_back(to_string(s));
        rp.push_back({{"t", r.t},
                      {"obs_digest", r.obs_digest},
                      {"backend", r.backend},
                      {"worlds", worlds},
                      {"program", to_string(r.program)},
                      {"k", r.k},
                      {"objective", r.objective},
                      {"seconds", r.seconds},
                      {"steps", r.steps},
                      {"completed", r.completed},
                      {"finished", r.finished},
                      {"stuck", r.stuck}});
    }
    auto& tr = j["actions"] = nlohmann::json::array();
    for (const auto& s : trace) tr.push_back({{"t", s.t}, {"action", std::string(name_of(s.action))}, {"tau", s.tau}});
    auto& cs = j["completions"] = nlohmann::json::array();
    for (const auto& c : completions) {
        cs.push_back({{"t_begin", c.t_begin}, {"t", c.t}, {"proto", c.proto.name()}});
    }
    return j;
}

nlohmann::json replay_json(const ConcreteWorld& initial, std::uint64_t map_seed, const GoalSpec& goal,
                           const AgentConfig& cfg, const EpisodeResult& r) {
    nlohmann::json j = r.to_json();
    j["format"] = "mpps-replay";
    j["version"] = 1;
    j["fixture"] = write_fixture(initial, map_seed);
    j["goal"] = goal.to_string();
    j["config"] = cfg.to_json();
    return j;
}

ReplayCheck verify_replay(const nlohmann::json& replay, const RecipeTable& recipes) {
    ReplayCheck out;
    auto fail = [&](std::string msg) {
        out.ok = false;
        out.failures.push_back(std::move(msg));
    };
    if (replay.value("format", "") != "mpps-replay" || replay.value("version", 0) != 1) {
        throw Error("parse-error", "not an mpps-replay version 1 file");
    }
    ConcreteWorld w = read_fixture(replay.at("fixture").get<std::string>()).world;
    reset(w);
    const GoalSpec goal = GoalSpec::parse(replay.at("goal").get<std::string>());
    const int n = replay.at("config").at("n").get<int>();

    const auto& actions = replay.at("actions");
    const auto& replans = replay.at("replans");
    std::vector<AbstractWorld> full = {abstract_full(w)};
    std::size_t next_replan = 0;
    std::size_t ai = 0;
    while (true) {
        while (next_replan < replans.size() && replans[next_replan].at("t").get<int>() == w.t) {
            const auto& rp = replans[next_replan];
            if (rp.at("obs_digest").get<std::uint64_t>() != digest(observe(w))) {
                fail("observation digest differs at replan t=" + std::to_string(w.t));
            }
            if (rp.at("steps").get<int>() > n) fail("replan at t=" + std::to_string(w.t) + " exceeded N");
            ++next_replan;
        }
        if (ai == actions.size()) break;
        const auto& a = actions[ai++];
        if (a.at("t").get<int>() != w.t) fail("action time mismatch at t=" + std::to_string(w.t));
        const auto act = parse_action(a.at("action").get<std::string>());
        if (!act) throw Error("parse-error", "unknown action");
        if (w.t >= w.horizon) {
            fail("action past the horizon");
            break;
        }
        apply(w, *act, recipes);
        full.push_back(abstract_full(w));
    }
    if (next_replan != replans.size()) fail("replans recorded past the end of the actions");
    for (const auto& c : replay.at("completions")) {
        const auto p = parse_prototype(c.at("proto").get<std::string>());
        const int tb = c.at("t_begin").get<int>(), t = c.at("t").get<int>();
        if (!p || tb < 0 || t >= static_cast<int>(full.size()) || tb > t) {
            fail("malformed completion record");
            continue;
        }
        if (!check_transition(*p, full[tb], full[t], recipes)) {
            fail(p->name() + " completion at t=" + std::to_string(t) + " violates its relation");
        }
    }
    if (replay.at("steps").get<int>() != w.t) fail("step count differs");
    if (replay.at("success").get<bool>() != goal_satisfied(w, goal)) fail("success flag differs");
    return out;
}

}  // namespace mpps
