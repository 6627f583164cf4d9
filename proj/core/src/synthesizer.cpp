#include "mpps/synthesizer.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <functional>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace mpps {

using sat::Lit;

void SynthesisProblem::validate() const {
    if (k_max < 1) throw Error("invalid-problem", "k_max must be >= 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw Error("invalid-problem", "theta must lie in (0, 1]");
    if (worlds.empty()) throw Error("invalid-problem", "no sampled worlds");
    for (const auto& w : worlds) {
        if (domain_of(w) != goal.domain) throw Error("domain-mismatch", "world and goal domains differ");
    }
}

namespace {

class Builder {
public:
    explicit Builder(Wcnf& w) : w_(w) {
        t_ = w_.new_var();
        w_.add_hard({t_});
    }
    Lit T() const { return t_; }
    Lit F() const { return -t_; }
    Lit fresh() { return w_.new_var(); }
    // Clauses added while a guard is set only bind when the guard holds.
    void set_guard(Lit g) { guard_ = g; }

    void clause(const std::vector<Lit>& lits) {
        std::vector<Lit> out;
        out.reserve(lits.size() + 1);
        if (guard_ != 0) out.push_back(-guard_);
        for (Lit l : lits) {
            if (l == t_) return;
            if (l != -t_) out.push_back(l);
        }
        w_.add_hard(std::move(out));
    }
    void clause(std::initializer_list<Lit> lits) { clause(std::vector<Lit>(lits)); }

    void exactly_one(const std::vector<Lit>& lits) {
        clause(lits);
        for (std::size_t a = 0; a < lits.size(); ++a) {
            for (std::size_t b = a + 1; b < lits.size(); ++b) clause({-lits[a], -lits[b]});
        }
    }
    void at_most_one(const std::vector<Lit>& lits) {
        for (std::size_t a = 0; a < lits.size(); ++a) {
            for (std::size_t b = a + 1; b < lits.size(); ++b) clause({-lits[a], -lits[b]});
        }
    }

private:
    Wcnf& w_;
    Lit t_ = 0;
    Lit guard_ = 0;
};

// One-hot integer over 0..hi; a single-value domain is the constant T.
struct Group {
    std::vector<Lit> lit;
    int hi() const { return static_cast<int>(lit.size()) - 1; }
};

Lit at(const Group& g, int v, const Builder& b) {
    if (v < 0 || v > g.hi()) return b.F();
    return g.lit[v];
}

Group make_group(Builder& b, int hi) {
    Group g;
    if (hi <= 0) {
        g.lit = {b.T()};
        return g;
    }
    for (int v = 0; v <= hi; ++v) g.lit.push_back(b.fresh());
    b.exactly_one(g.lit);
    return g;
}

std::vector<Lit> with(std::vector<Lit> guards, std::initializer_list<Lit> more) {
    guards.insert(guards.end(), more);
    return guards;
}

void equal_under(Builder& b, const std::vector<Lit>& guards, const Group& from, const Group& to) {
    for (int v = 0; v <= from.hi(); ++v) b.clause(with(guards, {-from.lit[v], at(to, v, b)}));
}

void equal_under(Builder& b, const std::vector<Lit>& guards, Lit from, Lit to) {
    b.clause(with(guards, {-from, to}));
    b.clause(with(guards, {from, -to}));
}

void unit_value(Builder& b, const Group& g, int v) { b.clause({at(g, v, b)}); }

// ---------------------------------------------------------------- craft

struct CraftDomains {
    int zones = 1;
    std::vector<std::uint8_t> init_conn;  // n*n
    std::vector<Boundary> init_b;
    std::vector<std::array<int, kNumResources>> rho0;
    std::vector<std::uint8_t> omega;
    Inventory iota0{};
    std::array<int, kNumObjects> ub{};
};

CraftDomains craft_domains(const AbstractState& s, const RecipeTable& recipes, int cap) {
    CraftDomains d;
    d.zones = s.zones;
    d.init_b = s.b;
    d.init_conn.resize(s.b.size());
    for (std::size_t i = 0; i < s.b.size(); ++i) d.init_conn[i] = s.b[i] == Boundary::Connected;
    d.rho0 = s.rho;
    d.omega = s.omega;
    d.iota0 = s.iota;
    // Upper bound on the number of units of each object that can ever pass
    // through the inventory, then clipped to the cap.
    std::array<long, kNumObjects> total{};
    for (int r = 0; r < kNumResources; ++r) {
        total[r] = s.iota[r];
        for (const auto& row : s.rho) total[r] += row[r];
    }
    for (int o = kNumResources; o < kNumObjects; ++o) total[o] = s.iota[o];
    for (int pass = 0; pass < kNumObjects + 1; ++pass) {
        std::array<long, kNumObjects> next = total;
        for (int o = kNumResources; o < kNumObjects; ++o) next[o] = s.iota[o];
        for (int w = 0; w < kNumWorkshops; ++w) {
            for (const auto& rec : recipes.recipes(static_cast<Workshop>(w))) {
                long makeable = 1L << 20;
                for (int q = 0; q < kNumObjects; ++q) {
                    if (rec.needs[q] > 0) makeable = std::min(makeable, total[q] / rec.needs[q]);
                }
                next[index_of(rec.product)] += makeable;
            }
        }
        if (next == total) break;
        total = next;
    }
    for (int o = 0; o < kNumObjects; ++o) d.ub[o] = static_cast<int>(std::min<long>(total[o], cap));
    return d;
}

struct CraftSet {
    Group z;
    std::vector<Lit> conn;  // n*n
    std::vector<std::array<Group, kNumResources>> rho;
    std::array<Group, kNumObjects> iota;
};

CraftSet make_craft_set(Builder& b, const CraftDomains& d) {
    CraftSet s;
    const int n = d.zones;
    s.z = make_group(b, n - 1);
    s.conn.assign(static_cast<std::size_t>(n * n), b.T());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Lit l = d.init_conn[i * n + j] ? b.T() : b.fresh();
            s.conn[i * n + j] = l;
            s.conn[j * n + i] = l;
        }
    }
    s.rho.resize(n);
    for (int a = 0; a < n; ++a) {
        for (int r = 0; r < kNumResources; ++r) s.rho[a][r] = make_group(b, d.rho0[a][r]);
    }
    for (int o = 0; o < kNumObjects; ++o) s.iota[o] = make_group(b, d.ub[o]);
    return s;
}

void craft_start(Builder& b, const CraftSet& s, const AbstractState& w) {
    unit_value(b, s.z, w.z);
    const int n = w.zones;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) b.clause({w.connected(i, j) ? s.conn[i * n + j] : -s.conn[i * n + j]});
        for (int r = 0; r < kNumResources; ++r) unit_value(b, s.rho[i][r], w.rho[i][r]);
    }
    for (int o = 0; o < kNumObjects; ++o) unit_value(b, s.iota[o], w.iota[o]);
}

void craft_link(Builder& b, const CraftSet& from, const CraftSet& to, int n) {
    equal_under(b, {}, from.z, to.z);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) equal_under(b, {}, from.conn[i * n + j], to.conn[i * n + j]);
        for (int r = 0; r < kNumResources; ++r) equal_under(b, {}, from.rho[i][r], to.rho[i][r]);
    }
    for (int o = 0; o < kNumObjects; ++o) equal_under(b, {}, from.iota[o], to.iota[o]);
}

void frame_conn(Builder& b, Lit g, const CraftSet& pre, const CraftSet& post, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) equal_under(b, {-g}, pre.conn[i * n + j], post.conn[i * n + j]);
    }
}

void frame_rho(Builder& b, Lit g, const CraftSet& pre, const CraftSet& post, int n, int skip_r = -1) {
    for (int a = 0; a < n; ++a) {
        for (int r = 0; r < kNumResources; ++r) {
            if (r != skip_r) equal_under(b, {-g}, pre.rho[a][r], post.rho[a][r]);
        }
    }
}

void frame_iota(Builder& b, Lit g, const CraftSet& pre, const CraftSet& post, int skip_o = -1) {
    for (int o = 0; o < kNumObjects; ++o) {
        if (o != skip_o) equal_under(b, {-g}, pre.iota[o], post.iota[o]);
    }
}

// (z- = i and z+ = j) implies b-_{ij} = connected
void require_connected_move(Builder& b, Lit g, const CraftSet& pre, const CraftSet& post, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) b.clause({-g, -at(pre.z, i, b), -at(post.z, j, b), pre.conn[i * n + j]});
        }
    }
}

void encode_get(Builder& b, Lit g, int r, const CraftSet& pre, const CraftSet& post, int n) {
    require_connected_move(b, g, pre, post, n);
    for (int j = 0; j < n; ++j) {
        const Group& rp = pre.rho[j][r];
        for (int v = 0; v <= rp.hi(); ++v) {
            b.clause({-g, -at(post.z, j, b), -rp.lit[v], at(post.rho[j][r], v - 1, b)});
            // zones other than j keep their count
            b.clause({-g, at(post.z, j, b), -rp.lit[v], at(post.rho[j][r], v, b)});
        }
    }
    const Group& ip = pre.iota[r];
    for (int v = 0; v <= ip.hi(); ++v) b.clause({-g, -ip.lit[v], at(post.iota[r], v + 1, b)});
    frame_conn(b, g, pre, post, n);
    frame_rho(b, g, pre, post, n, r);
    frame_iota(b, g, pre, post, r);
}

void encode_use_workshop(Builder& b, Lit g, Workshop w, const RecipeTable& recipes,
                         const CraftDomains& d, const CraftSet& pre, const CraftSet& post) {
    const int n = d.zones;
    require_connected_move(b, g, pre, post, n);
    for (int j = 0; j < n; ++j) {
        if (!(d.omega[j] >> index_of(w) & 1u)) b.clause({-g, -at(post.z, j, b)});
    }
    const auto& recs = recipes.recipes(w);
    // At least one recipe is satisfiable beforehand.
    std::vector<Lit> any = {-g};
    for (const auto& rec : recs) {
        const Lit c = b.fresh();
        any.push_back(c);
        for (int q = 0; q < kNumObjects; ++q) {
            if (rec.needs[q] == 0) continue;
            std::vector<Lit> enough = {-c};
            for (int v = rec.needs[q]; v <= pre.iota[q].hi(); ++v) enough.push_back(pre.iota[q].lit[v]);
            b.clause(enough);
        }
    }
    b.clause(any);
    // Priority order: each recipe in turn is applied as often as it can be.
    std::array<Group, kNumObjects> cur = pre.iota;
    for (const auto& rec : recs) {
        std::vector<int> ing;
        for (int q = 0; q < kNumObjects; ++q) {
            if (rec.needs[q] > 0) ing.push_back(q);
        }
        const int prod = index_of(rec.product);
        std::map<int, Group> next;
        for (int q : ing) next[q] = make_group(b, cur[q].hi());
        next[prod] = make_group(b, post.iota[prod].hi());
        std::vector<int> vals(ing.size());
        std::function<void(std::size_t)> rec_combo = [&](std::size_t idx) {
            if (idx < ing.size()) {
                for (int v = 0; v <= cur[ing[idx]].hi(); ++v) {
                    vals[idx] = v;
                    rec_combo(idx + 1);
                }
                return;
            }
            int m = 1 << 20;
            for (std::size_t k = 0; k < ing.size(); ++k) m = std::min(m, vals[k] / rec.needs[ing[k]]);
            for (int vp = 0; vp <= cur[prod].hi(); ++vp) {
                std::vector<Lit> guard = {-g, -cur[prod].lit[vp]};
                for (std::size_t k = 0; k < ing.size(); ++k) guard.push_back(-cur[ing[k]].lit[vals[k]]);
                for (std::size_t k = 0; k < ing.size(); ++k) {
                    auto c = guard;
                    c.push_back(at(next[ing[k]], vals[k] - m * rec.needs[ing[k]], b));
                    b.clause(c);
                }
                auto c = guard;
                c.push_back(at(next[prod], vp + m, b));
                b.clause(c);
            }
        };
        rec_combo(0);
        for (auto& [q, grp] : next) cur[q] = grp;
    }
    for (int o = 0; o < kNumObjects; ++o) equal_under(b, {-g}, cur[o], post.iota[o]);
    frame_conn(b, g, pre, post, n);
    frame_rho(b, g, pre, post, n);
}

void encode_use_tool(Builder& b, Lit g, Object tool, const CraftDomains& d, const CraftSet& pre,
                     const CraftSet& post) {
    const int n = d.zones;
    const Boundary type = tool_boundary(tool);
    auto conn_pre = [&](int x, int y) { return x == y ? b.T() : pre.conn[x * n + y]; };
    for (int i = 0; i < n; ++i) b.clause({-g, -at(pre.z, i, b), -at(post.z, i, b)});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Lit zi = at(pre.z, i, b), zj = at(post.z, j, b);
            if (d.init_b[i * n + j] != type) {
                b.clause({-g, -zi, -zj});
                continue;
            }
            b.clause({-g, -zi, -zj, -pre.conn[i * n + j]});
            b.clause({-g, -zi, -zj, post.conn[i * n + j]});
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int c = a + 1; c < n; ++c) {
            const Lit cp = post.conn[a * n + c];
            b.clause({-g, -pre.conn[a * n + c], cp});
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j || d.init_b[i * n + j] != type) continue;
                    const std::vector<Lit> guard = {-g, -at(pre.z, i, b), -at(post.z, j, b)};
                    b.clause(with(guard, {-cp, pre.conn[a * n + c], conn_pre(a, i), conn_pre(a, j)}));
                    b.clause(with(guard, {-cp, pre.conn[a * n + c], conn_pre(c, i), conn_pre(c, j)}));
                    for (Lit x : {conn_pre(a, i), conn_pre(a, j)}) {
                        for (Lit y : {conn_pre(c, i), conn_pre(c, j)}) b.clause(with(guard, {-x, -y, cp}));
                    }
                }
            }
        }
    }
    const int r = index_of(tool);
    const Group& ip = pre.iota[r];
    for (int v = 0; v <= ip.hi(); ++v) b.clause({-g, -ip.lit[v], at(post.iota[r], v - 1, b)});
    frame_rho(b, g, pre, post, n);
    frame_iota(b, g, pre, post, r);
}

// ---------------------------------------------------------------- box

struct BoxDomains {
    std::array<std::array<int, kNumColors>, kNumColors> box0{};
    std::uint16_t loose_possible = 0;
    std::uint16_t held_possible = 0;
};

BoxDomains box_domains(const BoxAbstractState& s) {
    BoxDomains d;
    d.box0 = s.boxes;
    d.loose_possible = s.loose;
    d.held_possible = s.held | s.loose;
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) {
            if (s.boxes[a][c] > 0) d.held_possible |= static_cast<std::uint16_t>(1u << a);
        }
    }
    return d;
}

struct BoxSet {
    std::array<std::array<Group, kNumColors>, kNumColors> boxes;
    std::array<Lit, kNumColors> loose{};
    std::array<Lit, kNumColors> held{};
};

BoxSet make_box_set(Builder& b, const BoxDomains& d) {
    BoxSet s;
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) s.boxes[a][c] = make_group(b, d.box0[a][c]);
        s.loose[a] = (d.loose_possible >> a & 1u) ? b.fresh() : b.F();
        s.held[a] = (d.held_possible >> a & 1u) ? b.fresh() : b.F();
    }
    std::vector<Lit> held;
    for (Lit l : s.held) {
        if (l != b.F()) held.push_back(l);
    }
    b.at_most_one(held);  // Card(iota) <= 1
    std::vector<Lit> loose;
    for (Lit l : s.loose) {
        if (l != b.F()) loose.push_back(l);
    }
    b.at_most_one(loose);  // Card(l) <= 1
    return s;
}

void box_start(Builder& b, const BoxSet& s, const BoxAbstractState& w) {
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) unit_value(b, s.boxes[a][c], w.boxes[a][c]);
        b.clause({(w.loose >> a & 1u) ? s.loose[a] : -s.loose[a]});
        b.clause({(w.held >> a & 1u) ? s.held[a] : -s.held[a]});
    }
}

void box_link(Builder& b, const BoxSet& from, const BoxSet& to) {
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) equal_under(b, {}, from.boxes[a][c], to.boxes[a][c]);
        equal_under(b, {}, from.loose[a], to.loose[a]);
        equal_under(b, {}, from.held[a], to.held[a]);
    }
}

void encode_get_key(Builder& b, Lit g, int k, const BoxSet& pre, const BoxSet& post) {
    const Lit x = b.fresh(), y = b.fresh();
    b.clause({-g, x, y});
    // X: pick up the loose key k.
    b.clause({-x, pre.loose[k]});
    b.clause({-x, post.held[k]});
    for (int c = 0; c < kNumColors; ++c) b.clause({-x, -post.loose[c]});
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) equal_under(b, {-x}, pre.boxes[a][c], post.boxes[a][c]);
    }
    // Y: unlock a box holding key k with the single held key k1.
    std::vector<Lit> one_held = {-y};
    for (Lit l : pre.held) one_held.push_back(l);
    b.clause(one_held);
    b.clause({-y, post.held[k]});
    b.clause({-y, -pre.held[k]});
    for (int c = 0; c < kNumColors; ++c) equal_under(b, {-y}, pre.loose[c], post.loose[c]);
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) {
            const Group& bp = pre.boxes[a][c];
            if (a != k) {
                equal_under(b, {-y}, bp, post.boxes[a][c]);
                continue;
            }
            for (int v = 0; v <= bp.hi(); ++v) {
                b.clause({-y, -pre.held[c], -bp.lit[v], at(post.boxes[a][c], v - 1, b)});
                b.clause({-y, pre.held[c], -bp.lit[v], at(post.boxes[a][c], v, b)});
            }
        }
    }
}

bool self_feeding(const RecipeTable& recipes, Workshop w) {
    for (const auto& a : recipes.recipes(w)) {
        for (const auto& c : recipes.recipes(w)) {
            if (c.needs[index_of(a.product)] > 0) return true;
        }
    }
    return false;
}

void check_caps(const AbstractWorld& w, int cap) {
    auto bad = [&](int v) { return v < 0 || v > cap; };
    if (const auto* s = std::get_if<AbstractState>(&w)) {
        for (const auto& row : s->rho) {
            for (int v : row) {
                if (bad(v)) throw Error("cap-exceeded", "resource count exceeds the cap");
            }
        }
        for (int v : s->iota) {
            if (bad(v)) throw Error("cap-exceeded", "inventory count exceeds the cap");
        }
    } else {
        for (const auto& row : std::get<BoxAbstractState>(w).boxes) {
            for (int v : row) {
                if (bad(v)) throw Error("cap-exceeded", "box count exceeds the cap");
            }
        }
    }
}

}  // namespace

GroundedEncoding encode(const SynthesisProblem& problem, int k) {
    problem.validate();
    if (k < 1 || k > problem.k_max) throw Error("invalid-problem", "k outside 1..k_max");
    const Domain dom = problem.domain();
    if (dom == Domain::Craft) {
        for (int w = 0; w < kNumWorkshops; ++w) {
            if (self_feeding(problem.recipes, static_cast<Workshop>(w))) {
                throw Error("unsupported-recipes", "a workshop consumes one of its own products");
            }
        }
    }
    GroundedEncoding enc;
    enc.k = k;
    enc.roster = roster(dom);
    Builder b(enc.wcnf);
    const int nc = static_cast<int>(enc.roster.size());
    enc.selectors.resize(k);
    for (int t = 0; t < k; ++t) {
        for (int c = 0; c < nc; ++c) enc.selectors[t].push_back(b.fresh());
        b.exactly_one(enc.selectors[t]);
    }
    for (const auto& world : problem.worlds) {
        check_caps(world, problem.cap);
        const Lit solved = b.fresh();
        enc.solved.push_back(solved);
        b.set_guard(solved);
        if (dom == Domain::Craft) {
            const auto& s0 = std::get<AbstractState>(world);
            const CraftDomains d = craft_domains(s0, problem.recipes, problem.cap);
            const int n = d.zones;
            std::vector<CraftSet> pre, post;
            for (int t = 0; t < k; ++t) {
                pre.push_back(make_craft_set(b, d));
                post.push_back(make_craft_set(b, d));
            }
            craft_start(b, pre[0], s0);
            for (int t = 0; t + 1 < k; ++t) craft_link(b, post[t], pre[t + 1], n);
            for (int t = 0; t < k; ++t) {
                for (int c = 0; c < nc; ++c) {
                    const Prototype& p = enc.roster[c];
                    const Lit g = enc.selectors[t][c];
                    switch (p.kind) {
                        case Prototype::Kind::GetResource: encode_get(b, g, p.arg, pre[t], post[t], n); break;
                        case Prototype::Kind::UseWorkshop:
                            encode_use_workshop(b, g, static_cast<Workshop>(p.arg), problem.recipes, d, pre[t], post[t]);
                            break;
                        case Prototype::Kind::UseTool:
                            encode_use_tool(b, g, static_cast<Object>(p.arg), d, pre[t], post[t]);
                            break;
                        default: break;
                    }
                }
            }
            for (const auto& atom : problem.goal.atoms) {
                std::vector<Lit> c;
                const Group& grp = post[k - 1].iota[atom.what];
                for (int v = atom.at_least; v <= grp.hi(); ++v) c.push_back(grp.lit[v]);
                b.clause(c);
            }
        } else {
            const auto& s0 = std::get<BoxAbstractState>(world);
            const BoxDomains d = box_domains(s0);
            std::vector<BoxSet> pre, post;
            for (int t = 0; t < k; ++t) {
                pre.push_back(make_box_set(b, d));
                post.push_back(make_box_set(b, d));
            }
            box_start(b, pre[0], s0);
            for (int t = 0; t + 1 < k; ++t) box_link(b, post[t], pre[t + 1]);
            for (int t = 0; t < k; ++t) {
                for (int c = 0; c < nc; ++c) encode_get_key(b, enc.selectors[t][c], enc.roster[c].arg, pre[t], post[t]);
            }
            for (const auto& atom : problem.goal.atoms) b.clause({post[k - 1].held[atom.what]});
        }
        b.set_guard(0);
        enc.wcnf.add_soft({solved}, 1);
    }
    return enc;
}

Program decode_program(const GroundedEncoding& enc, const std::vector<bool>& model) {
    Program p;
    for (const auto& slot : enc.selectors) {
        for (std::size_t c = 0; c < slot.size(); ++c) {
            if (model[slot[c] - 1]) {
                p.push_back(enc.roster[c]);
                break;
            }
        }
    }
    return p;
}

bool program_solves(const Program& p, const AbstractWorld& world, const GoalSpec& goal,
                    const RecipeTable& recipes) {
    std::vector<AbstractWorld> cur = {world};
    for (const auto& c : p) {
        std::vector<AbstractWorld> next;
        for (const auto& s : cur) {
            for (auto& n : successors(c, s, recipes)) next.push_back(std::move(n));
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (next.empty()) return false;
        cur = std::move(next);
    }
    return std::any_of(cur.begin(), cur.end(), [&](const AbstractWorld& s) { return eval_goal(goal, s); });
}

std::vector<bool> certify(const Program& p, const SynthesisProblem& problem) {
    std::vector<bool> out;
    for (const auto& w : problem.worlds) out.push_back(program_solves(p, w, problem.goal, problem.recipes));
    return out;
}

nlohmann::json SynthesisResult::to_json() const {
    return {{"program", to_string(program)},
            {"k", k},
            {"objective", objective},
            {"solved", solved},
            {"vars", stats.vars},
            {"clauses", stats.clauses},
            {"decisions", stats.decisions},
            {"conflicts", stats.conflicts},
            {"seconds", stats.seconds},
            {"timed_out", stats.timed_out}};
}

SynthesisResult solve_length(const SynthesisProblem& problem, int k) {
    const auto start = std::chrono::steady_clock::now();
    const GroundedEncoding enc = encode(problem, k);
    const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                      std::chrono::duration<double>(problem.time_limit_s));
    MaxSatSolver solver(enc.wcnf);
    MaxSatResult r = solver.solve(deadline);
    if (!r.hard_sat) throw Error("internal", "hard clauses unsatisfiable");
    SynthesisResult out;
    out.k = k;
    out.stats.timed_out = !r.optimal;
    if (r.optimal) r = solver.refine_lexicographic(enc.selectors, deadline);
    out.program = decode_program(enc, r.model);
    out.solved = certify(out.program, problem);
    out.solved_count = static_cast<int>(std::count(out.solved.begin(), out.solved.end(), true));
    const auto claimed = r.satisfied_weight;
    const auto got = static_cast<std::uint64_t>(out.solved_count);
    if (got < claimed || (r.optimal && got != claimed)) {
        throw Error("certification-failed", "program " + to_string(out.program) + " solves " +
                                                std::to_string(out.solved_count) + " worlds, solver claimed " +
                                                std::to_string(r.satisfied_weight));
    }
    out.objective = static_cast<double>(out.solved_count) / static_cast<double>(problem.worlds.size());
    out.stats.vars = static_cast<std::size_t>(enc.wcnf.num_vars);
    out.stats.clauses = enc.wcnf.hard.size() + enc.wcnf.soft.size();
    out.stats.decisions = r.stats.decisions;
    out.stats.conflicts = r.stats.conflicts;
    out.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

namespace {

using StateSets = std::vector<std::vector<AbstractWorld>>;

struct OracleSearch {
    const SynthesisProblem& problem;
    const std::vector<Prototype>& lib;
    int k;
    std::uint64_t budget;
    std::uint64_t nodes = 0;
    std::map<std::pair<int, StateSets>, std::pair<int, Program>> memo;

    int solved_now(const StateSets& sets) const {
        int n = 0;
        for (const auto& s : sets) {
            if (std::any_of(s.begin(), s.end(), [&](const AbstractWorld& w) { return eval_goal(problem.goal, w); })) ++n;
        }
        return n;
    }

    std::pair<int, Program> best(int depth, const StateSets& sets) {
        if (depth == k) return {solved_now(sets), {}};
        int alive = 0;
        for (const auto& s : sets) alive += !s.empty();
        if (alive == 0) return {0, Program(static_cast<std::size_t>(k - depth), lib.front())};
        const auto key = std::make_pair(depth, sets);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (++nodes > budget) throw Error("budget-exceeded", "enumerative oracle exceeded its node budget");
        std::pair<int, Program> out = {-1, {}};
        for (const auto& c : lib) {
            StateSets next(sets.size());
            for (std::size_t w = 0; w < sets.size(); ++w) {
                for (const auto& s : sets[w]) {
                    for (auto& n : successors(c, s, problem.recipes)) next[w].push_back(std::move(n));
                }
                std::sort(next[w].begin(), next[w].end());
                next[w].erase(std::unique(next[w].begin(), next[w].end()), next[w].end());
            }
            auto [count, suffix] = best(depth + 1, next);
            if (count > out.first) {
                suffix.insert(suffix.begin(), c);
                out = {count, std::move(suffix)};
                if (count == alive) break;
            }
        }
        memo.emplace(key, out);
        return out;
    }
};

}  // namespace

OracleResult enumerate_oracle(const SynthesisProblem& problem, int k, std::uint64_t node_budget) {
    problem.validate();
    OracleSearch search{problem, roster(problem.domain()), k, node_budget, 0, {}};
    StateSets start;
    for (const auto& w : problem.worlds) start.push_back({w});
    auto [count, program] = search.best(0, start);
    OracleResult r;
    r.program = std::move(program);
    r.solved_count = count;
    r.objective = static_cast<double>(count) / static_cast<double>(problem.worlds.size());
    r.nodes = search.nodes;
    return r;
}

bool solvable(const AbstractWorld& world, const GoalSpec& goal, int k_max, const RecipeTable& recipes) {
    SynthesisProblem p;
    p.goal = goal;
    p.worlds = {world};
    p.k_max = k_max;
    p.recipes = recipes;
    for (int k = 1; k <= k_max; ++k) {
        if (enumerate_oracle(p, k).solved_count > 0) return true;
    }
    return false;
}

SynthesisResult synthesize(const SynthesisProblem& problem) {
    problem.validate();
    SynthesisResult best;
    bool have = false;
    double seconds = 0.0;
    for (int k = 1; k <= problem.k_max; ++k) {
        SynthesisResult r = solve_length(problem, k);
        seconds += r.stats.seconds;
        if (!have || r.objective > best.objective) {
            best = r;
            have = true;
        }
        if (r.objective >= problem.theta) break;
    }
    best.stats.seconds = seconds;
    if (best.solved_count == 0) throw Error("no-program", "no program of length <= k_max solves any sampled world");
    return best;
}

std::vector<AbstractWorld> optimistic_worlds(const PartialAbstractState& obs) {
    if (obs.domain == Domain::Craft) {
        const AbstractState& v = obs.craft();
        const int n = v.zones;
        const bool hidden = !obs.all_seen;
        AbstractState s = AbstractState::with_zones(n + (hidden ? 1 : 0));
        s.z = v.z;
        s.iota = v.iota;
        const int m = s.zones;
        for (int i = 0; i < n; ++i) {
            s.rho[i] = v.rho[i];
            s.omega[i] = v.omega[i];
            for (int j = 0; j < n; ++j) s.b[i * m + j] = v.boundary(i, j);
            if (!obs.zone_complete[i]) {
                s.rho[i].fill(kCountCap);
                s.omega[i] = (1u << kNumWorkshops) - 1;
            }
        }
        if (hidden) {
            const int h = n;
            s.rho[h].fill(kCountCap);
            s.omega[h] = (1u << kNumWorkshops) - 1;
            // Incomplete zones may continue into unseen cells and into each other.
            for (int i = 0; i < n; ++i) {
                if (obs.zone_complete[i]) continue;
                s.set_boundary(i, h, Boundary::Connected);
            }
            // Complete zones can only reach unseen cells across a wall.
            const Observation& o = obs.obs;
            const ConcreteWorld vw = view_world(o);
            const ZoneMap zm = zone_map(vw);
            for (int idx = 0; idx < static_cast<int>(vw.grid.size()); ++idx) {
                const Cell& c = vw.grid[idx];
                if (c.kind != CellKind::Water && c.kind != CellKind::Stone) continue;
                bool unseen_side = false;
                std::vector<int> zs;
                for (Pos q : neighbours(vw.pos_of(idx))) {
                    if (!vw.in_bounds(q)) continue;
                    if (!o.seen[vw.index(q)]) unseen_side = true;
                    else if (zm.label[vw.index(q)] >= 0) zs.push_back(zm.label[vw.index(q)]);
                }
                if (!unseen_side) continue;
                const Boundary type = c.kind == CellKind::Water ? Boundary::Water : Boundary::Stone;
                for (int zi : zs) {
                    if (zi >= n || !obs.zone_complete[zi]) continue;
                    const Boundary cur = s.boundary(zi, h);
                    if (cur == Boundary::NotAdjacent || (cur == Boundary::Stone && type == Boundary::Water)) {
                        s.set_boundary(zi, h, type);
                    }
                }
            }
        }
        // Merge all incomplete zones with the hidden zone, then close `connected`.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j && !obs.zone_complete[i] && !obs.zone_complete[j]) s.set_boundary(i, j, Boundary::Connected);
            }
        }
        for (int via = 0; via < m; ++via) {
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    if (s.connected(i, via) && s.connected(via, j)) s.set_boundary(i, j, Boundary::Connected);
                }
            }
        }
        return {s};
    }
    const BoxAbstractState& v = obs.box();
    BoxAbstractState base = v;
    if (!obs.all_seen) {
        for (int a = 0; a < kNumColors; ++a) {
            for (int c = 0; c < kNumColors; ++c) {
                if (a != c) base.boxes[a][c] = std::max(base.boxes[a][c], 1);
            }
        }
    }
    std::vector<AbstractWorld> out;
    const bool loose_gone = obs.obs.keys_obtained != 0 || obs.obs.held_key >= 0;
    if (v.loose != 0 || loose_gone || obs.all_seen) {
        out.emplace_back(base);
    } else {
        for (int k = 0; k < kNumColors; ++k) {
            BoxAbstractState s = base;
            s.loose = static_cast<std::uint16_t>(1u << k);
            out.emplace_back(s);
        }
    }
    return out;
}

SynthesisResult synthesize_optimistic(const PartialAbstractState& obs, const GoalSpec& goal, int k_max,
                                      const RecipeTable& recipes) {
    const auto start = std::chrono::steady_clock::now();
    const auto& lib = roster(obs.domain);
    std::vector<AbstractWorld> init = optimistic_worlds(obs);
    std::sort(init.begin(), init.end());
    struct Node {
        Program program;
        std::vector<AbstractWorld> states;
    };
    std::vector<Node> frontier = {{{}, init}};
    std::set<std::vector<AbstractWorld>> visited = {init};
    for (int k = 1; k <= k_max; ++k) {
        std::vector<Node> next_frontier;
        for (const auto& node : frontier) {
            for (const auto& c : lib) {
                std::vector<AbstractWorld> next;
                for (const auto& s : node.states) {
                    for (auto& n : successors(c, s, recipes)) next.push_back(std::move(n));
                }
                if (next.empty()) continue;
                std::sort(next.begin(), next.end());
                next.erase(std::unique(next.begin(), next.end()), next.end());
                Program p = node.program;
                p.push_back(c);
                if (std::any_of(next.begin(), next.end(), [&](const AbstractWorld& s) { return eval_goal(goal, s); })) {
                    SynthesisResult r;
                    r.program = std::move(p);
                    r.k = k;
                    r.objective = 1.0;
                    r.solved_count = 1;
                    r.solved = {true};
                    r.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    return r;
                }
                if (visited.insert(next).second) next_frontier.push_back({std::move(p), std::move(next)});
            }
        }
        frontier = std::move(next_frontier);
        if (frontier.empty()) break;
    }
    throw Error("no-program", "no program succeeds on any optimistic completion");
}

}  // namespace mpps
