#include "mpps/prototypes.hpp"

#include <bit>
#include <cctype>

namespace mpps {

std::string Prototype::name() const {
    switch (kind) {
        case Kind::GetResource:
        case Kind::UseTool: {
            const std::string verb = kind == Kind::GetResource ? "get-" : "use-";
            return verb + std::string(name_of(static_cast<Object>(arg)));
        }
        case Kind::UseWorkshop: return "use-" + std::string(name_of(static_cast<Workshop>(arg)));
        case Kind::GetKey: return "get-" + std::string(color_name(arg));
    }
    return "?";
}

std::optional<Prototype> parse_prototype(std::string_view name) {
    for (Domain d : {Domain::Craft, Domain::Box}) {
        for (const auto& p : roster(d)) {
            if (p.name() == name) return p;
        }
    }
    return std::nullopt;
}

const std::vector<Prototype>& roster(Domain d) {
    static const std::vector<Prototype> craft = [] {
        std::vector<Prototype> r;
        for (int i = 0; i < kNumResources; ++i) r.push_back(Prototype::get(resource_at(i)));
        r.push_back(Prototype::use_tool(Object::Bridge));
        r.push_back(Prototype::use_tool(Object::Axe));
        for (int w = 0; w < kNumWorkshops; ++w) r.push_back(Prototype::use(static_cast<Workshop>(w)));
        return r;
    }();
    static const std::vector<Prototype> box = [] {
        std::vector<Prototype> r;
        for (int k = 0; k < kNumColors; ++k) r.push_back(Prototype::get_key(k));
        return r;
    }();
    return d == Domain::Craft ? craft : box;
}

std::string to_string(const Program& p) {
    std::string out;
    for (const auto& c : p) {
        if (!out.empty()) out += "; ";
        out += c.name();
    }
    return out;
}

Program parse_program(std::string_view text) {
    Program p;
    while (!text.empty()) {
        const auto semi = text.find(';');
        auto part = text.substr(0, semi);
        while (!part.empty() && std::isspace(static_cast<unsigned char>(part.front()))) part.remove_prefix(1);
        while (!part.empty() && std::isspace(static_cast<unsigned char>(part.back()))) part.remove_suffix(1);
        if (!part.empty()) {
            const auto c = parse_prototype(part);
            if (!c) throw Error("unknown-symbol", "unknown component '" + std::string(part) + "'");
            p.push_back(*c);
        }
        text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    }
    return p;
}

Boundary tool_boundary(Object tool) {
    return tool == Object::Bridge ? Boundary::Water : Boundary::Stone;
}

namespace {

bool same_structure(const AbstractState& a, const AbstractState& b) {
    return a.zones == b.zones && a.b.size() == b.b.size() && a.rho.size() == b.rho.size() &&
           a.omega.size() == b.omega.size();
}

bool in_range(const AbstractState& s) {
    if (s.z < 0 || s.z >= s.zones) return false;
    for (const auto& row : s.rho) {
        for (int v : row) {
            if (v < 0 || v > kCountCap) return false;
        }
    }
    for (int v : s.iota) {
        if (v < 0 || v > kCountCap) return false;
    }
    return true;
}

std::optional<TransitionCheck> check_get(const Prototype& p, const AbstractState& sm,
                                         const AbstractState& sp) {
    const int r = p.arg, i = sm.z, j = sp.z;
    if (!sm.connected(i, j)) return std::nullopt;
    if (sp.rho[j][r] != sm.rho[j][r] - 1) return std::nullopt;
    if (sp.iota[r] != sm.iota[r] + 1) return std::nullopt;
    // Q
    if (sp.b != sm.b || sp.omega != sm.omega) return std::nullopt;
    for (int o = 0; o < kNumObjects; ++o) {
        if (o != r && sp.iota[o] != sm.iota[o]) return std::nullopt;
    }
    for (int zi = 0; zi < sm.zones; ++zi) {
        for (int q = 0; q < kNumResources; ++q) {
            if ((zi != j || q != r) && sp.rho[zi][q] != sm.rho[zi][q]) return std::nullopt;
        }
    }
    TransitionCheck c{p};
    c.i = i;
    c.j = j;
    return c;
}

std::optional<TransitionCheck> check_use_workshop(const Prototype& p, const AbstractState& sm,
                                                  const AbstractState& sp,
                                                  const RecipeTable& recipes) {
    const auto w = static_cast<Workshop>(p.arg);
    const int i = sm.z, j = sp.z;
    if (!sm.connected(i, j)) return std::nullopt;
    if (!sm.has_workshop(j, w)) return std::nullopt;
    // Witness: the priority-order crafting run.
    const auto m = recipes.craft_counts(w, sm.iota);
    int total = 0;
    for (int o = 0; o < kNumObjects; ++o) {
        if (m[o] > 0 && !recipes.makes(w, static_cast<Object>(o))) return std::nullopt;
        total += m[o];
    }
    if (total < 1) return std::nullopt;
    for (int q = 0; q < kNumObjects; ++q) {
        int expect = sm.iota[q];
        for (const auto& rec : recipes.recipes(w)) expect -= rec.needs[q] * m[index_of(rec.product)];
        if (!is_resource(static_cast<Object>(q))) expect += m[q];
        if (sp.iota[q] != expect) return std::nullopt;
    }
    // Depletion: no recipe of w is satisfiable afterwards.
    for (const auto& rec : recipes.recipes(w)) {
        bool all = true;
        for (int q = 0; q < kNumObjects; ++q) all = all && sp.iota[q] >= rec.needs[q];
        if (all) return std::nullopt;
    }
    if (sp.b != sm.b || sp.omega != sm.omega || sp.rho != sm.rho) return std::nullopt;
    TransitionCheck c{p};
    c.i = i;
    c.j = j;
    c.made = m;
    return c;
}

// X of the connectivity closure for the pair (a, b) when i and j are joined.
bool closure_x(const AbstractState& sm, int i, int j, int a, int b) {
    return (sm.connected(a, i) || sm.connected(a, j)) && (sm.connected(b, i) || sm.connected(b, j));
}

std::optional<TransitionCheck> check_use_tool(const Prototype& p, const AbstractState& sm,
                                              const AbstractState& sp) {
    const auto tool = static_cast<Object>(p.arg);
    const int r = p.arg, i = sm.z, j = sp.z;
    if (sm.boundary(i, j) != tool_boundary(tool)) return std::nullopt;
    if (!sp.connected(i, j)) return std::nullopt;
    if (sp.iota[r] != sm.iota[r] - 1) return std::nullopt;
    for (int a = 0; a < sm.zones; ++a) {
        for (int b = 0; b < sm.zones; ++b) {
            const bool x = closure_x(sm, i, j, a, b);
            if (sp.connected(a, b)) {
                if (!sm.connected(a, b) && !x) return std::nullopt;
            } else {
                if (sp.boundary(a, b) != sm.boundary(a, b)) return std::nullopt;
                // Closure: every pair joined through i or j becomes connected.
                if (x) return std::nullopt;
            }
        }
    }
    if (sp.omega != sm.omega || sp.rho != sm.rho) return std::nullopt;
    for (int o = 0; o < kNumObjects; ++o) {
        if (o != r && sp.iota[o] != sm.iota[o]) return std::nullopt;
    }
    TransitionCheck c{p};
    c.i = i;
    c.j = j;
    return c;
}

std::optional<TransitionCheck> check_get_key(const Prototype& p, const BoxAbstractState& sm,
                                             const BoxAbstractState& sp) {
    const int k = p.arg;
    const auto bit = static_cast<std::uint16_t>(1u << k);
    if (std::popcount(sp.held) > 1 || std::popcount(sp.loose) > 1) return std::nullopt;
    // X: pick up the loose key k.
    if ((sm.loose & bit) && (sp.held & bit) && sp.loose == 0 && sp.boxes == sm.boxes) {
        TransitionCheck c{p};
        c.loose_branch = true;
        return c;
    }
    // Y: open a box holding key k with the key currently held.
    if (std::popcount(sm.held) != 1 || !(sp.held & bit) || (sm.held & bit) || sp.loose != sm.loose) {
        return std::nullopt;
    }
    const int k1 = std::countr_zero(sm.held);
    for (int a = 0; a < kNumColors; ++a) {
        for (int b = 0; b < kNumColors; ++b) {
            const int expect = sm.boxes[a][b] - (a == k && b == k1 ? 1 : 0);
            if (sp.boxes[a][b] != expect) return std::nullopt;
        }
    }
    TransitionCheck c{p};
    c.unlocked_with = k1;
    return c;
}

}  // namespace

std::optional<TransitionCheck> check_transition(const Prototype& p, const AbstractWorld& s_minus,
                                                const AbstractWorld& s_plus,
                                                const RecipeTable& recipes) {
    if (domain_of(s_minus) != p.domain() || domain_of(s_plus) != p.domain()) {
        throw Error("domain-mismatch", "prototype " + p.name() + " applied to a state of another domain");
    }
    if (p.domain() == Domain::Box) {
        return check_get_key(p, std::get<BoxAbstractState>(s_minus), std::get<BoxAbstractState>(s_plus));
    }
    const auto& sm = std::get<AbstractState>(s_minus);
    const auto& sp = std::get<AbstractState>(s_plus);
    if (!same_structure(sm, sp) || !in_range(sm) || !in_range(sp)) return std::nullopt;
    switch (p.kind) {
        case Prototype::Kind::GetResource: return check_get(p, sm, sp);
        case Prototype::Kind::UseWorkshop: return check_use_workshop(p, sm, sp, recipes);
        case Prototype::Kind::UseTool: return check_use_tool(p, sm, sp);
        default: return std::nullopt;
    }
}

std::vector<AbstractState> successors(const Prototype& p, const AbstractState& s,
                                      const RecipeTable& recipes) {
    if (p.domain() != Domain::Craft) throw Error("domain-mismatch", p.name() + " is not a craft prototype");
    std::vector<AbstractState> out;
    const int i = s.z;
    switch (p.kind) {
        case Prototype::Kind::GetResource: {
            const int r = p.arg;
            if (s.iota[r] >= kCountCap) break;
            for (int j = 0; j < s.zones; ++j) {
                if (!s.connected(i, j) || s.rho[j][r] < 1) continue;
                AbstractState n = s;
                n.z = j;
                n.rho[j][r] -= 1;
                n.iota[r] += 1;
                out.push_back(std::move(n));
            }
            break;
        }
        case Prototype::Kind::UseWorkshop: {
            const auto w = static_cast<Workshop>(p.arg);
            if (recipes.depleted(w, s.iota)) break;
            const Inventory after = recipes.craft(w, s.iota);
            bool fits = true;
            for (int v : after) fits = fits && v <= kCountCap;
            if (!fits) break;
            for (int j = 0; j < s.zones; ++j) {
                if (!s.connected(i, j) || !s.has_workshop(j, w)) continue;
                AbstractState n = s;
                n.z = j;
                n.iota = after;
                out.push_back(std::move(n));
            }
            break;
        }
        case Prototype::Kind::UseTool: {
            const int r = p.arg;
            if (s.iota[r] < 1) break;
            const Boundary type = tool_boundary(static_cast<Object>(r));
            for (int j = 0; j < s.zones; ++j) {
                if (s.boundary(i, j) != type) continue;
                AbstractState n = s;
                n.z = j;
                n.iota[r] -= 1;
                for (int a = 0; a < s.zones; ++a) {
                    for (int b = 0; b < s.zones; ++b) {
                        if (closure_x(s, i, j, a, b)) n.b[a * s.zones + b] = Boundary::Connected;
                    }
                }
                out.push_back(std::move(n));
            }
            break;
        }
        default: break;
    }
    return out;
}

std::vector<BoxAbstractState> successors(const Prototype& p, const BoxAbstractState& s) {
    if (p.domain() != Domain::Box) throw Error("domain-mismatch", p.name() + " is not a box prototype");
    std::vector<BoxAbstractState> out;
    const int k = p.arg;
    const auto bit = static_cast<std::uint16_t>(1u << k);
    if (s.loose & bit) {
        BoxAbstractState n = s;
        n.held = bit;
        n.loose = 0;
        out.push_back(n);
    }
    if (std::popcount(s.held) == 1 && !(s.held & bit)) {
        const int k1 = std::countr_zero(s.held);
        if (s.boxes[k][k1] >= 1) {
            BoxAbstractState n = s;
            n.held = bit;
            n.boxes[k][k1] -= 1;
            if (out.empty() || !(out.front() == n)) out.push_back(n);
        }
    }
    return out;
}

std::vector<AbstractWorld> successors(const Prototype& p, const AbstractWorld& s,
                                      const RecipeTable& recipes) {
    if (domain_of(s) != p.domain()) throw Error("domain-mismatch", p.name() + " applied to a state of another domain");
    std::vector<AbstractWorld> out;
    if (const auto* c = std::get_if<AbstractState>(&s)) {
        for (auto& n : successors(p, *c, recipes)) out.emplace_back(std::move(n));
    } else {
        for (auto& n : successors(p, std::get<BoxAbstractState>(s))) out.emplace_back(n);
    }
    return out;
}

Monitor::Monitor(Prototype p, Observation snapshot, const RecipeTable& recipes)
    : proto_(p), snapshot_(std::move(snapshot)), recipes_(&recipes) {}

std::pair<AbstractWorld, AbstractWorld> Monitor::abstract_pair(const Observation& o) const {
    ConcreteWorld now = view_world(o);
    // Cells unseen at the snapshot cannot have changed before they were first
    // seen, so their first-seen contents stand in for their snapshot contents.
    ConcreteWorld then = now;
    for (int i = 0; i < static_cast<int>(then.grid.size()); ++i) {
        if (i < static_cast<int>(snapshot_.seen.size()) && snapshot_.seen[i]) {
            Cell c = snapshot_.known[i];
            if (c.kind == CellKind::BoxKey && c.b == kHiddenColor) c.b = o.first_seen[i].b;
            then.grid[i] = c;
        } else {
            then.grid[i] = o.first_seen[i];
        }
    }
    then.agent = snapshot_.agent;
    then.facing = snapshot_.facing;
    then.inventory = snapshot_.inventory;
    then.held_key = snapshot_.held_key;
    then.keys_obtained = snapshot_.keys_obtained;
    then.t = snapshot_.t;
    return {abstract_full(then), abstract_full(now)};
}

std::optional<TransitionCheck> Monitor::check(const Observation& o) const {
    const auto [then, now] = abstract_pair(o);
    return check_transition(proto_, then, now, *recipes_);
}

}  // namespace mpps
