#include "mpps/abstraction.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

#include "mpps/mapgen.hpp"

namespace mpps {

namespace {

bool walkable(const Cell& c) { return !c.is_obstacle() && c.kind != CellKind::Unknown; }

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

AbstractState abstract_craft(const ConcreteWorld& w) {
    const ZoneMap zm = zone_map(w);
    const int n = std::max(zm.zones, 1);
    AbstractState s = AbstractState::with_zones(n);
    const int agent_zone = zm.label[w.index(w.agent)];
    s.z = agent_zone < 0 ? 0 : agent_zone;
    for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
        const int zi = zm.label[i];
        if (zi < 0) continue;
        const Cell& c = w.grid[i];
        if (c.kind == CellKind::Resource) {
            s.rho[zi][c.a] = std::min(s.rho[zi][c.a] + 1, kCountCap);
        } else if (c.kind == CellKind::Workshop) {
            s.omega[zi] |= static_cast<std::uint8_t>(1u << c.a);
        }
    }
    for (int o = 0; o < kNumObjects; ++o) s.iota[o] = std::clamp(w.inventory[o], 0, kCountCap);

    UnionFind uf(n);
    for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
        if (zm.label[i] < 0) continue;
        const Pos p = w.pos_of(i);
        for (Pos q : {Pos{p.row, p.col + 1}, Pos{p.row + 1, p.col}}) {
            if (!w.in_bounds(q)) continue;
            const int lj = zm.label[w.index(q)];
            if (lj >= 0 && lj != zm.label[i]) uf.unite(zm.label[i], lj);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (uf.find(i) == uf.find(j)) s.set_boundary(i, j, Boundary::Connected);
        }
    }
    for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
        const Cell& c = w.grid[i];
        if (!c.is_obstacle()) continue;
        const Boundary type = c.kind == CellKind::Water ? Boundary::Water : Boundary::Stone;
        std::array<int, 4> adj{};
        int count = 0;
        for (Pos q : neighbours(w.pos_of(i))) {
            if (!w.in_bounds(q)) continue;
            const int l = zm.label[w.index(q)];
            if (l >= 0) adj[count++] = l;
        }
        for (int a = 0; a < count; ++a) {
            for (int b = 0; b < count; ++b) {
                const int za = adj[a], zb = adj[b];
                if (za == zb) continue;
                const Boundary cur = s.boundary(za, zb);
                if (cur == Boundary::Connected || cur == Boundary::Water) continue;
                if (cur == Boundary::NotAdjacent || type == Boundary::Water) s.set_boundary(za, zb, type);
            }
        }
    }
    return s;
}

BoxAbstractState abstract_box(const ConcreteWorld& w) {
    BoxAbstractState s;
    for (const Cell& c : w.grid) {
        switch (c.kind) {
            case CellKind::BoxKey:
            case CellKind::OpenKey:
                if (c.b == kHiddenColor) break;
                s.boxes[c.a][c.b] = std::min(s.boxes[c.a][c.b] + 1, kCountCap);
                break;
            case CellKind::LooseKey: s.loose |= static_cast<std::uint16_t>(1u << c.a); break;
            default: break;
        }
    }
    if (w.held_key >= 0) s.held = static_cast<std::uint16_t>(1u << w.held_key);
    return s;
}

}  // namespace

AbstractState AbstractState::with_zones(int n) {
    AbstractState s;
    s.zones = n;
    s.b.assign(static_cast<std::size_t>(n * n), Boundary::NotAdjacent);
    for (int i = 0; i < n; ++i) s.b[i * n + i] = Boundary::Connected;
    s.rho.assign(n, {});
    s.omega.assign(n, 0);
    return s;
}

void AbstractState::validate() const {
    auto fail = [](const std::string& m) { throw Error("invalid-abstract-state", m); };
    if (zones < 1) fail("zone count must be >= 1");
    if (z < 0 || z >= zones) fail("agent zone out of range");
    if (static_cast<int>(b.size()) != zones * zones || static_cast<int>(rho.size()) != zones ||
        static_cast<int>(omega.size()) != zones) {
        fail("field sizes do not match zone count");
    }
    for (int i = 0; i < zones; ++i) {
        if (boundary(i, i) != Boundary::Connected) fail("b[i][i] must be connected");
        for (int j = 0; j < zones; ++j) {
            if (boundary(i, j) != boundary(j, i)) fail("b must be symmetric");
        }
        for (int r : rho[i]) {
            if (r < 0 || r > kCountCap) fail("resource count out of range");
        }
        if (omega[i] >> kNumWorkshops) fail("unknown workshop bit");
    }
    for (int v : iota) {
        if (v < 0 || v > kCountCap) fail("inventory count out of range");
    }
}

void BoxAbstractState::validate() const {
    auto fail = [](const std::string& m) { throw Error("invalid-abstract-state", m); };
    for (const auto& row : boxes) {
        for (int v : row) {
            if (v < 0 || v > kCountCap) fail("box count out of range");
        }
    }
    if (std::popcount(loose) > 1) fail("more than one loose key");
    if (std::popcount(held) > 1) fail("agent holds more than one key");
    if ((loose | held) >> kNumColors) fail("unknown colour bit");
}

std::string to_string(const AbstractWorld& w) {
    std::ostringstream out;
    if (const auto* s = std::get_if<AbstractState>(&w)) {
        out << "z=" << s->z << " zones=" << s->zones;
        for (int i = 0; i < s->zones; ++i) {
            out << " | zone " << i << ":";
            for (int r = 0; r < kNumResources; ++r) {
                if (s->rho[i][r]) out << " " << name_of(resource_at(r)) << "=" << s->rho[i][r];
            }
            for (int k = 0; k < kNumWorkshops; ++k) {
                if (s->has_workshop(i, static_cast<Workshop>(k))) out << " " << name_of(static_cast<Workshop>(k));
            }
            for (int j = i + 1; j < s->zones; ++j) out << " b" << j << "=" << name_of(s->boundary(i, j));
        }
        out << " | inv:";
        for (int o = 0; o < kNumObjects; ++o) {
            if (s->iota[o]) out << " " << name_of(static_cast<Object>(o)) << "=" << s->iota[o];
        }
    } else {
        const auto& b = std::get<BoxAbstractState>(w);
        out << "boxes:";
        for (int k = 0; k < kNumColors; ++k) {
            for (int l = 0; l < kNumColors; ++l) {
                if (b.boxes[k][l]) out << " " << color_name(k) << "<" << color_name(l) << "x" << b.boxes[k][l];
            }
        }
        out << " | loose:";
        for (int k = 0; k < kNumColors; ++k) {
            if (b.loose >> k & 1u) out << " " << color_name(k);
        }
        out << " | held:";
        for (int k = 0; k < kNumColors; ++k) {
            if (b.held >> k & 1u) out << " " << color_name(k);
        }
    }
    return out.str();
}

ZoneMap zone_map(const ConcreteWorld& w) {
    ZoneMap zm;
    std::vector<Cell> initial = w.initial;
    zm.label = label_zones(initial, w.rows, w.cols, &zm.zones);
    std::vector<int> pending;
    for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
        if (walkable(w.grid[i]) && zm.label[i] < 0) pending.push_back(i);
    }
    // Opened cells inherit a neighbour's zone; repeat for chains of opened cells.
    bool changed = true;
    while (!pending.empty() && changed) {
        changed = false;
        std::vector<int> next;
        std::vector<int> assigned(pending.size(), -1);
        for (std::size_t k = 0; k < pending.size(); ++k) {
            for (Pos q : neighbours(w.pos_of(pending[k]))) {
                if (!w.in_bounds(q)) continue;
                const int l = zm.label[w.index(q)];
                if (l >= 0) {
                    assigned[k] = l;
                    break;
                }
            }
        }
        for (std::size_t k = 0; k < pending.size(); ++k) {
            if (assigned[k] >= 0) {
                zm.label[pending[k]] = assigned[k];
                changed = true;
            } else {
                next.push_back(pending[k]);
            }
        }
        pending = std::move(next);
    }
    for (int i : pending) zm.label[i] = zm.zones++;
    return zm;
}

AbstractWorld abstract_full(const ConcreteWorld& w) {
    if (w.domain == Domain::Craft) return abstract_craft(w);
    return abstract_box(w);
}

ConcreteWorld view_world(const Observation& o) {
    ConcreteWorld w;
    w.domain = o.domain;
    w.rows = o.rows;
    w.cols = o.cols;
    w.grid = o.known;
    w.initial = o.first_seen;
    w.seen = o.seen;
    w.agent = o.agent;
    w.start = o.start;
    w.facing = o.facing;
    w.inventory = o.inventory;
    w.held_key = o.held_key;
    w.keys_obtained = o.keys_obtained;
    w.t = o.t;
    w.horizon = o.horizon;
    w.view_radius = 0;
    return w;
}

PartialAbstractState abstract_observed(const Observation& o) {
    PartialAbstractState p;
    p.domain = o.domain;
    const ConcreteWorld vw = view_world(o);
    p.view = abstract_full(vw);
    p.unseen_cells = o.unseen_count();
    p.all_seen = p.unseen_cells == 0;
    p.unknown_field_count = p.unseen_cells + (p.all_seen ? 0 : 1);
    if (o.domain == Domain::Craft) {
        const ZoneMap zm = zone_map(vw);
        const int n = std::get<AbstractState>(p.view).zones;
        p.zone_complete.assign(n, 1);
        p.zone_anchor.assign(n, Pos{-1, -1});
        for (int i = 0; i < static_cast<int>(vw.grid.size()); ++i) {
            const int l = zm.label[i];
            if (l < 0) continue;
            if (p.zone_anchor[l].row < 0) p.zone_anchor[l] = vw.pos_of(i);
            if (!o.seen[i]) p.zone_complete[l] = 0;
            for (Pos q : neighbours(vw.pos_of(i))) {
                if (vw.in_bounds(q) && !o.seen[vw.index(q)]) p.zone_complete[l] = 0;
            }
        }
    }
    p.obs = o;
    return p;
}

bool eval_goal(const GoalSpec& goal, const AbstractWorld& s) {
    const Domain d = domain_of(s);
    return std::all_of(goal.atoms.begin(), goal.atoms.end(), [&](const GoalAtom& a) {
        if (a.kind == GoalAtom::Kind::Inventory) {
            if (d != Domain::Craft || a.what < 0 || a.what >= kNumObjects) {
                throw Error("unknown-symbol", "inventory atom on a non-craft state");
            }
            return std::get<AbstractState>(s).iota[a.what] >= a.at_least;
        }
        if (d != Domain::Box || a.what < 0 || a.what >= kNumColors) {
            throw Error("unknown-symbol", "key atom on a non-box state");
        }
        return (std::get<BoxAbstractState>(s).held >> a.what & 1u) != 0;
    });
}

}  // namespace mpps
