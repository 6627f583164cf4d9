#include "mpps/world.hpp"

#include <algorithm>

namespace mpps {

std::array<Pos, 4> neighbours(Pos p) {
    return {Pos{p.row - 1, p.col}, Pos{p.row, p.col - 1}, Pos{p.row, p.col + 1},
            Pos{p.row + 1, p.col}};
}

int Observation::unseen_count() const {
    return static_cast<int>(std::count(seen.begin(), seen.end(), std::uint8_t{0}));
}

void reveal(ConcreteWorld& w) {
    const int r = w.view_radius;
    for (int dr = -r; dr <= r; ++dr) {
        for (int dc = -r; dc <= r; ++dc) {
            const Pos p{w.agent.row + dr, w.agent.col + dc};
            if (w.in_bounds(p)) w.seen[w.index(p)] = 1;
        }
    }
}

Observation reset(ConcreteWorld& w) {
    w.seen.assign(w.grid.size(), 0);
    w.t = 0;
    reveal(w);
    return observe(w);
}

namespace {

// A box's lock colour is only visible once the lock cell itself was seen.
Cell mask_cell(const ConcreteWorld& w, int i, const Cell& c) {
    if (c.kind != CellKind::BoxKey) return c;
    const Pos lock = {w.pos_of(i).row, w.pos_of(i).col + 1};
    if (w.in_bounds(lock) && w.seen[w.index(lock)]) return c;
    Cell out = c;
    out.b = kHiddenColor;
    return out;
}

void apply_craft_use(ConcreteWorld& w, const RecipeTable& recipes) {
    auto eligible = [&](Pos p) {
        if (!w.in_bounds(p)) return false;
        const Cell& c = w.at(p);
        switch (c.kind) {
            case CellKind::Resource: return true;
            case CellKind::Workshop:
                return !recipes.depleted(static_cast<Workshop>(c.a), w.inventory);
            case CellKind::Water: return w.inventory[index_of(Object::Bridge)] > 0;
            case CellKind::Stone: return w.inventory[index_of(Object::Axe)] > 0;
            default: return false;
        }
    };
    std::vector<Pos> order = {w.agent, step_toward(w.agent, w.facing)};
    for (Pos n : neighbours(w.agent)) order.push_back(n);
    auto it = std::find_if(order.begin(), order.end(), eligible);
    if (it == order.end()) return;
    Cell& c = w.at(*it);
    switch (c.kind) {
        case CellKind::Resource:
            w.inventory[c.a] += 1;
            c = Cell::empty();
            break;
        case CellKind::Workshop: {
            const auto ws = static_cast<Workshop>(c.a);
            const Inventory after = recipes.craft(ws, w.inventory);
            // Raw resources leaving the inventory are spent for good.
            for (int r = 0; r < kNumResources; ++r) w.consumed[r] += w.inventory[r] - after[r];
            w.inventory = after;
            break;
        }
        case CellKind::Water:
            w.inventory[index_of(Object::Bridge)] -= 1;
            c = Cell::empty();
            break;
        case CellKind::Stone:
            w.inventory[index_of(Object::Axe)] -= 1;
            c = Cell::empty();
            break;
        default: break;
    }
}

void apply_box_move(ConcreteWorld& w, Pos target) {
    if (!w.in_bounds(target)) return;
    Cell& c = w.at(target);
    auto take = [&](int color) {
        w.held_key = color;
        w.keys_obtained |= static_cast<std::uint16_t>(1u << color);
    };
    switch (c.kind) {
        case CellKind::Empty: w.agent = target; break;
        case CellKind::Lock: {
            if (w.held_key != c.a) return;
            c = Cell::empty();
            w.agent = target;
            const Pos key = {target.row, target.col - 1};
            if (w.in_bounds(key) && w.at(key).kind == CellKind::BoxKey) {
                w.at(key).kind = CellKind::OpenKey;
            }
            break;
        }
        case CellKind::OpenKey:
        case CellKind::LooseKey:
            take(c.a);
            c = Cell::empty();
            w.agent = target;
            break;
        default: break;
    }
}

}  // namespace

Observation observe(const ConcreteWorld& w) {
    Observation o;
    o.domain = w.domain;
    o.rows = w.rows;
    o.cols = w.cols;
    o.seen = w.seen;
    o.known.assign(w.grid.size(), Cell::unknown());
    o.first_seen.assign(w.grid.size(), Cell::unknown());
    for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
        if (!w.seen[i]) continue;
        o.known[i] = mask_cell(w, i, w.grid[i]);
        o.first_seen[i] = mask_cell(w, i, w.initial[i]);
    }
    o.agent = w.agent;
    o.start = w.start;
    o.facing = w.facing;
    o.inventory = w.inventory;
    o.held_key = w.held_key;
    o.keys_obtained = w.keys_obtained;
    o.t = w.t;
    o.horizon = w.horizon;
    return o;
}

void apply(ConcreteWorld& w, Action a, const RecipeTable& recipes) {
    if (w.t >= w.horizon) throw Error("episode-over", "step after the horizon");
    if (w.domain == Domain::Craft) {
        if (a == Action::Use) {
            apply_craft_use(w, recipes);
        } else {
            w.facing = a;
            const Pos target = step_toward(w.agent, a);
            if (w.in_bounds(target) && !w.at(target).is_obstacle()) w.agent = target;
        }
    } else if (a != Action::Use) {
        w.facing = a;
        apply_box_move(w, step_toward(w.agent, a));
    }
    w.t += 1;
    reveal(w);
}

std::pair<ConcreteWorld, Observation> step(const ConcreteWorld& w, Action a,
                                           const RecipeTable& recipes) {
    ConcreteWorld next = w;
    apply(next, a, recipes);
    Observation o = observe(next);
    return {std::move(next), std::move(o)};
}

bool goal_satisfied(const ConcreteWorld& w, const GoalSpec& goal) {
    return std::all_of(goal.atoms.begin(), goal.atoms.end(), [&](const GoalAtom& a) {
        if (a.kind == GoalAtom::Kind::Inventory) return w.inventory[a.what] >= a.at_least;
        return (w.keys_obtained >> a.what & 1u) != 0;
    });
}

}  // namespace mpps
