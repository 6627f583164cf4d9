#include "mpps/hallucinator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace mpps {

namespace {

std::array<int, kNumResources> rho_total(const AbstractState& s) {
    std::array<int, kNumResources> t{};
    for (const auto& row : s.rho) {
        for (int r = 0; r < kNumResources; ++r) t[r] += row[r];
    }
    return t;
}

std::uint8_t omega_union(const AbstractState& s) {
    std::uint8_t u = 0;
    for (auto w : s.omega) u |= w;
    return u;
}

bool loose_key_taken(const Observation& o) {
    for (std::size_t i = 0; i < o.first_seen.size(); ++i) {
        if (o.first_seen[i].kind == CellKind::LooseKey && o.known[i].kind != CellKind::LooseKey) return true;
    }
    return false;
}

bool craft_agrees(const PartialAbstractState& obs, const AbstractState& s) {
    const AbstractState& v = obs.craft();
    if (obs.all_seen) return s == v;
    if (s.iota != v.iota) return false;
    if (s.z < 0 || s.z >= s.zones) return false;
    const int vz = v.z;
    if (obs.zone_complete[vz]) {
        if (s.rho[s.z] != v.rho[vz] || s.omega[s.z] != v.omega[vz]) return false;
    } else {
        for (int r = 0; r < kNumResources; ++r) {
            if (s.rho[s.z][r] < v.rho[vz][r]) return false;
        }
        if ((s.omega[s.z] & v.omega[vz]) != v.omega[vz]) return false;
    }
    const auto st = rho_total(s), vt = rho_total(v);
    for (int r = 0; r < kNumResources; ++r) {
        if (st[r] < vt[r]) return false;
    }
    const auto vu = omega_union(v);
    return (omega_union(s) & vu) == vu;
}

bool box_agrees(const PartialAbstractState& obs, const BoxAbstractState& s) {
    const BoxAbstractState& v = obs.box();
    if (obs.all_seen) return s == v;
    if (s.held != v.held) return false;
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) {
            if (s.boxes[a][c] < v.boxes[a][c]) return false;
        }
    }
    if (v.loose != 0 || loose_key_taken(obs.obs)) return s.loose == v.loose;
    return true;
}

AbstractState craft_overwrite(const PartialAbstractState& obs, AbstractState s) {
    const AbstractState& v = obs.craft();
    if (obs.all_seen) return v;
    s.iota = v.iota;
    const int a = s.z;
    const int vz = v.z;
    const bool agent_complete = obs.zone_complete[vz] != 0;
    if (agent_complete) {
        s.rho[a] = v.rho[vz];
        s.omega[a] = v.omega[vz];
    } else {
        for (int r = 0; r < kNumResources; ++r) s.rho[a][r] = std::max(s.rho[a][r], v.rho[vz][r]);
        s.omega[a] |= v.omega[vz];
    }
    // Place missing observed contents in some other zone, adding one if needed.
    auto other_zone = [&]() {
        for (int i = 0; i < s.zones; ++i) {
            if (i != a) return i;
        }
        if (!agent_complete) return a;
        AbstractState g = AbstractState::with_zones(s.zones + 1);
        g.z = s.z;
        g.iota = s.iota;
        for (int i = 0; i < s.zones; ++i) {
            g.rho[i] = s.rho[i];
            g.omega[i] = s.omega[i];
            for (int j = 0; j < s.zones; ++j) g.b[i * g.zones + j] = s.boundary(i, j);
        }
        s = std::move(g);
        return s.zones - 1;
    };
    const auto st = rho_total(s), vt = rho_total(v);
    for (int r = 0; r < kNumResources; ++r) {
        if (st[r] < vt[r]) {
            const int i = other_zone();
            s.rho[i][r] += vt[r] - st[r];
        }
    }
    const auto missing = static_cast<std::uint8_t>(omega_union(v) & ~omega_union(s));
    if (missing != 0) s.omega[other_zone()] |= missing;
    return s;
}

BoxAbstractState box_overwrite(const PartialAbstractState& obs, BoxAbstractState s) {
    const BoxAbstractState& v = obs.box();
    if (obs.all_seen) return v;
    s.held = v.held;
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) s.boxes[a][c] = std::max(s.boxes[a][c], v.boxes[a][c]);
    }
    if (v.loose != 0 || loose_key_taken(obs.obs)) s.loose = v.loose;
    return s;
}

}  // namespace

bool agrees_with(const PartialAbstractState& obs, const AbstractWorld& s) {
    if (domain_of(s) != obs.domain) return false;
    if (obs.domain == Domain::Craft) return craft_agrees(obs, std::get<AbstractState>(s));
    return box_agrees(obs, std::get<BoxAbstractState>(s));
}

AbstractWorld overwrite_known(const PartialAbstractState& obs, AbstractWorld s) {
    if (domain_of(s) != obs.domain) throw Error("domain-mismatch", "sample and observation domains differ");
    if (obs.domain == Domain::Craft) return craft_overwrite(obs, std::get<AbstractState>(std::move(s)));
    return box_overwrite(obs, std::get<BoxAbstractState>(std::move(s)));
}

ConcreteWorld complete_world(const Observation& o, const std::vector<Cell>& initial) {
    ConcreteWorld w;
    w.domain = o.domain;
    w.rows = o.rows;
    w.cols = o.cols;
    w.initial = initial;
    w.grid.resize(initial.size());
    for (std::size_t i = 0; i < initial.size(); ++i) {
        if (!o.seen[i]) {
            w.grid[i] = initial[i];
            continue;
        }
        Cell c = o.known[i];
        if ((c.kind == CellKind::BoxKey || c.kind == CellKind::OpenKey) && c.b == kHiddenColor) c.b = initial[i].b;
        w.grid[i] = c;
        Cell& f = w.initial[i];
        if (f.kind == CellKind::BoxKey && f.b == kHiddenColor) f.b = initial[i].b;
    }
    w.seen = o.seen;
    w.agent = o.agent;
    w.start = o.start;
    w.facing = o.facing;
    w.inventory = o.inventory;
    w.held_key = o.held_key;
    w.keys_obtained = o.keys_obtained;
    w.t = o.t;
    w.horizon = o.horizon;
    return w;
}

std::vector<TrainingPair> collect_dataset(const EnvConfig& cfg, int n_pairs, std::uint64_t seed) {
    if (n_pairs <= 0) throw Error("invalid-config", "n_pairs must be positive");
    std::vector<TrainingPair> out;
    out.reserve(static_cast<std::size_t>(n_pairs));
    Rng rng(seed);
    const RecipeTable recipes = RecipeTable::defaults();
    const int n_actions = cfg.domain == Domain::Craft ? kNumCraftActions : kNumBoxActions;
    std::uniform_int_distribution<int> pick(0, n_actions - 1);
    while (static_cast<int>(out.size()) < n_pairs) {
        ConcreteWorld w = generate_map(cfg, rng());
        Observation o = reset(w);
        for (int t = 0; t < cfg.horizon && static_cast<int>(out.size()) < n_pairs; ++t) {
            out.push_back({abstract_observed(o), abstract_full(w)});
            apply(w, static_cast<Action>(pick(rng)), recipes);
            o = observe(w);
        }
    }
    return out;
}

std::uint64_t digest(const Observation& o) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(o.domain));
    for (std::size_t i = 0; i < o.known.size(); ++i) {
        mix(o.seen[i]);
        mix(static_cast<std::uint64_t>(o.known[i].kind) << 16 | o.known[i].a << 8 | o.known[i].b);
        mix(static_cast<std::uint64_t>(o.first_seen[i].kind) << 16 | o.first_seen[i].a << 8 | o.first_seen[i].b);
    }
    mix(static_cast<std::uint64_t>(o.agent.row) << 8 | static_cast<std::uint64_t>(o.agent.col));
    mix(static_cast<std::uint64_t>(o.start.row) << 8 | static_cast<std::uint64_t>(o.start.col));
    for (int v : o.inventory) mix(static_cast<std::uint64_t>(v));
    mix(static_cast<std::uint64_t>(o.held_key + 1));
    mix(o.keys_obtained);
    mix(static_cast<std::uint64_t>(o.t));
    return h;
}

// ---------------------------------------------------------------- exact posterior

ExactPosterior::ExactPosterior(EnvConfig cfg, std::uint64_t budget) : cfg_(std::move(cfg)), budget_(budget) {
    if (cfg_.domain == Domain::Craft) layouts_ = craft_layouts(cfg_.craft);
}

SampledWorldSet ExactPosterior::sample(const Observation& o, int m, std::uint64_t seed) const {
    if (m < 1) throw Error("invalid-config", "m must be >= 1");
    Rng rng(seed);
    SampledWorldSet out;
    out.backend = "exact";
    out.obs_digest = digest(o);
    for (const auto& cells : sample_maps(o, m, rng)) out.worlds.push_back(abstract_full(complete_world(o, cells)));
    return out;
}

SampledWorldSet ExactPosterior::sample(const Observation& o, int m, std::uint64_t seed, const MapFilter& keep,
                                       int filter_budget) const {
    if (!keep) return sample(o, m, seed);
    if (m < 1) throw Error("invalid-config", "m must be >= 1");
    Rng rng(seed);
    SampledWorldSet out;
    out.backend = "exact";
    out.obs_digest = digest(o);
    std::vector<std::vector<Cell>> kept, dropped;
    int drawn = 0;
    while (static_cast<int>(kept.size()) < m && drawn < filter_budget) {
        for (auto& cells : sample_maps(o, std::min(4 * m, filter_budget - drawn), rng)) {
            ++drawn;
            if (static_cast<int>(kept.size()) < m && keep(cells)) kept.push_back(std::move(cells));
            else if (dropped.size() < static_cast<std::size_t>(m)) dropped.push_back(std::move(cells));
        }
    }
    out.rejected = drawn - static_cast<int>(kept.size());
    for (std::size_t i = 0; kept.size() < static_cast<std::size_t>(m); ++i) {
        out.filter_exhausted = true;
        kept.push_back(dropped[i]);
    }
    for (const auto& cells : kept) out.worlds.push_back(abstract_full(complete_world(o, cells)));
    return out;
}

std::vector<std::vector<Cell>> ExactPosterior::sample_maps(const Observation& o, int m, Rng& rng) const {
    if (o.domain != cfg_.domain) throw Error("domain-mismatch", "observation and generator domains differ");
    return o.domain == Domain::Craft ? sample_craft(o, m, rng) : sample_box(o, m, rng);
}

std::vector<std::vector<Cell>> ExactPosterior::sample_craft(const Observation& o, int m, Rng& rng) const {
    const auto& gc = cfg_.craft;
    if (o.rows != gc.rows || o.cols != gc.cols) throw Error("invalid-config", "observation size differs from generator");
    const int start = o.index(o.start);
    const int n = o.rows * o.cols;
    std::vector<double> logw(layouts_.size(), -INFINITY);
    std::vector<std::vector<int>> zones(layouts_.size());
    for (std::size_t li = 0; li < layouts_.size(); ++li) {
        const Layout& l = layouts_[li];
        zones[li] = label_zones(l.cells, gc.rows, gc.cols);
        if (l.cells[start].is_obstacle()) continue;
        const int sz = zones[li][start];
        int passable = 0;
        for (const auto& c : l.cells) passable += !c.is_obstacle();
        double lw = std::log(l.weight) - std::log(static_cast<double>(passable));
        for (int i = 0; i < n && std::isfinite(lw); ++i) {
            if (!o.seen[i]) continue;
            const Cell& c = o.first_seen[i];
            if (l.cells[i].is_obstacle() || c.is_obstacle()) {
                if (c.kind != l.cells[i].kind) lw = -INFINITY;
                continue;
            }
            if (i == start) {
                if (c.kind != CellKind::Empty) lw = -INFINITY;
                continue;
            }
            const auto& table = zones[li][i] == sz ? gc.start_zone : gc.other_zone;
            const double p = table[content_category(c)];
            lw = p > 0 ? lw + std::log(p) : -INFINITY;
        }
        logw[li] = lw;
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) throw Error("sampling-exhausted", "no layout is consistent with the observation");
    std::vector<double> w(logw.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - top) : 0.0;
    std::discrete_distribution<int> pick_layout(w.begin(), w.end());
    std::discrete_distribution<int> start_cat(gc.start_zone.begin(), gc.start_zone.end());
    std::discrete_distribution<int> other_cat(gc.other_zone.begin(), gc.other_zone.end());

    std::vector<std::vector<Cell>> out;
    std::uint64_t attempts = 0;
    while (static_cast<int>(out.size()) < m) {
        if (++attempts > budget_) throw Error("sampling-exhausted", "exact craft posterior exceeded its budget");
        const int li = pick_layout(rng);
        const auto& z = zones[li];
        std::vector<Cell> cells = layouts_[li].cells;
        for (int i = 0; i < n; ++i) {
            if (cells[i].is_obstacle() || i == start) continue;
            if (o.seen[i]) cells[i] = o.first_seen[i];
            else cells[i] = cell_of_category(z[i] == z[start] ? start_cat(rng) : other_cat(rng));
        }
        if (craft_contents_ok(cells, z, z[start], gc.cap)) out.push_back(std::move(cells));
    }
    return out;
}

namespace {

// What the observation says about one box slot.
struct SlotInfo {
    enum class Kind { Free, None, NoneOrLoose, Loose, Box };
    Kind kind = Kind::Free;
    int key = -1;   // -1: any
    int lock = -1;  // -1: any
};

struct BoxShapeChoice {
    int goal_length = 1;
    std::vector<int> attach;
    double prior = 0.0;
    int items() const { return 1 + goal_length + static_cast<int>(attach.size()); }
    int colors() const { return goal_length + 1 + static_cast<int>(attach.size()); }
    int key_pos(int item) const { return item; }
    // Item 0 is the loose key; 1..L the chain boxes; the rest distractors.
    int lock_pos(int item) const {
        return item <= goal_length ? item - 1 : attach[item - goal_length - 1];
    }
};

double falling(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= n - i;
    return r;
}

struct Leaf {
    std::vector<int> slot_item;  // per constrained slot: item or -1
    std::vector<int> color;      // per colour position: colour or -1
    double weight = 0.0;
};

void enumerate_leaves(const BoxShapeChoice& sh, const std::vector<SlotInfo>& cons, int free_slots,
                      int total_slots, int free_cells, std::vector<Leaf>& out) {
    const int items = sh.items();
    const int ncol = sh.colors();
    std::vector<int> slot_item(cons.size(), -1);
    std::vector<int> color(ncol, -1);
    std::vector<int> color_owner(kNumColors, -1);
    std::vector<char> used(items, 0);
    int fixed = 0;
    auto assign = [&](int pos, int c, std::vector<std::pair<int, int>>& undo) {
        if (c < 0) return true;
        if (color[pos] >= 0) return color[pos] == c;
        if (color_owner[c] >= 0) return false;
        color[pos] = c;
        color_owner[c] = pos;
        ++fixed;
        undo.push_back({pos, c});
        return true;
    };
    auto revert = [&](std::vector<std::pair<int, int>>& undo) {
        for (auto [pos, c] : undo) {
            color[pos] = -1;
            color_owner[c] = -1;
            --fixed;
        }
        undo.clear();
    };
    std::function<void(std::size_t, int)> dfs = [&](std::size_t si, int matched) {
        if (si == cons.size()) {
            if (items - matched > free_slots) return;
            Leaf leaf;
            leaf.slot_item = slot_item;
            leaf.color = color;
            const double colour_p = falling(kNumColors - fixed, ncol - fixed) / falling(kNumColors, ncol);
            const double slot_p = falling(free_slots, items - matched) / falling(total_slots, items);
            leaf.weight = sh.prior * colour_p * slot_p / free_cells;
            if (leaf.weight > 0) out.push_back(std::move(leaf));
            return;
        }
        const SlotInfo& s = cons[si];
        if (s.kind == SlotInfo::Kind::None || s.kind == SlotInfo::Kind::NoneOrLoose) {
            slot_item[si] = -1;
            dfs(si + 1, matched);
        }
        std::vector<std::pair<int, int>> undo;
        if ((s.kind == SlotInfo::Kind::Loose || s.kind == SlotInfo::Kind::NoneOrLoose) && !used[0]) {
            if (assign(0, s.key, undo)) {
                used[0] = 1;
                slot_item[si] = 0;
                dfs(si + 1, matched + 1);
                used[0] = 0;
            }
            revert(undo);
        }
        if (s.kind == SlotInfo::Kind::Box) {
            for (int it = 1; it < items; ++it) {
                if (used[it]) continue;
                if (assign(sh.key_pos(it), s.key, undo) && assign(sh.lock_pos(it), s.lock, undo)) {
                    used[it] = 1;
                    slot_item[si] = it;
                    dfs(si + 1, matched + 1);
                    used[it] = 0;
                }
                revert(undo);
            }
        }
        slot_item[si] = -1;
    };
    dfs(0, 0);
}

}  // namespace

std::vector<std::vector<Cell>> ExactPosterior::sample_box(const Observation& o, int m, Rng& rng) const {
    const auto& bc = cfg_.box;
    if (o.rows != bc.rows || o.cols != bc.cols) throw Error("invalid-config", "observation size differs from generator");
    std::vector<Pos> slots;
    for (int r : bc.slot_rows) {
        for (int c : bc.slot_cols) slots.push_back({r, c});
    }
    std::vector<char> in_slot(o.known.size(), 0);
    for (Pos s : slots) {
        in_slot[o.index(s)] = 1;
        in_slot[o.index({s.row, s.col + 1})] = 1;
    }
    for (std::size_t i = 0; i < o.known.size(); ++i) {
        if (!in_slot[i] && o.seen[i] && o.first_seen[i].kind != CellKind::Empty) {
            throw Error("sampling-exhausted", "observation has items outside the generator's slots");
        }
    }
    // Constrained slots and the free ones.
    std::vector<SlotInfo> cons;
    std::vector<int> cons_slot, free_slot;
    for (int si = 0; si < static_cast<int>(slots.size()); ++si) {
        const Pos k = slots[si];
        const Pos l = {k.row, k.col + 1};
        SlotInfo info;
        if (o.is_seen(k)) {
            const Cell& c = o.first_seen[o.index(k)];
            switch (c.kind) {
                case CellKind::Empty: info.kind = SlotInfo::Kind::None; break;
                case CellKind::LooseKey: info = {SlotInfo::Kind::Loose, c.a, -1}; break;
                case CellKind::BoxKey:
                case CellKind::OpenKey:
                    info = {SlotInfo::Kind::Box, c.a, c.b == kHiddenColor ? -1 : c.b};
                    break;
                default: throw Error("sampling-exhausted", "unexpected cell in a key slot");
            }
            if (o.is_seen(l)) {
                const Cell& lc = o.first_seen[o.index(l)];
                if (lc.kind == CellKind::Lock) {
                    if (info.kind != SlotInfo::Kind::Box) throw Error("sampling-exhausted", "lock without a box");
                    info.lock = lc.a;
                } else if (info.kind == SlotInfo::Kind::Box) {
                    throw Error("sampling-exhausted", "box without a lock");
                }
            }
        } else if (o.is_seen(l)) {
            const Cell& lc = o.first_seen[o.index(l)];
            if (lc.kind == CellKind::Lock) info = {SlotInfo::Kind::Box, -1, lc.a};
            else if (lc.kind == CellKind::Empty) info.kind = SlotInfo::Kind::NoneOrLoose;
            else throw Error("sampling-exhausted", "unexpected cell in a lock slot");
        }
        if (info.kind == SlotInfo::Kind::Free) free_slot.push_back(si);
        else {
            cons.push_back(info);
            cons_slot.push_back(si);
        }
    }
    // Every chain shape, then every consistent item assignment.
    std::vector<BoxShapeChoice> shapes;
    const int nl = bc.goal_length_max - bc.goal_length_min + 1;
    const int nd = bc.distractors_max - bc.distractors_min + 1;
    for (int L = bc.goal_length_min; L <= bc.goal_length_max; ++L) {
        for (int D = bc.distractors_min; D <= bc.distractors_max; ++D) {
            if (L + 1 + D > kNumColors || 1 + L + D > static_cast<int>(slots.size())) continue;
            const int combos = static_cast<int>(std::pow(L, D));
            for (int code = 0; code < combos; ++code) {
                BoxShapeChoice sh;
                sh.goal_length = L;
                for (int j = 0, c = code; j < D; ++j, c /= L) sh.attach.push_back(c % L);
                sh.prior = 1.0 / (nl * nd * combos);
                shapes.push_back(std::move(sh));
            }
        }
    }
    std::vector<std::vector<Leaf>> leaves(shapes.size());
    std::vector<double> shape_w(shapes.size(), 0.0);
    const int cells = o.rows * o.cols;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const int free_cells = cells - 1 - 2 * (shapes[i].items() - 1);
        enumerate_leaves(shapes[i], cons, static_cast<int>(free_slot.size()), static_cast<int>(slots.size()),
                         free_cells, leaves[i]);
        for (const auto& l : leaves[i]) shape_w[i] += l.weight;
    }
    if (std::all_of(shape_w.begin(), shape_w.end(), [](double w) { return w == 0.0; })) {
        throw Error("sampling-exhausted", "no box layout is consistent with the observation");
    }
    std::discrete_distribution<int> pick_shape(shape_w.begin(), shape_w.end());
    std::vector<std::vector<Cell>> out;
    for (int s = 0; s < m; ++s) {
        const int si = pick_shape(rng);
        const auto& sh = shapes[si];
        std::vector<double> lw;
        for (const auto& l : leaves[si]) lw.push_back(l.weight);
        const Leaf& leaf = leaves[si][std::discrete_distribution<int>(lw.begin(), lw.end())(rng)];
        // Unfixed colour positions take a uniform injection of unused colours.
        std::vector<int> color = leaf.color;
        std::vector<int> spare;
        for (int c = 0; c < kNumColors; ++c) {
            if (std::find(color.begin(), color.end(), c) == color.end()) spare.push_back(c);
        }
        std::shuffle(spare.begin(), spare.end(), rng);
        for (int& c : color) {
            if (c < 0) {
                c = spare.back();
                spare.pop_back();
            }
        }
        // Unmatched items take a uniform injection into the free slots.
        std::vector<int> item_slot(sh.items(), -1);
        for (std::size_t ci = 0; ci < cons.size(); ++ci) {
            if (leaf.slot_item[ci] >= 0) item_slot[leaf.slot_item[ci]] = cons_slot[ci];
        }
        std::vector<int> fs = free_slot;
        std::shuffle(fs.begin(), fs.end(), rng);
        std::size_t next = 0;
        for (int& s_at : item_slot) {
            if (s_at < 0) s_at = fs[next++];
        }
        std::vector<Cell> map(static_cast<std::size_t>(cells));
        for (int it = 0; it < sh.items(); ++it) {
            const Pos p = slots[item_slot[it]];
            if (it == 0) {
                map[o.index(p)] = Cell::loose_key(color[0]);
            } else {
                map[o.index(p)] = Cell::box_key(color[sh.key_pos(it)], color[sh.lock_pos(it)]);
                map[o.index({p.row, p.col + 1})] = Cell::lock(color[sh.lock_pos(it)]);
            }
        }
        out.push_back(std::move(map));
    }
    return out;
}

std::vector<std::vector<Cell>> naive_rejection_maps(const EnvConfig& cfg, const Observation& o, int m,
                                                    std::uint64_t seed, std::uint64_t budget) {
    Rng rng(seed);
    std::vector<std::vector<Cell>> out;
    auto same = [](const Cell& seen, const Cell& truth) {
        if (seen.kind != truth.kind || seen.a != truth.a) return false;
        return seen.b == kHiddenColor || seen.b == truth.b;
    };
    for (std::uint64_t i = 0; i < budget && static_cast<int>(out.size()) < m; ++i) {
        const ConcreteWorld w = generate_map(cfg, rng());
        if (w.start != o.start) continue;
        bool ok = true;
        for (std::size_t c = 0; c < w.initial.size() && ok; ++c) {
            if (o.seen[c]) ok = same(o.first_seen[c], w.initial[c]);
        }
        if (ok) out.push_back(w.initial);
    }
    if (static_cast<int>(out.size()) < m) throw Error("sampling-exhausted", "rejection budget exhausted");
    return out;
}

}  // namespace mpps
