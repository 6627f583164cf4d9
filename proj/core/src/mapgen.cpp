#include "mpps/mapgen.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include <nlohmann/json.hpp>

namespace mpps {

int content_category(const Cell& c) {
    switch (c.kind) {
        case CellKind::Resource: return 1 + c.a;
        case CellKind::Workshop: return 1 + kNumResources + c.a;
        default: return 0;
    }
}

Cell cell_of_category(int category) {
    if (category == 0) return Cell::empty();
    if (category <= kNumResources) return Cell::resource(static_cast<Object>(category - 1));
    return Cell::workshop(static_cast<Workshop>(category - 1 - kNumResources));
}

std::vector<int> label_zones(const std::vector<Cell>& cells, int rows, int cols,
                             int* zone_count) {
    std::vector<int> label(cells.size(), -1);
    auto passable = [&](int i) {
        return !cells[i].is_obstacle() && cells[i].kind != CellKind::Unknown;
    };
    int next = 0;
    std::queue<int> frontier;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (label[i] != -1 || !passable(i)) continue;
        label[i] = next;
        frontier.push(i);
        while (!frontier.empty()) {
            const int cur = frontier.front();
            frontier.pop();
            for (Pos n : neighbours({cur / cols, cur % cols})) {
                if (n.row < 0 || n.row >= rows || n.col < 0 || n.col >= cols) continue;
                const int j = n.row * cols + n.col;
                if (label[j] == -1 && passable(j)) {
                    label[j] = next;
                    frontier.push(j);
                }
            }
        }
        ++next;
    }
    if (zone_count) *zone_count = next;
    return label;
}

bool craft_contents_ok(const std::vector<Cell>& cells, const std::vector<int>& zones,
                       int start_zone, int cap) {
    std::array<int, kNumResources> total{};
    bool start_has_resource = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].kind != CellKind::Resource) continue;
        if (++total[cells[i].a] > cap) return false;
        if (zones[i] == start_zone) start_has_resource = true;
    }
    return start_has_resource;
}

namespace {

Cell wall_cell(Boundary b) { return b == Boundary::Water ? Cell::water() : Cell::stone(); }

struct LayoutBuilder {
    int rows, cols;
    std::vector<Cell> cells;
    LayoutBuilder(int r, int c) : rows(r), cols(c), cells(static_cast<std::size_t>(r * c)) {}
    void vline(int col, int r0, int r1, Boundary b) {
        for (int r = r0; r <= r1; ++r) cells[r * cols + col] = wall_cell(b);
    }
    void hline(int row, int c0, int c1, Boundary b) {
        for (int c = c0; c <= c1; ++c) cells[row * cols + c] = wall_cell(b);
    }
};

std::string tname(Boundary b) { return b == Boundary::Water ? "w" : "s"; }

}  // namespace

std::vector<Layout> craft_layouts(const CraftGenConfig& cfg) {
    const int R = cfg.rows, C = cfg.cols;
    std::vector<Layout> out;
    auto add = [&](std::string name, LayoutBuilder b) {
        Layout l;
        l.name = std::move(name);
        l.cells = std::move(b.cells);
        label_zones(l.cells, R, C, &l.zones);
        out.push_back(std::move(l));
    };
    add("open", LayoutBuilder(R, C));
    for (Boundary t : cfg.wall_types) {
        for (int c = 2; c <= C - 3; ++c) {
            LayoutBuilder b(R, C);
            b.vline(c, 0, R - 1, t);
            add("v" + std::to_string(c) + tname(t), std::move(b));
        }
        for (int r = 2; r <= R - 3; ++r) {
            LayoutBuilder b(R, C);
            b.hline(r, 0, C - 1, t);
            add("h" + std::to_string(r) + tname(t), std::move(b));
        }
    }
    for (Boundary t1 : cfg.wall_types) {
        for (Boundary t2 : cfg.wall_types) {
            if (cfg.parallel_walls) {
                for (int a = 1; a <= C - 2; ++a) {
                    for (int c = a + 2; c <= C - 2; ++c) {
                        LayoutBuilder b(R, C);
                        b.vline(a, 0, R - 1, t1);
                        b.vline(c, 0, R - 1, t2);
                        add("vv" + std::to_string(a) + std::to_string(c) + tname(t1) + tname(t2), std::move(b));
                    }
                }
                for (int a = 1; a <= R - 2; ++a) {
                    for (int r = a + 2; r <= R - 2; ++r) {
                        LayoutBuilder b(R, C);
                        b.hline(a, 0, C - 1, t1);
                        b.hline(r, 0, C - 1, t2);
                        add("hh" + std::to_string(a) + std::to_string(r) + tname(t1) + tname(t2), std::move(b));
                    }
                }
            }
            if (cfg.t_walls) {
                for (int c = 2; c <= C - 3; ++c) {
                    for (int r = 2; r <= R - 3; ++r) {
                        LayoutBuilder right(R, C);
                        right.vline(c, 0, R - 1, t1);
                        right.hline(r, c + 1, C - 1, t2);
                        add("tR" + std::to_string(c) + std::to_string(r) + tname(t1) + tname(t2), std::move(right));
                        LayoutBuilder left(R, C);
                        left.vline(c, 0, R - 1, t1);
                        left.hline(r, 0, c - 1, t2);
                        add("tL" + std::to_string(c) + std::to_string(r) + tname(t1) + tname(t2), std::move(left));
                        LayoutBuilder down(R, C);
                        down.hline(r, 0, C - 1, t1);
                        down.vline(c, r + 1, R - 1, t2);
                        add("tD" + std::to_string(r) + std::to_string(c) + tname(t1) + tname(t2), std::move(down));
                        LayoutBuilder up(R, C);
                        up.hline(r, 0, C - 1, t1);
                        up.vline(c, 0, r - 1, t2);
                        add("tU" + std::to_string(r) + std::to_string(c) + tname(t1) + tname(t2), std::move(up));
                    }
                }
            }
        }
    }
    // Split each zone-count class's weight evenly among its layouts.
    std::array<int, 3> per_class{};
    for (const auto& l : out) {
        if (l.zones >= 1 && l.zones <= 3) per_class[l.zones - 1]++;
    }
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (per_class[k] > 0) total += cfg.zone_count_weights[k];
    }
    for (auto& l : out) {
        if (l.zones < 1 || l.zones > 3 || total <= 0.0) continue;
        l.weight = cfg.zone_count_weights[l.zones - 1] / per_class[l.zones - 1] / total;
    }
    std::erase_if(out, [](const Layout& l) { return l.weight <= 0.0; });
    return out;
}

ConcreteWorld make_world(Domain d, int rows, int cols, std::vector<Cell> cells, Pos agent,
                         int horizon, int view_radius) {
    ConcreteWorld w;
    w.domain = d;
    w.rows = rows;
    w.cols = cols;
    w.initial = cells;
    w.grid = std::move(cells);
    w.seen.assign(w.grid.size(), 0);
    w.agent = agent;
    w.start = agent;
    w.horizon = horizon;
    w.view_radius = view_radius;
    reveal(w);
    return w;
}

ConcreteWorld generate_craft(const EnvConfig& cfg, std::uint64_t seed) {
    const auto& gc = cfg.craft;
    const auto layouts = craft_layouts(gc);
    std::vector<double> weights;
    for (const auto& l : layouts) weights.push_back(l.weight);
    Rng rng(seed);
    std::discrete_distribution<int> pick_layout(weights.begin(), weights.end());
    std::discrete_distribution<int> start_cat(gc.start_zone.begin(), gc.start_zone.end());
    std::discrete_distribution<int> other_cat(gc.other_zone.begin(), gc.other_zone.end());
    for (int attempt = 0; attempt < gc.max_retries; ++attempt) {
        const Layout& layout = layouts[pick_layout(rng)];
        std::vector<int> passable;
        for (int i = 0; i < static_cast<int>(layout.cells.size()); ++i) {
            if (!layout.cells[i].is_obstacle()) passable.push_back(i);
        }
        std::uniform_int_distribution<std::size_t> pick_cell(0, passable.size() - 1);
        const int agent = passable[pick_cell(rng)];
        const auto zones = label_zones(layout.cells, gc.rows, gc.cols);
        const int start_zone = zones[agent];
        std::vector<Cell> cells = layout.cells;
        for (int i : passable) {
            if (i == agent) continue;
            const int cat = zones[i] == start_zone ? start_cat(rng) : other_cat(rng);
            cells[i] = cell_of_category(cat);
        }
        if (!craft_contents_ok(cells, zones, start_zone, gc.cap)) continue;
        return make_world(Domain::Craft, gc.rows, gc.cols, std::move(cells),
                          {agent / gc.cols, agent % gc.cols}, cfg.horizon, cfg.view_radius);
    }
    throw Error("generation-retry-exhausted", "craft generator exceeded its retry budget");
}

BoxMap generate_box(const EnvConfig& cfg, std::uint64_t seed, int goal_length, int distractors) {
    const auto& bc = cfg.box;
    Rng rng(seed);
    BoxMap out;
    auto& shape = out.shape;
    shape.goal_length = goal_length > 0
        ? goal_length
        : std::uniform_int_distribution<int>(bc.goal_length_min, bc.goal_length_max)(rng);
    const int n_distract = distractors >= 0
        ? distractors
        : std::uniform_int_distribution<int>(bc.distractors_min, bc.distractors_max)(rng);
    std::uniform_int_distribution<int> pick_attach(0, shape.goal_length - 1);
    for (int j = 0; j < n_distract; ++j) shape.attach.push_back(pick_attach(rng));
    if (shape.colors_needed() > kNumColors) {
        throw Error("generation-retry-exhausted", "box map needs more colours than available");
    }

    std::vector<int> palette(kNumColors);
    std::iota(palette.begin(), palette.end(), 0);
    std::shuffle(palette.begin(), palette.end(), rng);
    out.colors.assign(palette.begin(), palette.begin() + shape.colors_needed());
    out.goal_color = out.colors[shape.goal_length];

    std::vector<Pos> slots;
    for (int r : bc.slot_rows) {
        for (int c : bc.slot_cols) slots.push_back({r, c});
    }
    if (shape.items() > static_cast<int>(slots.size())) {
        throw Error("generation-retry-exhausted", "more box items than slots");
    }
    std::shuffle(slots.begin(), slots.end(), rng);

    std::vector<Cell> cells(static_cast<std::size_t>(bc.rows * bc.cols));
    auto at = [&](Pos p) -> Cell& { return cells[p.row * bc.cols + p.col]; };
    const int L = shape.goal_length;
    at(slots[0]) = Cell::loose_key(out.colors[0]);
    auto place_box = [&](Pos s, int key, int lock) {
        at(s) = Cell::box_key(key, lock);
        at({s.row, s.col + 1}) = Cell::lock(lock);
    };
    for (int i = 0; i < L; ++i) place_box(slots[1 + i], out.colors[i + 1], out.colors[i]);
    for (int j = 0; j < n_distract; ++j) {
        place_box(slots[1 + L + j], out.colors[L + 1 + j], out.colors[shape.attach[j]]);
    }

    std::vector<int> free;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (cells[i].kind == CellKind::Empty) free.push_back(i);
    }
    const int agent = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    out.world = make_world(Domain::Box, bc.rows, bc.cols, std::move(cells),
                           {agent / bc.cols, agent % bc.cols}, cfg.horizon, cfg.view_radius);
    return out;
}

ConcreteWorld generate_map(const EnvConfig& cfg, std::uint64_t seed) {
    if (cfg.domain == Domain::Craft) return generate_craft(cfg, seed);
    return generate_box(cfg, seed).world;
}

ConcreteWorld motivating_fixture() {
    const int R = 8, C = 8;
    std::vector<Cell> cells(R * C);
    auto at = [&](int r, int c) -> Cell& { return cells[r * C + c]; };
    for (int r = 0; r < R; ++r) at(r, 5) = Cell::stone();
    at(2, 2) = Cell::resource(Object::Wood);
    at(6, 3) = Cell::resource(Object::Iron);
    at(0, 4) = Cell::resource(Object::Iron);
    at(1, 0) = Cell::workshop(Workshop::Workbench);
    at(7, 0) = Cell::workshop(Workshop::Factory);
    at(1, 6) = Cell::resource(Object::Iron);
    at(6, 7) = Cell::resource(Object::Gem);
    return make_world(Domain::Craft, R, C, std::move(cells), {4, 1}, 100, 2);
}

BoxMap trivial_box_fixture() {
    const int R = 12, C = 12;
    std::vector<Cell> cells(R * C);
    auto at = [&](int r, int c) -> Cell& { return cells[r * C + c]; };
    BoxMap m;
    m.shape.goal_length = 1;
    m.colors = {0, 8};
    m.goal_color = 8;
    at(5, 4) = Cell::loose_key(0);
    at(5, 7) = Cell::box_key(8, 0);
    at(5, 8) = Cell::lock(0);
    m.world = make_world(Domain::Box, R, C, std::move(cells), {6, 6}, 150, 3);
    return m;
}

EnvConfig EnvConfig::craft_default() { return EnvConfig{}; }

EnvConfig EnvConfig::box_default() {
    EnvConfig c;
    c.domain = Domain::Box;
    c.horizon = 150;
    c.view_radius = 3;
    return c;
}

namespace {

nlohmann::json table_json(const ContentTable& t) {
    nlohmann::json j = nlohmann::json::object();
    j["empty"] = t[0];
    for (int r = 0; r < kNumResources; ++r) j[std::string(name_of(resource_at(r)))] = t[1 + r];
    for (int w = 0; w < kNumWorkshops; ++w) {
        j[std::string(name_of(static_cast<Workshop>(w)))] = t[1 + kNumResources + w];
    }
    return j;
}

ContentTable table_from_json(const nlohmann::json& j, const ContentTable& fallback) {
    ContentTable t = fallback;
    if (j.contains("empty")) t[0] = j.at("empty").get<double>();
    for (int r = 0; r < kNumResources; ++r) {
        const auto key = std::string(name_of(resource_at(r)));
        if (j.contains(key)) t[1 + r] = j.at(key).get<double>();
    }
    for (int w = 0; w < kNumWorkshops; ++w) {
        const auto key = std::string(name_of(static_cast<Workshop>(w)));
        if (j.contains(key)) t[1 + kNumResources + w] = j.at(key).get<double>();
    }
    return t;
}

}  // namespace

EnvConfig EnvConfig::from_json(const nlohmann::json& j) {
    const auto domain = parse_domain(j.value("domain", std::string("craft")));
    if (!domain) throw Error("invalid-config", "unknown domain");
    EnvConfig c = *domain == Domain::Craft ? craft_default() : box_default();
    c.horizon = j.value("horizon", c.horizon);
    c.view_radius = j.value("view_radius", c.view_radius);
    if (c.view_radius < 0) throw Error("invalid-config", "view_radius must be >= 0");
    if (j.contains("craft")) {
        const auto& g = j.at("craft");
        auto& gc = c.craft;
        gc.rows = g.value("rows", gc.rows);
        gc.cols = g.value("cols", gc.cols);
        if (g.contains("zone_count_weights")) {
            gc.zone_count_weights = g.at("zone_count_weights").get<std::array<double, 3>>();
        }
        gc.parallel_walls = g.value("parallel_walls", gc.parallel_walls);
        gc.t_walls = g.value("t_walls", gc.t_walls);
        if (g.contains("start_zone")) gc.start_zone = table_from_json(g.at("start_zone"), gc.start_zone);
        if (g.contains("other_zone")) gc.other_zone = table_from_json(g.at("other_zone"), gc.other_zone);
        gc.cap = g.value("cap", gc.cap);
        gc.max_retries = g.value("max_retries", gc.max_retries);
    }
    if (j.contains("box")) {
        const auto& g = j.at("box");
        auto& bc = c.box;
        bc.goal_length_min = g.value("goal_length_min", bc.goal_length_min);
        bc.goal_length_max = g.value("goal_length_max", bc.goal_length_max);
        bc.distractors_min = g.value("distractors_min", bc.distractors_min);
        bc.distractors_max = g.value("distractors_max", bc.distractors_max);
        if (bc.goal_length_min < 1 || bc.goal_length_max < bc.goal_length_min ||
            bc.distractors_min < 0 || bc.distractors_max < bc.distractors_min) {
            throw Error("invalid-config", "bad box-world length/distractor ranges");
        }
    }
    return c;
}

nlohmann::json EnvConfig::to_json() const {
    nlohmann::json j;
    j["domain"] = std::string(name_of(domain));
    j["horizon"] = horizon;
    j["view_radius"] = view_radius;
    j["craft"] = {
        {"rows", craft.rows},
        {"cols", craft.cols},
        {"zone_count_weights", craft.zone_count_weights},
        {"parallel_walls", craft.parallel_walls},
        {"t_walls", craft.t_walls},
        {"start_zone", table_json(craft.start_zone)},
        {"other_zone", table_json(craft.other_zone)},
        {"cap", craft.cap},
        {"max_retries", craft.max_retries},
    };
    j["box"] = {
        {"goal_length_min", box.goal_length_min},
        {"goal_length_max", box.goal_length_max},
        {"distractors_min", box.distractors_min},
        {"distractors_max", box.distractors_max},
    };
    return j;
}

}  // namespace mpps
