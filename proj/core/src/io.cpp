#include "mpps/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mpps {

namespace {

constexpr std::string_view kResourceChars = "WIGOE";
constexpr std::string_view kWorkshopChars = "fbt";

char craft_char(const Cell& c) {
    switch (c.kind) {
        case CellKind::Empty: return '.';
        case CellKind::Resource: return kResourceChars[c.a];
        case CellKind::Workshop: return kWorkshopChars[c.a];
        case CellKind::Water: return '~';
        case CellKind::Stone: return '#';
        case CellKind::Unknown: return '?';
        default: return '!';
    }
}

char box_char(const Cell& c) {
    switch (c.kind) {
        case CellKind::Empty: return '.';
        case CellKind::LooseKey: return static_cast<char>('a' + c.a);
        case CellKind::Lock: return static_cast<char>('A' + c.a);
        case CellKind::BoxKey: return static_cast<char>('0' + c.a);
        case CellKind::OpenKey: return static_cast<char>('p' + c.a);
        case CellKind::Unknown: return '?';
        default: return '!';
    }
}

Cell parse_craft(char ch) {
    if (ch == '.') return Cell::empty();
    if (ch == '~') return Cell::water();
    if (ch == '#') return Cell::stone();
    if (auto i = kResourceChars.find(ch); i != std::string_view::npos) {
        return Cell::resource(resource_at(static_cast<int>(i)));
    }
    if (auto i = kWorkshopChars.find(ch); i != std::string_view::npos) {
        return Cell::workshop(static_cast<Workshop>(i));
    }
    throw Error("parse-error", std::string("unknown craft cell '") + ch + "'");
}

Cell parse_box(char ch) {
    if (ch == '.') return Cell::empty();
    if (ch >= 'a' && ch <= 'j') return Cell::loose_key(ch - 'a');
    if (ch >= 'A' && ch <= 'J') return Cell::lock(ch - 'A');
    if (ch >= '0' && ch <= '9') return Cell::box_key(ch - '0', 0);
    if (ch >= 'p' && ch <= 'y') return {CellKind::OpenKey, static_cast<std::uint8_t>(ch - 'p'), 0};
    throw Error("parse-error", std::string("unknown box cell '") + ch + "'");
}

}  // namespace

std::string write_fixture(const ConcreteWorld& w, std::uint64_t seed) {
    std::ostringstream out;
    out << "mpps-map 1\n";
    out << "domain " << name_of(w.domain) << "\n";
    out << "seed " << seed << "\n";
    out << "agent " << w.agent.row << " " << w.agent.col << "\n";
    out << "horizon " << w.horizon << "\n";
    out << "radius " << w.view_radius << "\n";
    for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
        if (w.grid[i].kind == CellKind::OpenKey) {
            out << "opened " << i / w.cols << " " << i % w.cols << " " << int(w.grid[i].b) << "\n";
        }
    }
    out << "grid\n";
    for (int r = 0; r < w.rows; ++r) {
        for (int c = 0; c < w.cols; ++c) {
            const Cell& cell = w.grid[r * w.cols + c];
            out << (w.domain == Domain::Craft ? craft_char(cell) : box_char(cell));
        }
        out << "\n";
    }
    return out.str();
}

MapFixture read_fixture(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("mpps-map", 0) != 0) {
        throw Error("parse-error", "missing 'mpps-map' header");
    }
    MapFixture f;
    ConcreteWorld& w = f.world;
    int radius = -1;
    std::vector<std::array<int, 3>> opened;
    std::vector<std::string> rows;
    bool in_grid = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (in_grid) {
            if (!line.empty()) rows.push_back(line);
            continue;
        }
        if (line.empty() || line[0] == ';') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "domain") {
            std::string d;
            ls >> d;
            const auto dom = parse_domain(d);
            if (!dom) throw Error("parse-error", "unknown domain '" + d + "'");
            w.domain = *dom;
        } else if (key == "seed") {
            ls >> f.seed;
        } else if (key == "agent") {
            ls >> w.agent.row >> w.agent.col;
        } else if (key == "horizon") {
            ls >> w.horizon;
        } else if (key == "radius") {
            ls >> radius;
        } else if (key == "opened") {
            std::array<int, 3> o{};
            ls >> o[0] >> o[1] >> o[2];
            opened.push_back(o);
        } else if (key == "grid") {
            in_grid = true;
            continue;
        } else {
            throw Error("parse-error", "unknown fixture key '" + key + "'");
        }
        if (ls.fail()) throw Error("parse-error", "bad value in line '" + line + "'");
    }
    if (rows.empty()) throw Error("parse-error", "fixture has no grid");
    w.rows = static_cast<int>(rows.size());
    w.cols = static_cast<int>(rows[0].size());
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != w.cols) throw Error("parse-error", "ragged grid");
        for (char ch : r) w.grid.push_back(w.domain == Domain::Craft ? parse_craft(ch) : parse_box(ch));
    }
    if (w.domain == Domain::Box) {
        for (int i = 0; i < static_cast<int>(w.grid.size()); ++i) {
            if (w.grid[i].kind != CellKind::BoxKey) continue;
            const Pos lock = {i / w.cols, i % w.cols + 1};
            if (!w.in_bounds(lock) || w.at(lock).kind != CellKind::Lock) {
                throw Error("parse-error", "box key without a lock to its right");
            }
            w.grid[i].b = w.at(lock).a;
        }
        for (const auto& o : opened) {
            const Pos p{o[0], o[1]};
            if (!w.in_bounds(p) || w.at(p).kind != CellKind::OpenKey) {
                throw Error("parse-error", "'opened' does not name an opened box");
            }
            w.at(p).b = static_cast<std::uint8_t>(o[2]);
        }
    }
    if (!w.in_bounds(w.agent) || w.at(w.agent).is_obstacle()) {
        throw Error("parse-error", "agent must start on a passable cell in the grid");
    }
    if (radius < 0) radius = w.domain == Domain::Craft ? 2 : 3;
    w.view_radius = radius;
    w.start = w.agent;
    w.initial = w.grid;
    w.seen.assign(w.grid.size(), 0);
    reveal(w);
    return f;
}

MapFixture load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return read_fixture(buf.str());
}

std::string render(const ConcreteWorld& w) {
    std::string out;
    for (int r = 0; r < w.rows; ++r) {
        for (int c = 0; c < w.cols; ++c) {
            const Cell& cell = w.grid[r * w.cols + c];
            if (Pos{r, c} == w.agent) out += '@';
            else out += w.domain == Domain::Craft ? craft_char(cell) : box_char(cell);
        }
        out += '\n';
    }
    return out;
}

std::string render(const Observation& o) {
    std::string out;
    for (int r = 0; r < o.rows; ++r) {
        for (int c = 0; c < o.cols; ++c) {
            const Cell& cell = o.known[r * o.cols + c];
            if (Pos{r, c} == o.agent) out += '@';
            else out += o.domain == Domain::Craft ? craft_char(cell) : box_char(cell);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json trace_header(const ConcreteWorld& w, std::uint64_t seed) {
    return {{"format", "mpps-trace"},
            {"version", 1},
            {"domain", std::string(name_of(w.domain))},
            {"seed", seed},
            {"map", write_fixture(w, seed)}};
}

TraceRecord make_trace_record(const ConcreteWorld& before, const ConcreteWorld& after, Action a) {
    TraceRecord r;
    r.t = before.t;
    r.action = a;
    r.agent = after.agent;
    r.held_key = after.held_key;
    for (int o = 0; o < kNumObjects; ++o) {
        const int d = after.inventory[o] - before.inventory[o];
        if (d != 0) r.inventory_delta.emplace_back(o, d);
    }
    for (int i = 0; i < static_cast<int>(after.seen.size()); ++i) {
        if (after.seen[i] && !before.seen[i]) r.mask_delta.push_back(after.pos_of(i));
    }
    return r;
}

nlohmann::json to_json(const TraceRecord& r) {
    nlohmann::json inv = nlohmann::json::object();
    for (auto [o, d] : r.inventory_delta) inv[std::string(name_of(static_cast<Object>(o)))] = d;
    nlohmann::json mask = nlohmann::json::array();
    for (Pos p : r.mask_delta) mask.push_back({p.row, p.col});
    nlohmann::json j = {{"t", r.t},
                        {"action", std::string(name_of(r.action))},
                        {"agent", {r.agent.row, r.agent.col}},
                        {"inventory_delta", inv},
                        {"mask_delta", mask}};
    if (r.held_key >= 0) j["held_key"] = std::string(color_name(r.held_key));
    return j;
}

TraceRecord trace_record_from_json(const nlohmann::json& j) {
    TraceRecord r;
    r.t = j.at("t").get<int>();
    const auto a = parse_action(j.at("action").get<std::string>());
    if (!a) throw Error("parse-error", "unknown action in trace");
    r.action = *a;
    r.agent = {j.at("agent")[0].get<int>(), j.at("agent")[1].get<int>()};
    for (const auto& [name, d] : j.at("inventory_delta").items()) {
        const auto o = parse_object(name);
        if (!o) throw Error("parse-error", "unknown object in trace");
        r.inventory_delta.emplace_back(index_of(*o), d.get<int>());
    }
    for (const auto& p : j.at("mask_delta")) r.mask_delta.push_back({p[0].get<int>(), p[1].get<int>()});
    if (j.contains("held_key")) {
        const auto c = parse_color(j.at("held_key").get<std::string>());
        if (!c) throw Error("parse-error", "unknown colour in trace");
        r.held_key = *c;
    }
    return r;
}

}  // namespace mpps
