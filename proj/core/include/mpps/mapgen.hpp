#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mpps/world.hpp"

namespace mpps {

// Per-cell content categories used by the craft generator:
// 0 = empty, 1..5 = resources, 6..8 = workshops.
inline constexpr int kNumContentCategories = 1 + kNumResources + kNumWorkshops;
using ContentTable = std::array<double, kNumContentCategories>;

int content_category(const Cell& c);
Cell cell_of_category(int category);

struct CraftGenConfig {
    int rows = 8;
    int cols = 8;
    // Prior weight of maps with 1, 2 and 3 zones.
    std::array<double, 3> zone_count_weights{0.2, 0.4, 0.4};
    bool parallel_walls = true;
    bool t_walls = true;
    std::vector<Boundary> wall_types{Boundary::Water, Boundary::Stone};
    // Contents of each passable cell, drawn independently; the zone holding
    // the agent's start cell uses its own table.
    ContentTable start_zone{0.725, 0.07, 0.05, 0.04, 0.005, 0.005, 0.035, 0.035, 0.035};
    ContentTable other_zone{0.775, 0.04, 0.04, 0.04, 0.04, 0.04, 0.0083, 0.0083, 0.0084};
    int cap = kCountCap;
    int max_retries = 100000;
};

struct BoxGenConfig {
    int rows = 12;
    int cols = 12;
    int goal_length_min = 1;
    int goal_length_max = 4;
    int distractors_min = 1;
    int distractors_max = 4;
    std::vector<int> slot_rows{1, 3, 5, 7, 9};
    std::vector<int> slot_cols{1, 4, 7, 10};
    int max_retries = 1000;
};

struct EnvConfig {
    Domain domain = Domain::Craft;
    int horizon = 100;
    int view_radius = 2;
    CraftGenConfig craft;
    BoxGenConfig box;

    static EnvConfig craft_default();
    static EnvConfig box_default();
    static EnvConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Obstacle layout of a craft map; cells are Empty, Water or Stone.
struct Layout {
    std::string name;
    std::vector<Cell> cells;
    int zones = 1;
    double weight = 0.0;
};

// Every layout in the generator's support, with prior weights summing to 1.
std::vector<Layout> craft_layouts(const CraftGenConfig& cfg);

// Zone label of every cell of `cells` (-1 on obstacles and Unknown), by
// 4-connected flood fill; labels ordered by each zone's first cell in
// row-major order.
std::vector<int> label_zones(const std::vector<Cell>& cells, int rows, int cols,
                             int* zone_count = nullptr);

// Generator truncation: per-resource map totals within the cap and at least
// one resource in the start zone.
bool craft_contents_ok(const std::vector<Cell>& cells, const std::vector<int>& zones,
                       int start_zone, int cap);

struct BoxShape {
    int goal_length = 1;
    std::vector<int> attach;  // chain index whose colour locks each distractor
    int distractors() const { return static_cast<int>(attach.size()); }
    int colors_needed() const { return goal_length + 1 + distractors(); }
    int items() const { return 1 + goal_length + distractors(); }
};

struct BoxMap {
    ConcreteWorld world;
    int goal_color = 0;
    BoxShape shape;
    // colours[i] for i <= goal_length are the chain; the rest are distractor keys.
    std::vector<int> colors;
};

ConcreteWorld make_world(Domain d, int rows, int cols, std::vector<Cell> cells, Pos agent,
                         int horizon, int view_radius);

ConcreteWorld generate_craft(const EnvConfig& cfg, std::uint64_t seed);
BoxMap generate_box(const EnvConfig& cfg, std::uint64_t seed, int goal_length = 0,
                    int distractors = -1);

// Throws Error("generation-retry-exhausted") if the distribution's
// constraints cannot be met within the retry budget.
ConcreteWorld generate_map(const EnvConfig& cfg, std::uint64_t seed);

// Two zones split by a stone wall; the agent's zone holds 2 iron and 1 wood
// (plus a workbench and a factory), the other zone 1 iron and 1 gem.
ConcreteWorld motivating_fixture();

// Goal-length-1 box map without distractors: the loose key opens the goal box.
BoxMap trivial_box_fixture();

}  // namespace mpps
