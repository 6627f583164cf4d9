#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mpps/goal.hpp"
#include "mpps/recipes.hpp"
#include "mpps/types.hpp"

namespace mpps {

enum class CellKind : std::uint8_t {
    Empty,
    Resource,  // a = resource index
    Workshop,  // a = workshop index
    Water,
    Stone,
    Lock,      // a = lock colour
    BoxKey,    // a = key colour, b = colour of the lock guarding it
    OpenKey,   // box whose lock was opened; key still inside
    LooseKey,  // a = key colour
    Unknown,   // only in observations
};

inline constexpr std::uint8_t kHiddenColor = 0xFF;

struct Cell {
    CellKind kind = CellKind::Empty;
    std::uint8_t a = 0;
    std::uint8_t b = 0;

    static constexpr Cell empty() { return {}; }
    static constexpr Cell unknown() { return {CellKind::Unknown, 0, 0}; }
    static constexpr Cell water() { return {CellKind::Water, 0, 0}; }
    static constexpr Cell stone() { return {CellKind::Stone, 0, 0}; }
    static constexpr Cell resource(Object r) { return {CellKind::Resource, static_cast<std::uint8_t>(r), 0}; }
    static constexpr Cell workshop(Workshop w) { return {CellKind::Workshop, static_cast<std::uint8_t>(w), 0}; }
    static constexpr Cell lock(int c) { return {CellKind::Lock, static_cast<std::uint8_t>(c), 0}; }
    static constexpr Cell box_key(int key, int lock) {
        return {CellKind::BoxKey, static_cast<std::uint8_t>(key), static_cast<std::uint8_t>(lock)};
    }
    static constexpr Cell loose_key(int c) { return {CellKind::LooseKey, static_cast<std::uint8_t>(c), 0}; }

    constexpr bool is_obstacle() const { return kind == CellKind::Water || kind == CellKind::Stone; }
    friend constexpr bool operator==(Cell, Cell) = default;
};

struct ConcreteWorld {
    Domain domain = Domain::Craft;
    int rows = 0;
    int cols = 0;
    std::vector<Cell> grid;
    std::vector<Cell> initial;       // grid at generation time; defines zones
    std::vector<std::uint8_t> seen;  // cells the agent has ever observed
    Pos agent;
    Pos start;
    Action facing = Action::Up;
    Inventory inventory{};
    std::array<int, kNumResources> consumed{};  // raw resources spent in recipes
    int held_key = -1;
    std::uint16_t keys_obtained = 0;
    int t = 0;
    int horizon = 100;
    int view_radius = 2;

    bool in_bounds(Pos p) const { return p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols; }
    int index(Pos p) const { return p.row * cols + p.col; }
    Pos pos_of(int i) const { return {i / cols, i % cols}; }
    const Cell& at(Pos p) const { return grid[index(p)]; }
    Cell& at(Pos p) { return grid[index(p)]; }

    friend bool operator==(const ConcreteWorld&, const ConcreteWorld&) = default;
};

// The agent's view: everything it has observed so far, nothing else.
struct Observation {
    Domain domain = Domain::Craft;
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> seen;
    std::vector<Cell> known;       // current contents; Unknown where unseen
    std::vector<Cell> first_seen;  // contents when first observed
    Pos agent;
    Pos start;
    Action facing = Action::Up;
    Inventory inventory{};
    int held_key = -1;
    std::uint16_t keys_obtained = 0;
    int t = 0;
    int horizon = 100;

    bool in_bounds(Pos p) const { return p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols; }
    int index(Pos p) const { return p.row * cols + p.col; }
    Pos pos_of(int i) const { return {i / cols, i % cols}; }
    const Cell& at(Pos p) const { return known[index(p)]; }
    bool is_seen(Pos p) const { return seen[index(p)] != 0; }
    int unseen_count() const;

    friend bool operator==(const Observation&, const Observation&) = default;
};

// Marks the square window around the agent as seen.
void reveal(ConcreteWorld& w);

// Clears the seen mask and reveals the initial window.
Observation reset(ConcreteWorld& w);

Observation observe(const ConcreteWorld& w);

// Applies one action in place. Throws Error("episode-over") when t >= horizon.
void apply(ConcreteWorld& w, Action a, const RecipeTable& recipes);

std::pair<ConcreteWorld, Observation> step(const ConcreteWorld& w, Action a,
                                           const RecipeTable& recipes);

bool goal_satisfied(const ConcreteWorld& w, const GoalSpec& goal);

// Neighbours in row-major order (up, left, right, down).
std::array<Pos, 4> neighbours(Pos p);

}  // namespace mpps
