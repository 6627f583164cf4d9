#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mpps/goal.hpp"
#include "mpps/world.hpp"

namespace mpps {

// Craft abstraction: zones, boundaries, per-zone resources and workshops,
// inventory. Zone indices are 0-based.
struct AbstractState {
    int zones = 1;
    int z = 0;
    std::vector<Boundary> b;                           // zones x zones, row-major
    std::vector<std::array<int, kNumResources>> rho;   // per zone
    std::vector<std::uint8_t> omega;                   // per zone, bit w = workshop w present
    Inventory iota{};

    static AbstractState with_zones(int n);

    Boundary boundary(int i, int j) const { return b[i * zones + j]; }
    void set_boundary(int i, int j, Boundary v) { b[i * zones + j] = v; b[j * zones + i] = v; }
    bool connected(int i, int j) const { return boundary(i, j) == Boundary::Connected; }
    bool has_workshop(int i, Workshop w) const { return (omega[i] >> index_of(w) & 1u) != 0; }

    // Throws Error("invalid-abstract-state") describing the first violation.
    void validate() const;

    friend bool operator==(const AbstractState&, const AbstractState&) = default;
    friend auto operator<=>(const AbstractState&, const AbstractState&) = default;
};

struct BoxAbstractState {
    std::array<std::array<int, kNumColors>, kNumColors> boxes{};  // [key][lock]
    std::uint16_t loose = 0;  // bit k: loose key of colour k on the map
    std::uint16_t held = 0;   // bit k: agent holds key k

    int box_count(int key, int lock) const { return boxes[key][lock]; }
    void validate() const;

    friend bool operator==(const BoxAbstractState&, const BoxAbstractState&) = default;
    friend auto operator<=>(const BoxAbstractState&, const BoxAbstractState&) = default;
};

using AbstractWorld = std::variant<AbstractState, BoxAbstractState>;

inline Domain domain_of(const AbstractWorld& s) {
    return std::holds_alternative<AbstractState>(s) ? Domain::Craft : Domain::Box;
}

std::string to_string(const AbstractWorld& s);

// Cell-to-zone assignment of a craft world. Zones are the 4-connected
// components of the initial map's passable cells; cells opened later by a
// tool join the zone of their first initially passable neighbour (row-major).
struct ZoneMap {
    int zones = 0;
    std::vector<int> label;  // -1 on obstacles and unknown cells
};
ZoneMap zone_map(const ConcreteWorld& w);

AbstractWorld abstract_full(const ConcreteWorld& w);

// The agent's knowledge as a world: unseen cells are Unknown (impassable but
// never water or stone) and the initial map is the first-seen contents.
ConcreteWorld view_world(const Observation& o);

struct PartialAbstractState {
    Domain domain = Domain::Craft;
    AbstractWorld view;  // abstraction of view_world(o)
    // Craft: per view zone, whether it and every neighbouring cell are seen.
    // Complete zones coincide with true zones, so their rho/omega are exact;
    // other zones' counts are lower bounds.
    std::vector<std::uint8_t> zone_complete;
    std::vector<Pos> zone_anchor;  // first cell of each view zone, row-major
    bool all_seen = false;
    int unseen_cells = 0;
    // Unseen cells plus one while any cell is unseen; never increases along
    // an episode and is zero exactly when the map is fully observed.
    int unknown_field_count = 0;
    Observation obs;

    const AbstractState& craft() const { return std::get<AbstractState>(view); }
    const BoxAbstractState& box() const { return std::get<BoxAbstractState>(view); }
};

PartialAbstractState abstract_observed(const Observation& o);

// Throws Error("unknown-symbol") if an atom is out of range for the domain.
bool eval_goal(const GoalSpec& goal, const AbstractWorld& s);

}  // namespace mpps
