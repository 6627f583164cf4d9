#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mpps/types.hpp"

namespace mpps {

struct GoalAtom {
    enum class Kind : std::uint8_t { Inventory, Key };
    Kind kind = Kind::Inventory;
    int what = 0;      // object index or colour
    int at_least = 1;  // inventory atoms only
    friend bool operator==(const GoalAtom&, const GoalAtom&) = default;
};

// Conjunction of atoms. Textual form:
//   craft: inv(<object>) >= <n> [& inv(<object>) >= <n> ...]
//   box:   key(<color>)
struct GoalSpec {
    Domain domain = Domain::Craft;
    std::vector<GoalAtom> atoms;

    // Throws Error("unknown-symbol") on unknown objects/colours and
    // Error("parse-error") on malformed text.
    static GoalSpec parse(std::string_view text);
    static GoalSpec get(Object o, int n = 1);
    static GoalSpec key(int color);

    std::string to_string() const;
    friend bool operator==(const GoalSpec&, const GoalSpec&) = default;
};

}  // namespace mpps
