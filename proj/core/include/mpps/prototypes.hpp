#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "mpps/abstraction.hpp"
#include "mpps/recipes.hpp"

namespace mpps {

struct Prototype {
    enum class Kind : std::uint8_t { GetResource, UseTool, UseWorkshop, GetKey };
    Kind kind = Kind::GetResource;
    int arg = 0;  // resource index, tool object index, workshop index or colour

    static Prototype get(Object r) { return {Kind::GetResource, index_of(r)}; }
    static Prototype use(Workshop w) { return {Kind::UseWorkshop, index_of(w)}; }
    static Prototype use_tool(Object t) { return {Kind::UseTool, index_of(t)}; }
    static Prototype get_key(int color) { return {Kind::GetKey, color}; }

    Domain domain() const { return kind == Kind::GetKey ? Domain::Box : Domain::Craft; }
    std::string name() const;

    friend bool operator==(const Prototype&, const Prototype&) = default;
    friend auto operator<=>(const Prototype&, const Prototype&) = default;
};

// Prototype names: get-<resource>, use-<workshop>, use-bridge, use-axe,
// get-<colour>.
std::optional<Prototype> parse_prototype(std::string_view name);

// The component library of a domain in selector order. Craft: get-r for the
// five resources, use-bridge, use-axe, then use-w for the three workshops.
// Box: get-k for the ten colours.
const std::vector<Prototype>& roster(Domain d);

using Program = std::vector<Prototype>;
std::string to_string(const Program& p);
Program parse_program(std::string_view text);  // "get-wood; use-workbench"

// Boundary type a tool crosses: bridge -> water, axe -> stone.
Boundary tool_boundary(Object tool);

struct TransitionCheck {
    Prototype proto;
    int i = -1;  // z- (craft)
    int j = -1;  // z+ (craft)
    std::array<int, kNumObjects> made{};  // m_o (use-workshop)
    int unlocked_with = -1;               // k1 of the unlock branch (box)
    bool loose_branch = false;            // box: picked the loose key
};

// Returns a witness iff (s-, s+) satisfies the prototype's relation,
// including its frame condition. Throws Error("domain-mismatch").
std::optional<TransitionCheck> check_transition(const Prototype& p, const AbstractWorld& s_minus,
                                                const AbstractWorld& s_plus,
                                                const RecipeTable& recipes);

// Every s+ the relation admits from s-.
std::vector<AbstractState> successors(const Prototype& p, const AbstractState& s,
                                      const RecipeTable& recipes);
std::vector<BoxAbstractState> successors(const Prototype& p, const BoxAbstractState& s);
std::vector<AbstractWorld> successors(const Prototype& p, const AbstractWorld& s,
                                      const RecipeTable& recipes);

// Termination monitor of an option: fires when the abstract change since
// the snapshot satisfies the prototype. Works from observations only; the
// snapshot side is rebuilt over the current observation's cells so both
// sides share zone indices.
class Monitor {
public:
    Monitor(Prototype p, Observation snapshot, const RecipeTable& recipes);

    bool operator()(const Observation& o) const { return check(o).has_value(); }
    std::optional<TransitionCheck> check(const Observation& o) const;

    // (snapshot, current) abstractions as seen from `o`.
    std::pair<AbstractWorld, AbstractWorld> abstract_pair(const Observation& o) const;

    const Prototype& prototype() const { return proto_; }
    const Observation& snapshot() const { return snapshot_; }

private:
    Prototype proto_;
    Observation snapshot_;
    const RecipeTable* recipes_;
};

}  // namespace mpps
