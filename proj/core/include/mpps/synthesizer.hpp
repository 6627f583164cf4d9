#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mpps/abstraction.hpp"
#include "mpps/maxsat.hpp"
#include "mpps/prototypes.hpp"

namespace mpps {

struct SynthesisProblem {
    GoalSpec goal;
    std::vector<AbstractWorld> worlds;
    int k_max = 7;
    double theta = 1.0;
    RecipeTable recipes = RecipeTable::defaults();
    int cap = kCountCap;
    double time_limit_s = 60.0;  // per MaxSAT call

    Domain domain() const { return goal.domain; }
    // Throws Error("invalid-problem").
    void validate() const;
};

struct GroundedEncoding {
    int k = 0;
    Wcnf wcnf;
    std::vector<Prototype> roster;
    std::vector<std::vector<sat::Lit>> selectors;  // [slot][roster index]
    std::vector<sat::Lit> solved;                  // soft indicator per world
};

// Throws Error("cap-exceeded") if a world's counts exceed the cap and
// Error("unsupported-recipes") if a workshop makes one of its own ingredients.
GroundedEncoding encode(const SynthesisProblem& problem, int k);

Program decode_program(const GroundedEncoding& enc, const std::vector<bool>& model);

// Whether some chain of successors from `world` ends in a goal state.
bool program_solves(const Program& p, const AbstractWorld& world, const GoalSpec& goal,
                    const RecipeTable& recipes);
std::vector<bool> certify(const Program& p, const SynthesisProblem& problem);

struct SynthesisStats {
    std::size_t vars = 0;
    std::size_t clauses = 0;
    std::uint64_t decisions = 0;
    std::uint64_t conflicts = 0;
    double seconds = 0.0;
    bool timed_out = false;
};

struct SynthesisResult {
    Program program;
    int k = 0;
    double objective = 0.0;
    int solved_count = 0;
    std::vector<bool> solved;
    SynthesisStats stats;

    nlohmann::json to_json() const;
};

// Optimal program of length exactly k (lexicographically smallest selector
// assignment among optima), certified by re-simulation.
SynthesisResult solve_length(const SynthesisProblem& problem, int k);

struct OracleResult {
    Program program;
    int solved_count = 0;
    double objective = 0.0;
    std::uint64_t nodes = 0;
};

// Exhaustive memoised search over programs of length k; throws
// Error("budget-exceeded") after `node_budget` expansions.
OracleResult enumerate_oracle(const SynthesisProblem& problem, int k,
                              std::uint64_t node_budget = 5'000'000);

// Whether some program of length <= k_max achieves the goal in `world`, by
// the exhaustive search.
bool solvable(const AbstractWorld& world, const GoalSpec& goal, int k_max, const RecipeTable& recipes);

// Iterative deepening over k = 1..k_max. Throws Error("no-program") when the
// best program found solves no world.
SynthesisResult synthesize(const SynthesisProblem& problem);

// The most permissive completion(s) of an observation: unknown counts at the
// cap, unseen regions reachable, any colour possible for an unseen loose key.
std::vector<AbstractWorld> optimistic_worlds(const PartialAbstractState& obs);

// Shortest program that succeeds on at least one optimistic completion.
SynthesisResult synthesize_optimistic(const PartialAbstractState& obs, const GoalSpec& goal,
                                      int k_max, const RecipeTable& recipes);

}  // namespace mpps
