#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpps/sat.hpp"

namespace mpps {

// Weighted partial MaxSAT instance. Soft clauses carry positive weights.
struct Wcnf {
    int num_vars = 0;
    std::vector<std::vector<sat::Lit>> hard;
    std::vector<std::pair<std::vector<sat::Lit>, std::uint64_t>> soft;

    int new_var() { return ++num_vars; }
    void add_hard(std::vector<sat::Lit> c) { hard.push_back(std::move(c)); }
    void add_soft(std::vector<sat::Lit> c, std::uint64_t w = 1) { soft.emplace_back(std::move(c), w); }

    std::uint64_t total_soft_weight() const;

    // Standard weighted DIMACS ("p wcnf vars clauses top"); hard clauses carry weight top.
    void write(std::ostream& out) const;
    std::string to_string() const;
    static Wcnf parse(std::istream& in);
};

struct MaxSatResult {
    bool hard_sat = false;
    bool optimal = false;     // false when the deadline stopped the search
    std::uint64_t satisfied_weight = 0;
    std::vector<bool> model;  // model[v - 1]
    std::vector<bool> soft_satisfied;
    sat::Stats stats;
    double seconds = 0.0;
};

// Exact MaxSAT by SAT-UNSAT linear search. Each soft clause gets an
// indicator literal and a weighted sequential counter over the indicators
// bounds the objective from below; the bound is raised until UNSAT.
class MaxSatSolver {
public:
    explicit MaxSatSolver(const Wcnf& w);

    MaxSatResult solve(std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

    // Requires a prior optimal solve(). For each group in order, fixes the
    // first literal that is consistent with the optimum and earlier choices.
    // Returns the final result (same objective, refined model).
    MaxSatResult refine_lexicographic(const std::vector<std::vector<sat::Lit>>& groups,
                                      std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

private:
    MaxSatResult read_model(std::uint64_t) const;
    std::optional<sat::Lit> bound_literal(std::uint64_t at_least);

    const Wcnf* wcnf_;
    sat::Solver solver_;
    std::vector<sat::Lit> indicators_;  // indicator -> soft clause satisfied
    std::vector<std::vector<sat::Lit>> counter_;  // counter_[i][c]: first i+1 softs weigh >= c+1
    std::uint64_t best_ = 0;
    std::vector<sat::Lit> fixed_;
    bool hard_sat_ = false;
};

MaxSatResult solve_maxsat(const Wcnf& w,
                          std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

}  // namespace mpps
