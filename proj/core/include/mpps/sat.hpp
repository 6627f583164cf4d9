#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace mpps::sat {

// Literals are DIMACS-style signed integers: +v is variable v, -v its negation (v >= 1).
using Lit = int;

enum class Status { Sat, Unsat, Unknown };

struct Stats {
    std::uint64_t decisions = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t propagations = 0;
    std::uint64_t restarts = 0;
    std::uint64_t solves = 0;
};

// Incremental CDCL solver: two watched literals, first-UIP learning with
// local minimisation, VSIDS branching with phase saving, Luby restarts and
// solving under assumptions. Learnt clauses persist across solve() calls.
class Solver {
public:
    int new_var();
    int num_vars() const { return static_cast<int>(assigns_.size()); }
    std::size_t num_clauses() const { return num_original_; }

    // Returns false once the clause set is known unsatisfiable at level 0.
    bool add_clause(std::vector<Lit> clause);

    // Unknown is returned only when the deadline passes.
    Status solve(const std::vector<Lit>& assumptions = {},
                 std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

    // Model value of variable v (1-based) after a Sat answer.
    bool model_value(int v) const { return model_[v - 1] != 0; }
    bool model_value_lit(Lit l) const { return model_value(l > 0 ? l : -l) == (l > 0); }

    const Stats& stats() const { return stats_; }

private:
    struct Clause {
        std::vector<int> lits;  // internal literal codes
        bool learnt = false;
        bool deleted = false;
        double activity = 0.0;
    };
    struct Watch {
        int clause;
        int blocker;
    };

    static int code(Lit l) { return l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1; }
    static int var_of(int c) { return c >> 1; }
    // 1 true, 0 false, -1 unassigned
    int value(int c) const {
        const int a = assigns_[c >> 1];
        return a < 0 ? -1 : a ^ (c & 1);
    }

    void assign(int c, int reason);
    int propagate();
    void analyze(int conflict, std::vector<int>& learnt, int& backtrack_level);
    bool redundant(int c);
    void cancel_until(int level);
    int pick_branch();
    void attach(int ci);
    void bump_var(int v);
    void bump_clause(Clause& c);
    void reduce_db();
    void rebuild_watches();

    // binary heap on activity
    void heap_insert(int v);
    void heap_up(int i);
    void heap_down(int i);
    int heap_pop();
    bool heap_contains(int v) const { return heap_index_[v] >= 0; }

    std::vector<Clause> clauses_;
    std::vector<std::vector<Watch>> watches_;
    std::vector<int> assigns_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<std::uint8_t> phase_;
    std::vector<std::uint8_t> seen_;
    std::vector<double> activity_;
    std::vector<int> heap_;
    std::vector<int> heap_index_;
    std::vector<int> trail_;
    std::vector<int> trail_lim_;
    std::vector<std::uint8_t> model_;
    std::size_t qhead_ = 0;
    double var_inc_ = 1.0;
    double clause_inc_ = 1.0;
    std::size_t num_original_ = 0;
    std::size_t num_learnt_ = 0;
    double max_learnt_ = 0.0;
    bool ok_ = true;
    Stats stats_;
};

}  // namespace mpps::sat
