#include "mpps/maxsat.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "mpps/types.hpp"

namespace mpps {

std::uint64_t Wcnf::total_soft_weight() const {
    std::uint64_t t = 0;
    for (const auto& s : soft) t += s.second;
    return t;
}

void Wcnf::write(std::ostream& out) const {
    const std::uint64_t top = total_soft_weight() + 1;
    out << "p wcnf " << num_vars << " " << hard.size() + soft.size() << " " << top << "\n";
    for (const auto& c : hard) {
        out << top;
        for (auto l : c) out << " " << l;
        out << " 0\n";
    }
    for (const auto& [c, w] : soft) {
        out << w;
        for (auto l : c) out << " " << l;
        out << " 0\n";
    }
}

std::string Wcnf::to_string() const {
    std::ostringstream s;
    write(s);
    return s.str();
}

Wcnf Wcnf::parse(std::istream& in) {
    Wcnf w;
    std::string line;
    std::uint64_t top = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c') continue;
        std::istringstream ls(line);
        if (line[0] == 'p') {
            std::string p, fmt;
            std::size_t clauses = 0;
            ls >> p >> fmt >> w.num_vars >> clauses >> top;
            if (fmt != "wcnf") throw Error("parse-error", "expected 'p wcnf' header");
            header = true;
            continue;
        }
        bool is_hard = false;
        std::uint64_t weight = 0;
        if (line[0] == 'h') {
            std::string h;
            ls >> h;
            is_hard = true;
        } else {
            ls >> weight;
            is_hard = header && weight >= top;
        }
        std::vector<sat::Lit> c;
        sat::Lit l = 0;
        while (ls >> l && l != 0) {
            c.push_back(l);
            w.num_vars = std::max(w.num_vars, l > 0 ? l : -l);
        }
        if (is_hard) w.add_hard(std::move(c));
        else w.add_soft(std::move(c), weight);
    }
    return w;
}

MaxSatSolver::MaxSatSolver(const Wcnf& w) : wcnf_(&w) {
    const std::uint64_t total = w.total_soft_weight();
    if (total > 100000) throw Error("unsupported", "soft weight total too large for the counter encoding");
    for (int v = 0; v < w.num_vars; ++v) solver_.new_var();
    hard_sat_ = true;
    for (const auto& c : w.hard) hard_sat_ = solver_.add_clause(c) && hard_sat_;
    for (const auto& [c, weight] : w.soft) {
        const sat::Lit a = solver_.new_var();
        indicators_.push_back(a);
        std::vector<sat::Lit> cl = c;
        cl.push_back(-a);
        hard_sat_ = solver_.add_clause(cl) && hard_sat_;
    }
    // Weighted sequential counter, only the "counter implies weight" direction.
    const std::size_t n = w.soft.size();
    counter_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto wi = static_cast<std::int64_t>(w.soft[i].second);
        for (std::uint64_t c = 1; c <= total; ++c) {
            const sat::Lit s = solver_.new_var();
            counter_[i].push_back(s);
            const auto ci = static_cast<std::int64_t>(c);
            if (i == 0) {
                if (ci <= wi) solver_.add_clause({-s, indicators_[0]});
                else solver_.add_clause({-s});
                continue;
            }
            const sat::Lit prev = counter_[i - 1][c - 1];
            solver_.add_clause({-s, prev, indicators_[i]});
            if (ci - wi > 0) solver_.add_clause({-s, prev, counter_[i - 1][ci - wi - 1]});
        }
    }
}

std::optional<sat::Lit> MaxSatSolver::bound_literal(std::uint64_t at_least) {
    if (at_least == 0 || counter_.empty()) return std::nullopt;
    return counter_.back()[at_least - 1];
}

MaxSatResult MaxSatSolver::read_model(std::uint64_t) const {
    MaxSatResult r;
    r.hard_sat = true;
    r.model.resize(wcnf_->num_vars);
    for (int v = 1; v <= wcnf_->num_vars; ++v) r.model[v - 1] = solver_.model_value(v);
    for (const auto& [c, weight] : wcnf_->soft) {
        bool sat = false;
        for (auto l : c) sat = sat || solver_.model_value_lit(l);
        r.soft_satisfied.push_back(sat);
        if (sat) r.satisfied_weight += weight;
    }
    r.stats = solver_.stats();
    return r;
}

MaxSatResult MaxSatSolver::solve(std::optional<std::chrono::steady_clock::time_point> deadline) {
    const auto start = std::chrono::steady_clock::now();
    MaxSatResult best;
    if (!hard_sat_ || solver_.solve({}, deadline) != sat::Status::Sat) {
        best.stats = solver_.stats();
        return best;
    }
    best = read_model(0);
    best.optimal = true;
    const std::uint64_t total = wcnf_->total_soft_weight();
    while (best.satisfied_weight < total) {
        const auto lit = bound_literal(best.satisfied_weight + 1);
        const auto status = solver_.solve({*lit}, deadline);
        if (status == sat::Status::Sat) {
            best = read_model(0);
            best.optimal = true;
        } else {
            best.optimal = status == sat::Status::Unsat;
            break;
        }
    }
    best_ = best.satisfied_weight;
    best.stats = solver_.stats();
    best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return best;
}

MaxSatResult MaxSatSolver::refine_lexicographic(
    const std::vector<std::vector<sat::Lit>>& groups,
    std::optional<std::chrono::steady_clock::time_point> deadline) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<sat::Lit> base;
    if (auto b = bound_literal(best_)) base.push_back(*b);
    MaxSatResult last;
    bool have = false;
    for (const auto& group : groups) {
        for (sat::Lit l : group) {
            auto assume = base;
            assume.insert(assume.end(), fixed_.begin(), fixed_.end());
            assume.push_back(l);
            if (solver_.solve(assume, deadline) == sat::Status::Sat) {
                fixed_.push_back(l);
                last = read_model(0);
                have = true;
                break;
            }
        }
    }
    if (!have) {
        auto assume = base;
        assume.insert(assume.end(), fixed_.begin(), fixed_.end());
        if (solver_.solve(assume, deadline) != sat::Status::Sat) {
            throw Error("internal", "optimum lost during lexicographic refinement");
        }
        last = read_model(0);
    }
    last.optimal = true;
    last.stats = solver_.stats();
    last.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return last;
}

MaxSatResult solve_maxsat(const Wcnf& w, std::optional<std::chrono::steady_clock::time_point> deadline) {
    MaxSatSolver s(w);
    return s.solve(deadline);
}

}  // namespace mpps
