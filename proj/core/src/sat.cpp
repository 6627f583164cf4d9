#include "mpps/sat.hpp"

#include <algorithm>

namespace mpps::sat {

namespace {

double luby(double y, int x) {
    int size = 1, seq = 0;
    while (size < x + 1) {
        seq++;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        seq--;
        x = x % size;
    }
    double r = 1.0;
    for (int i = 0; i < seq; ++i) r *= y;
    return r;
}

}  // namespace

int Solver::new_var() {
    const int v = num_vars();
    assigns_.push_back(-1);
    level_.push_back(0);
    reason_.push_back(-1);
    phase_.push_back(0);
    seen_.push_back(0);
    activity_.push_back(0.0);
    heap_index_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert(v);
    return v + 1;
}

bool Solver::add_clause(std::vector<Lit> clause) {
    if (!ok_) return false;
    std::vector<int> lits;
    lits.reserve(clause.size());
    for (Lit l : clause) lits.push_back(code(l));
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<int> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i + 1 < lits.size() && (lits[i] ^ 1) == lits[i + 1]) return true;  // tautology
        const int v = value(lits[i]);
        if (v == 1) return true;
        if (v == -1) kept.push_back(lits[i]);
    }
    if (kept.empty()) {
        ok_ = false;
        return false;
    }
    if (kept.size() == 1) {
        assign(kept[0], -1);
        if (propagate() >= 0) ok_ = false;
        return ok_;
    }
    clauses_.push_back({std::move(kept), false, false, 0.0});
    attach(static_cast<int>(clauses_.size()) - 1);
    ++num_original_;
    return true;
}

void Solver::attach(int ci) {
    const auto& l = clauses_[ci].lits;
    watches_[l[0]].push_back({ci, l[1]});
    watches_[l[1]].push_back({ci, l[0]});
}

void Solver::assign(int c, int reason) {
    const int v = var_of(c);
    assigns_[v] = 1 ^ (c & 1);
    level_[v] = static_cast<int>(trail_lim_.size());
    reason_[v] = reason;
    trail_.push_back(c);
}

int Solver::propagate() {
    int conflict = -1;
    while (qhead_ < trail_.size()) {
        const int p = trail_[qhead_++];
        const int false_lit = p ^ 1;
        auto& ws = watches_[false_lit];
        ++stats_.propagations;
        std::size_t i = 0, j = 0;
        while (i < ws.size()) {
            const Watch w = ws[i];
            if (value(w.blocker) == 1) {
                ws[j++] = ws[i++];
                continue;
            }
            Clause& c = clauses_[w.clause];
            if (c.deleted) {
                ++i;
                continue;
            }
            auto& L = c.lits;
            if (L[0] == false_lit) std::swap(L[0], L[1]);
            ++i;
            const int first = L[0];
            if (first != w.blocker && value(first) == 1) {
                ws[j++] = {w.clause, first};
                continue;
            }
            bool moved = false;
            for (std::size_t k = 2; k < L.size(); ++k) {
                if (value(L[k]) != 0) {
                    std::swap(L[1], L[k]);
                    watches_[L[1]].push_back({w.clause, first});
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            ws[j++] = {w.clause, first};
            if (value(first) == 0) {
                conflict = w.clause;
                qhead_ = trail_.size();
                while (i < ws.size()) ws[j++] = ws[i++];
            } else {
                assign(first, w.clause);
            }
        }
        ws.resize(j);
        if (conflict >= 0) break;
    }
    return conflict;
}

void Solver::bump_var(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
        for (auto& a : activity_) a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_contains(v)) heap_up(heap_index_[v]);
}

void Solver::bump_clause(Clause& c) {
    c.activity += clause_inc_;
    if (c.activity > 1e20) {
        for (auto& cl : clauses_) {
            if (cl.learnt) cl.activity *= 1e-20;
        }
        clause_inc_ *= 1e-20;
    }
}

bool Solver::redundant(int c) {
    const int r = reason_[var_of(c)];
    if (r < 0) return false;
    const auto& L = clauses_[r].lits;
    for (std::size_t k = 1; k < L.size(); ++k) {
        const int v = var_of(L[k]);
        if (!seen_[v] && level_[v] > 0) return false;
    }
    return true;
}

void Solver::analyze(int conflict, std::vector<int>& learnt, int& backtrack_level) {
    learnt.clear();
    learnt.push_back(-1);
    const int current = static_cast<int>(trail_lim_.size());
    int path = 0;
    int p = -1;
    int index = static_cast<int>(trail_.size()) - 1;
    std::vector<int> touched;
    do {
        Clause& c = clauses_[conflict];
        if (c.learnt) bump_clause(c);
        for (std::size_t k = p == -1 ? 0 : 1; k < c.lits.size(); ++k) {
            const int q = c.lits[k];
            const int v = var_of(q);
            if (seen_[v] || level_[v] == 0) continue;
            bump_var(v);
            seen_[v] = 1;
            touched.push_back(v);
            if (level_[v] >= current) ++path;
            else learnt.push_back(q);
        }
        while (!seen_[var_of(trail_[index])]) --index;
        p = trail_[index];
        --index;
        conflict = reason_[var_of(p)];
        seen_[var_of(p)] = 0;
        --path;
    } while (path > 0);
    learnt[0] = p ^ 1;

    std::size_t out = 1;
    for (std::size_t k = 1; k < learnt.size(); ++k) {
        if (!redundant(learnt[k])) learnt[out++] = learnt[k];
    }
    learnt.resize(out);
    for (int v : touched) seen_[v] = 0;

    if (learnt.size() == 1) {
        backtrack_level = 0;
    } else {
        std::size_t best = 1;
        for (std::size_t k = 2; k < learnt.size(); ++k) {
            if (level_[var_of(learnt[k])] > level_[var_of(learnt[best])]) best = k;
        }
        std::swap(learnt[1], learnt[best]);
        backtrack_level = level_[var_of(learnt[1])];
    }
}

void Solver::cancel_until(int level) {
    if (static_cast<int>(trail_lim_.size()) <= level) return;
    for (int k = static_cast<int>(trail_.size()) - 1; k >= trail_lim_[level]; --k) {
        const int v = var_of(trail_[k]);
        phase_[v] = static_cast<std::uint8_t>(assigns_[v]);
        assigns_[v] = -1;
        reason_[v] = -1;
        if (!heap_contains(v)) heap_insert(v);
    }
    trail_.resize(trail_lim_[level]);
    trail_lim_.resize(level);
    qhead_ = trail_.size();
}

int Solver::pick_branch() {
    while (!heap_.empty()) {
        const int v = heap_pop();
        if (assigns_[v] < 0) return 2 * v + (phase_[v] ? 0 : 1);
    }
    return -1;
}

void Solver::reduce_db() {
    std::vector<int> learnts;
    for (int i = 0; i < static_cast<int>(clauses_.size()); ++i) {
        if (clauses_[i].learnt && !clauses_[i].deleted) learnts.push_back(i);
    }
    std::sort(learnts.begin(), learnts.end(), [&](int a, int b) {
        if (clauses_[a].activity != clauses_[b].activity) return clauses_[a].activity < clauses_[b].activity;
        return a < b;
    });
    const std::size_t remove = learnts.size() / 2;
    for (std::size_t k = 0; k < remove; ++k) {
        Clause& c = clauses_[learnts[k]];
        if (c.lits.size() <= 2) continue;
        const int v = var_of(c.lits[0]);
        if (reason_[v] == learnts[k] && value(c.lits[0]) == 1) continue;
        c.deleted = true;
        c.lits.clear();
        c.lits.shrink_to_fit();
        --num_learnt_;
    }
    rebuild_watches();
}

void Solver::rebuild_watches() {
    for (auto& w : watches_) w.clear();
    for (int i = 0; i < static_cast<int>(clauses_.size()); ++i) {
        if (!clauses_[i].deleted) attach(i);
    }
}

Status Solver::solve(const std::vector<Lit>& assumptions,
                     std::optional<std::chrono::steady_clock::time_point> deadline) {
    ++stats_.solves;
    if (!ok_) return Status::Unsat;
    max_learnt_ = std::max(max_learnt_, static_cast<double>(num_original_) / 3.0 + 2000.0);
    std::vector<int> assume;
    for (Lit l : assumptions) assume.push_back(code(l));
    std::vector<int> learnt;
    for (int restart = 0;; ++restart) {
        const double budget = luby(2.0, restart) * 100.0;
        std::uint64_t conflicts_here = 0;
        for (;;) {
            const int conflict = propagate();
            if (conflict >= 0) {
                ++stats_.conflicts;
                ++conflicts_here;
                if (trail_lim_.empty()) {
                    ok_ = false;
                    return Status::Unsat;
                }
                int bt = 0;
                analyze(conflict, learnt, bt);
                cancel_until(bt);
                if (learnt.size() == 1) {
                    assign(learnt[0], -1);
                } else {
                    clauses_.push_back({learnt, true, false, 0.0});
                    const int ci = static_cast<int>(clauses_.size()) - 1;
                    attach(ci);
                    bump_clause(clauses_[ci]);
                    assign(learnt[0], ci);
                    ++num_learnt_;
                }
                var_inc_ /= 0.95;
                clause_inc_ /= 0.999;
                if (deadline && (stats_.conflicts & 127) == 0 &&
                    std::chrono::steady_clock::now() > *deadline) {
                    cancel_until(0);
                    return Status::Unknown;
                }
                continue;
            }
            if (static_cast<double>(conflicts_here) >= budget) {
                ++stats_.restarts;
                cancel_until(0);
                break;
            }
            if (static_cast<double>(num_learnt_) >= max_learnt_) {
                reduce_db();
                max_learnt_ *= 1.1;
            }
            int next = -1;
            while (trail_lim_.size() < assume.size()) {
                const int a = assume[trail_lim_.size()];
                const int v = value(a);
                if (v == 1) {
                    trail_lim_.push_back(static_cast<int>(trail_.size()));
                } else if (v == 0) {
                    cancel_until(0);
                    return Status::Unsat;
                } else {
                    next = a;
                    break;
                }
            }
            if (next == -1) {
                next = pick_branch();
                if (next == -1) {
                    model_.assign(assigns_.size(), 0);
                    for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == 1;
                    cancel_until(0);
                    return Status::Sat;
                }
                ++stats_.decisions;
            }
            trail_lim_.push_back(static_cast<int>(trail_.size()));
            assign(next, -1);
        }
    }
}

void Solver::heap_insert(int v) {
    heap_index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_index_[v]);
}

void Solver::heap_up(int i) {
    const int v = heap_[i];
    while (i > 0) {
        const int parent = (i - 1) >> 1;
        if (activity_[heap_[parent]] >= activity_[v]) break;
        heap_[i] = heap_[parent];
        heap_index_[heap_[i]] = i;
        i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = i;
}

void Solver::heap_down(int i) {
    const int v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    for (;;) {
        int child = 2 * i + 1;
        if (child >= n) break;
        if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]]) ++child;
        if (activity_[heap_[child]] <= activity_[v]) break;
        heap_[i] = heap_[child];
        heap_index_[heap_[i]] = i;
        i = child;
    }
    heap_[i] = v;
    heap_index_[v] = i;
}

int Solver::heap_pop() {
    const int top = heap_[0];
    heap_index_[top] = -1;
    const int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_index_[last] = 0;
        heap_down(0);
    }
    return top;
}

}  // namespace mpps::sat
