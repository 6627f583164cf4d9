#include "mpps/recipes.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace mpps {

namespace {

bool satisfiable(const Recipe& r, const Inventory& inv) {
    for (int q = 0; q < kNumObjects; ++q) {
        if (inv[q] < r.needs[q]) return false;
    }
    return true;
}

Recipe make(Object product, std::initializer_list<std::pair<Object, int>> needs) {
    Recipe r{product, {}};
    for (auto [o, n] : needs) r.needs[index_of(o)] = n;
    return r;
}

}  // namespace

RecipeTable RecipeTable::defaults() {
    using O = Object;
    RecipeTable t;
    t.by_workshop_[index_of(Workshop::Workbench)] = {
        make(O::Plank, {{O::Wood, 2}}),
        make(O::Stick, {{O::Wood, 1}}),
    };
    t.by_workshop_[index_of(Workshop::Toolshed)] = {
        make(O::Bed, {{O::Wood, 1}, {O::Grass, 1}}),
        make(O::Rope, {{O::Grass, 1}}),
        make(O::Shears, {{O::Iron, 1}}),
    };
    t.by_workshop_[index_of(Workshop::Factory)] = {
        make(O::Axe, {{O::Stick, 1}, {O::Iron, 1}}),
        make(O::Bridge, {{O::Wood, 1}, {O::Iron, 1}}),
        make(O::Ladder, {{O::Plank, 1}}),
        make(O::Cloth, {{O::Grass, 1}}),
    };
    return t;
}

RecipeTable RecipeTable::from_json(const nlohmann::json& j) {
    RecipeTable t;
    for (int w = 0; w < kNumWorkshops; ++w) {
        const auto wname = std::string(name_of(static_cast<Workshop>(w)));
        if (!j.contains(wname)) continue;
        for (const auto& entry : j.at(wname)) {
            const auto product = parse_object(entry.at("make").get<std::string>());
            if (!product || is_resource(*product)) {
                throw Error("invalid-recipes", "recipe product must be an artifact");
            }
            Recipe r{*product, {}};
            for (const auto& [ing, n] : entry.at("from").items()) {
                const auto q = parse_object(ing);
                if (!q) throw Error("invalid-recipes", "unknown ingredient " + ing);
                r.needs[index_of(*q)] = n.get<int>();
            }
            t.by_workshop_[w].push_back(r);
        }
    }
    t.validate();
    return t;
}

nlohmann::json RecipeTable::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (int w = 0; w < kNumWorkshops; ++w) {
        auto arr = nlohmann::json::array();
        for (const auto& r : by_workshop_[w]) {
            nlohmann::json from = nlohmann::json::object();
            for (int q = 0; q < kNumObjects; ++q) {
                if (r.needs[q] > 0) from[std::string(name_of(static_cast<Object>(q)))] = r.needs[q];
            }
            arr.push_back({{"make", std::string(name_of(r.product))}, {"from", from}});
        }
        j[std::string(name_of(static_cast<Workshop>(w)))] = arr;
    }
    return j;
}

bool RecipeTable::makes(Workshop w, Object o) const {
    const auto& rs = by_workshop_[index_of(w)];
    return std::any_of(rs.begin(), rs.end(), [o](const Recipe& r) { return r.product == o; });
}

std::vector<Object> RecipeTable::touched(Workshop w) const {
    std::set<int> ids;
    for (const auto& r : by_workshop_[index_of(w)]) {
        ids.insert(index_of(r.product));
        for (int q = 0; q < kNumObjects; ++q) {
            if (r.needs[q] > 0) ids.insert(q);
        }
    }
    std::vector<Object> out;
    for (int i : ids) out.push_back(static_cast<Object>(i));
    return out;
}

std::array<int, kNumObjects> RecipeTable::craft_counts(Workshop w, const Inventory& inv) const {
    std::array<int, kNumObjects> made{};
    Inventory cur = inv;
    const auto& rs = by_workshop_[index_of(w)];
    for (;;) {
        auto it = std::find_if(rs.begin(), rs.end(),
                               [&](const Recipe& r) { return satisfiable(r, cur); });
        if (it == rs.end()) break;
        for (int q = 0; q < kNumObjects; ++q) cur[q] -= it->needs[q];
        cur[index_of(it->product)] += 1;
        made[index_of(it->product)] += 1;
    }
    return made;
}

Inventory RecipeTable::craft(Workshop w, const Inventory& inv) const {
    const auto made = craft_counts(w, inv);
    Inventory out = inv;
    for (const auto& r : by_workshop_[index_of(w)]) {
        const int m = made[index_of(r.product)];
        for (int q = 0; q < kNumObjects; ++q) out[q] -= r.needs[q] * m;
        out[index_of(r.product)] += m;
    }
    return out;
}

bool RecipeTable::depleted(Workshop w, const Inventory& inv) const {
    const auto& rs = by_workshop_[index_of(w)];
    return std::none_of(rs.begin(), rs.end(), [&](const Recipe& r) { return satisfiable(r, inv); });
}

void RecipeTable::validate() const {
    // An artifact is producible once all its ingredients are; iterate to a
    // fixpoint. Anything left over is either cyclic or ungrounded.
    std::array<bool, kNumObjects> producible{};
    for (int r = 0; r < kNumResources; ++r) producible[r] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& rs : by_workshop_) {
            for (const auto& r : rs) {
                if (producible[index_of(r.product)]) continue;
                bool ok = true;
                for (int q = 0; q < kNumObjects; ++q) {
                    if (r.needs[q] > 0 && !producible[q]) ok = false;
                }
                bool any = false;
                for (int q = 0; q < kNumObjects; ++q) any = any || r.needs[q] > 0;
                if (ok && any) {
                    producible[index_of(r.product)] = true;
                    changed = true;
                }
            }
        }
    }
    for (const auto& rs : by_workshop_) {
        for (const auto& r : rs) {
            if (!producible[index_of(r.product)]) {
                throw Error("invalid-recipes",
                            "artifact " + std::string(name_of(r.product)) +
                                " is not producible from raw resources");
            }
            if (r.needs[index_of(r.product)] > 0) {
                throw Error("invalid-recipes", "recipe consumes its own product");
            }
        }
    }
}

}  // namespace mpps
