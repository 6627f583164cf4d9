#pragma once

#include <array>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mpps/types.hpp"

namespace mpps {

using Inventory = std::array<int, kNumObjects>;

struct Recipe {
    Object product;
    // Units of each ingredient consumed per unit produced.
    std::array<int, kNumObjects> needs{};
};

// Crafting rules of the craft game. Each workshop lists its recipes in
// priority order; crafting at a workshop repeatedly applies the first recipe
// whose ingredients are present until none is.
class RecipeTable {
public:
    static RecipeTable defaults();
    static RecipeTable from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::vector<Recipe>& recipes(Workshop w) const { return by_workshop_[index_of(w)]; }

    // Whether `o` appears as a product of workshop `w`.
    bool makes(Workshop w, Object o) const;

    // Objects whose inventory count the workshop can read or write.
    std::vector<Object> touched(Workshop w) const;

    // Units of each artifact made by crafting-to-depletion from `inv`.
    std::array<int, kNumObjects> craft_counts(Workshop w, const Inventory& inv) const;

    // Inventory after crafting-to-depletion at `w`.
    Inventory craft(Workshop w, const Inventory& inv) const;

    // True when no recipe of `w` is satisfiable from `inv`.
    bool depleted(Workshop w, const Inventory& inv) const;

    // Throws Error("invalid-recipes") when the table is cyclic or an
    // artifact cannot be produced from raw resources.
    void validate() const;

private:
    std::array<std::vector<Recipe>, kNumWorkshops> by_workshop_;
};

}  // namespace mpps
