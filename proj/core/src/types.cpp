#include "mpps/types.hpp"

namespace mpps {

namespace {

constexpr std::array<std::string_view, kNumObjects> kObjectNames = {
    "wood", "iron", "grass", "gold", "gem", "bridge", "axe",
    "plank", "stick", "cloth", "rope", "bed", "shears", "ladder",
};
constexpr std::array<std::string_view, kNumWorkshops> kWorkshopNames = {
    "factory", "workbench", "toolshed"};
constexpr std::array<std::string_view, 4> kBoundaryNames = {
    "connected", "water", "stone", "not-adjacent"};
constexpr std::array<std::string_view, 5> kActionNames = {
    "up", "down", "left", "right", "use"};
constexpr std::array<std::string_view, kNumColors> kColorNames = {
    "red", "green", "blue", "yellow", "purple",
    "orange", "cyan", "magenta", "white", "brown",
};

template <std::size_t N>
std::optional<int> find_name(const std::array<std::string_view, N>& names,
                             std::string_view s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<int>(i);
    }
    return std::nullopt;
}

}  // namespace

std::string_view name_of(Object o) { return kObjectNames[index_of(o)]; }
std::string_view name_of(Workshop w) { return kWorkshopNames[index_of(w)]; }
std::string_view name_of(Boundary b) { return kBoundaryNames[static_cast<int>(b)]; }
std::string_view name_of(Action a) { return kActionNames[static_cast<int>(a)]; }
std::string_view name_of(Domain d) { return d == Domain::Craft ? "craft" : "box"; }

std::string_view color_name(int color) {
    if (color < 0 || color >= kNumColors) return "?";
    return kColorNames[color];
}

std::optional<Object> parse_object(std::string_view s) {
    auto i = find_name(kObjectNames, s);
    if (!i) return std::nullopt;
    return static_cast<Object>(*i);
}

std::optional<Workshop> parse_workshop(std::string_view s) {
    auto i = find_name(kWorkshopNames, s);
    if (!i) return std::nullopt;
    return static_cast<Workshop>(*i);
}

std::optional<int> parse_color(std::string_view s) { return find_name(kColorNames, s); }

std::optional<Action> parse_action(std::string_view s) {
    auto i = find_name(kActionNames, s);
    if (!i) return std::nullopt;
    return static_cast<Action>(*i);
}

std::optional<Domain> parse_domain(std::string_view s) {
    if (s == "craft") return Domain::Craft;
    if (s == "box") return Domain::Box;
    return std::nullopt;
}

}  // namespace mpps
