#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpps {

using Rng = std::mt19937_64;

enum class Domain : std::uint8_t { Craft, Box };

// Craft objects: the five raw resources followed by the nine artifacts.
enum class Object : std::uint8_t {
    Wood, Iron, Grass, Gold, Gem,
    Bridge, Axe, Plank, Stick, Cloth, Rope, Bed, Shears, Ladder,
};
inline constexpr int kNumResources = 5;
inline constexpr int kNumArtifacts = 9;
inline constexpr int kNumObjects = kNumResources + kNumArtifacts;

enum class Workshop : std::uint8_t { Factory, Workbench, Toolshed };
inline constexpr int kNumWorkshops = 3;

enum class Boundary : std::uint8_t { Connected, Water, Stone, NotAdjacent };

inline constexpr int kNumColors = 10;

// Counts in abstract states saturate at this value.
inline constexpr int kCountCap = 4;

enum class Action : std::uint8_t { Up, Down, Left, Right, Use };
inline constexpr int kNumCraftActions = 5;
inline constexpr int kNumBoxActions = 4;

struct Pos {
    int row = 0;
    int col = 0;
    friend constexpr bool operator==(Pos, Pos) = default;
    friend constexpr auto operator<=>(Pos, Pos) = default;
};

constexpr Pos step_toward(Pos p, Action a) {
    switch (a) {
        case Action::Up: return {p.row - 1, p.col};
        case Action::Down: return {p.row + 1, p.col};
        case Action::Left: return {p.row, p.col - 1};
        case Action::Right: return {p.row, p.col + 1};
        case Action::Use: return p;
    }
    return p;
}

constexpr bool is_resource(Object o) { return static_cast<int>(o) < kNumResources; }
constexpr int index_of(Object o) { return static_cast<int>(o); }
constexpr int index_of(Workshop w) { return static_cast<int>(w); }
constexpr Object resource_at(int r) { return static_cast<Object>(r); }

std::string_view name_of(Object o);
std::string_view name_of(Workshop w);
std::string_view name_of(Boundary b);
std::string_view name_of(Action a);
std::string_view name_of(Domain d);
std::string_view color_name(int color);

std::optional<Object> parse_object(std::string_view s);
std::optional<Workshop> parse_workshop(std::string_view s);
std::optional<int> parse_color(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Domain> parse_domain(std::string_view s);

// Base for every recoverable error raised by the library. `code` is a stable
// machine-readable tag (e.g. "episode-over", "sampling-exhausted").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace mpps
