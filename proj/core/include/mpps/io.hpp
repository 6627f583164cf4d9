#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mpps/world.hpp"

namespace mpps {

// Map fixture text format:
//
//   mpps-map 1
//   domain craft          (or box)
//   seed 17
//   agent 4 1             (row col)
//   horizon 100
//   radius 2
//   opened 3 5 2          (box only, optional: open box at row col, lock colour)
//   grid
//   ..#.....
//   ...
//
// Craft legend: . empty, W wood, I iron, G grass, O gold, E gem,
// ~ water, # stone, f factory, b workbench, t toolshed.
// Box legend: . empty, a-j loose key of colour 0-9, A-J lock of colour 0-9,
// 0-9 box key (its lock is the cell to the right), p-y opened box key.
struct MapFixture {
    ConcreteWorld world;
    std::uint64_t seed = 0;
};

std::string write_fixture(const ConcreteWorld& w, std::uint64_t seed = 0);
// Throws Error("parse-error") on malformed input.
MapFixture read_fixture(const std::string& text);
MapFixture load_fixture(const std::string& path);

// ASCII dump of the agent's view ('?' for unseen cells, '@' for the agent).
std::string render(const ConcreteWorld& w);
std::string render(const Observation& o);

// One line of the step trace (JSON lines). The first line of a trace is a
// header {"format":"mpps-trace","version":1,...}.
struct TraceRecord {
    int t = 0;
    Action action = Action::Up;
    Pos agent;
    std::vector<std::pair<int, int>> inventory_delta;  // (object or colour, delta)
    std::vector<Pos> mask_delta;                       // newly seen cells
    int held_key = -1;
};

nlohmann::json trace_header(const ConcreteWorld& w, std::uint64_t seed);
TraceRecord make_trace_record(const ConcreteWorld& before, const ConcreteWorld& after, Action a);
nlohmann::json to_json(const TraceRecord& r);
TraceRecord trace_record_from_json(const nlohmann::json& j);

}  // namespace mpps
