#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mpps/abstraction.hpp"
#include "mpps/mapgen.hpp"

namespace mpps {

// Whether `s` agrees with every field the observation pins down:
//   craft: inventory; the agent's zone holds at least what its view zone
//   shows (exactly, once that view zone is complete); per-type totals over
//   all zones are at least the observed totals; everything when all_seen.
//   box: held key; box counts at least the observed ones; the loose key when
//   one is in view or the only loose key is known to be taken; everything
//   when all_seen.
bool agrees_with(const PartialAbstractState& obs, const AbstractWorld& s);

// Makes `s` agree with `obs` by raising or overwriting known fields.
AbstractWorld overwrite_known(const PartialAbstractState& obs, AbstractWorld s);

// A full map consistent with `o`: seen cells keep their current contents
// (hidden lock colours filled in from `initial`), unseen cells come from
// `initial`; agent, inventory and keys come from `o`.
ConcreteWorld complete_world(const Observation& o, const std::vector<Cell>& initial);

struct TrainingPair {
    PartialAbstractState o;
    AbstractWorld s;
};

// Random-policy rollouts of `horizon` steps until exactly n_pairs pairs
// (abstract_observed(o_t), abstract_full(world_t)) are collected.
std::vector<TrainingPair> collect_dataset(const EnvConfig& cfg, int n_pairs, std::uint64_t seed);

struct SampledWorldSet {
    std::vector<AbstractWorld> worlds;
    std::string backend;  // "exact" | "cvae" | "point"
    std::uint64_t obs_digest = 0;
    int rejected = 0;              // draws dropped by a map filter
    bool filter_exhausted = false;  // filter budget ran out; rest unfiltered
};

// Predicate on sampled initial maps.
using MapFilter = std::function<bool(const std::vector<Cell>& initial)>;

std::uint64_t digest(const Observation& o);

// Posterior over generator maps given the first-seen cells and the start
// cell. Craft: layouts are weighed in closed form, unseen cells drawn from
// the zone tables, and draws violating the generator's truncation rejected.
// Box: slot contents are matched against the observation by exhaustive
// enumeration of chain shapes and item assignments. Throws
// Error("sampling-exhausted") past `budget` rejected draws.
class ExactPosterior {
public:
    ExactPosterior(EnvConfig cfg, std::uint64_t budget = 200000);

    // Initial maps drawn from the posterior.
    std::vector<std::vector<Cell>> sample_maps(const Observation& o, int m, Rng& rng) const;
    SampledWorldSet sample(const Observation& o, int m, std::uint64_t seed) const;
    // Posterior additionally conditioned on `keep`. Past `filter_budget`
    // draws the remaining slots take unfiltered draws.
    SampledWorldSet sample(const Observation& o, int m, std::uint64_t seed, const MapFilter& keep,
                           int filter_budget = 300) const;

    const EnvConfig& config() const { return cfg_; }

private:
    std::vector<std::vector<Cell>> sample_craft(const Observation& o, int m, Rng& rng) const;
    std::vector<std::vector<Cell>> sample_box(const Observation& o, int m, Rng& rng) const;

    EnvConfig cfg_;
    std::vector<Layout> layouts_;
    std::uint64_t budget_;
};

// Draws maps from the generator prior until their first-seen cells and
// start match `o`. Only practical on small maps; kept as a reference.
std::vector<std::vector<Cell>> naive_rejection_maps(const EnvConfig& cfg, const Observation& o, int m,
                                                    std::uint64_t seed, std::uint64_t budget);

}  // namespace mpps
