#pragma once

#include <cstdint>
#include <random>

#include "condreach/colored.hpp"
#include "condreach/model.hpp"

namespace condreach {

// Deterministic pseudo-random instances for oracle suites and `bench`.
// Layered DAG with fan-out <= 2 and rational probabilities with denominators
// <= maxDenominator; optional back edges make the model cyclic. Goal and
// evidence labels are sampled disjoint from the last layer, and the instance
// is regenerated (derived sub-seed) until the conditional query is defined.
struct GeneratorConfig {
    std::uint64_t seed = 0;
    std::size_t states = 8;
    std::size_t maxActions = 2;
    bool acyclic = false;
    std::size_t maxDenominator = 8;
};

Mdp random_mdp(const GeneratorConfig& cfg);

// Random coloring of a random_mdp instance with family size <= memberCap.
ColoredMdp random_colored_mdp(const GeneratorConfig& cfg, std::size_t memberCap);

}  // namespace condreach
