#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "condreach/model.hpp"

namespace condreach {

inline constexpr std::size_t kUnreachable = kNoState;

// { s | Pr_s^max(diamond target) > 0 }: backward reachability over the edge relation.
StateSet reach_positive_max(const Mdp& m, const StateSet& target);

// { s | Pr_s^min(diamond target) = 0 }: complement of the least fixed point of
// "every action has a successor already in the set" seeded with target.
StateSet prob_zero_min(const Mdp& m, const StateSet& target);

struct MecBlock {
    StateSet states;
    std::vector<std::pair<std::size_t, std::size_t>> retained;  // (state, action index)
};

struct MecPartition {
    std::vector<MecBlock> blocks;
    std::vector<std::size_t> blockOf;  // kNoState when the state is in no MEC
};

MecPartition maximal_end_components(const Mdp& m);

// Reverse-topological order (every non-self-loop successor precedes its
// predecessor), or nullopt when a cycle through distinct states exists.
// Self-loops are not cycles here.
std::optional<std::vector<std::size_t>> topological_order(const Mdp& m);

// Forward BFS hop counts over positive-probability edges; kUnreachable sentinel.
std::vector<std::size_t> bfs_distance(const Mdp& m, std::size_t from);

}  // namespace condreach
