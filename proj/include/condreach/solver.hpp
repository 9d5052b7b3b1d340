#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "condreach/graph.hpp"
#include "condreach/model.hpp"
#include "condreach/rational.hpp"

namespace condreach {

struct TransitionKey {
    std::size_t state;
    std::size_t action;
    std::size_t successor;
    auto operator<=>(const TransitionKey&) const = default;
};

// Sparse transition reward map, default 0. In this artifact rewards are only
// ever placed on transitions entering terminal states.
template <typename V>
class RewardFunction {
  public:
    void set(std::size_t s, std::size_t a, std::size_t succ, V value) {
        entries_[TransitionKey{s, a, succ}] = std::move(value);
    }

    V at(std::size_t s, std::size_t a, std::size_t succ) const {
        auto it = entries_.find(TransitionKey{s, a, succ});
        return it == entries_.end() ? V(0) : it->second;
    }

    bool contains(std::size_t s, std::size_t a, std::size_t succ) const {
        return entries_.count(TransitionKey{s, a, succ}) > 0;
    }

    bool empty() const { return entries_.empty(); }

    const std::map<TransitionKey, V>& entries() const { return entries_; }

  private:
    std::map<TransitionKey, V> entries_;
};

// Rewards on every transition of m entering a successor listed in bySuccessor.
template <typename V>
RewardFunction<V> entry_rewards(const Mdp& m, const std::map<std::size_t, V>& bySuccessor) {
    RewardFunction<V> rew;
    for (std::size_t s = 0; s < m.numStates; ++s) {
        const auto& acts = m.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            for (const auto& [succ, prob] : acts[a].successors) {
                auto it = bySuccessor.find(succ);
                if (it != bySuccessor.end()) rew.set(s, a, succ, it->second);
            }
        }
    }
    return rew;
}

template <typename V>
struct SolveResult {
    std::vector<V> values;
    MemorylessPolicy witness;
    std::size_t iterations = 0;
};

struct SolverOptions {
    double relativeTolerance = 1e-6;  // float value iteration stop, per state; unsound by design
    std::size_t maxIterations = 1u << 22;
};

// Optimal expected total reward until reaching `terminal`.
// Preconditions: terminal states are absorbing; rewards only on transitions
// entering terminal. End components among non-terminal states are collapsed
// internally so the Bellman fixed point is unique. Exact instantiation runs
// policy iteration with rational elimination; float runs value iteration.
template <typename V>
SolveResult<V> total_reward(const Mdp& m, const RewardFunction<V>& rewards, const StateSet& terminal,
                            Direction dir, const SolverOptions& opts = {});

// Same contract as total_reward, restricted to models whose topological_order
// exists; single reverse-topological sweep, iterations == 1. Throws
// std::invalid_argument on cyclic input.
template <typename V>
SolveResult<V> acyclic_dp(const Mdp& m, const RewardFunction<V>& rewards, const StateSet& terminal,
                          Direction dir);

// values[s] = Pr_s^dir(diamond target). Qualitative zero states are fixed by
// graph analysis; the quantitative part reduces to a total reward query
// (acyclic sweep when possible).
template <typename V>
SolveResult<V> reach_prob(const Mdp& m, const StateSet& target, Direction dir,
                          const SolverOptions& opts = {});

}  // namespace condreach
