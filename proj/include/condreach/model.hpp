#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "condreach/rational.hpp"
#include "condreach/state_set.hpp"

namespace condreach {

inline constexpr std::size_t kNoState = std::numeric_limits<std::size_t>::max();

struct ValidationError : std::runtime_error {
    std::vector<std::string> issues;
    explicit ValidationError(std::vector<std::string> diagnostics);
};

// One enabled action: display name plus a sparse distribution over successors.
// Entries are kept sorted by successor index; probabilities are exact and sum to 1.
struct Action {
    std::string name;
    std::vector<std::pair<std::size_t, Rational>> successors;
};

// Explicit-state MDP with exact transition probabilities. Immutable once built;
// safe to share read-only across concurrent queries.
struct Mdp {
    std::size_t numStates = 0;
    std::size_t initialState = 0;
    std::vector<std::vector<Action>> stateActions;   // one nonempty list per state
    std::map<std::string, StateSet> labels;
    std::map<std::size_t, std::size_t> colorAnnotations;  // optional @color lines

    const std::vector<Action>& actions(std::size_t s) const { return stateActions[s]; }
    std::size_t actionCount(std::size_t s) const { return stateActions[s].size(); }

    // |M|: number of transitions (s, alpha, s') with positive probability
    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& acts : stateActions) {
            for (const auto& a : acts) n += a.successors.size();
        }
        return n;
    }

    StateSet labelSet(const std::string& name) const {
        auto it = labels.find(name);
        if (it == labels.end()) {
            throw std::invalid_argument("unknown label: " + name);
        }
        return it->second;
    }
};

struct MemorylessPolicy {
    std::vector<std::size_t> choice;  // kNoState where undefined

    MemorylessPolicy() = default;
    explicit MemorylessPolicy(std::size_t numStates) : choice(numStates, kNoState) {}

    bool defined(std::size_t s) const { return s < choice.size() && choice[s] != kNoState; }
    std::size_t at(std::size_t s) const { return choice[s]; }
    void set(std::size_t s, std::size_t action) { choice[s] = action; }

    bool operator==(const MemorylessPolicy& other) const = default;
};

enum class Direction { Max, Min };
enum class Comparison { Lt, Le, Eq, Ge, Gt };

struct Query {
    StateSet goal;
    StateSet evidence;
    Direction direction = Direction::Max;
    Comparison comparison = Comparison::Le;
    Rational threshold = 0;
};

// Throws ValidationError listing one diagnostic per violated invariant.
void validate(const Mdp& m);

// Markov chain induced by a memoryless policy: every state keeps exactly the
// chosen action. Labels and colors are preserved; the policy must be total.
Mdp induce_chain(const Mdp& m, const MemorylessPolicy& policy);

// Replaces all actions of the given states by a single self-loop.
Mdp make_absorbing(const Mdp& m, const StateSet& states, const std::string& actionName = "bot");

// States reachable from `from` via any positive-probability edge.
StateSet reachable_states(const Mdp& m, std::size_t from);

}  // namespace condreach
