#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "condreach/bisection.hpp"
#include "condreach/model.hpp"

namespace condreach {

// MDP plus a state coloring; color-consistent memoryless policies induce the
// members of the represented Markov chain family. `allowed` restricts, per
// color, which action indices remain enabled (same shape at every state of
// the color).
struct ColoredMdp {
    Mdp base;
    std::vector<std::size_t> colorOf;                    // total on states
    std::map<std::size_t, std::vector<std::size_t>> allowed;  // color -> sorted action indices

    std::size_t familySize(std::size_t cap) const;  // throws when the product exceeds cap
};

// States without a @color annotation get fresh unique colors. Validates that
// same-colored states have identical action counts.
ColoredMdp make_colored(const Mdp& m);

struct ColorConflict {
    std::size_t color;
    std::size_t stateA, stateB;
    std::size_t actionA, actionB;
};

// One conflict per color whose `domain` states map to different action indices.
std::vector<ColorConflict> find_conflicts(const ColoredMdp& cm, const MemorylessPolicy& sigma,
                                          const StateSet& domain);

inline bool is_consistent(const ColoredMdp& cm, const MemorylessPolicy& sigma, const StateSet& domain) {
    return find_conflicts(cm, sigma, domain).empty();
}

// All color-consistent policies, lexicographic by color id then action index.
// Throws std::length_error when the family size exceeds cap.
std::vector<MemorylessPolicy> enumerate_family(const ColoredMdp& cm, std::size_t cap);

// Splits on the conflicting color whose conflict state lies farthest from the
// initial state (ties: lower state index). With a* the policy's action at that
// state, the children restrict the color to (allowed \ {a*}, {a*}) -- a
// disjoint cover of the parent's consistent policies.
std::pair<ColoredMdp, ColoredMdp> split(const ColoredMdp& cm, const std::vector<ColorConflict>& conflicts,
                                        const MemorylessPolicy& sigma,
                                        const std::vector<std::size_t>& distances);

enum class NodeStatus { EvidenceUnreachable, BoundDiscarded, Refined, Satisfied };

template <typename V>
struct NodeReport {
    NodeStatus status;
    std::optional<V> upperBound;
};

template <typename V>
struct SynthesisResult {
    bool feasible = false;
    std::optional<MemorylessPolicy> witness;
    std::optional<V> value;
    std::size_t nodesExplored = 0;
    double iterationsPerSecond = 0.0;
    std::vector<NodeReport<V>> reports;  // in exploration order
};

// Abstraction-refinement for Problem "is there a color-consistent policy with
// Pr(diamond G | diamond E) >= threshold". Depth-first worklist; sound and
// complete w.r.t. enumerate_family (verified witnesses only).
template <typename V>
SynthesisResult<V> synthesize(const ColoredMdp& cm, const Query& q, const BisectionConfig& cfg = {});

}  // namespace condreach
