#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "condreach/model.hpp"
#include "condreach/solver.hpp"

namespace condreach {

struct UndefinedQueryError : std::runtime_error {
    UndefinedQueryError() : std::runtime_error("conditional probability is undefined: evidence unreachable") {}
    explicit UndefinedQueryError(const std::string& what) : std::runtime_error(what) {}
};

// True iff some policy reaches the evidence set with positive probability;
// the conditional probability is defined exactly in that case.
bool check_defined(const Mdp& m, const StateSet& evidence);

// Products of the reduction pipeline, built once per query and shared across
// all lambda probes (only the reward function depends on lambda).
template <typename V>
struct TransformArtifacts {
    Mdp original;
    Mdp mCirc;                 // goal/evidence states absorbing
    StateSet terminal;          // T, original state ids
    SolveResult<V> goalReach;       // Pr^dir(diamond G) on the original model
    SolveResult<V> evidenceReach;   // Pr^dir(diamond E) on the original model
    StateSet initialComponent;  // C^I
    std::vector<std::pair<std::size_t, std::size_t>> exits;  // (state, action), sorted

    // Elimination of C^I; absent when C^I is empty (solve directly on mCirc).
    std::optional<Mdp> tilde;
    std::vector<std::size_t> tildeToOrig;  // per tilde state; kNoState for s_bot
    std::vector<std::size_t> origToTilde;  // kNoState for eliminated states
    std::size_t tildeInitial = kNoState;
    std::size_t tildeBottom = kNoState;

    const Mdp& solveModel() const { return tilde ? *tilde : mCirc; }
    std::size_t solveInitial() const { return tilde ? tildeInitial : mCirc.initialState; }
    // Maps a solve-model state back to an original state (kNoState for s_bot).
    std::size_t backToOriginal(std::size_t solveState) const {
        return tilde ? tildeToOrig[solveState] : solveState;
    }
    StateSet solveTerminal() const {
        if (!tilde) return terminal;
        StateSet t(tilde->numStates);
        for (std::size_t s : terminal.members()) t.insert(origToTilde[s]);
        return t;
    }
};

template <typename V>
TransformArtifacts<V> build_transform(const Mdp& m, const Query& q, const SolverOptions& opts = {});

// R^lambda entry value for paths first hitting `original` state s':
//   s' in E:      Pr_{s'}^dir(diamond G) - lambda
//   s' in G \ E:  Pr_{s'}^dir(diamond E) * (1 - lambda)
//   otherwise 0
template <typename V>
V reward_entry_value(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda,
                     std::size_t originalState);

// R^lambda materialized on the solve model (tilde when present, else mCirc).
template <typename V>
RewardFunction<V> reward_lambda(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda);

// R^lambda on mCirc regardless of the tilde model. The unrestricted optimum on
// mCirc equals V(lambda) whenever it is on the decisive side of zero (for max:
// positive; avoiding policies pin the other side to 0), which is how the
// advanced bisection bounds obtain the exact magnitude.
template <typename V>
RewardFunction<V> reward_lambda_circ(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda);

enum class Sign { Negative = -1, Zero = 0, Positive = 1 };

// Three-memory policy witnessing a threshold answer: behave per beforeAny
// until G or E is first visited, then switch to afterGoal / afterEvidence.
struct ConditionalPolicy {
    MemorylessPolicy beforeAny;       // m_empty
    MemorylessPolicy afterGoal;       // m_G, optimizes diamond E
    MemorylessPolicy afterEvidence;   // m_E, optimizes diamond G
    std::optional<std::pair<std::size_t, std::size_t>> chosenExit;

    static ConditionalPolicy from_memoryless(const MemorylessPolicy& sigma) {
        return ConditionalPolicy{sigma, sigma, sigma, std::nullopt};
    }
};

template <typename V>
struct ThresholdOutcome {
    Sign sign = Sign::Zero;   // of V(lambda) vs 0; decides Pr^dir(G|E) ~ lambda
    V value{};                // expected reward computed on the solve model
    std::optional<ConditionalPolicy> witness;
    bool forcedOne = false;   // min-direction edge case: the conditional value is 1
    std::size_t solverIterations = 0;
};

// Min-direction edge case: the policy set over (mCirc, T) is empty although the
// query is defined; the conditional value is then exactly 1.
template <typename V>
bool min_edge_case(const TransformArtifacts<V>& t, const Query& q);

template <typename V>
ThresholdOutcome<V> threshold_value(const TransformArtifacts<V>& t, const Query& q,
                                    const Rational& lambda, const SolverOptions& opts = {},
                                    double zeroTolerance = 1e-9);

template <typename V>
ThresholdOutcome<V> threshold_value(const Mdp& m, const Query& q, const Rational& lambda,
                                    const SolverOptions& opts = {}, double zeroTolerance = 1e-9);

// Lifts a witness of the solve model to the three-memory policy on m.
template <typename V>
ConditionalPolicy extract_policy(const TransformArtifacts<V>& t, const MemorylessPolicy& tildeWitness,
                                 const Query& q);

// Pr(diamond G and diamond E) / Pr(diamond E) of the 3-memory product chain of
// m under pi. Throws UndefinedQueryError when the denominator is zero.
template <typename V>
V evaluate_policy(const Mdp& m, const ConditionalPolicy& pi, const Query& q,
                  const SolverOptions& opts = {});

// Memory flags of the 3-memory product.
inline constexpr std::uint8_t kMemNone = 0;
inline constexpr std::uint8_t kMemGoal = 1;
inline constexpr std::uint8_t kMemEvidence = 2;
inline constexpr std::uint8_t kMemBoth = 3;

// (state, memory) pairs reachable from the initial state under pi; used by
// policy-tracking equality and by evaluation.
std::vector<std::pair<std::size_t, std::uint8_t>> policy_reachable_nodes(const Mdp& m,
                                                                         const ConditionalPolicy& pi,
                                                                         const Query& q);

// Restart baseline: 3-memory product with every branch that can no longer
// reach the evidence-satisfied region rewired to the product initial state.
// Pr^dir(diamond goal) on the result equals the conditional optimum (max).
struct RestartModel {
    Mdp model;
    StateSet goal;                                            // both G and E seen
    std::vector<std::pair<std::size_t, std::uint8_t>> nodes;  // (original state, memory)
    std::size_t rewiredBranches = 0;
};

RestartModel build_restart(const Mdp& m, const Query& q);

}  // namespace condreach
