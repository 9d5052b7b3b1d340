#pragma once

#include <optional>
#include <string>

#include "condreach/conditional.hpp"

namespace condreach {

enum class Variant { Std, Adv, PtStd, PtAdv, SternBrocot };

std::string variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

struct BisectionConfig {
    Variant variant = Variant::PtStd;
    Rational epsilon = 0;       // 0 = exact termination (pt-* and stern-brocot only)
    double zeroTolerance = 1e-9;
    SolverOptions solver;
};

Rational candidate_midpoint(const Rational& lo, const Rational& hi);

// Unique rational with minimal denominator (ties: minimal numerator) in the
// closed interval [lo, hi] subset of [0, 1]; Stern-Brocot descent.
Rational candidate_min_denominator(const Rational& lo, const Rational& hi);

struct BisectionState {
    Rational lower = 0;
    Rational upper = 1;
    bool lowerStrict = false;  // a probe showed optimum > lower
    bool upperStrict = false;
    std::optional<ConditionalPolicy> lowerWitness;  // induces V at the last positive probe
    std::optional<ConditionalPolicy> upperWitness;  // induces V at the last negative probe
    std::size_t iterations = 0;
    std::optional<Rational> evidenceMin;  // Pr^min(diamond E), advanced bounds only
    std::optional<Rational> evidenceMax;  // Pr^max(diamond E)
};

// Two-sided bound update from the value V(lambda) (exact magnitude required);
// bounds replace the old ones only when strictly tighter, clamped to [0,1].
// A zero Pr^min(diamond E) makes the corresponding side fall back to the
// standard update.
void update_bounds_advanced(BisectionState& state, const Rational& lambda, const Rational& valueAtLambda);

template <typename V>
struct OptimizeOutcome {
    bool exact = false;
    V value{};                // exact optimum, or midpoint of [lower, upper]
    Rational lower = 0;
    Rational upper = 1;
    std::optional<ConditionalPolicy> witness;
    std::size_t iterations = 0;  // bisection loop iterations
    std::size_t probes = 0;      // threshold solves, including verification probes
    bool forcedOne = false;
};

// Policy-tracking termination: when both witnesses agree on all states
// reachable under them (all three memory modes plus the chosen exit), their
// evaluation is the exact optimum.
template <typename V>
std::optional<V> policy_tracking_check(const Mdp& m, const Query& q, const BisectionState& state,
                                       const SolverOptions& opts = {});

template <typename V>
OptimizeOutcome<V> optimize(const Mdp& m, const Query& q, const BisectionConfig& cfg);

}  // namespace condreach
