#include "condreach/bisection.hpp"

#include <algorithm>

namespace condreach {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Std: return "std";
        case Variant::Adv: return "adv";
        case Variant::PtStd: return "pt-std";
        case Variant::PtAdv: return "pt-adv";
        case Variant::SternBrocot: return "stern-brocot";
    }
    return "?";
}

std::optional<Variant> variant_from_name(std::string_view name) {
    if (name == "std") return Variant::Std;
    if (name == "adv") return Variant::Adv;
    if (name == "pt-std") return Variant::PtStd;
    if (name == "pt-adv") return Variant::PtAdv;
    if (name == "stern-brocot") return Variant::SternBrocot;
    return std::nullopt;
}

Rational candidate_midpoint(const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("candidate_midpoint: empty interval");
    }
    return (lo + hi) / 2;
}

namespace {

bool above_low(const Rational& x, const Rational& lo, bool strict) { return strict ? x > lo : x >= lo; }
bool below_high(const Rational& x, const Rational& hi, bool strict) { return strict ? x < hi : x <= hi; }

// Stern-Brocot descent over [0,1]: the first tree node inside the interval is
// the unique minimal-denominator rational (ties resolved toward the smaller
// numerator by checking 0 before 1 before the interior).
Rational simplest_in(const Rational& lo, const Rational& hi, bool loStrict, bool hiStrict) {
    if (lo > hi || (lo == hi && (loStrict || hiStrict))) {
        throw std::logic_error("simplest_in: empty interval");
    }
    auto inside = [&](const Rational& x) { return above_low(x, lo, loStrict) && below_high(x, hi, hiStrict); };
    if (inside(Rational(0))) return 0;
    if (inside(Rational(1))) return 1;
    Rational left(0), right(1);
    while (true) {
        Rational mediant(left.get_num() + right.get_num(), left.get_den() + right.get_den());
        mediant.canonicalize();
        if (!above_low(mediant, lo, loStrict)) {
            left = mediant;
        } else if (!below_high(mediant, hi, hiStrict)) {
            right = mediant;
        } else {
            return mediant;
        }
    }
}

}  // namespace

Rational candidate_min_denominator(const Rational& lo, const Rational& hi) {
    if (lo > hi) throw std::invalid_argument("candidate_min_denominator: empty interval");
    if (lo < 0 || hi > 1) throw std::invalid_argument("candidate_min_denominator: interval outside [0,1]");
    return simplest_in(lo, hi, false, false);
}

void update_bounds_advanced(BisectionState& state, const Rational& lambda, const Rational& valueAtLambda) {
    if (!state.evidenceMax || sgn(*state.evidenceMax) <= 0) {
        throw std::logic_error("update_bounds_advanced requires a positive Pr^max(evidence)");
    }
    int s = sgn(valueAtLambda);
    if (s == 0) {  // V(lambda) = 0: lambda is the optimum
        state.lower = lambda;
        state.upper = lambda;
        state.lowerStrict = state.upperStrict = false;
        return;
    }

    auto clamp01 = [](Rational v) {
        if (v < 0) return Rational(0);
        if (v > 1) return Rational(1);
        return v;
    };
    auto tighten_lower = [&](const Rational& cand, bool strict) {
        Rational c = clamp01(cand);
        if (c > state.lower || (c == state.lower && strict && !state.lowerStrict)) {
            state.lower = c;
            state.lowerStrict = strict;
        }
    };
    auto tighten_upper = [&](const Rational& cand, bool strict) {
        Rational c = clamp01(cand);
        if (c < state.upper || (c == state.upper && strict && !state.upperStrict)) {
            state.upper = c;
            state.upperStrict = strict;
        }
    };
    bool haveMin = state.evidenceMin && sgn(*state.evidenceMin) > 0;

    if (s > 0) {
        tighten_lower(lambda, true);  // standard update
        tighten_lower(lambda + valueAtLambda / *state.evidenceMax, false);
        if (haveMin) tighten_upper(lambda + valueAtLambda / *state.evidenceMin, false);
        // Pr^min(E) = 0: the upper side falls back to the standard update (unchanged)
    } else {
        tighten_upper(lambda, true);  // standard update
        tighten_upper(lambda + valueAtLambda / *state.evidenceMax, false);
        if (haveMin) tighten_lower(lambda + valueAtLambda / *state.evidenceMin, false);
    }
}

namespace {

template <typename V>
ConditionalPolicy policy_from_circ_witness(const TransformArtifacts<V>& t, const MemorylessPolicy& w) {
    const Mdp& m = t.original;
    ConditionalPolicy pi;
    pi.afterGoal = t.evidenceReach.witness;
    pi.afterEvidence = t.goalReach.witness;
    pi.beforeAny = MemorylessPolicy(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        std::size_t a = w.at(s);
        pi.beforeAny.set(s, a < m.actionCount(s) ? a : 0);
    }
    return pi;
}

bool policies_equal_on_reachable(const Mdp& m, const Query& q, const ConditionalPolicy& a,
                                 const ConditionalPolicy& b) {
    if (a.chosenExit && b.chosenExit && *a.chosenExit != *b.chosenExit) return false;
    for (auto [s, mem] : policy_reachable_nodes(m, a, q)) {
        switch (mem) {
            case kMemNone:
                if (a.beforeAny.at(s) != b.beforeAny.at(s)) return false;
                break;
            case kMemGoal:
                if (a.afterGoal.at(s) != b.afterGoal.at(s)) return false;
                break;
            case kMemEvidence:
                if (a.afterEvidence.at(s) != b.afterEvidence.at(s)) return false;
                break;
            default:
                break;  // both seen: choices cannot matter
        }
    }
    return true;
}

template <typename V>
struct ProbeResult {
    Sign sign = Sign::Zero;
    std::optional<Rational> trueValue;  // exact V(lambda) when its magnitude is known
    std::optional<ConditionalPolicy> witness;
};

// One threshold probe. When the initial component is nonempty, the
// unrestricted solve on mCirc comes first: a decisive-side result is V(lambda)
// itself and its witness induces V(lambda); otherwise the sign is settled on
// the eliminated model.
template <typename V>
ProbeResult<V> probe(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda,
                     const BisectionConfig& cfg) {
    ProbeResult<V> out;
    int decisive = q.direction == Direction::Max ? 1 : -1;
    if (t.tilde) {
        RewardFunction<V> circRewards = reward_lambda_circ(t, q, lambda);
        SolveResult<V> circ;
        if (topological_order(t.mCirc)) {
            circ = acyclic_dp<V>(t.mCirc, circRewards, t.terminal, q.direction);
        } else {
            circ = total_reward<V>(t.mCirc, circRewards, t.terminal, q.direction, cfg.solver);
        }
        V w = circ.values[t.mCirc.initialState];
        if (ValueOps<V>::sign(w, cfg.zeroTolerance) == decisive) {
            out.sign = static_cast<Sign>(decisive);
            out.trueValue = ValueOps<V>::to_rational(w);
            out.witness = policy_from_circ_witness(t, circ.witness);
            return out;
        }
    }
    ThresholdOutcome<V> res = threshold_value(t, q, lambda, cfg.solver, cfg.zeroTolerance);
    out.sign = res.sign;
    out.witness = res.witness;
    if (res.sign == Sign::Zero) {
        out.trueValue = Rational(0);
    } else if (!t.tilde) {
        out.trueValue = ValueOps<V>::to_rational(res.value);
    }
    return out;
}

}  // namespace

template <typename V>
std::optional<V> policy_tracking_check(const Mdp& m, const Query& q, const BisectionState& state,
                                       const SolverOptions& opts) {
    if (!state.lowerWitness || !state.upperWitness) return std::nullopt;
    if (!policies_equal_on_reachable(m, q, *state.lowerWitness, *state.upperWitness)) return std::nullopt;
    return evaluate_policy<V>(m, *state.lowerWitness, q, opts);
}

template <typename V>
OptimizeOutcome<V> optimize(const Mdp& m, const Query& q, const BisectionConfig& cfg) {
    const bool usesAdvanced = cfg.variant == Variant::Adv || cfg.variant == Variant::PtAdv;
    const bool usesTracking = cfg.variant == Variant::PtStd || cfg.variant == Variant::PtAdv;
    const bool usesSternBrocot = cfg.variant == Variant::SternBrocot;

    if (sgn(cfg.epsilon) < 0 || cfg.epsilon > 1) {
        throw std::invalid_argument("epsilon must lie in [0,1]");
    }
    if (sgn(cfg.epsilon) == 0) {
        if (!ValueOps<V>::exact) {
            throw std::invalid_argument("epsilon = 0 requires exact arithmetic");
        }
        if (!usesTracking && !usesSternBrocot) {
            throw std::invalid_argument("epsilon = 0 with a variant lacking exact termination (" +
                                        variant_name(cfg.variant) + ")");
        }
    }
    if (!check_defined(m, q.evidence)) throw UndefinedQueryError();

    TransformArtifacts<V> t = build_transform<V>(m, q, cfg.solver);
    OptimizeOutcome<V> out;
    if (min_edge_case(t, q)) {
        out.exact = true;
        out.forcedOne = true;
        out.value = ValueOps<V>::from(Rational(1));
        out.lower = out.upper = 1;
        return out;
    }

    BisectionState st;
    if (usesAdvanced) {
        if (q.direction == Direction::Max) {
            st.evidenceMax = ValueOps<V>::to_rational(t.evidenceReach.values[m.initialState]);
            st.evidenceMin = ValueOps<V>::to_rational(
                reach_prob<V>(m, q.evidence, Direction::Min, cfg.solver).values[m.initialState]);
        } else {
            st.evidenceMin = ValueOps<V>::to_rational(t.evidenceReach.values[m.initialState]);
            st.evidenceMax = ValueOps<V>::to_rational(
                reach_prob<V>(m, q.evidence, Direction::Max, cfg.solver).values[m.initialState]);
        }
    }

    constexpr std::size_t kStagnationLimit = 64;  // exact pt runs switch to Stern-Brocot candidates
    constexpr std::size_t kProbeLimit = 10000;
    std::size_t probeCount = 0;

    auto run_probe = [&](const Rational& lambda) {
        ++probeCount;
        return probe(t, q, lambda, cfg);
    };
    auto finish_exact = [&](const Rational& lambda, const V& value,
                            const std::optional<ConditionalPolicy>& witness) {
        out.exact = true;
        out.value = value;
        out.lower = out.upper = lambda;
        out.witness = witness;
    };

    while (true) {
        if (st.lower == st.upper) {
            finish_exact(st.lower, ValueOps<V>::from(st.lower),
                         st.lowerWitness ? st.lowerWitness : st.upperWitness);
            break;
        }
        if (sgn(cfg.epsilon) > 0 && (st.upper - st.lower) / 2 <= cfg.epsilon) {
            out.exact = false;
            out.lower = st.lower;
            out.upper = st.upper;
            Rational mid = (st.lower + st.upper) / 2;
            out.value = ValueOps<V>::from(mid);
            out.witness = st.lowerWitness ? st.lowerWitness : st.upperWitness;
            break;
        }
        if (probeCount >= kProbeLimit) {
            throw std::logic_error("bisection did not terminate within the probe limit");
        }

        bool sternCandidates = usesSternBrocot || (sgn(cfg.epsilon) == 0 && st.iterations >= kStagnationLimit);
        Rational lambda;
        if (sternCandidates) {
            Rational simplest = simplest_in(st.lower, st.upper, st.lowerStrict, st.upperStrict);
            if (simplest == st.lower || simplest == st.upper) {
                lambda = simplest;  // an endpoint not yet excluded is the likely exact optimum
            } else {
                Rational width = st.upper - st.lower;
                if (simplest >= st.lower + width / 4 && simplest <= st.upper - width / 4) {
                    lambda = simplest;
                } else {
                    lambda = (st.lower + st.upper) / 2;
                }
            }
        } else {
            lambda = (st.lower + st.upper) / 2;
        }

        ProbeResult<V> pr = run_probe(lambda);
        ++st.iterations;

        if (pr.sign == Sign::Zero) {
            finish_exact(lambda, ValueOps<V>::from(lambda), pr.witness);
            break;
        }
        if (usesAdvanced && pr.trueValue) {
            update_bounds_advanced(st, lambda, *pr.trueValue);
        } else if (pr.sign == Sign::Positive) {
            if (lambda > st.lower || !st.lowerStrict) {
                st.lower = lambda;
                st.lowerStrict = true;
            }
        } else {
            if (lambda < st.upper || !st.upperStrict) {
                st.upper = lambda;
                st.upperStrict = true;
            }
        }
        if (pr.sign == Sign::Positive) {
            st.lowerWitness = pr.witness;
        } else {
            st.upperWitness = pr.witness;
        }
        if (st.lower > st.upper) {  // cannot happen with exact values; float-noise guard
            st.upper = st.lower;
        }

        if (usesTracking && st.lowerWitness && st.upperWitness &&
            policies_equal_on_reachable(m, q, *st.lowerWitness, *st.upperWitness)) {
            V v = evaluate_policy<V>(m, *st.lowerWitness, q, cfg.solver);
            Rational vr = ValueOps<V>::to_rational(v);
            if (!t.tilde) {
                // both witnesses provably induce V at their probe points
                finish_exact(vr, v, st.lowerWitness);
                break;
            }
            if (vr > st.lower && vr <= st.upper) {
                ProbeResult<V> check = run_probe(vr);  // verification, not a loop iteration
                if (check.sign == Sign::Zero) {
                    finish_exact(vr, v, st.lowerWitness);
                    break;
                }
                if (check.sign == Sign::Positive) {
                    st.lower = vr;
                    st.lowerStrict = true;
                    st.lowerWitness = check.witness;
                } else {
                    st.upper = vr;
                    st.upperStrict = true;
                    st.upperWitness = check.witness;
                }
            }
        }
    }
    out.iterations = st.iterations;
    out.probes = probeCount;
    return out;
}

template std::optional<Rational> policy_tracking_check<Rational>(const Mdp&, const Query&,
                                                                 const BisectionState&, const SolverOptions&);
template std::optional<double> policy_tracking_check<double>(const Mdp&, const Query&, const BisectionState&,
                                                             const SolverOptions&);
template OptimizeOutcome<Rational> optimize<Rational>(const Mdp&, const Query&, const BisectionConfig&);
template OptimizeOutcome<double> optimize<double>(const Mdp&, const Query&, const BisectionConfig&);

}  // namespace condreach
