#include "condreach/conditional.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "condreach/graph.hpp"

namespace condreach {

bool check_defined(const Mdp& m, const StateSet& evidence) {
    return reach_positive_max(m, evidence).contains(m.initialState);
}

namespace {

std::uint8_t mem_update(std::uint8_t mem, std::size_t s, const Query& q) {
    if (q.goal.contains(s)) mem |= kMemGoal;
    if (q.evidence.contains(s)) mem |= kMemEvidence;
    return mem;
}

std::size_t policy_choice(const ConditionalPolicy& pi, std::size_t s, std::uint8_t mem) {
    switch (mem) {
        case kMemNone:
            return pi.beforeAny.at(s);
        case kMemGoal:
            return pi.afterGoal.at(s);
        case kMemEvidence:
            return pi.afterEvidence.at(s);
        default:
            return kNoState;  // both seen: behavior irrelevant
    }
}

struct ProductChain {
    Mdp model;
    std::vector<std::pair<std::size_t, std::uint8_t>> nodes;
    StateSet evidenceSeen;  // memory has the evidence flag
    StateSet bothSeen;
};

// 3-memory product of m under pi, absorbing once both G and E were seen.
ProductChain build_policy_product(const Mdp& m, const ConditionalPolicy& pi, const Query& q) {
    ProductChain out;
    std::map<std::pair<std::size_t, std::uint8_t>, std::size_t> ids;
    std::deque<std::size_t> queue;

    auto intern = [&](std::size_t s, std::uint8_t mem) {
        auto [it, fresh] = ids.try_emplace({s, mem}, out.nodes.size());
        if (fresh) {
            out.nodes.emplace_back(s, mem);
            queue.push_back(it->second);
        }
        return it->second;
    };

    std::uint8_t initialMem = mem_update(kMemNone, m.initialState, q);
    intern(m.initialState, initialMem);
    std::vector<std::vector<Action>> actions;
    while (!queue.empty()) {
        std::size_t id = queue.front();
        queue.pop_front();
        auto [s, mem] = out.nodes[id];
        Action step;
        if (mem == kMemBoth) {
            step.name = "bot";
            step.successors.emplace_back(id, Rational(1));
        } else {
            std::size_t a = policy_choice(pi, s, mem);
            if (a == kNoState || a >= m.actionCount(s)) {
                throw std::invalid_argument("conditional policy undefined at state " + std::to_string(s));
            }
            const Action& src = m.actions(s)[a];
            step.name = src.name;
            std::map<std::size_t, Rational> mass;
            for (const auto& [succ, prob] : src.successors) {
                mass[intern(succ, mem_update(mem, succ, q))] += prob;
            }
            for (auto& [node, p] : mass) step.successors.emplace_back(node, p);
        }
        if (actions.size() <= id) actions.resize(id + 1);
        actions[id] = {std::move(step)};
    }
    actions.resize(out.nodes.size());

    out.model.numStates = out.nodes.size();
    out.model.initialState = 0;
    out.model.stateActions = std::move(actions);
    out.evidenceSeen = StateSet(out.nodes.size());
    out.bothSeen = StateSet(out.nodes.size());
    for (std::size_t id = 0; id < out.nodes.size(); ++id) {
        if (out.nodes[id].second & kMemEvidence) out.evidenceSeen.insert(id);
        if (out.nodes[id].second == kMemBoth) out.bothSeen.insert(id);
    }
    return out;
}

StateSet set_union(const StateSet& a, const StateSet& b) {
    StateSet out(std::max(a.universe(), b.universe()));
    for (std::size_t s : a.members()) out.insert(s);
    for (std::size_t s : b.members()) out.insert(s);
    return out;
}

}  // namespace

std::vector<std::pair<std::size_t, std::uint8_t>> policy_reachable_nodes(const Mdp& m,
                                                                         const ConditionalPolicy& pi,
                                                                         const Query& q) {
    return build_policy_product(m, pi, q).nodes;
}

template <typename V>
TransformArtifacts<V> build_transform(const Mdp& m, const Query& q, const SolverOptions& opts) {
    if (!check_defined(m, q.evidence)) throw UndefinedQueryError();

    TransformArtifacts<V> t;
    t.original = m;
    t.mCirc = make_absorbing(m, set_union(q.goal, q.evidence));
    if (q.goal.contains(m.initialState) || q.evidence.contains(m.initialState)) {
        // rewards pay on entering goal/evidence states; an absorbed initial state
        // gets a fresh predecessor so its own entry reward is collected
        Action enter;
        enter.name = "init";
        enter.successors.emplace_back(m.initialState, Rational(1));
        t.mCirc.stateActions.push_back({std::move(enter)});
        t.mCirc.initialState = t.mCirc.numStates;
        t.mCirc.numStates += 1;
    }
    const std::size_t circStates = t.mCirc.numStates;
    const std::size_t circInitial = t.mCirc.initialState;

    // T = E  union  { s in G | Pr_s^dir(diamond E) > 0 }, on the original model
    StateSet evidencePositive = q.direction == Direction::Max
                                    ? reach_positive_max(m, q.evidence)
                                    : prob_zero_min(m, q.evidence).complement();
    t.terminal = q.evidence;
    for (std::size_t s : q.goal.members()) {
        if (evidencePositive.contains(s)) t.terminal.insert(s);
    }

    t.goalReach = reach_prob<V>(m, q.goal, q.direction, opts);
    t.evidenceReach = reach_prob<V>(m, q.evidence, q.direction, opts);

    // C^I: states reachable from the initial state inside Z = { Pr^min(diamond T) = 0 }
    // using only actions whose support stays in Z.
    StateSet z = prob_zero_min(t.mCirc, t.terminal);
    t.initialComponent = StateSet(circStates);
    if (z.contains(circInitial)) {
        std::deque<std::size_t> queue;
        t.initialComponent.insert(circInitial);
        queue.push_back(circInitial);
        while (!queue.empty()) {
            std::size_t s = queue.front();
            queue.pop_front();
            for (const auto& action : t.mCirc.actions(s)) {
                bool closed = true;
                for (const auto& [succ, prob] : action.successors) {
                    if (!z.contains(succ)) {
                        closed = false;
                        break;
                    }
                }
                if (!closed) continue;
                for (const auto& [succ, prob] : action.successors) {
                    if (!t.initialComponent.contains(succ)) {
                        t.initialComponent.insert(succ);
                        queue.push_back(succ);
                    }
                }
            }
        }
    }

    for (std::size_t s : t.initialComponent.members()) {
        const auto& acts = t.mCirc.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            for (const auto& [succ, prob] : acts[a].successors) {
                if (!t.initialComponent.contains(succ)) {
                    t.exits.emplace_back(s, a);
                    break;
                }
            }
        }
    }

    if (!t.initialComponent.empty() && !t.exits.empty()) {
        t.origToTilde.assign(circStates, kNoState);
        for (std::size_t s = 0; s < circStates; ++s) {
            if (!t.initialComponent.contains(s)) {
                t.origToTilde[s] = t.tildeToOrig.size();
                t.tildeToOrig.push_back(s);
            }
        }
        t.tildeInitial = t.tildeToOrig.size();
        t.tildeToOrig.push_back(kNoState);
        t.tildeBottom = t.tildeToOrig.size();
        t.tildeToOrig.push_back(kNoState);

        Mdp tilde;
        tilde.numStates = t.tildeToOrig.size();
        tilde.initialState = t.tildeInitial;
        tilde.stateActions.resize(tilde.numStates);

        auto redirect = [&](std::size_t s, std::size_t a) {
            const Action& src = t.mCirc.actions(s)[a];
            Action dst;
            dst.name = src.name;
            std::map<std::size_t, Rational> mass;
            for (const auto& [succ, prob] : src.successors) {
                std::size_t target = t.initialComponent.contains(succ) ? t.tildeBottom : t.origToTilde[succ];
                mass[target] += prob;
            }
            for (auto& [node, p] : mass) dst.successors.emplace_back(node, p);
            return dst;
        };

        for (std::size_t s = 0; s < circStates; ++s) {
            if (t.initialComponent.contains(s)) continue;
            for (std::size_t a = 0; a < t.mCirc.actionCount(s); ++a) {
                tilde.stateActions[t.origToTilde[s]].push_back(redirect(s, a));
            }
        }
        for (const auto& [exitState, exitAction] : t.exits) {
            Action choice = redirect(exitState, exitAction);
            choice.name = "(" + std::to_string(exitState) + "," + t.mCirc.actions(exitState)[exitAction].name + ")";
            tilde.stateActions[t.tildeInitial].push_back(std::move(choice));
        }
        Action bot;
        bot.name = "bot";
        bot.successors.emplace_back(t.tildeBottom, Rational(1));
        tilde.stateActions[t.tildeBottom].push_back(std::move(bot));
        t.tilde = std::move(tilde);
    }
    return t;
}

template <typename V>
V reward_entry_value(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda,
                     std::size_t originalState) {
    if (q.evidence.contains(originalState)) {
        return t.goalReach.values[originalState] - ValueOps<V>::from(lambda);
    }
    if (q.goal.contains(originalState)) {
        return t.evidenceReach.values[originalState] * ValueOps<V>::from(Rational(1) - lambda);
    }
    return V(0);
}

namespace {

template <typename V, typename BackMap>
RewardFunction<V> build_lambda_rewards(const TransformArtifacts<V>& t, const Query& q,
                                       const Rational& lambda, const Mdp& model, BackMap&& back) {
    RewardFunction<V> rew;
    std::vector<bool> interesting(model.numStates, false);
    std::vector<V> entryValue(model.numStates, V(0));
    for (std::size_t s = 0; s < model.numStates; ++s) {
        std::size_t orig = back(s);
        if (orig == kNoState) continue;
        if (!q.evidence.contains(orig) && !q.goal.contains(orig)) continue;
        V v = reward_entry_value(t, q, lambda, orig);
        if (!(v == V(0))) {
            interesting[s] = true;
            entryValue[s] = std::move(v);
        }
    }
    for (std::size_t s = 0; s < model.numStates; ++s) {
        const auto& acts = model.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            for (const auto& [succ, prob] : acts[a].successors) {
                if (interesting[succ] && succ != s) rew.set(s, a, succ, entryValue[succ]);
            }
        }
    }
    return rew;
}

}  // namespace

template <typename V>
RewardFunction<V> reward_lambda(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda) {
    return build_lambda_rewards(t, q, lambda, t.solveModel(),
                                [&](std::size_t s) { return t.backToOriginal(s); });
}

template <typename V>
RewardFunction<V> reward_lambda_circ(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda) {
    return build_lambda_rewards(t, q, lambda, t.mCirc, [](std::size_t s) { return s; });
}

template <typename V>
bool min_edge_case(const TransformArtifacts<V>& t, const Query& q) {
    if (q.direction != Direction::Min) return false;
    return !reach_positive_max(t.mCirc, t.terminal).contains(t.mCirc.initialState);
}

template <typename V>
ConditionalPolicy extract_policy(const TransformArtifacts<V>& t, const MemorylessPolicy& tildeWitness,
                                 const Query& /*q: direction already baked into the cached witnesses*/) {
    const Mdp& m = t.original;
    ConditionalPolicy pi;
    pi.afterGoal = t.evidenceReach.witness;  // after G: optimize diamond E
    pi.afterEvidence = t.goalReach.witness;  // after E: optimize diamond G
    pi.beforeAny = MemorylessPolicy(m.numStates);

    if (!t.tilde) {
        for (std::size_t s = 0; s < m.numStates; ++s) {
            std::size_t a = tildeWitness.at(s);
            pi.beforeAny.set(s, a < m.actionCount(s) ? a : 0);
        }
        return pi;
    }

    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (t.initialComponent.contains(s)) continue;
        std::size_t a = tildeWitness.at(t.origToTilde[s]);
        pi.beforeAny.set(s, a < m.actionCount(s) ? a : 0);
    }

    std::size_t exitIdx = tildeWitness.at(t.tildeInitial);
    auto [exitState, exitAction] = t.exits[exitIdx];
    pi.chosenExit = std::make_pair(exitState, exitAction);

    // Inside C^I: reach the exit state with positive probability while staying
    // in the component. States that cannot reach it keep their lowest internal
    // action; their choice never matters for the induced value.
    auto internal_actions = [&](std::size_t s) {
        std::vector<std::size_t> out;
        const auto& acts = t.mCirc.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            bool closed = true;
            for (const auto& [succ, prob] : acts[a].successors) {
                if (!t.initialComponent.contains(succ)) {
                    closed = false;
                    break;
                }
            }
            if (closed) out.push_back(a);
        }
        return out;
    };

    for (std::size_t s : t.initialComponent.members()) {
        if (s >= m.numStates) continue;  // fresh entry state: single action, nothing to choose
        auto internals = internal_actions(s);
        pi.beforeAny.set(s, internals.empty() ? 0 : internals.front());
    }
    pi.beforeAny.set(exitState, exitAction);

    std::set<std::size_t> routed{exitState};
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s : t.initialComponent.members()) {
            if (routed.count(s)) continue;
            for (std::size_t a : internal_actions(s)) {
                bool hits = false;
                for (const auto& [succ, prob] : t.mCirc.actions(s)[a].successors) {
                    if (routed.count(succ)) {
                        hits = true;
                        break;
                    }
                }
                if (hits) {
                    if (s < m.numStates) pi.beforeAny.set(s, a);
                    routed.insert(s);
                    changed = true;
                    break;
                }
            }
        }
    }
    if (!routed.count(t.mCirc.initialState) && t.mCirc.initialState != exitState) {
        throw std::logic_error("no intra-component route to the chosen exit");
    }
    return pi;
}

template <typename V>
ThresholdOutcome<V> threshold_value(const TransformArtifacts<V>& t, const Query& q, const Rational& lambda,
                                    const SolverOptions& opts, double zeroTolerance) {
    ThresholdOutcome<V> out;
    if (min_edge_case(t, q)) {
        // the conditional value is exactly 1, so V(lambda) compares like 1 - lambda
        out.forcedOne = true;
        Rational delta = Rational(1) - lambda;
        out.value = ValueOps<V>::from(delta);
        out.sign = static_cast<Sign>(sgn(delta));
        return out;
    }

    const Mdp& model = t.solveModel();
    RewardFunction<V> rewards = reward_lambda(t, q, lambda);
    StateSet terminal = t.solveTerminal();
    SolveResult<V> res;
    if (topological_order(model)) {
        res = acyclic_dp<V>(model, rewards, terminal, q.direction);
    } else {
        res = total_reward<V>(model, rewards, terminal, q.direction, opts);
    }
    out.value = res.values[t.solveInitial()];
    out.sign = static_cast<Sign>(ValueOps<V>::sign(out.value, zeroTolerance));
    out.witness = extract_policy(t, res.witness, q);
    out.solverIterations = res.iterations;
    return out;
}

template <typename V>
ThresholdOutcome<V> threshold_value(const Mdp& m, const Query& q, const Rational& lambda,
                                    const SolverOptions& opts, double zeroTolerance) {
    TransformArtifacts<V> t = build_transform<V>(m, q, opts);
    return threshold_value(t, q, lambda, opts, zeroTolerance);
}

template <typename V>
V evaluate_policy(const Mdp& m, const ConditionalPolicy& pi, const Query& q, const SolverOptions& opts) {
    ProductChain product = build_policy_product(m, pi, q);
    V prEvidence = reach_prob<V>(product.model, product.evidenceSeen, Direction::Max, opts)
                       .values[product.model.initialState];
    if (prEvidence == V(0)) {
        throw UndefinedQueryError("policy reaches the evidence set with probability zero");
    }
    V prBoth = reach_prob<V>(product.model, product.bothSeen, Direction::Max, opts)
                   .values[product.model.initialState];
    return prBoth / prEvidence;
}

RestartModel build_restart(const Mdp& m, const Query& q) {
    if (!check_defined(m, q.evidence)) throw UndefinedQueryError();

    RestartModel out;
    std::map<std::pair<std::size_t, std::uint8_t>, std::size_t> ids;
    std::deque<std::size_t> queue;
    auto intern = [&](std::size_t s, std::uint8_t mem) {
        auto [it, fresh] = ids.try_emplace({s, mem}, out.nodes.size());
        if (fresh) {
            out.nodes.emplace_back(s, mem);
            queue.push_back(it->second);
        }
        return it->second;
    };

    intern(m.initialState, mem_update(kMemNone, m.initialState, q));
    std::vector<std::vector<Action>> actions;
    while (!queue.empty()) {
        std::size_t id = queue.front();
        queue.pop_front();
        auto [s, mem] = out.nodes[id];
        std::vector<Action> acts;
        for (const Action& src : m.actions(s)) {
            Action mapped;
            mapped.name = src.name;
            std::map<std::size_t, Rational> mass;
            for (const auto& [succ, prob] : src.successors) {
                mass[intern(succ, mem_update(mem, succ, q))] += prob;
            }
            for (auto& [node, p] : mass) mapped.successors.emplace_back(node, p);
            acts.push_back(std::move(mapped));
        }
        if (actions.size() <= id) actions.resize(out.nodes.size());
        actions[id] = std::move(acts);
    }
    actions.resize(out.nodes.size());

    Mdp product;
    product.numStates = out.nodes.size();
    product.initialState = 0;
    product.stateActions = std::move(actions);

    StateSet evidenceSat(product.numStates);
    out.goal = StateSet(product.numStates);
    for (std::size_t id = 0; id < out.nodes.size(); ++id) {
        if (out.nodes[id].second & kMemEvidence) evidenceSat.insert(id);
        if (out.nodes[id].second == kMemBoth) out.goal.insert(id);
    }

    // Mass that can never satisfy the condition restarts. Additionally, wherever
    // a scheduler could avoid the evidence forever (probability mass the
    // conditional discards), it gets an explicit restart choice: discarding and
    // restarting describe the same conditional policies. Rewiring dead branches
    // alone would lose that mass instead of redistributing it.
    StateSet canSatisfy = reach_positive_max(product, evidenceSat);
    StateSet canAvoid = prob_zero_min(product, evidenceSat);
    for (std::size_t id = 0; id < product.numStates; ++id) {
        for (Action& action : product.stateActions[id]) {
            std::map<std::size_t, Rational> mass;
            bool rewired = false;
            for (const auto& [succ, prob] : action.successors) {
                if (canSatisfy.contains(succ)) {
                    mass[succ] += prob;
                } else {
                    mass[product.initialState] += prob;
                    rewired = true;
                    ++out.rewiredBranches;
                }
            }
            if (rewired) {
                action.successors.clear();
                for (auto& [node, p] : mass) action.successors.emplace_back(node, p);
            }
        }
        if (canAvoid.contains(id)) {
            Action restart;
            restart.name = "restart";
            restart.successors.emplace_back(product.initialState, Rational(1));
            product.stateActions[id].push_back(std::move(restart));
        }
    }
    product.labels.emplace("goal", out.goal);
    out.model = std::move(product);
    return out;
}

template TransformArtifacts<Rational> build_transform<Rational>(const Mdp&, const Query&, const SolverOptions&);
template TransformArtifacts<double> build_transform<double>(const Mdp&, const Query&, const SolverOptions&);
template Rational reward_entry_value<Rational>(const TransformArtifacts<Rational>&, const Query&,
                                               const Rational&, std::size_t);
template double reward_entry_value<double>(const TransformArtifacts<double>&, const Query&, const Rational&,
                                            std::size_t);
template RewardFunction<Rational> reward_lambda<Rational>(const TransformArtifacts<Rational>&, const Query&,
                                                          const Rational&);
template RewardFunction<double> reward_lambda<double>(const TransformArtifacts<double>&, const Query&,
                                                      const Rational&);
template RewardFunction<Rational> reward_lambda_circ<Rational>(const TransformArtifacts<Rational>&,
                                                               const Query&, const Rational&);
template RewardFunction<double> reward_lambda_circ<double>(const TransformArtifacts<double>&, const Query&,
                                                           const Rational&);
template bool min_edge_case<Rational>(const TransformArtifacts<Rational>&, const Query&);
template bool min_edge_case<double>(const TransformArtifacts<double>&, const Query&);
template ConditionalPolicy extract_policy<Rational>(const TransformArtifacts<Rational>&,
                                                    const MemorylessPolicy&, const Query&);
template ConditionalPolicy extract_policy<double>(const TransformArtifacts<double>&, const MemorylessPolicy&,
                                                  const Query&);
template ThresholdOutcome<Rational> threshold_value<Rational>(const TransformArtifacts<Rational>&,
                                                              const Query&, const Rational&,
                                                              const SolverOptions&, double);
template ThresholdOutcome<double> threshold_value<double>(const TransformArtifacts<double>&, const Query&,
                                                          const Rational&, const SolverOptions&, double);
template ThresholdOutcome<Rational> threshold_value<Rational>(const Mdp&, const Query&, const Rational&,
                                                              const SolverOptions&, double);
template ThresholdOutcome<double> threshold_value<double>(const Mdp&, const Query&, const Rational&,
                                                          const SolverOptions&, double);
template Rational evaluate_policy<Rational>(const Mdp&, const ConditionalPolicy&, const Query&,
                                            const SolverOptions&);
template double evaluate_policy<double>(const Mdp&, const ConditionalPolicy&, const Query&,
                                        const SolverOptions&);

}  // namespace condreach
