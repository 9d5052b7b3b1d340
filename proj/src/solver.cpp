#include "condreach/solver.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace condreach {

namespace {

template <typename V>
bool better(const V& a, const V& b, Direction dir) {
    return dir == Direction::Max ? a > b : a < b;
}

void check_terminal_absorbing(const Mdp& m, const StateSet& terminal) {
    for (std::size_t s : terminal.members()) {
        for (const auto& action : m.actions(s)) {
            if (action.successors.size() != 1 || action.successors[0].first != s) {
                throw std::invalid_argument("terminal state " + std::to_string(s) + " is not absorbing");
            }
        }
    }
}

template <typename V>
void check_reward_contract(const RewardFunction<V>& rewards, const StateSet& terminal) {
    for (const auto& [key, value] : rewards.entries()) {
        if (!terminal.contains(key.successor)) {
            throw std::invalid_argument("reward on a non-terminal-entering transition (state " +
                                        std::to_string(key.state) + ")");
        }
    }
}

// ---------------------------------------------------------------------------
// MEC collapsing. Each non-terminal block becomes one representative whose
// actions are the block's exiting pairs plus a zero-reward escape to an
// absorbing sink (staying forever inside the component is a legal policy
// worth 0). In-block probability mass of an exiting action loops back to the
// representative. The result has no end component among non-terminal states,
// so the Bellman fixed point is unique and every policy terminates a.s.
// ---------------------------------------------------------------------------

template <typename V>
struct CollapsedModel {
    bool identity = false;
    Mdp model;
    StateSet terminal;
    RewardFunction<V> rewards;
    std::vector<std::size_t> origToQuot;
    MecPartition mecs;
    std::vector<std::size_t> blockOfQuot;  // rep state -> block id, else kNoState
    // rep action -> originating (state, action); (kNoState, kNoState) marks the stay escape
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> repActions;
    std::size_t sink = kNoState;
};

template <typename V>
CollapsedModel<V> collapse_mecs(const Mdp& m, const RewardFunction<V>& rewards, const StateSet& terminal) {
    CollapsedModel<V> out;
    out.mecs = maximal_end_components(m);

    std::vector<std::size_t> collapsedBlocks;
    for (std::size_t b = 0; b < out.mecs.blocks.size(); ++b) {
        if (!out.mecs.blocks[b].states.intersects(terminal)) collapsedBlocks.push_back(b);
    }
    if (collapsedBlocks.empty()) {
        out.identity = true;
        out.model = m;
        out.terminal = terminal;
        out.rewards = rewards;
        out.origToQuot.resize(m.numStates);
        for (std::size_t s = 0; s < m.numStates; ++s) out.origToQuot[s] = s;
        return out;
    }

    std::vector<bool> isCollapsed(m.numStates, false);
    for (std::size_t b : collapsedBlocks) {
        for (std::size_t s : out.mecs.blocks[b].states.members()) isCollapsed[s] = true;
    }
    out.origToQuot.assign(m.numStates, kNoState);
    std::size_t next = 0;
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (!isCollapsed[s]) out.origToQuot[s] = next++;
    }
    std::vector<std::size_t> blockRep(out.mecs.blocks.size(), kNoState);
    for (std::size_t b : collapsedBlocks) {
        blockRep[b] = next++;
        for (std::size_t s : out.mecs.blocks[b].states.members()) out.origToQuot[s] = blockRep[b];
    }
    out.sink = next++;

    Mdp quot;
    quot.numStates = next;
    quot.initialState = out.origToQuot[m.initialState];
    quot.stateActions.resize(next);
    out.blockOfQuot.assign(next, kNoState);
    out.repActions.resize(next);

    auto mapped_action = [&](std::size_t s, std::size_t a) {
        const Action& src = m.actions(s)[a];
        std::map<std::size_t, Rational> mass;
        for (const auto& [succ, prob] : src.successors) mass[out.origToQuot[succ]] += prob;
        Action dst;
        dst.name = src.name;
        for (auto& [q, p] : mass) dst.successors.emplace_back(q, p);
        return dst;
    };
    auto copy_rewards = [&](std::size_t s, std::size_t a, std::size_t quotState, std::size_t quotAction) {
        for (const auto& [succ, prob] : m.actions(s)[a].successors) {
            V r = rewards.at(s, a, succ);
            if (!(r == V(0))) out.rewards.set(quotState, quotAction, out.origToQuot[succ], r);
        }
    };

    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (isCollapsed[s]) continue;
        std::size_t q = out.origToQuot[s];
        for (std::size_t a = 0; a < m.actionCount(s); ++a) {
            quot.stateActions[q].push_back(mapped_action(s, a));
            copy_rewards(s, a, q, quot.stateActions[q].size() - 1);
        }
    }
    for (std::size_t b : collapsedBlocks) {
        std::size_t rep = blockRep[b];
        out.blockOfQuot[rep] = b;
        const MecBlock& block = out.mecs.blocks[b];
        for (std::size_t s : block.states.members()) {
            for (std::size_t a = 0; a < m.actionCount(s); ++a) {
                bool exits = false;
                for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                    if (!block.states.contains(succ)) {
                        exits = true;
                        break;
                    }
                }
                if (!exits) continue;
                quot.stateActions[rep].push_back(mapped_action(s, a));
                out.repActions[rep].emplace_back(s, a);
                copy_rewards(s, a, rep, quot.stateActions[rep].size() - 1);
            }
        }
        Action stay;
        stay.name = "stay";
        stay.successors.emplace_back(out.sink, Rational(1));
        quot.stateActions[rep].push_back(std::move(stay));
        out.repActions[rep].emplace_back(kNoState, kNoState);
    }
    Action bot;
    bot.name = "bot";
    bot.successors.emplace_back(out.sink, Rational(1));
    quot.stateActions[out.sink].push_back(std::move(bot));

    out.terminal = StateSet(next);
    for (std::size_t s : terminal.members()) out.terminal.insert(out.origToQuot[s]);
    out.terminal.insert(out.sink);
    out.model = std::move(quot);
    return out;
}

// In-block policy reaching exitState with positive probability via retained
// pairs only (block is strongly connected through them). exitState==kNoState
// means the stay escape was chosen: members keep their lowest retained action.
void route_block(const Mdp& m, const MecBlock& block, std::size_t exitState, std::size_t exitAction,
                 MemorylessPolicy& witness) {
    std::map<std::size_t, std::vector<std::size_t>> retainedAt;
    for (const auto& [s, a] : block.retained) retainedAt[s].push_back(a);

    for (std::size_t s : block.states.members()) {
        auto it = retainedAt.find(s);
        witness.set(s, it == retainedAt.end() ? 0 : it->second.front());
    }
    if (exitState == kNoState) return;

    witness.set(exitState, exitAction);
    std::set<std::size_t> routed{exitState};
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s : block.states.members()) {
            if (routed.count(s)) continue;
            for (std::size_t a : retainedAt[s]) {
                bool hits = false;
                for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                    if (routed.count(succ)) {
                        hits = true;
                        break;
                    }
                }
                if (hits) {
                    witness.set(s, a);
                    routed.insert(s);
                    changed = true;
                    break;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exact policy evaluation: solve x = P_sigma (r + x) on non-terminal states
// by rational Gaussian elimination. Every policy on the collapsed model
// reaches terminal a.s., so the system is non-singular.
// ---------------------------------------------------------------------------

std::vector<Rational> evaluate_policy_exact(const Mdp& m, const RewardFunction<Rational>& rewards,
                                            const StateSet& terminal, const std::vector<std::size_t>& sigma) {
    std::vector<std::size_t> rowOf(m.numStates, kNoState);
    std::vector<std::size_t> stateOf;
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (!terminal.contains(s)) {
            rowOf[s] = stateOf.size();
            stateOf.push_back(s);
        }
    }
    const std::size_t k = stateOf.size();
    std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k + 1, Rational(0)));
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t s = stateOf[i];
        a[i][i] = 1;
        const Action& act = m.actions(s)[sigma[s]];
        for (const auto& [succ, prob] : act.successors) {
            a[i][k] += prob * rewards.at(s, sigma[s], succ);
            if (rowOf[succ] != kNoState) a[i][rowOf[succ]] -= prob;
        }
    }
    // forward elimination, first-nonzero pivot
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        while (pivot < k && sgn(a[pivot][col]) == 0) ++pivot;
        if (pivot == k) throw std::logic_error("singular induced system in policy evaluation");
        if (pivot != col) std::swap(a[pivot], a[col]);
        for (std::size_t row = col + 1; row < k; ++row) {
            if (sgn(a[row][col]) == 0) continue;
            Rational factor = a[row][col] / a[col][col];
            for (std::size_t c = col; c <= k; ++c) a[row][c] -= factor * a[col][c];
        }
    }
    std::vector<Rational> solution(k, Rational(0));
    for (std::size_t row = k; row-- > 0;) {
        Rational acc = a[row][k];
        for (std::size_t c = row + 1; c < k; ++c) acc -= a[row][c] * solution[c];
        solution[row] = acc / a[row][row];
    }
    std::vector<Rational> values(m.numStates, Rational(0));
    for (std::size_t i = 0; i < k; ++i) values[stateOf[i]] = solution[i];
    return values;
}

SolveResult<Rational> policy_iteration(const Mdp& m, const RewardFunction<Rational>& rewards,
                                       const StateSet& terminal, Direction dir) {
    std::vector<std::size_t> sigma(m.numStates, 0);
    SolveResult<Rational> result;
    result.iterations = 0;
    while (true) {
        result.values = evaluate_policy_exact(m, rewards, terminal, sigma);
        ++result.iterations;
        bool improved = false;
        for (std::size_t s = 0; s < m.numStates; ++s) {
            if (terminal.contains(s)) continue;
            Rational best = result.values[s];
            std::size_t bestAction = sigma[s];
            bool strictly = false;
            for (std::size_t a = 0; a < m.actionCount(s); ++a) {
                Rational q = 0;
                for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                    q += prob * (rewards.at(s, a, succ) + result.values[succ]);
                }
                if (better(q, best, dir)) {
                    best = q;
                    bestAction = a;
                    strictly = true;
                }
            }
            if (strictly) {
                sigma[s] = bestAction;
                improved = true;
            }
        }
        if (!improved) break;
    }
    result.witness = MemorylessPolicy(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) result.witness.set(s, sigma[s]);
    return result;
}

SolveResult<double> value_iteration(const Mdp& m, const RewardFunction<double>& rewards,
                                    const StateSet& terminal, Direction dir, const SolverOptions& opts) {
    std::vector<double> x(m.numStates, 0.0);
    std::vector<double> next(m.numStates, 0.0);
    std::vector<std::vector<std::vector<double>>> probs(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        probs[s].resize(m.actionCount(s));
        for (std::size_t a = 0; a < m.actionCount(s); ++a) {
            for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                probs[s][a].push_back(to_double(prob));
            }
        }
    }
    std::size_t sweeps = 0;
    while (sweeps < opts.maxIterations) {
        ++sweeps;
        bool converged = true;
        for (std::size_t s = 0; s < m.numStates; ++s) {
            if (terminal.contains(s)) {
                next[s] = 0.0;
                continue;
            }
            double best = 0.0;
            bool first = true;
            for (std::size_t a = 0; a < m.actionCount(s); ++a) {
                double q = 0.0;
                const auto& succs = m.actions(s)[a].successors;
                for (std::size_t i = 0; i < succs.size(); ++i) {
                    q += probs[s][a][i] * (rewards.at(s, a, succs[i].first) + x[succs[i].first]);
                }
                if (first || better(q, best, dir)) {
                    best = q;
                    first = false;
                }
            }
            next[s] = best;
            double diff = next[s] - x[s];
            if (diff < 0) diff = -diff;
            double bound = opts.relativeTolerance * (next[s] < 0 ? -next[s] : next[s]);
            if (diff > bound) converged = false;
        }
        std::swap(x, next);
        if (converged) break;
    }
    SolveResult<double> result;
    result.values = x;
    result.iterations = sweeps;
    result.witness = MemorylessPolicy(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (terminal.contains(s)) {
            result.witness.set(s, 0);
            continue;
        }
        double best = 0.0;
        std::size_t bestAction = 0;
        bool first = true;
        for (std::size_t a = 0; a < m.actionCount(s); ++a) {
            double q = 0.0;
            const auto& succs = m.actions(s)[a].successors;
            for (std::size_t i = 0; i < succs.size(); ++i) {
                q += probs[s][a][i] * (rewards.at(s, a, succs[i].first) + x[succs[i].first]);
            }
            if (first || better(q, best, dir)) {
                best = q;
                bestAction = a;
                first = false;
            }
        }
        result.witness.set(s, bestAction);
    }
    return result;
}

template <typename V>
SolveResult<V> solve_collapsed(const CollapsedModel<V>& collapsed, Direction dir, const SolverOptions& opts) {
    if constexpr (ValueOps<V>::exact) {
        return policy_iteration(collapsed.model, collapsed.rewards, collapsed.terminal, dir);
    } else {
        return value_iteration(collapsed.model, collapsed.rewards, collapsed.terminal, dir, opts);
    }
}

}  // namespace

template <typename V>
SolveResult<V> total_reward(const Mdp& m, const RewardFunction<V>& rewards, const StateSet& terminal,
                            Direction dir, const SolverOptions& opts) {
    check_terminal_absorbing(m, terminal);
    check_reward_contract(rewards, terminal);

    CollapsedModel<V> collapsed = collapse_mecs(m, rewards, terminal);
    SolveResult<V> inner = solve_collapsed(collapsed, dir, opts);
    if (collapsed.identity) return inner;

    SolveResult<V> result;
    result.iterations = inner.iterations;
    result.values.resize(m.numStates);
    result.witness = MemorylessPolicy(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        std::size_t q = collapsed.origToQuot[s];
        result.values[s] = inner.values[q];
        if (collapsed.blockOfQuot[q] == kNoState) {
            result.witness.set(s, inner.witness.at(q));
        }
    }
    for (std::size_t q = 0; q < collapsed.model.numStates; ++q) {
        std::size_t b = collapsed.blockOfQuot[q];
        if (b == kNoState) continue;
        auto [exitState, exitAction] = collapsed.repActions[q][inner.witness.at(q)];
        route_block(m, collapsed.mecs.blocks[b], exitState, exitAction, result.witness);
    }
    return result;
}

template <typename V>
SolveResult<V> acyclic_dp(const Mdp& m, const RewardFunction<V>& rewards, const StateSet& terminal,
                          Direction dir) {
    check_terminal_absorbing(m, terminal);
    check_reward_contract(rewards, terminal);
    auto order = topological_order(m);
    if (!order) {
        throw std::invalid_argument("acyclic_dp: cyclic input");
    }

    SolveResult<V> result;
    result.values.assign(m.numStates, V(0));
    result.witness = MemorylessPolicy(m.numStates);
    result.iterations = 1;
    for (std::size_t s : *order) {
        if (terminal.contains(s)) {
            result.witness.set(s, 0);
            continue;
        }
        V best{};
        std::size_t bestAction = 0;
        bool first = true;
        for (std::size_t a = 0; a < m.actionCount(s); ++a) {
            Rational selfMass = 0;
            V rest = V(0);
            for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                if (succ == s) {
                    selfMass += prob;
                } else {
                    rest += ValueOps<V>::from(prob) * (rewards.at(s, a, succ) + result.values[succ]);
                }
            }
            // committing to this action until the self-loop is left:
            // v = rest + selfMass * v, and v = 0 when the loop never exits
            V q;
            if (selfMass == 1) {
                q = V(0);
            } else if (sgn(selfMass) == 0) {
                q = rest;
            } else {
                q = rest / ValueOps<V>::from(Rational(1) - selfMass);
            }
            if (first || better(q, best, dir)) {
                best = q;
                bestAction = a;
                first = false;
            }
        }
        result.values[s] = best;
        result.witness.set(s, bestAction);
    }
    return result;
}

template <typename V>
SolveResult<V> reach_prob(const Mdp& m, const StateSet& target, Direction dir, const SolverOptions& opts) {
    SolveResult<V> result;
    if (target.empty()) {
        result.values.assign(m.numStates, V(0));
        result.witness = MemorylessPolicy(m.numStates);
        for (std::size_t s = 0; s < m.numStates; ++s) result.witness.set(s, 0);
        result.iterations = 0;
        return result;
    }

    StateSet zero = dir == Direction::Max ? reach_positive_max(m, target).complement()
                                          : prob_zero_min(m, target);
    StateSet absorbSet(m.numStates);
    for (std::size_t s : target.members()) absorbSet.insert(s);
    for (std::size_t s : zero.members()) absorbSet.insert(s);
    Mdp reduced = make_absorbing(m, absorbSet);

    RewardFunction<V> rewards;
    for (std::size_t s = 0; s < reduced.numStates; ++s) {
        if (absorbSet.contains(s)) continue;
        for (std::size_t a = 0; a < reduced.actionCount(s); ++a) {
            for (const auto& [succ, prob] : reduced.actions(s)[a].successors) {
                if (target.contains(succ)) rewards.set(s, a, succ, V(1));
            }
        }
    }

    if (topological_order(reduced)) {
        result = acyclic_dp<V>(reduced, rewards, absorbSet, dir);
    } else {
        result = total_reward<V>(reduced, rewards, absorbSet, dir, opts);
    }
    for (std::size_t s : target.members()) result.values[s] = V(1);
    if (dir == Direction::Min) {
        // the witness must realize probability 0 where the minimum is 0: pick an
        // action whose whole support stays inside the zero set
        for (std::size_t s : zero.members()) {
            for (std::size_t a = 0; a < m.actionCount(s); ++a) {
                bool stays = true;
                for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                    if (!zero.contains(succ)) {
                        stays = false;
                        break;
                    }
                }
                if (stays) {
                    result.witness.set(s, a);
                    break;
                }
            }
        }
    }
    return result;
}

template SolveResult<Rational> total_reward<Rational>(const Mdp&, const RewardFunction<Rational>&,
                                                      const StateSet&, Direction, const SolverOptions&);
template SolveResult<double> total_reward<double>(const Mdp&, const RewardFunction<double>&, const StateSet&,
                                                  Direction, const SolverOptions&);
template SolveResult<Rational> acyclic_dp<Rational>(const Mdp&, const RewardFunction<Rational>&,
                                                    const StateSet&, Direction);
template SolveResult<double> acyclic_dp<double>(const Mdp&, const RewardFunction<double>&, const StateSet&,
                                                Direction);
template SolveResult<Rational> reach_prob<Rational>(const Mdp&, const StateSet&, Direction,
                                                    const SolverOptions&);
template SolveResult<double> reach_prob<double>(const Mdp&, const StateSet&, Direction, const SolverOptions&);

}  // namespace condreach
