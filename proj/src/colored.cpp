#include "condreach/colored.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <set>

#include "condreach/graph.hpp"

namespace condreach {

std::size_t ColoredMdp::familySize(std::size_t cap) const {
    std::size_t product = 1;
    for (const auto& [color, actions] : allowed) {
        if (actions.empty()) throw std::logic_error("color with empty allowed set");
        if (product > cap / actions.size() && product * actions.size() > cap) {
            throw std::length_error("family size exceeds cap");
        }
        product *= actions.size();
        if (product > cap) throw std::length_error("family size exceeds cap");
    }
    return product;
}

ColoredMdp make_colored(const Mdp& m) {
    ColoredMdp cm;
    cm.base = m;
    cm.colorOf.assign(m.numStates, kNoState);

    std::map<std::size_t, std::size_t> denseId;  // annotation color -> dense color
    for (const auto& [s, c] : m.colorAnnotations) {
        auto [it, fresh] = denseId.try_emplace(c, denseId.size());
        cm.colorOf[s] = it->second;
    }
    std::size_t next = denseId.size();
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (cm.colorOf[s] == kNoState) cm.colorOf[s] = next++;  // fresh unique color
    }

    std::vector<std::size_t> arity(next, kNoState);
    std::vector<std::string> issues;
    for (std::size_t s = 0; s < m.numStates; ++s) {
        std::size_t c = cm.colorOf[s];
        if (arity[c] == kNoState) {
            arity[c] = m.actionCount(s);
        } else if (arity[c] != m.actionCount(s)) {
            issues.push_back("states of color " + std::to_string(c) + " differ in action count");
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));

    for (std::size_t c = 0; c < next; ++c) {
        std::vector<std::size_t> all(arity[c]);
        for (std::size_t a = 0; a < arity[c]; ++a) all[a] = a;
        cm.allowed.emplace(c, std::move(all));
    }
    return cm;
}

std::vector<ColorConflict> find_conflicts(const ColoredMdp& cm, const MemorylessPolicy& sigma,
                                          const StateSet& domain) {
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> seen;  // color -> (state, action)
    std::vector<ColorConflict> conflicts;
    std::set<std::size_t> conflicting;
    for (std::size_t s = 0; s < cm.base.numStates; ++s) {
        if (!domain.contains(s)) continue;
        if (!sigma.defined(s)) {
            throw std::invalid_argument("policy undefined on domain state " + std::to_string(s));
        }
        std::size_t c = cm.colorOf[s];
        auto it = seen.find(c);
        if (it == seen.end()) {
            seen.emplace(c, std::make_pair(s, sigma.at(s)));
        } else if (it->second.second != sigma.at(s) && !conflicting.count(c)) {
            conflicts.push_back({c, it->second.first, s, it->second.second, sigma.at(s)});
            conflicting.insert(c);
        }
    }
    return conflicts;
}

std::vector<MemorylessPolicy> enumerate_family(const ColoredMdp& cm, std::size_t cap) {
    std::size_t total = cm.familySize(cap);
    std::vector<std::size_t> colors;
    for (const auto& [c, actions] : cm.allowed) colors.push_back(c);

    std::vector<MemorylessPolicy> out;
    out.reserve(total);
    std::vector<std::size_t> odometer(colors.size(), 0);
    while (true) {
        MemorylessPolicy sigma(cm.base.numStates);
        std::map<std::size_t, std::size_t> choice;
        for (std::size_t i = 0; i < colors.size(); ++i) {
            choice[colors[i]] = cm.allowed.at(colors[i])[odometer[i]];
        }
        for (std::size_t s = 0; s < cm.base.numStates; ++s) sigma.set(s, choice[cm.colorOf[s]]);
        out.push_back(std::move(sigma));

        // lexicographic: lowest color id most significant
        std::size_t i = colors.size();
        while (i-- > 0) {
            if (++odometer[i] < cm.allowed.at(colors[i]).size()) break;
            odometer[i] = 0;
            if (i == 0) return out;
        }
        if (colors.empty()) return out;
    }
}

namespace {

// farthest conflict state (ties: lower state index), then the action the
// policy picks there is singled out
std::pair<std::size_t, std::size_t> pick_refinement(const std::vector<ColorConflict>& conflicts,
                                                    const MemorylessPolicy& sigma,
                                                    const std::vector<std::size_t>& distances) {
    std::size_t bestState = kNoState;
    std::size_t bestColor = kNoState;
    auto consider = [&](std::size_t color, std::size_t state) {
        if (bestState == kNoState) {
            bestState = state;
            bestColor = color;
            return;
        }
        std::size_t dNew = state < distances.size() ? distances[state] : kUnreachable;
        std::size_t dBest = bestState < distances.size() ? distances[bestState] : kUnreachable;
        if (dNew == kUnreachable) return;
        if (dBest == kUnreachable || dNew > dBest || (dNew == dBest && state < bestState)) {
            bestState = state;
            bestColor = color;
        }
    };
    for (const auto& c : conflicts) {
        consider(c.color, c.stateA);
        consider(c.color, c.stateB);
    }
    return {bestColor, sigma.at(bestState)};
}

}  // namespace

std::pair<ColoredMdp, ColoredMdp> split(const ColoredMdp& cm, const std::vector<ColorConflict>& conflicts,
                                        const MemorylessPolicy& sigma,
                                        const std::vector<std::size_t>& distances) {
    if (conflicts.empty()) throw std::invalid_argument("split requires a nonempty conflict list");
    auto [color, action] = pick_refinement(conflicts, sigma, distances);

    ColoredMdp without = cm;
    auto& withoutSet = without.allowed.at(color);
    withoutSet.erase(std::remove(withoutSet.begin(), withoutSet.end(), action), withoutSet.end());
    ColoredMdp only = cm;
    only.allowed.at(color) = {action};
    return {std::move(without), std::move(only)};
}

namespace {

struct Restricted {
    Mdp model;
    std::vector<std::vector<std::size_t>> actionMap;  // restricted index -> base index
};

Restricted apply_restriction(const ColoredMdp& cm) {
    Restricted out;
    out.model = cm.base;
    out.actionMap.resize(cm.base.numStates);
    for (std::size_t s = 0; s < cm.base.numStates; ++s) {
        const auto& allowed = cm.allowed.at(cm.colorOf[s]);
        std::vector<Action> kept;
        for (std::size_t a : allowed) {
            kept.push_back(cm.base.actions(s)[a]);
            out.actionMap[s].push_back(a);
        }
        out.model.stateActions[s] = std::move(kept);
    }
    return out;
}

// states reachable from the initial state under sigma before entering G or E
StateSet pre_absorption_domain(const Mdp& m, const MemorylessPolicy& sigma, const Query& q) {
    StateSet domain(m.numStates);
    std::size_t init = m.initialState;
    if (q.goal.contains(init) || q.evidence.contains(init)) return domain;
    std::deque<std::size_t> queue;
    domain.insert(init);
    queue.push_back(init);
    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        for (const auto& [succ, prob] : m.actions(s)[sigma.at(s)].successors) {
            if (domain.contains(succ) || q.goal.contains(succ) || q.evidence.contains(succ)) continue;
            domain.insert(succ);
            queue.push_back(succ);
        }
    }
    return domain;
}

std::size_t majority_action(const ColoredMdp& cm, std::size_t color, const MemorylessPolicy& sigma,
                            const StateSet& domain, std::size_t fallback) {
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t s = 0; s < cm.base.numStates; ++s) {
        if (cm.colorOf[s] == color && domain.contains(s)) ++counts[sigma.at(s)];
    }
    if (counts.empty()) return fallback;
    std::size_t best = fallback, bestCount = 0;
    for (const auto& [a, n] : counts) {
        if (n > bestCount) {
            best = a;
            bestCount = n;
        }
    }
    return best;
}

}  // namespace

template <typename V>
SynthesisResult<V> synthesize(const ColoredMdp& root, const Query& q, const BisectionConfig& cfg) {
    if (q.comparison != Comparison::Ge) {
        throw std::invalid_argument("synthesize decides >= thresholds");
    }
    const Rational& threshold = q.threshold;
    Query nodeQuery = q;
    nodeQuery.direction = Direction::Max;

    BisectionConfig nodeCfg = cfg;
    nodeCfg.variant = Variant::PtStd;
    if (!ValueOps<V>::exact && sgn(nodeCfg.epsilon) == 0) {
        nodeCfg.epsilon = Rational(1, 1000000000);
    }

    auto startTime = std::chrono::steady_clock::now();
    SynthesisResult<V> out;
    std::vector<std::map<std::size_t, std::vector<std::size_t>>> stack{root.allowed};

    while (!stack.empty()) {
        ColoredMdp node{root.base, root.colorOf, std::move(stack.back())};
        stack.pop_back();
        ++out.nodesExplored;

        Restricted restricted = apply_restriction(node);
        if (!check_defined(restricted.model, q.evidence)) {
            out.reports.push_back({NodeStatus::EvidenceUnreachable, std::nullopt});
            continue;
        }

        OptimizeOutcome<V> opt = optimize<V>(restricted.model, nodeQuery, nodeCfg);
        V ub = opt.value;
        Rational ubRational = opt.exact ? ValueOps<V>::to_rational(opt.value) : opt.upper;
        bool discard = ValueOps<V>::exact
                           ? ubRational < threshold
                           : to_double(ubRational) < to_double(threshold) - nodeCfg.zeroTolerance;
        if (discard) {
            out.reports.push_back({NodeStatus::BoundDiscarded, ub});
            continue;
        }
        if (!opt.witness) {
            throw std::logic_error("optimizer returned no witness for a non-discarded node");
        }

        // witness back to base action indices
        ConditionalPolicy witness = *opt.witness;
        MemorylessPolicy beforeAny(root.base.numStates);
        for (std::size_t s = 0; s < root.base.numStates; ++s) {
            beforeAny.set(s, restricted.actionMap[s][witness.beforeAny.at(s)]);
        }

        StateSet domain = pre_absorption_domain(root.base, beforeAny, q);
        std::vector<ColorConflict> conflicts = find_conflicts(node, beforeAny, domain);

        if (!conflicts.empty()) {
            out.reports.push_back({NodeStatus::Refined, ub});
            std::vector<std::size_t> distances = bfs_distance(restricted.model, root.base.initialState);
            auto [without, only] = split(node, conflicts, beforeAny, distances);
            std::size_t splitColor = kNoState;
            for (const auto& [c, actions] : only.allowed) {
                if (actions.size() == 1 && node.allowed.at(c).size() > 1) {
                    splitColor = c;
                    break;
                }
            }
            // DFS pops the last pushed node: put the child holding the witness's
            // majority choice on top
            std::size_t onlyAction = only.allowed.at(splitColor)[0];
            std::size_t majority = majority_action(node, splitColor, beforeAny, domain, onlyAction);
            if (majority == onlyAction) {
                stack.push_back(std::move(without.allowed));
                stack.push_back(std::move(only.allowed));
            } else {
                stack.push_back(std::move(only.allowed));
                stack.push_back(std::move(without.allowed));
            }
            continue;
        }

        // consistent on the pre-absorption domain: extend per color and verify
        MemorylessPolicy member(root.base.numStates);
        std::map<std::size_t, std::size_t> colorChoice;
        for (std::size_t s = 0; s < root.base.numStates; ++s) {
            if (domain.contains(s)) colorChoice[node.colorOf[s]] = beforeAny.at(s);
        }
        for (std::size_t s = 0; s < root.base.numStates; ++s) {
            auto it = colorChoice.find(node.colorOf[s]);
            member.set(s, it != colorChoice.end() ? it->second : node.allowed.at(node.colorOf[s]).front());
        }

        bool satisfied = false;
        std::optional<V> memberValue;
        try {
            V value = evaluate_policy<V>(root.base, ConditionalPolicy::from_memoryless(member), q, cfg.solver);
            memberValue = value;
            satisfied = ValueOps<V>::exact
                            ? ValueOps<V>::to_rational(value) >= threshold
                            : ValueOps<V>::to_float(value) >= to_double(threshold) - nodeCfg.zeroTolerance;
        } catch (const UndefinedQueryError&) {
            satisfied = false;  // the member never reaches the evidence
        }
        if (satisfied) {
            out.reports.push_back({NodeStatus::Satisfied, ub});
            out.feasible = true;
            out.witness = member;
            out.value = memberValue;
            break;
        }

        // The member induced by the consistent witness fails although ub passed:
        // its behavior after G/E differs from the memory witness. Split on a free
        // color (farthest domain state first) to keep the search exact.
        std::vector<std::size_t> distances = bfs_distance(restricted.model, root.base.initialState);
        std::size_t freeColor = kNoState;
        std::size_t freeDist = 0;
        for (const auto& [c, actions] : node.allowed) {
            if (actions.size() < 2) continue;
            std::size_t d = 0;
            for (std::size_t s = 0; s < root.base.numStates; ++s) {
                if (node.colorOf[s] == c && domain.contains(s) && distances[s] != kUnreachable) {
                    d = std::max(d, distances[s] + 1);
                }
            }
            if (freeColor == kNoState || d > freeDist) {
                freeColor = c;
                freeDist = d;
            }
        }
        if (freeColor == kNoState) {
            // singleton family: the bound was this member's exact value, so a
            // failed verification means the node is infeasible
            out.reports.push_back({NodeStatus::BoundDiscarded, ub});
            continue;
        }
        out.reports.push_back({NodeStatus::Refined, ub});
        std::size_t pin = node.allowed.at(freeColor).front();
        for (std::size_t s = 0; s < root.base.numStates; ++s) {
            if (node.colorOf[s] == freeColor) {
                pin = member.at(s);
                break;
            }
        }
        ColoredMdp without = node;
        auto& withoutSet = without.allowed.at(freeColor);
        withoutSet.erase(std::remove(withoutSet.begin(), withoutSet.end(), pin), withoutSet.end());
        ColoredMdp only = node;
        only.allowed.at(freeColor) = {pin};
        // explore the unpinned side first: the pinned member just failed
        stack.push_back(std::move(only.allowed));
        stack.push_back(std::move(without.allowed));
    }

    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - startTime).count();
    out.iterationsPerSecond = static_cast<double>(out.nodesExplored) / std::max(seconds, 1e-9);
    return out;
}

template SynthesisResult<Rational> synthesize<Rational>(const ColoredMdp&, const Query&,
                                                        const BisectionConfig&);
template SynthesisResult<double> synthesize<double>(const ColoredMdp&, const Query&, const BisectionConfig&);

}  // namespace condreach
