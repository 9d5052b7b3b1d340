#include "condreach/graph.hpp"

#include <algorithm>
#include <deque>

namespace condreach {

namespace {

// reverse adjacency: for each state, the (state, action) pairs that can move into it
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> reverse_branches(const Mdp& m) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rev(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        const auto& acts = m.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            for (const auto& [succ, prob] : acts[a].successors) {
                rev[succ].emplace_back(s, a);
            }
        }
    }
    return rev;
}

}  // namespace

StateSet reach_positive_max(const Mdp& m, const StateSet& target) {
    auto rev = reverse_branches(m);
    StateSet result(m.numStates);
    std::deque<std::size_t> queue;
    for (std::size_t s : target.members()) {
        result.insert(s);
        queue.push_back(s);
    }
    while (!queue.empty()) {
        std::size_t t = queue.front();
        queue.pop_front();
        for (const auto& [s, a] : rev[t]) {
            if (!result.contains(s)) {
                result.insert(s);
                queue.push_back(s);
            }
        }
    }
    return result;
}

StateSet prob_zero_min(const Mdp& m, const StateSet& target) {
    // Least fixed point of "every enabled action has a successor already
    // inside", seeded with target; its complement is the prob-0-under-some-
    // policy set. Linear via per-action counters.
    auto rev = reverse_branches(m);
    StateSet positive(m.numStates);
    std::deque<std::size_t> queue;
    std::vector<std::size_t> remaining(m.numStates);
    std::vector<std::vector<bool>> actionTouched(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        remaining[s] = m.actionCount(s);
        actionTouched[s].assign(m.actionCount(s), false);
    }
    for (std::size_t s : target.members()) {
        positive.insert(s);
        queue.push_back(s);
    }
    while (!queue.empty()) {
        std::size_t t = queue.front();
        queue.pop_front();
        for (const auto& [s, a] : rev[t]) {
            if (positive.contains(s) || actionTouched[s][a]) continue;
            actionTouched[s][a] = true;
            if (--remaining[s] == 0) {
                positive.insert(s);
                queue.push_back(s);
            }
        }
    }
    return positive.complement();
}

namespace {

// Iterative Tarjan over the sub-MDP given by alive states and kept actions.
std::vector<std::size_t> scc_ids(const Mdp& m, const std::vector<bool>& alive,
                                 const std::vector<std::vector<bool>>& kept, std::size_t& sccCount) {
    const std::size_t n = m.numStates;
    const std::size_t none = kNoState;
    std::vector<std::size_t> index(n, none), lowlink(n, none), component(n, none);
    std::vector<bool> onStack(n, false);
    std::vector<std::size_t> stack;
    std::size_t nextIndex = 0;
    sccCount = 0;

    struct Frame {
        std::size_t state;
        std::size_t action = 0;
        std::size_t branch = 0;
    };

    for (std::size_t root = 0; root < n; ++root) {
        if (!alive[root] || index[root] != none) continue;
        std::vector<Frame> frames{{root}};
        index[root] = lowlink[root] = nextIndex++;
        stack.push_back(root);
        onStack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            std::size_t s = f.state;
            bool descended = false;
            const auto& acts = m.actions(s);
            while (f.action < acts.size()) {
                if (!kept[s][f.action]) {
                    ++f.action;
                    f.branch = 0;
                    continue;
                }
                const auto& succs = acts[f.action].successors;
                if (f.branch >= succs.size()) {
                    ++f.action;
                    f.branch = 0;
                    continue;
                }
                std::size_t w = succs[f.branch].first;
                ++f.branch;
                if (!alive[w]) continue;
                if (index[w] == none) {
                    index[w] = lowlink[w] = nextIndex++;
                    stack.push_back(w);
                    onStack[w] = true;
                    frames.push_back({w});
                    descended = true;
                    break;
                }
                if (onStack[w]) {
                    lowlink[s] = std::min(lowlink[s], index[w]);
                }
            }
            if (descended) continue;
            if (lowlink[s] == index[s]) {
                while (true) {
                    std::size_t w = stack.back();
                    stack.pop_back();
                    onStack[w] = false;
                    component[w] = sccCount;
                    if (w == s) break;
                }
                ++sccCount;
            }
            frames.pop_back();
            if (!frames.empty()) {
                lowlink[frames.back().state] = std::min(lowlink[frames.back().state], lowlink[s]);
            }
        }
    }
    return component;
}

}  // namespace

MecPartition maximal_end_components(const Mdp& m) {
    const std::size_t n = m.numStates;
    std::vector<bool> alive(n, true);
    std::vector<std::vector<bool>> kept(n);
    for (std::size_t s = 0; s < n; ++s) kept[s].assign(m.actionCount(s), true);

    bool changed = true;
    std::vector<std::size_t> component;
    std::size_t sccCount = 0;
    while (changed) {
        changed = false;
        component = scc_ids(m, alive, kept, sccCount);
        for (std::size_t s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            std::size_t keptHere = 0;
            for (std::size_t a = 0; a < kept[s].size(); ++a) {
                if (!kept[s][a]) continue;
                bool stays = true;
                for (const auto& [succ, prob] : m.actions(s)[a].successors) {
                    if (!alive[succ] || component[succ] != component[s]) {
                        stays = false;
                        break;
                    }
                }
                if (!stays) {
                    kept[s][a] = false;
                    changed = true;
                } else {
                    ++keptHere;
                }
            }
            if (keptHere == 0) {
                alive[s] = false;
                changed = true;
            }
        }
    }

    MecPartition out;
    out.blockOf.assign(n, kNoState);
    std::vector<std::size_t> sccToBlock(sccCount, kNoState);
    for (std::size_t s = 0; s < n; ++s) {
        if (!alive[s]) continue;
        std::size_t scc = component[s];
        if (sccToBlock[scc] == kNoState) {
            sccToBlock[scc] = out.blocks.size();
            out.blocks.push_back(MecBlock{StateSet(n), {}});
        }
        std::size_t b = sccToBlock[scc];
        out.blocks[b].states.insert(s);
        out.blockOf[s] = b;
        for (std::size_t a = 0; a < kept[s].size(); ++a) {
            if (kept[s][a]) out.blocks[b].retained.emplace_back(s, a);
        }
    }
    return out;
}

std::optional<std::vector<std::size_t>> topological_order(const Mdp& m) {
    const std::size_t n = m.numStates;
    std::vector<std::size_t> indegree(n, 0);  // non-self-loop edges, with multiplicity
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& action : m.actions(s)) {
            for (const auto& [succ, prob] : action.successors) {
                if (succ != s) ++indegree[succ];
            }
        }
    }
    std::deque<std::size_t> queue;
    for (std::size_t s = 0; s < n; ++s) {
        if (indegree[s] == 0) queue.push_back(s);
    }
    std::vector<std::size_t> order;  // predecessors-first while draining
    order.reserve(n);
    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        order.push_back(s);
        for (const auto& action : m.actions(s)) {
            for (const auto& [succ, prob] : action.successors) {
                if (succ != s && --indegree[succ] == 0) queue.push_back(succ);
            }
        }
    }
    if (order.size() != n) return std::nullopt;
    std::reverse(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> bfs_distance(const Mdp& m, std::size_t from) {
    std::vector<std::size_t> dist(m.numStates, kUnreachable);
    std::deque<std::size_t> queue;
    dist[from] = 0;
    queue.push_back(from);
    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        for (const auto& action : m.actions(s)) {
            for (const auto& [succ, prob] : action.successors) {
                if (dist[succ] == kUnreachable) {
                    dist[succ] = dist[s] + 1;
                    queue.push_back(succ);
                }
            }
        }
    }
    return dist;
}

}  // namespace condreach
