#include "condreach/model.hpp"

#include <deque>
#include <sstream>

namespace condreach {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::ostringstream out;
    out << "invalid model:";
    for (const auto& issue : issues) out << "\n  - " << issue;
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_issues(diagnostics)), issues(std::move(diagnostics)) {}

void validate(const Mdp& m) {
    std::vector<std::string> issues;
    if (m.stateActions.size() != m.numStates) {
        issues.push_back("action table size differs from state count");
    }
    if (m.initialState >= m.numStates) {
        issues.push_back("initial state out of range");
    }
    for (std::size_t s = 0; s < m.stateActions.size(); ++s) {
        if (m.stateActions[s].empty()) {
            issues.push_back("state " + std::to_string(s) + " without actions");
            continue;
        }
        for (const auto& action : m.stateActions[s]) {
            Rational sum = 0;
            for (const auto& [succ, prob] : action.successors) {
                if (succ >= m.numStates) {
                    issues.push_back("dangling successor " + std::to_string(succ) + " at state " +
                                     std::to_string(s) + " action " + action.name);
                }
                if (sgn(prob) <= 0 || prob > 1) {
                    issues.push_back("probability out of (0,1] at state " + std::to_string(s) +
                                     " action " + action.name);
                }
                sum += prob;
            }
            if (sum != 1) {
                issues.push_back("distribution of state " + std::to_string(s) + " action " + action.name +
                                 " sums to " + to_string(sum) + ", not 1");
            }
        }
    }
    for (const auto& [name, set] : m.labels) {
        for (std::size_t s : set.members()) {
            if (s >= m.numStates) {
                issues.push_back("label " + name + " marks out-of-range state " + std::to_string(s));
            }
        }
    }
    for (const auto& [s, color] : m.colorAnnotations) {
        if (s >= m.numStates) {
            issues.push_back("color annotation on out-of-range state " + std::to_string(s));
        }
        (void)color;
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

Mdp induce_chain(const Mdp& m, const MemorylessPolicy& policy) {
    Mdp chain;
    chain.numStates = m.numStates;
    chain.initialState = m.initialState;
    chain.labels = m.labels;
    chain.colorAnnotations = m.colorAnnotations;
    chain.stateActions.resize(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) {
        if (!policy.defined(s) || policy.at(s) >= m.actionCount(s)) {
            throw std::invalid_argument("policy undefined or invalid at state " + std::to_string(s));
        }
        chain.stateActions[s].push_back(m.actions(s)[policy.at(s)]);
    }
    return chain;
}

Mdp make_absorbing(const Mdp& m, const StateSet& states, const std::string& actionName) {
    Mdp out = m;
    for (std::size_t s : states.members()) {
        Action loop;
        loop.name = actionName;
        loop.successors.emplace_back(s, Rational(1));
        out.stateActions[s] = {std::move(loop)};
    }
    return out;
}

StateSet reachable_states(const Mdp& m, std::size_t from) {
    StateSet visited(m.numStates);
    std::deque<std::size_t> queue;
    visited.insert(from);
    queue.push_back(from);
    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        for (const auto& action : m.actions(s)) {
            for (const auto& [succ, prob] : action.successors) {
                if (!visited.contains(succ)) {
                    visited.insert(succ);
                    queue.push_back(succ);
                }
            }
        }
    }
    return visited;
}

}  // namespace condreach
