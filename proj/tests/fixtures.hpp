#pragma once

#include <string>

#include "condreach/model.hpp"
#include "condreach/parser.hpp"

namespace fixtures {

inline condreach::Mdp load(const std::string& name) {
    return condreach::load_model(std::string(CONDREACH_MODELS_DIR) + "/" + name);
}

inline condreach::Mdp fix_m2() { return load("fix_m2.mdp"); }
inline condreach::Mdp fix_fam() { return load("fix_fam.mdp"); }
inline condreach::Mdp fix_min() { return load("fix_min.mdp"); }

// Two parallel chains of length n behind a coin flip; the upper one ends in
// the goal (which moves on to the evidence), the lower one in the evidence.
// Every interior step loses half its mass to a dead state. The conditional
// optimum is 1/2 for every n.
inline condreach::Mdp fix_m1(std::size_t n) {
    using namespace condreach;
    Mdp m;
    m.numStates = 2 * n + 4;
    m.initialState = 0;
    m.stateActions.resize(m.numStates);
    std::size_t goal = 2 * n + 1, evidence = 2 * n + 2, bottom = 2 * n + 3;

    auto step = [&](std::size_t from, std::size_t a, std::size_t b) {
        Action act;
        act.name = "a";
        act.successors.emplace_back(std::min(a, b), Rational(1, 2));
        act.successors.emplace_back(std::max(a, b), Rational(1, 2));
        if (act.successors[0].first == act.successors[1].first) {
            act.successors = {{a, Rational(1)}};
        }
        m.stateActions[from].push_back(std::move(act));
    };
    auto arrow = [&](std::size_t from, std::size_t to) {
        Action act;
        act.name = "a";
        act.successors.emplace_back(to, Rational(1));
        m.stateActions[from].push_back(std::move(act));
    };

    step(0, 1, n + 1);
    for (std::size_t i = 1; i < n; ++i) step(i, i + 1, bottom);
    step(n, goal, bottom);
    for (std::size_t i = 1; i < n; ++i) step(n + i, n + i + 1, bottom);
    step(2 * n, evidence, bottom);
    arrow(goal, evidence);
    arrow(evidence, evidence);
    arrow(bottom, bottom);

    StateSet g(m.numStates), e(m.numStates);
    g.insert(goal);
    e.insert(evidence);
    m.labels.emplace("goal", g);
    m.labels.emplace("evidence", e);
    validate(m);
    return m;
}

inline condreach::Query query_of(const condreach::Mdp& m,
                                 condreach::Direction dir = condreach::Direction::Max) {
    condreach::Query q;
    q.goal = m.labelSet("goal");
    q.evidence = m.labelSet("evidence");
    q.direction = dir;
    return q;
}

}  // namespace fixtures
