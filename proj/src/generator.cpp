#include "condreach/generator.hpp"

#include <algorithm>
#include <set>

#include "condreach/conditional.hpp"

namespace condreach {

namespace {

struct Prng {
    std::mt19937_64 engine;
    explicit Prng(std::uint64_t seed) : engine(seed) {}
    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine() % n); }
    bool chance(std::size_t num, std::size_t den) { return below(den) < num; }
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t attempt) {
    return seed * 0x9e3779b97f4a7c15ULL + attempt + 1;
}

Mdp generate_once(const GeneratorConfig& cfg, Prng& rng) {
    const std::size_t n = std::max<std::size_t>(cfg.states, 4);
    const std::size_t sinkCount = 2 + rng.below(std::min<std::size_t>(3, n - 2));
    const std::size_t interior = n - sinkCount;

    Mdp m;
    m.numStates = n;
    m.initialState = 0;
    m.stateActions.resize(n);

    auto pick_targets = [&](std::size_t s) {
        std::set<std::size_t> targets;
        std::size_t fanout = 1 + rng.below(2);
        for (std::size_t i = 0; i < fanout; ++i) {
            std::size_t t;
            if (!cfg.acyclic && rng.chance(1, 4)) {
                t = rng.below(s + 1);  // back edge or self-loop
            } else {
                t = s + 1 + rng.below(n - s - 1);  // strictly forward
            }
            targets.insert(t);
        }
        return std::vector<std::size_t>(targets.begin(), targets.end());
    };

    for (std::size_t s = 0; s < interior; ++s) {
        std::size_t actionCount = 1 + rng.below(std::max<std::size_t>(cfg.maxActions, 1));
        for (std::size_t a = 0; a < actionCount; ++a) {
            Action action;
            action.name = "a" + std::to_string(a);
            auto targets = pick_targets(s);
            if (targets.size() == 1) {
                action.successors.emplace_back(targets[0], Rational(1));
            } else {
                std::size_t den = 2 + rng.below(std::max<std::size_t>(cfg.maxDenominator, 2) - 1);
                std::size_t cut = 1 + rng.below(den - 1);
                action.successors.emplace_back(targets[0], make_rational(static_cast<long>(cut),
                                                                         static_cast<long>(den)));
                action.successors.emplace_back(targets[1], make_rational(static_cast<long>(den - cut),
                                                                         static_cast<long>(den)));
            }
            m.stateActions[s].push_back(std::move(action));
        }
    }
    // last layer: every state has one action that either settles (self-loop) or
    // moves on within the layer, so goal/evidence visits can chain (a goal
    // state may still reach the evidence and vice versa)
    for (std::size_t s = interior; s < n; ++s) {
        Action act;
        act.name = "step";
        if (s + 1 == n || rng.chance(1, 4)) {
            act.successors.emplace_back(s, Rational(1));
        } else {
            std::size_t first = s + 1 + rng.below(n - s - 1);
            std::size_t second = rng.chance(1, 2) ? s : s + 1 + rng.below(n - s - 1);
            if (first == second || rng.chance(1, 4)) {
                act.successors.emplace_back(first, Rational(1));
            } else {
                std::size_t den = 2 + rng.below(std::max<std::size_t>(cfg.maxDenominator, 2) - 1);
                std::size_t cut = 1 + rng.below(den - 1);
                act.successors.emplace_back(std::min(first, second),
                                            make_rational(static_cast<long>(cut), static_cast<long>(den)));
                act.successors.emplace_back(std::max(first, second),
                                            make_rational(static_cast<long>(den - cut),
                                                          static_cast<long>(den)));
            }
        }
        m.stateActions[s].push_back(std::move(act));
    }

    // goal and evidence: disjoint nonempty subsets of the last layer
    std::vector<std::size_t> sinks;
    for (std::size_t s = interior; s < n; ++s) sinks.push_back(s);
    for (std::size_t i = sinks.size(); i-- > 1;) std::swap(sinks[i], sinks[rng.below(i + 1)]);
    std::size_t evidenceCount = 1 + rng.below(sinks.size() - 1);
    std::size_t goalCount = 1 + rng.below(sinks.size() - evidenceCount);
    StateSet evidence(n), goal(n);
    for (std::size_t i = 0; i < evidenceCount; ++i) evidence.insert(sinks[i]);
    for (std::size_t i = 0; i < goalCount; ++i) goal.insert(sinks[evidenceCount + i]);
    m.labels.emplace("evidence", evidence);
    m.labels.emplace("goal", goal);
    return m;
}

}  // namespace

Mdp random_mdp(const GeneratorConfig& cfg) {
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        Prng rng(mix_seed(cfg.seed, attempt));
        Mdp m = generate_once(cfg, rng);
        validate(m);
        if (check_defined(m, m.labelSet("evidence"))) return m;
    }
    throw std::runtime_error("random_mdp: no defined instance for this configuration");
}

ColoredMdp random_colored_mdp(const GeneratorConfig& cfg, std::size_t memberCap) {
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        GeneratorConfig sub = cfg;
        sub.seed = mix_seed(cfg.seed, 1000 + attempt);
        Mdp m = random_mdp(sub);

        Prng rng(mix_seed(cfg.seed, 2000 + attempt));
        // group states with the same action count into shared colors
        std::map<std::size_t, std::vector<std::size_t>> byArity;
        for (std::size_t s = 0; s < m.numStates; ++s) {
            if (m.actionCount(s) > 1) byArity[m.actionCount(s)].push_back(s);
        }
        std::size_t nextColor = 0;
        m.colorAnnotations.clear();
        for (auto& [arity, states] : byArity) {
            std::size_t groups = 1 + rng.below(states.size());
            for (std::size_t i = 0; i < states.size(); ++i) {
                m.colorAnnotations[states[i]] = nextColor + rng.below(groups);
            }
            nextColor += groups;
        }
        ColoredMdp cm = make_colored(m);
        try {
            cm.familySize(memberCap);
            return cm;
        } catch (const std::length_error&) {
            continue;
        }
    }
    throw std::runtime_error("random_colored_mdp: no instance within the member cap");
}

}  // namespace condreach
