// Acceptance suite: runs every shipped correctness criterion at its stated
// tolerance and prints one PASS/FAIL line each. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "condreach/bisection.hpp"
#include "condreach/colored.hpp"
#include "condreach/conditional.hpp"
#include "condreach/generator.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace condreach;

namespace {

struct Checker {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            detail << (detail.tellp() > 0 ? "; " : "") << what;
        }
    }
    void note(const std::string& text) { detail << (detail.tellp() > 0 ? "; " : "") << text; }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Rational restart_exact(const Mdp& m, const Query& q) {
    RestartModel restart = build_restart(m, q);
    return reach_prob<Rational>(restart.model, restart.goal, q.direction)
        .values[restart.model.initialState];
}

Mdp instance(std::uint64_t seed, std::size_t states, std::size_t maxActions, bool acyclic) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.states = states;
    cfg.maxActions = maxActions;
    cfg.acyclic = acyclic;
    return random_mdp(cfg);
}

// ---------------------------------------------------------------- criterion 1

void criterion_1(Checker& c) {
    auto start = std::chrono::steady_clock::now();
    Mdp m = fixtures::fix_m2();
    Query q = fixtures::query_of(m);
    auto t = build_transform<Rational>(m, q);

    c.require(t.terminal == StateSet(6, {4, 5}), "terminal set");
    c.require(t.initialComponent == StateSet(6, {0, 1, 2, 3}), "initial component");
    c.require(t.exits == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {2, 1}}, "exits");
    Rational half = make_rational(1, 2);
    c.require(reward_entry_value(t, q, half, 4) == make_rational(1, 6), "reward into s5");
    c.require(reward_entry_value(t, q, half, 5) == make_rational(-1, 2), "reward into s6");
    c.require(reward_entry_value(t, q, half, 3) == 0, "reward into s4");
    c.require(threshold_value(t, q, half).sign == Sign::Positive, "sign at 1/2");
    c.require(threshold_value(t, q, make_rational(3, 4)).sign == Sign::Negative, "sign at 3/4");
    c.require(threshold_value(t, q, make_rational(2, 3)).sign == Sign::Zero, "sign at 2/3");
    c.require(seconds_since(start) < 1.0, "runtime under one second");
}

// ---------------------------------------------------------------- criterion 2

void criterion_2(Checker& c) {
    {
        auto start = std::chrono::steady_clock::now();
        Mdp m = fixtures::fix_m2();
        BisectionConfig cfg;
        cfg.variant = Variant::PtStd;
        auto out = optimize<Rational>(m, fixtures::query_of(m), cfg);
        c.require(out.exact && out.value == make_rational(2, 3), "pt-std optimum 2/3");
        c.require(out.iterations == 2, "pt-std two probes");
        c.require(seconds_since(start) < 1.0, "fixture runtime");
    }
    for (std::size_t n = 1; n <= 10; ++n) {
        auto start = std::chrono::steady_clock::now();
        Mdp m = fixtures::fix_m1(n);
        Query q = fixtures::query_of(m);
        for (Variant variant :
             {Variant::Std, Variant::Adv, Variant::PtStd, Variant::PtAdv, Variant::SternBrocot}) {
            BisectionConfig cfg;
            cfg.variant = variant;
            cfg.epsilon = parse_rational("1/1000000");
            auto out = optimize<Rational>(m, q, cfg);
            c.require(out.exact && out.value == make_rational(1, 2),
                      "chain pair n=" + std::to_string(n) + " variant " + variant_name(variant));
        }
        c.require(restart_exact(m, q) == make_rational(1, 2), "restart on chain pair n=" + std::to_string(n));
        c.require(seconds_since(start) < 1.0, "chain pair runtime n=" + std::to_string(n));
    }
}

// ---------------------------------------------------------------- criterion 3

void criterion_3(Checker& c) {
    std::size_t worst = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Mdp m = instance(3000 + i, 5 + i % 6, 3, i % 2 == 0);
        BisectionConfig cfg;
        cfg.variant = Variant::Std;
        cfg.epsilon = parse_rational("1/1000000");
        auto out = optimize<Rational>(m, fixtures::query_of(m), cfg);
        worst = std::max(worst, out.iterations);
    }
    c.note("max iterations observed: " + std::to_string(worst));
    c.require(worst <= 19, "iteration bound ceil(log2(1/(2e-6))) = 19");
}

// ---------------------------------------------------------------- criterion 4

void criterion_4(Checker& c) {
    auto start = std::chrono::steady_clock::now();
    for (std::uint64_t i = 0; i < 200; ++i) {
        Mdp m = instance(4000 + i, 5 + i % 6, 3, i % 2 == 0);
        Query q = fixtures::query_of(m);
        Rational expected = restart_exact(m, q);
        for (Variant variant : {Variant::PtStd, Variant::PtAdv, Variant::SternBrocot}) {
            BisectionConfig cfg;
            cfg.variant = variant;
            auto out = optimize<Rational>(m, q, cfg);
            if (!(out.exact && out.value == expected)) {
                c.require(false, "instance " + std::to_string(i) + " variant " + variant_name(variant) +
                                     ": got " + to_string(out.value) + ", restart " + to_string(expected));
                return;
            }
        }
    }
    double secs = seconds_since(start);
    c.note("200 instances x 3 exact variants in " + std::to_string(secs) + "s");
    c.require(secs < 60.0, "total runtime under 60s");
}

// ---------------------------------------------------------------- criterion 5

void criterion_5(Checker& c) {
    std::size_t done = 0;
    std::uint64_t seed = 5000;
    while (done < 100) {
        std::uint64_t current = seed++;
        Mdp m = instance(current, 4 + current % 3, 2, current % 2 == 0);
        Query q = fixtures::query_of(m);
        auto t = build_transform<Rational>(m, q);

        // enumerate policies of the eliminated model, extract, evaluate, take the best
        const Mdp& solveModel = t.solveModel();
        std::size_t count = 1;
        bool tooBig = false;
        for (std::size_t s = 0; s < solveModel.numStates && !tooBig; ++s) {
            count *= solveModel.actionCount(s);
            if (count > 256) tooBig = true;
        }
        if (tooBig) continue;
        ++done;

        std::optional<Rational> bruteBest;
        oracle::for_each_policy(solveModel, 512, [&](const MemorylessPolicy& sigma) {
            ConditionalPolicy pi = extract_policy(t, sigma, q);
            try {
                Rational v = evaluate_policy<Rational>(m, pi, q);
                if (!bruteBest || v > *bruteBest) bruteBest = v;
            } catch (const UndefinedQueryError&) {
            }
        });
        BisectionConfig cfg;
        cfg.variant = Variant::SternBrocot;
        auto out = optimize<Rational>(m, q, cfg);
        if (!(bruteBest && out.exact && *bruteBest == out.value)) {
            c.require(false, "policy-enumeration mismatch at seed " + std::to_string(current));
            return;
        }

        // sign agreement at five lambdas against the absorbing-model brute force
        auto goalReach = t.goalReach.values;
        auto evidReach = t.evidenceReach.values;
        std::map<std::size_t, Rational> entryBase;
        for (int k = 0; k < 5; ++k) {
            Rational lambda = make_rational(1 + 3 * k + int(current % 2), 16);
            std::map<std::size_t, Rational> entry;
            for (std::size_t s : t.terminal.members()) {
                entry[s] = q.evidence.contains(s) ? Rational(goalReach[s] - lambda)
                                                  : Rational(evidReach[s] * (Rational(1) - lambda));
            }
            auto brute = oracle::decision_value(t.mCirc, t.terminal, entry, q.direction);
            auto outcome = threshold_value(t, q, lambda);
            if (!(brute && sgn(*brute) == static_cast<int>(outcome.sign))) {
                c.require(false, "sign mismatch at seed " + std::to_string(current));
                return;
            }
        }
    }
    c.require(true, "");
}

// ---------------------------------------------------------------- criterion 6

void criterion_6(Checker& c) {
    Mdp fixMin = fixtures::fix_min();
    Query qMin = fixtures::query_of(fixMin, Direction::Min);
    BisectionConfig cfg;
    cfg.variant = Variant::PtStd;
    auto out = optimize<Rational>(fixMin, qMin, cfg);
    c.require(out.exact && out.value == 1 && out.forcedOne, "forced value 1 on the edge-case fixture");

    for (std::uint64_t i = 0; i < 40; ++i) {
        Mdp m = instance(6000 + i, 5 + i % 2, 2, i % 2 == 0);
        Query q = fixtures::query_of(m, Direction::Min);
        auto oracleValue = oracle::conditional_optimum(m, q.goal, q.evidence, Direction::Min);
        BisectionConfig bc;
        bc.variant = Variant::SternBrocot;
        auto got = optimize<Rational>(m, q, bc);
        if (!(oracleValue.best && got.exact && *oracleValue.best == got.value)) {
            c.require(false, "min-direction mismatch at instance " + std::to_string(i) + ": got " +
                                 to_string(got.value) +
                                 (oracleValue.best ? ", oracle " + to_string(*oracleValue.best)
                                                   : ", oracle undefined"));
            return;
        }
    }
}

// ---------------------------------------------------------------- criterion 7

void criterion_7(Checker& c) {
    // a single reverse-topological sweep decides the threshold query
    for (std::size_t n : {10, 100}) {
        Mdp m = fixtures::fix_m1(n);
        Query q = fixtures::query_of(m);
        auto t = build_transform<Rational>(m, q);
        auto outcome = threshold_value(t, q, make_rational(1, 4));
        c.require(outcome.solverIterations == 1, "exact sweep count, n=" + std::to_string(n));
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        GeneratorConfig cfg;
        cfg.seed = 7000 + seed;
        cfg.states = 50;
        cfg.acyclic = true;
        Mdp m = random_mdp(cfg);
        Query q = fixtures::query_of(m);
        auto t = build_transform<Rational>(m, q);
        auto outcome = threshold_value(t, q, make_rational(1, 3));
        c.require(outcome.solverIterations == 1, "generated acyclic sweep count");
    }

    // wall time grows about linearly in |M| (float arithmetic: the linear-time
    // claim presumes unit-cost operations)
    std::vector<std::size_t> sizes{10, 100, 1000, 10000};
    std::vector<double> perRun;
    for (std::size_t n : sizes) {
        Mdp m = fixtures::fix_m1(n);
        Query q = fixtures::query_of(m);
        std::size_t reps = std::max<std::size_t>(1, 20000 / n);
        // warm-up
        {
            auto t = build_transform<double>(m, q);
            (void)threshold_value(t, q, make_rational(1, 4));
        }
        auto begin = std::chrono::steady_clock::now();
        for (std::size_t r = 0; r < reps; ++r) {
            auto t = build_transform<double>(m, q);
            auto outcome = threshold_value(t, q, make_rational(1, 4));
            if (outcome.solverIterations != 1) c.require(false, "float sweep count");
        }
        perRun.push_back(seconds_since(begin) / static_cast<double>(reps));
    }
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        double ratio = perRun[i + 1] / perRun[i];
        std::ostringstream msg;
        msg << "time(" << sizes[i + 1] << ")/time(" << sizes[i] << ") = " << ratio;
        c.note(msg.str());
        c.require(ratio <= 15.0, "ratio exceeds 15x");
    }
}

// ---------------------------------------------------------------- criterion 8

void criterion_8(Checker& c) {
    auto start = std::chrono::steady_clock::now();
    ColoredMdp cm = make_colored(fixtures::fix_fam());
    Query q = fixtures::query_of(cm.base);
    q.comparison = Comparison::Ge;

    q.threshold = make_rational(3, 5);
    auto infeasible = synthesize<Rational>(cm, q);
    c.require(!infeasible.feasible, "3/5 infeasible");
    c.require(infeasible.nodesExplored == 3, "three nodes explored");
    bool shape = infeasible.reports.size() == 3 &&
                 infeasible.reports[0].status == NodeStatus::Refined &&
                 infeasible.reports[0].upperBound == make_rational(2, 3) &&
                 infeasible.reports[1].status == NodeStatus::EvidenceUnreachable &&
                 infeasible.reports[2].status == NodeStatus::BoundDiscarded &&
                 infeasible.reports[2].upperBound == make_rational(5, 9);
    c.require(shape, "root ub 2/3, children: evidence-unreachable discard and ub 5/9 discard");

    q.threshold = make_rational(1, 2);
    auto feasible = synthesize<Rational>(cm, q);
    c.require(feasible.feasible && feasible.value == make_rational(5, 9), "1/2 feasible at 5/9");
    c.require(seconds_since(start) < 1.0, "fixture synthesis under one second");

    for (std::uint64_t i = 0; i < 50; ++i) {
        GeneratorConfig cfg;
        cfg.seed = 8000 + i;
        cfg.states = 6;
        cfg.acyclic = i % 2 == 0;
        ColoredMdp random = random_colored_mdp(cfg, 64);
        Query rq = fixtures::query_of(random.base);
        rq.comparison = Comparison::Ge;
        rq.threshold = make_rational(1 + i % 3, 4);

        bool expected = false;
        for (const auto& sigma : enumerate_family(random, 64)) {
            try {
                if (evaluate_policy<Rational>(random.base, ConditionalPolicy::from_memoryless(sigma), rq) >=
                    rq.threshold) {
                    expected = true;
                    break;
                }
            } catch (const UndefinedQueryError&) {
            }
        }
        auto result = synthesize<Rational>(random, rq);
        if (result.feasible != expected) {
            c.require(false, "enumeration mismatch at instance " + std::to_string(i));
            return;
        }
        if (result.feasible) {
            bool consistent = is_consistent(random, *result.witness, StateSet(random.base.numStates).complement());
            if (!consistent || *result.value < rq.threshold) {
                c.require(false, "invalid witness at instance " + std::to_string(i));
                return;
            }
        }
    }
}

// ---------------------------------------------------------------- criterion 9

void criterion_9(Checker& c) {
    for (std::uint64_t i = 0; i < 50; ++i) {
        Mdp m = instance(9000 + i, 5 + i % 4, 2, i % 2 == 0);
        Query q = fixtures::query_of(m);
        auto t = build_transform<Rational>(m, q);
        std::vector<Rational> lambdas{make_rational(1, 8), make_rational(5, 16), make_rational(1, 2),
                                      make_rational(11, 16), make_rational(7, 8)};
        std::vector<Rational> values;
        for (const auto& lambda : lambdas) values.push_back(threshold_value(t, q, lambda).value);
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            if (!(values[k] >= values[k + 1])) {
                c.require(false, "not nonincreasing at instance " + std::to_string(i));
                return;
            }
        }
        for (std::size_t k = 0; k + 2 < values.size(); ++k) {
            const Rational &l1 = lambdas[k], &l2 = lambdas[k + 1], &l3 = lambdas[k + 2];
            if (!(values[k + 1] * (l3 - l1) <= values[k] * (l3 - l2) + values[k + 2] * (l2 - l1))) {
                c.require(false, "not convex at instance " + std::to_string(i));
                return;
            }
        }
        BisectionConfig cfg;
        cfg.variant = Variant::SternBrocot;
        auto out = optimize<Rational>(m, q, cfg);
        auto atOpt = threshold_value(t, q, ValueOps<Rational>::to_rational(out.value));
        if (!(out.exact && atOpt.sign == Sign::Zero && atOpt.value == 0)) {
            c.require(false, "value at the optimum is not exactly zero, instance " + std::to_string(i));
            return;
        }
    }
}

// --------------------------------------------------------------- criterion 10

void criterion_10(Checker& c) {
    Mdp m = fixtures::fix_m1(25);
    Query q = fixtures::query_of(m);
    RestartModel restart = build_restart(m, q);

    Rational exact = reach_prob<Rational>(restart.model, restart.goal, q.direction)
                         .values[restart.model.initialState];
    double approx = reach_prob<double>(restart.model, restart.goal, q.direction)
                        .values[restart.model.initialState];
    double deviation = std::abs(approx - to_double(exact));
    std::ostringstream msg;
    msg << "restart value iteration returned " << approx << " vs exact " << to_double(exact)
        << " (|error| = " << deviation << ")";
    c.note(msg.str());
    if (deviation > 1e-3) {
        c.note("documented deviation: value iteration stopped early on the restart loops");
    } else {
        c.note("float restart matched the exact value within 1e-3 on this instance");
    }
    // the treat pipeline in float mode stays accurate on the same instance
    auto t = build_transform<double>(m, q);
    BisectionConfig cfg;
    cfg.variant = Variant::PtStd;
    cfg.epsilon = parse_rational("1/1000000");
    auto out = optimize<double>(m, q, cfg);
    c.require(std::abs(out.value - 0.5) <= 1e-3, "float treat pipeline within 1e-3");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* summary;
        std::function<void(Checker&)> run;
    };
    std::vector<Criterion> criteria{
        {1, "fixture pipeline artifacts and threshold signs", criterion_1},
        {2, "policy-tracking optimum and chain-pair optima across variants", criterion_2},
        {3, "standard bisection stays within 19 iterations at eps=1e-6", criterion_3},
        {4, "exact bisection equals exact restart on 200 random instances", criterion_4},
        {5, "brute-force equivalence of extraction and threshold signs", criterion_5},
        {6, "minimum direction: forced edge case and brute-force agreement", criterion_6},
        {7, "acyclic fast path: one sweep, near-linear scaling", criterion_7},
        {8, "colored synthesis fixture walk and enumeration oracle", criterion_8},
        {9, "decision value nonincreasing, convex, zero at the optimum", criterion_9},
        {10, "float-mode honesty on the restart hazard instance", criterion_10},
    };

    int failures = 0;
    for (auto& criterion : criteria) {
        Checker checker;
        auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(checker);
        } catch (const std::exception& e) {
            checker.require(false, std::string("exception: ") + e.what());
        }
        double secs = seconds_since(start);
        std::cout << (checker.ok ? "PASS" : "FAIL") << "  criterion " << criterion.id << ": "
                  << criterion.summary << "  [" << secs << "s]";
        std::string detail = checker.detail.str();
        if (!detail.empty()) std::cout << "  -- " << detail;
        std::cout << std::endl;
        if (!checker.ok) ++failures;
    }
    return failures;
}
