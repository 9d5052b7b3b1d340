#include <doctest.h>

#include <set>

#include "condreach/colored.hpp"
#include "condreach/generator.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace condreach;

namespace {

Query family_query(const ColoredMdp& cm, const Rational& threshold) {
    Query q = fixtures::query_of(cm.base);
    q.comparison = Comparison::Ge;
    q.threshold = threshold;
    return q;
}

// feasibility and best member value by plain enumeration
std::pair<bool, std::optional<Rational>> family_oracle(const ColoredMdp& cm, const Query& q) {
    bool feasible = false;
    std::optional<Rational> best;
    for (const auto& sigma : enumerate_family(cm, 4096)) {
        try {
            Rational v = evaluate_policy<Rational>(cm.base, ConditionalPolicy::from_memoryless(sigma), q);
            if (!best || v > *best) best = v;
            if (v >= q.threshold) feasible = true;
        } catch (const UndefinedQueryError&) {
        }
    }
    return {feasible, best};
}

}  // namespace

TEST_CASE("coloring from annotations, fresh colors elsewhere") {
    ColoredMdp cm = make_colored(fixtures::fix_fam());
    CHECK(cm.colorOf[1] == cm.colorOf[2]);
    std::set<std::size_t> colors(cm.colorOf.begin(), cm.colorOf.end());
    CHECK(colors.size() == 5);  // six states, one shared color
    CHECK(cm.allowed.at(cm.colorOf[1]) == std::vector<std::size_t>{0, 1});

    // same color on states with different action counts is rejected
    Mdp bad = fixtures::fix_fam();
    bad.colorAnnotations[3] = 7;  // single-action state joining a two-action color
    CHECK_THROWS_AS(make_colored(bad), ValidationError);
}

TEST_CASE("consistency reports one conflict per color") {
    ColoredMdp cm = make_colored(fixtures::fix_fam());
    StateSet domain(6, {0, 1, 2});

    MemorylessPolicy mixed(6);
    for (std::size_t s = 0; s < 6; ++s) mixed.set(s, 0);
    mixed.set(1, 1);  // beta at s2, alpha at s3
    auto conflicts = find_conflicts(cm, mixed, domain);
    REQUIRE(conflicts.size() == 1);
    CHECK(conflicts[0].color == cm.colorOf[1]);
    CHECK(conflicts[0].stateA == 1);
    CHECK(conflicts[0].stateB == 2);
    CHECK(conflicts[0].actionA == 1);
    CHECK(conflicts[0].actionB == 0);

    mixed.set(2, 1);
    CHECK(is_consistent(cm, mixed, domain));

    ColoredMdp plain = make_colored(fixtures::fix_m2());  // all colors distinct
    CHECK(is_consistent(plain, mixed, domain));
}

TEST_CASE("family enumeration") {
    ColoredMdp cm = make_colored(fixtures::fix_fam());
    auto policies = enumerate_family(cm, 16);
    CHECK(policies.size() == 4);

    // four consistent policies, three distinct reachable chains
    std::set<std::string> chains;
    for (const auto& sigma : policies) {
        Mdp chain = induce_chain(cm.base, sigma);
        StateSet reach = reachable_states(chain, chain.initialState);
        std::string shape;
        for (std::size_t s : reach.members()) {
            shape += std::to_string(s) + "[";
            for (const auto& [succ, prob] : chain.actions(s)[0].successors) {
                shape += std::to_string(succ) + "=" + to_string(prob) + " ";
            }
            shape += "]";
        }
        chains.insert(shape);
    }
    CHECK(chains.size() == 3);

    CHECK_THROWS_AS(enumerate_family(cm, 2), std::length_error);

    // a single color with k actions yields k policies
    Mdp twin = parse_model(
        "@type mdp\n@states 3\n@initial 0\n@label goal: 1\n@label evidence: 2\n"
        "@color 0 1\n"
        "0 a : 1=1/2 2=1/2\n0 b : 2=1\n1 x : 1=1\n2 x : 2=1\n");
    CHECK(enumerate_family(make_colored(twin), 16).size() == 2);
}

TEST_CASE("splitting separates the witness action") {
    ColoredMdp cm = make_colored(fixtures::fix_fam());
    MemorylessPolicy sigma(6);
    for (std::size_t s = 0; s < 6; ++s) sigma.set(s, 0);
    sigma.set(1, 1);  // conflict: beta at s2, alpha at s3
    auto conflicts = find_conflicts(cm, sigma, StateSet(6, {0, 1, 2}));
    auto distances = bfs_distance(cm.base, 0);
    auto [without, only] = split(cm, conflicts, sigma, distances);
    // tie on distance picks s2, whose chosen action is beta
    CHECK(without.allowed.at(cm.colorOf[1]) == std::vector<std::size_t>{0});
    CHECK(only.allowed.at(cm.colorOf[1]) == std::vector<std::size_t>{1});

    // children cover the parent family disjointly
    auto parent = enumerate_family(cm, 64);
    auto left = enumerate_family(without, 64);
    auto right = enumerate_family(only, 64);
    CHECK(left.size() + right.size() == parent.size());
    for (const auto& p : left) {
        CHECK(std::count(right.begin(), right.end(), p) == 0);
    }

    CHECK_THROWS_AS(split(cm, {}, sigma, distances), std::invalid_argument);
}

TEST_CASE("three-action split keeps the complement together") {
    Mdp m = parse_model(
        "@type mdp\n@states 4\n@initial 0\n@label goal: 2\n@label evidence: 3\n"
        "@color 0 1\n@color 1 1\n"
        "0 a : 1=1\n0 b : 2=1\n0 c : 3=1\n"
        "1 a : 3=1\n1 b : 2=1\n1 c : 0=1\n"
        "2 x : 2=1\n3 x : 3=1\n");
    ColoredMdp cm = make_colored(m);
    MemorylessPolicy sigma(4);
    sigma.set(0, 0);
    sigma.set(1, 1);
    sigma.set(2, 0);
    sigma.set(3, 0);
    auto conflicts = find_conflicts(cm, sigma, StateSet(4, {0, 1}));
    REQUIRE(conflicts.size() == 1);
    auto [without, only] = split(cm, conflicts, sigma, bfs_distance(m, 0));
    // the farther conflict state is s1 (distance 1), whose action is b
    CHECK(only.allowed.at(cm.colorOf[0]) == std::vector<std::size_t>{1});
    CHECK(without.allowed.at(cm.colorOf[0]) == std::vector<std::size_t>{0, 2});

    auto parent = enumerate_family(cm, 64);
    CHECK(enumerate_family(without, 64).size() + enumerate_family(only, 64).size() == parent.size());
}

TEST_CASE("conflicts at two colors refine the farther one") {
    // colors at {1,2} (distance 1) and {3,4} (distance 2); both conflict
    Mdp m = parse_model(
        "@type mdp\n@states 6\n@initial 0\n@label goal: 5\n@label evidence: 5\n"
        "@color 1 1\n@color 2 1\n@color 3 2\n@color 4 2\n"
        "0 a : 1=1/2 2=1/2\n"
        "1 a : 3=1\n1 b : 4=1\n"
        "2 a : 4=1\n2 b : 3=1\n"
        "3 a : 5=1\n3 b : 0=1\n"
        "4 a : 0=1\n4 b : 5=1\n"
        "5 x : 5=1\n");
    ColoredMdp cm = make_colored(m);
    MemorylessPolicy sigma(6);
    sigma.set(0, 0);
    sigma.set(1, 0);
    sigma.set(2, 1);  // conflicts with state 1
    sigma.set(3, 0);
    sigma.set(4, 1);  // conflicts with state 3
    sigma.set(5, 0);
    StateSet domain(6, {0, 1, 2, 3, 4});
    auto conflicts = find_conflicts(cm, sigma, domain);
    CHECK(conflicts.size() == 2);
    auto [without, only] = split(cm, conflicts, sigma, bfs_distance(m, 0));
    // the farther conflict states are 3 and 4; the tie picks state 3 (action a)
    CHECK(only.allowed.at(cm.colorOf[3]) == std::vector<std::size_t>{0});
    CHECK(without.allowed.at(cm.colorOf[3]) == std::vector<std::size_t>{1});
    CHECK(only.allowed.at(cm.colorOf[1]) == std::vector<std::size_t>{0, 1});  // untouched
}

TEST_CASE("synthesis walks the fixture exactly as expected") {
    ColoredMdp cm = make_colored(fixtures::fix_fam());

    SUBCASE("threshold 3/5 is infeasible") {
        auto result = synthesize<Rational>(cm, family_query(cm, make_rational(3, 5)));
        CHECK(!result.feasible);
        CHECK(result.nodesExplored == 3);
        REQUIRE(result.reports.size() == 3);
        CHECK(result.reports[0].status == NodeStatus::Refined);
        CHECK(*result.reports[0].upperBound == make_rational(2, 3));
        CHECK(result.reports[1].status == NodeStatus::EvidenceUnreachable);
        CHECK(result.reports[2].status == NodeStatus::BoundDiscarded);
        CHECK(*result.reports[2].upperBound == make_rational(5, 9));
    }
    SUBCASE("threshold 1/2 is feasible with the known member") {
        auto result = synthesize<Rational>(cm, family_query(cm, make_rational(1, 2)));
        CHECK(result.feasible);
        REQUIRE(result.witness.has_value());
        CHECK(result.witness->at(0) == 0);
        CHECK(result.witness->at(1) == 1);
        CHECK(result.witness->at(2) == 1);
        CHECK(*result.value == make_rational(5, 9));
        CHECK(is_consistent(cm, *result.witness, StateSet(6, {0, 1, 2, 3, 4, 5})));
    }
}

TEST_CASE("uncolored model: every memoryless policy is consistent") {
    ColoredMdp cm = make_colored(fixtures::fix_m2());
    auto feasible = synthesize<Rational>(cm, family_query(cm, make_rational(1, 2)));
    CHECK(feasible.feasible);
    CHECK(*feasible.value >= make_rational(1, 2));

    // the memoryless optimum here coincides with the conditional optimum 2/3
    auto tight = synthesize<Rational>(cm, family_query(cm, make_rational(2, 3)));
    CHECK(tight.feasible);
    CHECK(*tight.value == make_rational(2, 3));
    auto over = synthesize<Rational>(cm, family_query(cm, make_rational(7, 10)));
    CHECK(!over.feasible);
}

TEST_CASE("singleton family reduces to one chain evaluation") {
    Mdp m = fixtures::fix_m1(2);
    ColoredMdp cm = make_colored(m);
    auto result = synthesize<Rational>(cm, family_query(cm, make_rational(1, 2)));
    CHECK(result.feasible);
    CHECK(*result.value == make_rational(1, 2));
    CHECK(result.nodesExplored == 1);
}

TEST_CASE("synthesis agrees with family enumeration on random colored instances") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        GeneratorConfig cfg;
        cfg.seed = 1300 + seed;
        cfg.states = 6;
        cfg.acyclic = seed % 2 == 0;
        ColoredMdp cm = random_colored_mdp(cfg, 64);
        for (const Rational& threshold :
             {make_rational(1, 4), make_rational(1, 2), make_rational(3, 4)}) {
            Query q = family_query(cm, threshold);
            auto [expected, best] = family_oracle(cm, q);
            auto result = synthesize<Rational>(cm, q);
            CHECK(result.feasible == expected);
            if (result.feasible) {
                REQUIRE(result.witness.has_value());
                CHECK(is_consistent(cm, *result.witness,
                                    StateSet(cm.base.numStates).complement()));
                CHECK(*result.value >= threshold);
                CHECK(evaluate_policy<Rational>(cm.base,
                                                ConditionalPolicy::from_memoryless(*result.witness), q) ==
                      *result.value);
            }
            // abstraction soundness: the root bound dominates every member
            if (best && !result.reports.empty() && result.reports[0].upperBound) {
                CHECK(*result.reports[0].upperBound >= *best);
            }
        }
    }
}
