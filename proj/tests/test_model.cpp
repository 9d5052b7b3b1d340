#include <doctest.h>

#include "condreach/generator.hpp"
#include "condreach/parser.hpp"
#include "fixtures.hpp"

using namespace condreach;

namespace {

bool structurally_equal(const Mdp& a, const Mdp& b) {
    if (a.numStates != b.numStates || a.initialState != b.initialState) return false;
    if (a.labels != b.labels || a.colorAnnotations != b.colorAnnotations) return false;
    for (std::size_t s = 0; s < a.numStates; ++s) {
        if (a.actionCount(s) != b.actionCount(s)) return false;
        for (std::size_t i = 0; i < a.actionCount(s); ++i) {
            if (a.actions(s)[i].name != b.actions(s)[i].name) return false;
            if (a.actions(s)[i].successors != b.actions(s)[i].successors) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("fixture model parses with the expected shape") {
    Mdp m = fixtures::fix_m2();
    CHECK(m.numStates == 6);
    CHECK(m.initialState == 0);
    CHECK(m.actionCount(0) == 2);
    CHECK(m.actionCount(1) == 2);
    CHECK(m.actionCount(2) == 2);
    CHECK(m.actionCount(3) == 1);
    CHECK(m.labelSet("goal") == StateSet(6, {3}));
    CHECK(m.labelSet("evidence") == StateSet(6, {4, 5}));
    CHECK(m.size() == 13);
}

TEST_CASE("minimal one-state model") {
    Mdp m = parse_model("@type mdp\n@states 1\n@initial 0\n0 a : 0=1\n");
    CHECK(m.numStates == 1);
    CHECK(m.actionCount(0) == 1);
}

TEST_CASE("parser rejects bad input with line numbers") {
    CHECK_THROWS_WITH_AS(parse_model("@type mdp\n@states 3\n@initial 0\n0 a : 1=1/3 2=1/3\n"),
                         doctest::Contains("sums to 2/3"), ParseError);
    CHECK_THROWS_AS(parse_model("@type mdp\n@states 2\n@initial 0\n0 a : 5=1\n"), ParseError);
    CHECK_THROWS_AS(parse_model("@states 1\n0 a : 0=1\n"), ParseError);  // missing @type
    CHECK_THROWS_AS(parse_model("@type mdp\n@states 2\n@initial 0\n0 a : 1=1\n0 a : 0=1\n"), ParseError);
    // state 1 has no actions
    CHECK_THROWS_AS(parse_model("@type mdp\n@states 2\n@initial 0\n0 a : 1=1\n"), ValidationError);
}

TEST_CASE("validate reports each violated invariant") {
    Mdp m;
    m.numStates = 2;
    m.initialState = 0;
    m.stateActions.resize(2);
    Action a;
    a.name = "a";
    a.successors.emplace_back(5, Rational(1));  // dangling
    m.stateActions[0].push_back(a);
    // state 1 has no actions
    try {
        validate(m);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.issues.size() == 2);
        CHECK(std::string(e.what()).find("without actions") != std::string::npos);
        CHECK(std::string(e.what()).find("dangling successor") != std::string::npos);
    }
}

TEST_CASE("induce_chain picks exactly the chosen actions") {
    Mdp m = fixtures::fix_m2();
    MemorylessPolicy sigma(6);
    sigma.set(0, 0);  // alpha
    sigma.set(1, 1);  // beta
    sigma.set(2, 1);  // beta
    sigma.set(3, 0);
    sigma.set(4, 0);
    sigma.set(5, 0);
    Mdp chain = induce_chain(m, sigma);
    for (std::size_t s = 0; s < 6; ++s) CHECK(chain.actionCount(s) == 1);
    CHECK(chain.actions(1)[0].name == "beta");
    CHECK(chain.actions(1)[0].successors ==
          std::vector<std::pair<std::size_t, Rational>>{{1, make_rational(1, 2)}, {4, make_rational(1, 2)}});
    CHECK(chain.labels == m.labels);

    // beta at the initial state leaves only {s1, s4} reachable
    sigma.set(0, 1);
    Mdp other = induce_chain(m, sigma);
    CHECK(reachable_states(other, 0) == StateSet(6, {0, 3}));

    MemorylessPolicy undef(6);
    CHECK_THROWS_AS(induce_chain(m, undef), std::invalid_argument);
}

TEST_CASE("single-action model induces itself") {
    Mdp m = fixtures::fix_m1(2);
    MemorylessPolicy sigma(m.numStates);
    for (std::size_t s = 0; s < m.numStates; ++s) sigma.set(s, 0);
    CHECK(structurally_equal(induce_chain(m, sigma), m));
}

TEST_CASE("serialize/parse round trip on random models") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        GeneratorConfig cfg;
        cfg.seed = seed;
        cfg.states = 6 + seed % 5;
        cfg.acyclic = seed % 2 == 0;
        Mdp m = random_mdp(cfg);
        Mdp reparsed = parse_model(serialize_model(m));
        CHECK(structurally_equal(m, reparsed));
        // exact distribution sums survive the round trip
        for (std::size_t s = 0; s < reparsed.numStates; ++s) {
            for (const auto& action : reparsed.actions(s)) {
                Rational sum = 0;
                for (const auto& [succ, prob] : action.successors) sum += prob;
                CHECK(sum == 1);
            }
        }
    }
}

TEST_CASE("color annotations survive parsing and serialization") {
    Mdp m = fixtures::fix_fam();
    CHECK(m.colorAnnotations.at(1) == 7);
    CHECK(m.colorAnnotations.at(2) == 7);
    CHECK(structurally_equal(parse_model(serialize_model(m)), m));
}
