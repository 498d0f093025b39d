#include "support.hpp"

#include "sisdmdp/error.hpp"
#include "sisdmdp/generator.hpp"
#include "sisdmdp/model_io.hpp"
#include "sisdmdp/structure.hpp"

#include <doctest.h>

#include <string>

using namespace sisdmdp;
using namespace testing;

TEST_CASE("F1 round-trips bit-identically") {
    const std::string text = serialize_model(fixture_f1());
    const MdpModel back = parse_model(text);
    CHECK(back == fixture_f1());
    CHECK(serialize_model(back) == text);
}

TEST_CASE("truncated documents name the missing section") {
    const std::string text = serialize_model(fixture_f1());
    const std::size_t cut = text.find("\"transitions\"") + 20;
    try {
        parse_model(text.substr(0, cut));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("transitions") != std::string::npos);
        CHECK(msg.find("rewards") != std::string::npos);
    }

    const std::string no_rewards = "{\"format\": \"sisdmdp-model\", \"version\": 1, "
                                   "\"header\": {\"n_states\": 1, \"n_actions\": 1, \"K\": 1, \"partition_boundaries\": [0, 1]}, "
                                   "\"transitions\": [[[0, 0, 1.0]]]}";
    CHECK_THROWS_WITH_AS(parse_model(no_rewards), doctest::Contains("rewards"), ParseError);
}

TEST_CASE("parse re-checks invariants") {
    std::string text = serialize_model(fixture_f1());
    const std::string bad = std::string(text).replace(text.find("0.69999999999999996"), 19, "0.5");
    CHECK_THROWS_AS(parse_model(bad), ValidationError);
    CHECK_THROWS_AS(parse_model("[1, 2]"), ParseError);
    CHECK_THROWS_AS(parse_model("{\"header\": {\"n_states\": \"x\"}, \"transitions\": [], \"rewards\": []}"), ParseError);
}

TEST_CASE("generated models round-trip and re-validate") {
    GeneratorConfig cfg;
    cfg.n_states = 1000;
    cfg.n_partitions = 10;
    cfg.n_actions = 2;
    const MdpModel m = generate_sisdmdp(cfg);
    const MdpModel back = parse_model(serialize_model(m));
    CHECK(back == m);
    for (std::size_t a = 0; a < 2; ++a) CHECK(validate_structure(back.transitions(a), back.layout()).structure_ok());

    Rng pick(31);
    for (int i = 0; i < 100; ++i) {
        GeneratorConfig c;
        c.n_partitions = 1 + pick.below(6);
        c.n_states = c.n_partitions * (1 + pick.below(20));
        c.n_actions = 1 + pick.below(3);
        c.seed = pick.next();
        const MdpModel g = generate_sisdmdp(c);
        CHECK(parse_model(serialize_model(g)) == g);
    }
}
