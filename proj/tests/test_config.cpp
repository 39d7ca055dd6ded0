#include "posnet/config.hpp"
#include "posnet/report.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace posnet;

TEST_CASE("key=value parsing with comments and whitespace") {
    const auto cfg = KeyValueConfig::from_string(
        "# experiment setup\n"
        "d = 20\n"
        "eps=0.25   # accuracy\n"
        "  name =  demo run \n"
        "\n"
        "flag = true\n");
    REQUIRE(cfg.get_int("d", 0) == 20);
    REQUIRE(cfg.get_double("eps", 0) == 0.25);
    REQUIRE(cfg.get_string("name", "") == "demo run");
    REQUIRE(cfg.get_bool("flag", false));
    REQUIRE(cfg.get_int("missing", 7) == 7);
}

TEST_CASE("config round-trips losslessly") {
    const auto cfg = KeyValueConfig::from_string("a = 1\nb = x y\nc = 0.125\n");
    const auto again = KeyValueConfig::from_string(cfg.serialize());
    REQUIRE(cfg == again);
    REQUIRE(again.serialize() == cfg.serialize());
}

TEST_CASE("malformed input is rejected") {
    REQUIRE_THROWS_AS(KeyValueConfig::from_string("novalue\n"), ConfigError);
    REQUIRE_THROWS_AS(KeyValueConfig::from_string("= 3\n"), ConfigError);
    const auto cfg = KeyValueConfig::from_string("d = abc\n");
    REQUIRE_THROWS_AS(cfg.get_int("d", 0), ConfigError);
    REQUIRE_THROWS_AS(cfg.get_double("d", 0), ConfigError);
    REQUIRE_THROWS_AS(cfg.get_bool("d", false), ConfigError);
}

TEST_CASE("summary statistics") {
    const SeriesSummary s = summarize({4.0, 1.0, 2.0, 3.0, 5.0});
    REQUIRE(s.median == 3.0);
    REQUIRE(s.min == 1.0);
    REQUIRE(s.max == 5.0);
    REQUIRE(s.iqr == 2.0);
}

TEST_CASE("report metrics serialize deterministically") {
    const auto cfg = KeyValueConfig::from_string("d = 10\nk = 1\n");
    Report a("learn", cfg, 42);
    Report b("learn", cfg, 42);
    for (Report* r : {&a, &b}) {
        r->metrics()["trials"] = {0.125, 0.25};
        r->add_summary("rel_error", {0.125, 0.25});
    }
    REQUIRE(a.metrics_dump() == b.metrics_dump());

    // timings do not contaminate the metric section
    a.timings()["total_secs"] = 1.23;
    b.timings()["total_secs"] = 9.87;
    REQUIRE(a.metrics_dump() == b.metrics_dump());
}
