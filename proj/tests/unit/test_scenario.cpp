#include <doctest.h>

#include "masbus/artifacts.hpp"
#include "masbus/scenario.hpp"
#include "support.hpp"

using namespace masbus;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::SyntaxError;
}

std::vector<std::string> stage_names(const ScenarioReport& r) {
    std::vector<std::string> out;
    for (const auto& s : r.stages) out.push_back(s.stage);
    return out;
}

std::vector<TranscriptRow> rows_for(const ScenarioReport& r, const std::string& chat_id) {
    std::vector<TranscriptRow> out;
    for (const auto& row : r.chat_transcript)
        if (row.chat_id == chat_id) out.push_back(row);
    return out;
}

const std::vector<std::string> kAllStages = {"i", "ii", "iii", "iv", "v"};

}  // namespace

TEST_CASE("default run completes every stage and passes its own checks") {
    auto cfg = default_config();
    auto r = run_scenario(cfg);
    CHECK(assert_report(r, cfg).empty());
    CHECK(stage_names(r) == kAllStages);
    CHECK(r.winner_supplier == "beta");
    CHECK(r.winner_price == 7.5);
    REQUIRE(r.hire_message);
    CHECK(r.hire_message->receiver == "beta");
    CHECK(r.hire_message->sender == "distribution_agent");
    CHECK(r.hire_message->performative == Performative::tell);
    CHECK(r.hire_message->content == parse_term("hired(o1)"));
    REQUIRE(r.erp_checkout_requests.size() == 1);
    CHECK(r.erp_checkout_requests[0] == "order(o1,widget)");
    // the hire goes out over the freight chat, the customer gets one row
    auto customer = rows_for(r, cfg.chat_id);
    REQUIRE(customer.size() == 1);
    CHECK(customer[0].token == "sometoken");
    CHECK(customer[0].text.rfind("arriving(o1,", 0) == 0);
    CHECK(rows_for(r, "beta").size() == 1);
    CHECK(r.dead_letters.empty());
    CHECK(r.delivery_order_ok);
    CHECK(r.run_id == "run42");
    CHECK(r.simulated_time);
    REQUIRE(r.near_signal_distance_km);
    CHECK(*r.near_signal_distance_km < cfg.near_threshold_km);
}

TEST_CASE("distances follow the waypoints and the oracle") {
    auto cfg = default_config();
    auto r = run_scenario(cfg);
    REQUIRE(r.distances_km.size() == r.published_waypoints);
    REQUIRE(r.published_waypoints <= cfg.track_waypoints.size());
    for (std::size_t i = 0; i < r.distances_km.size(); ++i) {
        const auto& w = cfg.track_waypoints[i];
        CHECK(std::abs(r.distances_km[i] -
                       testsupport::oracle_distance_km(w.lat, w.lon, cfg.destination.lat, cfg.destination.lon)) <=
              1e-6);
    }
    // the run stops at the first waypoint inside the threshold
    CHECK(r.distances_km.back() < cfg.near_threshold_km);
    for (std::size_t i = 0; i + 1 < r.distances_km.size(); ++i) CHECK(r.distances_km[i] >= cfg.near_threshold_km);
}

TEST_CASE("equal prices go to the lexicographically smallest name") {
    auto cfg = default_config();
    cfg.supplier_quotes = {{"zeta", 5.0}, {"alpha", 7.5}, {"beta", 5.0}};
    CHECK(best_quote(cfg.supplier_quotes).name == "beta");
    auto r = run_scenario(cfg);
    CHECK(r.winner_supplier == "beta");
    CHECK(assert_report(r, cfg).empty());
}

TEST_CASE("first waypoint already at the destination") {
    auto cfg = default_config();
    cfg.track_waypoints = {cfg.destination, {45.2, 7.4}};
    auto r = run_scenario(cfg);
    CHECK(assert_report(r, cfg).empty());
    REQUIRE(r.stages.size() == 5);
    CHECK(r.stages[4].logical_ms == cfg.tick_period_ms);
    CHECK(r.published_waypoints == 1);
    CHECK(r.distances_km == std::vector<double>{0.0});
}

TEST_CASE("unreachable destination times out on the last stage") {
    auto cfg = default_config();
    cfg.track_waypoints = {{46.0, 8.0}, {46.1, 8.1}, {46.2, 8.2}};
    cfg.stage_timeout_ms = 10000;
    try {
        run_scenario(cfg);
        FAIL("expected ScenarioTimeout");
    } catch (const ScenarioTimeout& t) {
        CHECK(t.code() == Errc::StageTimeout);
        CHECK(t.stage() == "v");
        CHECK(t.waited_ms() >= cfg.stage_timeout_ms);
        const auto& partial = t.report();
        CHECK(stage_names(partial) == std::vector<std::string>{"i", "ii", "iii", "iv"});
        CHECK(partial.timeout_stage == "v");
        CHECK(rows_for(partial, cfg.chat_id).empty());
        CHECK(partial.published_waypoints == 3);
        auto v = assert_report(partial, cfg);
        CHECK_FALSE(v.empty());
    }
}

TEST_CASE("invalid configs are rejected before running") {
    auto expect_invalid = [](auto mutate) {
        auto cfg = default_config();
        mutate(cfg);
        CHECK(code_of([&] { validate_config(cfg); }) == Errc::InvalidConfig);
        CHECK(code_of([&] { run_scenario(cfg); }) == Errc::InvalidConfig);
    };
    expect_invalid([](ScenarioConfig& c) { c.supplier_quotes.resize(1); });
    expect_invalid([](ScenarioConfig& c) { c.supplier_quotes[1].name = "alpha"; });
    expect_invalid([](ScenarioConfig& c) { c.supplier_quotes[1].name = "delivery_agent"; });
    expect_invalid([](ScenarioConfig& c) { c.supplier_quotes[1].name = "has space"; });
    expect_invalid([](ScenarioConfig& c) { c.supplier_quotes[1].price = -1; });
    expect_invalid([](ScenarioConfig& c) { c.track_waypoints.resize(1); });
    expect_invalid([](ScenarioConfig& c) { c.track_waypoints[0].lat = 91; });
    expect_invalid([](ScenarioConfig& c) { c.destination.lon = 181; });
    expect_invalid([](ScenarioConfig& c) { c.near_threshold_km = 0; });
    expect_invalid([](ScenarioConfig& c) { c.tick_period_ms = 0; });
    expect_invalid([](ScenarioConfig& c) { c.stage_timeout_ms = -5; });
    expect_invalid([](ScenarioConfig& c) { c.chat_id = ""; });
    expect_invalid([](ScenarioConfig& c) { c.chat_id = "1&x=2"; });
    expect_invalid([](ScenarioConfig& c) { c.chat_token = "a/b"; });
    expect_invalid([](ScenarioConfig& c) { c.product = "Widget"; });
    CHECK_NOTHROW(validate_config(default_config()));
}

TEST_CASE("a corrupted stage order is exactly one violation") {
    auto cfg = default_config();
    auto r = run_scenario(cfg);
    REQUIRE(assert_report(r, cfg).empty());
    std::swap(r.stages[1], r.stages[2]);
    auto v = assert_report(r, cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("out of order") != std::string::npos);
}

TEST_CASE("a different chatId is exactly one violation naming it") {
    auto cfg = default_config();
    auto r = run_scenario(cfg);
    auto other = cfg;
    other.chat_id = "999";
    auto v = assert_report(r, other);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("999") != std::string::npos);
}

TEST_CASE("other report corruptions are caught") {
    auto cfg = default_config();
    const auto good = run_scenario(cfg);
    auto r = good;
    r.winner_supplier = "alpha";
    CHECK_FALSE(assert_report(r, cfg).empty());
    r = good;
    r.stages.pop_back();
    CHECK(assert_report(r, cfg).size() == 1);
    r = good;
    r.dead_letters.push_back({"x", "ProducerFailure", "ConnectionRefused", "tcpline:h:1", "m"});
    CHECK(assert_report(r, cfg).size() == 1);
    r = good;
    r.chat_transcript.push_back(rows_for(good, cfg.chat_id).at(0));
    CHECK(assert_report(r, cfg).size() == 1);
    r = good;
    r.near_signal_seq = r.stages.back().seq + 1;
    CHECK(assert_report(r, cfg).size() == 1);
    r = good;
    r.delivery_order_ok = false;
    CHECK(assert_report(r, cfg).size() == 1);
}

TEST_CASE("two seeded runs give identical fingerprints") {
    auto cfg = default_config();
    auto a = run_scenario(cfg);
    auto b = run_scenario(cfg);
    CHECK(report_fingerprint(a) == report_fingerprint(b));
    cfg.seed = 7;
    auto c = run_scenario(cfg);
    CHECK(report_fingerprint(a) != report_fingerprint(c));
    CHECK(report_fingerprint(a).find("elapsed_ns") == std::string::npos);
}

TEST_CASE("report JSON round-trips") {
    auto r = run_scenario(default_config());
    auto text = report_to_json(r);
    auto back = report_from_json(text);
    CHECK(report_to_json(back) == text);
    CHECK(back.hire_message == r.hire_message);
    CHECK(back.chat_transcript == r.chat_transcript);
    CHECK(code_of([] { report_from_json("{"); }) == Errc::InvalidConfig);
}

TEST_CASE("config JSON round-trips and rejects unknown fields") {
    auto cfg = default_config();
    auto text = config_to_json(cfg);
    CHECK(config_to_json(config_from_json(text)) == text);
    CHECK(code_of([] { config_from_json(R"({"supplier_quotes": [], "destination": [0, 0], "colour": 1})"); }) ==
          Errc::InvalidConfig);
    CHECK(code_of([] { config_from_json("not json"); }) == Errc::InvalidConfig);
    CHECK(code_of([] {
              config_from_json(R"({"supplier_quotes": [{"name": "a", "price": 1}], "destination": [0, 0]})");
          }) == Errc::InvalidConfig);
}

TEST_CASE("generated waypoints are deterministic and end near the destination") {
    LatLon dest{45.0703, 7.6869};
    auto a = generate_waypoints(3, dest, 1.0, 8);
    auto b = generate_waypoints(3, dest, 1.0, 8);
    REQUIRE(a.size() == 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].lat == b[i].lat);
        CHECK(a[i].lon == b[i].lon);
    }
    double start = haversine_km(a[0].lat, a[0].lon, dest.lat, dest.lon);
    CHECK(start > 10.0);
    CHECK(start < 45.0);
    CHECK(haversine_km(a.back().lat, a.back().lon, dest.lat, dest.lon) < 0.5);

    auto cfg = config_from_json(R"({"seed": 5, "supplier_quotes": [{"name": "a", "price": 2}, {"name": "b", "price": 1}],
                                    "destination": [45.0703, 7.6869], "generated_waypoints": 6})");
    CHECK(cfg.track_waypoints.size() == 6);
    auto r = run_scenario(cfg);
    CHECK(assert_report(r, cfg).empty());
    CHECK(r.winner_supplier == "b");
}

TEST_CASE("wall-clock mode reaches every stage") {
    auto cfg = default_config();
    cfg.tick_period_ms = 20;
    cfg.stage_timeout_ms = 5000;
    auto r = run_scenario(cfg, ScenarioOptions{false});
    CHECK_FALSE(r.simulated_time);
    CHECK(stage_names(r) == kAllStages);
    CHECK(assert_report(r, cfg).empty());
}
