#include <doctest.h>

#include <fstream>
#include <sstream>

#include "masbus/components.hpp"
#include "masbus/route_config.hpp"
#include "support.hpp"

using namespace masbus;

namespace {

Error error_of(const std::string& xml) {
    try {
        parse_routes_xml(xml);
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an error for:\n" << xml);
    return Error(Errc::SyntaxError, "unreachable");
}

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::SyntaxError;
}

const char* kCustomerRoute = R"(<routes>
<route>
  <from uri="jason:DummyCustomerAgent"/>
  <to uri="telegram:bots/sometoken?chatId=-364531"/>
</route>
</routes>)";

}  // namespace

TEST_CASE("customer chat route") {
    auto file = parse_routes_xml(kCustomerRoute, "chat.xml");
    CHECK(file.source == "chat.xml");
    REQUIRE(file.routes.size() == 1);
    const auto& r = file.routes[0];
    CHECK(r.route_id == "route-1");
    CHECK(format_uri(r.from) == "jason:DummyCustomerAgent");
    REQUIRE(r.to.size() == 1);
    CHECK(format_uri(r.to[0]) == "telegram:bots/sometoken?chatId=-364531");
    CHECK(r.to[0].param("chatId") == "-364531");
    CHECK(r.processors.empty());
}

TEST_CASE("empty routes element") {
    CHECK(parse_routes_xml("<routes/>").routes.empty());
    CHECK(parse_routes_xml("<?xml version=\"1.0\"?>\n<routes>\n</routes>\n").routes.empty());
}

TEST_CASE("route without to is located at the route") {
    auto e = error_of("<routes>\n  <route id=\"r\">\n    <from uri=\"direct:a\"/>\n  </route>\n</routes>");
    CHECK(e.code() == Errc::MissingTo);
    REQUIRE(e.location());
    CHECK(e.location()->line == 2);
    CHECK(e.location()->column == 3);
}

TEST_CASE("error codes and locations") {
    struct Case {
        const char* xml;
        Errc code;
        std::size_t line;
    };
    const Case cases[] = {
        {"<routes>\n<route><from uri=\"a:b\"/><to uri=\"c:d\"/>", Errc::XmlSyntax, 2},
        {"<routes>\n<rout/></routes>", Errc::UnknownElement, 2},
        {"<other/>", Errc::UnknownElement, 1},
        {"<routes>\n<route>\n<to uri=\"c:d\"/></route></routes>", Errc::MissingFrom, 3},
        {"<routes>\n<route>\n</route></routes>", Errc::MissingFrom, 2},
        {"<routes><route>\n<from uri=\"a:b\"/>\n<from uri=\"a:c\"/><to uri=\"c:d\"/></route></routes>",
         Errc::DuplicateFrom, 3},
        {"<routes><route><from uri=\"a:b\"/><to uri=\"c:d\"/>\n<setHeader headerName=\"h\"><constant>1</constant>"
         "</setHeader></route></routes>",
         Errc::OrderViolation, 2},
        {"<routes><route><from uri=\"a:b\"/>\n<to uri=\"c\"/></route></routes>", Errc::BadUri, 2},
        {"<routes><route>\n<from uri=\"\"/><to uri=\"c:d\"/></route></routes>", Errc::BadUri, 2},
        {"<routes><route><from uri=\"a:b\" extra=\"1\"/><to uri=\"c:d\"/></route></routes>",
         Errc::UnknownAttribute, 1},
        {"<routes><route><from/><to uri=\"c:d\"/></route></routes>", Errc::MissingAttribute, 1},
        {"<routes><route><from uri=\"a:b\"/>\n<setHeader><constant>1</constant></setHeader><to uri=\"c:d\"/>"
         "</route></routes>",
         Errc::MissingAttribute, 2},
        {"<routes><route><from uri=\"a:b\"/>\n<setHeader headerName=\"h\"/><to uri=\"c:d\"/></route></routes>",
         Errc::MissingAttribute, 2},
        {"<routes><route><from uri=\"a:b\"/><setHeader headerName=\"h\"><constant>1</constant>\n"
         "<constant>2</constant></setHeader><to uri=\"c:d\"/></route></routes>",
         Errc::UnknownElement, 2},
        {"<routes>\nstray<route><from uri=\"a:b\"/><to uri=\"c:d\"/></route></routes>", Errc::UnexpectedText, 2},
        {"<routes><route id=\"x\"><from uri=\"a:b\"/><to uri=\"c:d\"/></route>\n"
         "<route id=\"x\"><from uri=\"a:b\"/><to uri=\"c:d\"/></route></routes>",
         Errc::DuplicateRouteId, 2},
        {"<routes><aliases>\n<alias scheme=\"mqtt\"/></aliases></routes>", Errc::MissingAttribute, 2},
        {"<routes><aliases><alias scheme=\"m\" component=\"a\"/>\n<alias scheme=\"m\" component=\"b\"/>"
         "</aliases></routes>",
         Errc::DuplicateScheme, 2},
        {"<routes><route><from uri=\"a:b\"/>\n<transform/><to uri=\"c:d\"/></route></routes>",
         Errc::MissingAttribute, 2},
    };
    for (const auto& c : cases) {
        auto e = error_of(c.xml);
        CHECK_MESSAGE(e.code() == c.code, c.xml);
        REQUIRE_MESSAGE(e.location(), c.xml);
        CHECK_MESSAGE(e.location()->line == c.line, c.xml);
        CHECK(e.location()->column >= 1);
    }
}

TEST_CASE("aliases, processors and explicit ids") {
    auto file = parse_routes_xml(R"(<routes>
  <aliases>
    <alias scheme="mqtt" component="mqttlite"/>
  </aliases>
  <route id="tracking">
    <from uri="mqtt : foo? host=tcp://broker &amp; subscribeTopicName=latLong"/>
    <setHeader headerName="ArtifactName"><constant>TrackedArtifact</constant></setHeader>
    <setHeader headerName="OperationName"><constant> giveDistance </constant></setHeader>
    <transform ref="normalise"/>
    <to uri="artifact:cartago"/>
    <to uri="mock:log"/>
  </route>
  <route><from uri="direct:x"/><to uri="mock:y"/></route>
</routes>)");
    CHECK(file.aliases.entries() == std::vector<std::pair<std::string, std::string>>{{"mqtt", "mqttlite"}});
    REQUIRE(file.routes.size() == 2);
    const auto& r = file.routes[0];
    CHECK(r.route_id == "tracking");
    CHECK(format_uri(r.from) == "mqtt:foo?host=tcp://broker&subscribeTopicName=latLong");
    REQUIRE(r.processors.size() == 3);
    CHECK(r.processors[0] == ProcessorSpec::set_header("ArtifactName", Term::atom("TrackedArtifact")));
    CHECK(r.processors[1] == ProcessorSpec::set_header("OperationName", Term::atom("giveDistance")));
    CHECK(r.processors[2] == ProcessorSpec::transform("normalise"));
    CHECK(r.to.size() == 2);
    CHECK(file.routes[1].route_id == "route-2");
}

TEST_CASE("tracking route built fluently") {
    auto def = RouteBuilder("tracking")
                   .from("mqtt : foo? host=tcp://broker & subscribeTopicName=latLong")
                   .set_header("ArtifactName", constant("TrackedArtifact"))
                   .set_header("OperationName", constant("giveDistance"))
                   .to("artifact : cartago")
                   .build();
    CHECK(def.from.scheme == "mqtt");
    CHECK(def.from.param("host") == "tcp://broker");
    CHECK(def.processors.size() == 2);
    REQUIRE(def.to.size() == 1);
    CHECK(format_uri(def.to[0]) == "artifact:cartago");

    auto xml = parse_routes_xml(R"(<routes><route id="tracking">
      <from uri="mqtt:foo?host=tcp://broker&amp;subscribeTopicName=latLong"/>
      <setHeader headerName="ArtifactName"><constant>TrackedArtifact</constant></setHeader>
      <setHeader headerName="OperationName"><constant>giveDistance</constant></setHeader>
      <to uri="artifact:cartago"/></route></routes>)");
    REQUIRE(xml.routes.size() == 1);
    CHECK(xml.routes[0] == def);
}

TEST_CASE("builder ordering rules") {
    CHECK(code_of([] { RouteBuilder().to("a:b"); }) == Errc::OrderViolation);
    CHECK(code_of([] { RouteBuilder().set_header("h", Term::atom("v")); }) == Errc::OrderViolation);
    CHECK(code_of([] { RouteBuilder().transform("t"); }) == Errc::OrderViolation);
    CHECK(code_of([] { RouteBuilder().from("a:b").from("a:c"); }) == Errc::OrderViolation);
    CHECK(code_of([] { RouteBuilder().from("a:b").to("c:d").set_header("h", Term::atom("v")); }) ==
          Errc::OrderViolation);
    CHECK(code_of([] { RouteBuilder().from("a:b").to("c:d").transform("t"); }) == Errc::OrderViolation);
    CHECK(code_of([] { RouteBuilder().build(); }) == Errc::Incomplete);
    CHECK(code_of([] { RouteBuilder().from("a:b").build(); }) == Errc::Incomplete);
    CHECK(code_of([] { RouteBuilder().from("a:b").set_header("", Term::atom("v")); }) == Errc::InvalidRoute);
    try {
        RouteBuilder().from("nocolon");
        FAIL("expected BadUri");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BadUri);
        CHECK(e.detail() == "MissingScheme");
    }
    // several to() calls are fine
    CHECK(RouteBuilder().from("a:b").to("c:d").to("e:f").build().to.size() == 2);
}

TEST_CASE("generated routes survive render/parse and the builder") {
    testsupport::TermGen gen(8);
    std::vector<RouteDefinition> corpus;
    for (std::size_t i = 0; i < 200; ++i) corpus.push_back(testsupport::random_route(gen, i));

    auto parsed = parse_routes_xml(render_routes_xml(corpus));
    REQUIRE(parsed.routes.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        RouteDefinition expected = corpus[i];
        if (expected.route_id.empty()) expected.route_id = "route-" + std::to_string(i + 1);
        CHECK_MESSAGE(parsed.routes[i] == expected, render_routes_xml({corpus[i]}));

        RouteBuilder b(corpus[i].route_id);
        b.from(format_uri(corpus[i].from));
        for (const auto& p : corpus[i].processors) {
            if (p.kind == ProcessorSpec::Kind::Transform)
                b.transform(p.name);
            else
                b.set_header(p.name, p.value);
        }
        for (const auto& t : corpus[i].to) b.to(format_uri(t));
        CHECK(b.build() == corpus[i]);
    }
}

TEST_CASE("aliases render and parse back") {
    AliasTable t;
    t.add("mqtt", "mqttlite");
    t.add("telegram", "chatstub");
    t.add("mqtt", "mqttlite");  // same mapping again is fine
    CHECK(code_of([&] { t.add("mqtt", "direct"); }) == Errc::DuplicateScheme);
    CHECK(code_of([&] { t.add("Bad", "direct"); }) == Errc::BadScheme);
    CHECK(t.resolve("mqtt") == "mqttlite");
    CHECK(t.resolve("direct") == "direct");
    auto file = parse_routes_xml(render_routes_xml({RouteBuilder("r").from("mqtt:a").to("telegram:b").build()}, t));
    CHECK(file.aliases == t);

    CHECK(parse_alias_spec("mqtt=mqttlite") == std::pair<std::string, std::string>{"mqtt", "mqttlite"});
    CHECK(code_of([] { parse_alias_spec("mqtt"); }) == Errc::BadParam);
    CHECK(code_of([] { parse_alias_spec("=x"); }) == Errc::BadParam);
    CHECK(code_of([] { parse_alias_spec("x="); }) == Errc::BadParam);
}

TEST_CASE("unresolved schemes and applying aliases") {
    AgentRegistry registry;
    Environment env;
    Bus bus;
    auto comps = install_standard_components(bus, registry, env);
    auto file = parse_routes_xml(kCustomerRoute);
    CHECK(unresolved_schemes(file, bus) == std::vector<std::string>{"telegram"});
    AliasTable extra;
    extra.add("telegram", "chatstub");
    CHECK(unresolved_schemes(file, bus, extra).empty());

    AliasTable bad;
    bad.add("x", "nosuch");
    CHECK(code_of([&] { apply_aliases(bus, bad); }) == Errc::UnknownScheme);

    apply_aliases(bus, extra);
    apply_aliases(bus, extra);  // idempotent
    CHECK(bus.component("telegram") == bus.component("chatstub"));

    registry.register_local("delivery_agent");
    bus.add_route(file.routes[0]);
    bus.start();
    registry.send_message(AclMessage{"", "delivery_agent", "DummyCustomerAgent", Performative::tell,
                                     parse_term("arriving(o1)"), std::nullopt});
    bus.stop();
    auto rows = comps.chatstub->transcript().rows();
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].chat_id == "-364531");
    CHECK(rows[0].token == "sometoken");
    CHECK(rows[0].text == "arriving(o1)");
}

TEST_CASE("shipped config files parse") {
    for (const char* name : {"customer_chat.xml", "tracking.xml", "loopback.xml"}) {
        std::ifstream in(std::string(MASBUS_CONFIG_DIR) + "/" + name);
        REQUIRE_MESSAGE(in, name);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK_NOTHROW(parse_routes_xml(ss.str(), name));
    }
}
