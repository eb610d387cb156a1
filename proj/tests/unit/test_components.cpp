#include <doctest.h>

#include <httplib.h>

#include "masbus/artifacts.hpp"
#include "masbus/components.hpp"
#include "masbus/net.hpp"
#include "support.hpp"

using namespace masbus;
using testsupport::ManualComponent;
using testsupport::route;

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

struct World {
    explicit World(std::shared_ptr<Clock> clock = nullptr) : bus(options(std::move(clock))) {
        comps = install_standard_components(bus, registry, env);
        bus.register_component("manual", manual);
    }

    static BusOptions options(std::shared_ptr<Clock> clock) {
        BusOptions o;
        o.clock = std::move(clock);
        return o;
    }

    AgentRegistry registry;
    Environment env;
    Bus bus;
    StandardComponents comps;
    std::shared_ptr<ManualComponent> manual = std::make_shared<ManualComponent>();

    // Emit and wait, so that effects across routes happen in call order.
    void feed(const std::string& name, Term body, Headers headers = {}) {
        manual->emit(name, std::move(body), std::move(headers));
        REQUIRE(bus.await_idle(std::chrono::seconds(5)));
    }
};

}  // namespace

TEST_CASE("jason consumer binds a dummy and builds ACL headers") {
    World w;
    w.registry.register_local("customer");
    w.bus.add_route(route("chat", "jason:DummyCustomerAgent", {"mock:chat"}));
    CHECK_FALSE(w.registry.contains("DummyCustomerAgent"));
    w.bus.start();
    CHECK(w.registry.kind("DummyCustomerAgent") == AgentKind::dummy);
    CHECK(w.registry.bound_route("DummyCustomerAgent") == "chat");

    AclMessage m;
    m.sender = "delivery_agent";
    m.receiver = "DummyCustomerAgent";
    m.performative = Performative::tell;
    m.content = parse_term("arriving(o1,0.4)");
    CHECK(w.registry.send_message(m) == DeliveryOutcome::routed);
    w.bus.stop();
    CHECK_FALSE(w.registry.contains("DummyCustomerAgent"));

    auto got = w.comps.mock->received("chat");
    REQUIRE(got.size() == 1);
    CHECK(got[0].body == parse_term("arriving(o1,0.4)"));
    CHECK(*got[0].header("performative") == Term::atom("tell"));
    CHECK(*got[0].header("sender") == Term::atom("delivery_agent"));
    CHECK(*got[0].header("receiver") == Term::atom("DummyCustomerAgent"));
    REQUIRE(got[0].header("msgId"));
    CHECK(got[0].header("msgId")->is_string());
    CHECK(got[0].headers.size() == 4);
}

TEST_CASE("jason consumer refuses a name a local agent holds") {
    World w;
    w.registry.register_local("taken");
    w.bus.add_route(route("r", "jason:taken", {"mock:x"}));
    CHECK(code_of([&] { w.bus.start(); }) == Errc::DuplicateName);
}

TEST_CASE("jason producer: defaults, params and header overrides") {
    World w;
    w.registry.register_local("target");
    w.bus.add_route(route("plain", "manual:plain", {"jason:target"}));
    w.bus.add_route(route("params", "manual:params", {"jason:target?performative=achieve&sender=boss"}));
    w.bus.start();
    w.feed("plain", Term::atom("a"));
    w.feed("params", Term::atom("b"));
    w.manual->emit("params", Term::atom("c"),
                   {{"performative", Term::atom("untell")}, {"sender", Term::atom("someone")}});
    w.bus.stop();

    auto m1 = w.registry.receive("target");
    REQUIRE(m1);
    CHECK(m1->performative == Performative::tell);
    CHECK(m1->sender == "plain");
    CHECK(m1->content == Term::atom("a"));
    auto m2 = w.registry.receive("target");
    CHECK(m2->performative == Performative::achieve);
    CHECK(m2->sender == "boss");
    auto m3 = w.registry.receive("target");
    CHECK(m3->performative == Performative::untell);
    CHECK(m3->sender == "someone");
}

TEST_CASE("jason producer failures become dead letters") {
    World w;
    w.bus.add_route(route("r", "manual:a", {"jason:ghost"}));
    w.bus.add_route(route("p", "manual:b", {"jason:ghost2"}));
    w.registry.register_local("ghost2");
    w.bus.start();
    w.feed("a", Term::atom("x"));
    w.feed("b", Term::atom("x"), {{"performative", Term::atom("shout")}});
    w.bus.stop();
    auto dl = w.bus.dead_letters();
    REQUIRE(dl.size() == 2);
    CHECK(dl[0].cause == Errc::UnknownReceiver);
    CHECK(dl[1].cause == Errc::UnknownPerformative);
    CHECK(code_of([&] {
              World w2;
              w2.bus.add_route(route("r", "manual:a", {"jason:x?performative=inform"}));
              w2.bus.start();
          }) == Errc::UnknownPerformative);
}

TEST_CASE("agent to dummy and back matches local delivery") {
    World w;
    w.registry.register_local("bob");
    w.bus.add_route(route("out", "jason:relay", {"direct:loop"}));
    w.bus.add_route(route("back", "direct:loop", {"jason:bob"}));
    w.bus.start();
    for (auto p : all_performatives()) {
        AclMessage m{"", "alice", "relay", p, parse_term("f([1,\"two\"],'Three')"), std::nullopt};
        w.registry.send_message(m);
        REQUIRE(w.bus.await_idle(std::chrono::seconds(5)));
        auto got = w.registry.receive("bob");
        REQUIRE(got);
        CHECK(got->performative == p);
        CHECK(got->sender == "alice");
        CHECK(got->content == m.content);
    }
    w.bus.stop();
}

TEST_CASE("artifact producer resolves names from headers then params") {
    World w;
    w.env.create_artifact("main", "TrackedArtifact", tracker_template(45.0, 7.0, 1.0));
    w.env.create_artifact("main", "counter", counter_template());
    w.bus.add_route(route("hdr", "manual:hdr", {"artifact:cartago"},
                          {ProcessorSpec::set_header("ArtifactName", Term::atom("TrackedArtifact")),
                           ProcessorSpec::set_header("OperationName", Term::atom("giveDistance"))}));
    w.bus.add_route(route("prm", "manual:prm", {"artifact:cartago?artifactName=counter&operationName=inc"}));
    w.bus.add_route(route("none", "manual:none", {"artifact:cartago?artifactName=counter"}));
    w.bus.start();
    w.feed("hdr", Term::list({Term::number(45.0), Term::number(7.0)}));
    w.feed("hdr", parse_term("pos(45.0,7.0)"));
    w.feed("prm", Term::atom("ignored"));
    // header wins over the URI param
    w.feed("prm", Term::atom("x"), {{"OperationName", Term::atom("dec")}});
    w.feed("none", Term::atom("x"));
    w.bus.stop();

    auto calls = w.env.call_log();
    REQUIRE(calls.size() == 4);
    CHECK(calls[0].artifact == "TrackedArtifact");
    CHECK(calls[0].operation == "giveDistance");
    CHECK(calls[0].params == std::vector<Term>{Term::number(45.0), Term::number(7.0)});
    CHECK(calls[0].origin == Origin::route("hdr"));
    CHECK(calls[0].workspace == "main");
    CHECK(calls[1].params == std::vector<Term>{parse_term("pos(45.0,7.0)")});
    CHECK(calls[2].operation == "inc");
    CHECK(calls[2].params == std::vector<Term>{Term::atom("ignored")});
    CHECK(calls[3].operation == "dec");
    CHECK_FALSE(calls[3].ok);
    auto dl = w.bus.dead_letters();
    REQUIRE(dl.size() == 2);
    CHECK(dl[0].cause == Errc::UnknownOperation);
    CHECK(dl[1].cause == Errc::MissingOperationName);
    CHECK(w.env.property("main", "TrackedArtifact", "distanceKm") == Term::number(0));
}

TEST_CASE("artifact producer without an artifact name") {
    World w;
    w.bus.add_route(route("r", "manual:a", {"artifact:cartago"}));
    w.bus.start();
    w.manual->emit("a", Term::atom("x"), {{"OperationName", Term::atom("inc")}});
    w.bus.stop();
    REQUIRE(w.bus.dead_letters().size() == 1);
    CHECK(w.bus.dead_letters()[0].cause == Errc::MissingArtifactName);
}

TEST_CASE("artifact consumer turns outbound payloads into exchanges") {
    World w;
    w.env.create_workspace("plant");
    w.env.create_artifact("plant", "erp", counter_template());
    w.env.artifact_send("plant", "erp", {{"kind", Term::atom("early")}}, Term::atom("queued"));
    w.bus.add_route(route("r", "artifact:plant?artifactName=erp", {"mock:out"}));
    w.bus.start();
    w.env.artifact_send("plant", "erp", {}, Term::atom("live"));
    w.bus.stop();
    auto got = w.comps.mock->received("out");
    REQUIRE(got.size() == 2);
    CHECK(got[0].body == Term::atom("queued"));
    CHECK(*got[0].header("kind") == Term::atom("early"));
    CHECK(*got[0].header("ArtifactName") == Term::atom("erp"));
    CHECK(got[1].body == Term::atom("live"));

    World w2;
    w2.bus.add_route(route("r", "artifact:cartago", {"mock:out"}));
    CHECK(code_of([&] { w2.bus.start(); }) == Errc::MissingParam);
    World w3;
    w3.bus.add_route(route("r", "artifact:cartago?artifactName=ghost", {"mock:out"}));
    CHECK(code_of([&] { w3.bus.start(); }) == Errc::UnknownArtifact);
}

TEST_CASE("body_to_params") {
    CHECK(body_to_params(parse_term("[1,2]")) == std::vector<Term>{Term::number(1), Term::number(2)});
    CHECK(body_to_params(Term::number(3)) == std::vector<Term>{Term::number(3)});
    CHECK(body_to_params(parse_term("[]")).empty());
}

TEST_CASE("mqttlite bridges routes through the broker") {
    World w;
    w.bus.add_route(route("sub", "mqttlite:foo?host=tcp://broker&subscribeTopicName=latLong", {"mock:in"}));
    w.bus.add_route(route("pub", "manual:p", {"mqttlite:bar?host=tcp://broker&publishTopicName=latLong"}));
    w.bus.start();
    w.manual->emit("p", parse_term("pos(1.0,2.0)"));
    REQUIRE(w.bus.await_idle(std::chrono::seconds(5)));
    w.comps.mqttlite->broker("tcp://broker")->publish("latLong", "not a term!");
    w.bus.stop();
    auto got = w.comps.mock->received("in");
    REQUIRE(got.size() == 2);
    CHECK(got[0].body == parse_term("pos(1,2)"));
    CHECK(*got[0].header("topic") == Term::string("latLong"));
    CHECK(got[1].body == Term::string("not a term!"));
}

TEST_CASE("broker fan-out, retention and isolation by host") {
    Broker b;
    CHECK(b.publish("t", "x") == 0);
    std::vector<std::string> one, two;
    auto s1 = b.subscribe("t", [&](const std::string&, const std::string& p) { one.push_back(p); });
    b.subscribe("t", [&](const std::string&, const std::string& p) { two.push_back(p); });
    CHECK(b.publish("t", "a") == 2);
    b.unsubscribe(s1);
    CHECK(b.publish("t", "b", true) == 1);
    CHECK(one == std::vector<std::string>{"a"});
    CHECK(two == std::vector<std::string>{"a", "b"});
    std::vector<std::string> late;
    b.subscribe("t", [&](const std::string&, const std::string& p) { late.push_back(p); });
    CHECK(late == std::vector<std::string>{"b"});
    CHECK(b.retained("t") == "b");
    CHECK(b.subscriber_count("t") == 2);

    MqttLiteComponent c;
    CHECK(c.broker("tcp://a") == c.broker("tcp://a"));
    CHECK(c.broker("tcp://a") != c.broker("tcp://b"));
}

TEST_CASE("mqttlite parameter checks") {
    World w;
    w.bus.add_route(route("r", "mqttlite:x?host=h", {"mock:x"}));
    CHECK(code_of([&] { w.bus.start(); }) == Errc::MissingParam);
    World w2;
    w2.bus.add_route(route("r", "manual:a", {"mqttlite:x?publishTopicName=t"}));
    CHECK(code_of([&] { w2.bus.start(); }) == Errc::MissingParam);
}

TEST_CASE("tcpline: lines in, rendered bodies out") {
    World w;
    auto port = testsupport::free_port();
    std::string in_uri = "tcpline:127.0.0.1:" + std::to_string(port);
    w.bus.add_route(route("in", in_uri, {"mock:lines"}));
    w.bus.add_route(route("out", "manual:o", {in_uri + "?ackTimeoutMs=2000"}));
    w.bus.start();
    send_line("127.0.0.1", port, "done", std::chrono::milliseconds(2000));
    send_line("localhost", port, "free text here\r", std::chrono::milliseconds(2000));
    w.manual->emit("o", parse_term("signal(done)"));
    REQUIRE(w.bus.await_idle(std::chrono::seconds(5)));
    w.bus.stop();
    auto got = w.comps.mock->received("lines");
    REQUIRE(got.size() == 3);
    CHECK(got[0].body == Term::atom("done"));
    CHECK(got[1].body == Term::string("free text here"));
    CHECK(got[2].body == parse_term("signal(done)"));
    CHECK(w.bus.dead_letters().empty());
}

TEST_CASE("tcpline listener hands lines to a peer callback") {
    std::mutex mu;
    std::vector<std::string> lines;
    TcpLineListener l("127.0.0.1", 0, [&](const std::string& s) {
        std::lock_guard lock(mu);
        lines.push_back(s);
    });
    l.start();
    CHECK(l.port() != 0);
    send_line("127.0.0.1", l.port(), "done", std::chrono::milliseconds(2000));
    {
        std::lock_guard lock(mu);
        CHECK(lines == std::vector<std::string>{"done"});
    }
    // a second listener on the same port cannot bind
    TcpLineListener clash("127.0.0.1", l.port(), [](const std::string&) {});
    CHECK(code_of([&] { clash.start(); }) == Errc::BindFailure);
    auto port = l.port();
    l.stop();
    CHECK(code_of([&] { send_line("127.0.0.1", port, "x"); }) == Errc::ConnectionRefused);
    CHECK(code_of([&] { split_host_port("nohost"); }) == Errc::BadParam);
    CHECK(code_of([&] { split_host_port("h:99999"); }) == Errc::BadParam);
}

TEST_CASE("tcpline producer to a closed port is a dead letter") {
    World w;
    auto port = testsupport::free_port();
    w.bus.add_route(route("out", "manual:o", {"tcpline:127.0.0.1:" + std::to_string(port)}));
    w.bus.start();
    w.manual->emit("o", Term::atom("x"));
    w.bus.stop();
    REQUIRE(w.bus.dead_letters().size() == 1);
    CHECK(w.bus.dead_letters()[0].cause == Errc::ConnectionRefused);
}

TEST_CASE("httplite consumer serves its path") {
    World w;
    auto port = testsupport::free_port();
    w.bus.add_route(route("in", "httplite:127.0.0.1:" + std::to_string(port) + "/orders", {"mock:orders"}));
    w.bus.start();
    httplib::Client c("127.0.0.1", port);
    auto r1 = c.Post("/orders", "order(o1,widget)", "text/plain");
    REQUIRE(r1);
    CHECK(r1->status == 200);
    auto r2 = c.Get("/elsewhere");
    REQUIRE(r2);
    CHECK(r2->status == 404);
    REQUIRE(w.bus.await_idle(std::chrono::seconds(5)));
    w.bus.stop();
    auto got = w.comps.mock->received("orders");
    REQUIRE(got.size() == 1);
    CHECK(got[0].body == parse_term("order(o1,widget)"));
    CHECK(*got[0].header("httpMethod") == Term::string("POST"));
    CHECK(*got[0].header("httpPath") == Term::string("/orders"));
}

TEST_CASE("httplite producer: POST, GET with replyTo, status errors") {
    httplib::Server server;
    std::mutex mu;
    std::vector<std::string> posted;
    server.Post("/checkout", [&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mu);
        posted.push_back(req.body);
        res.set_content("confirmed(o1)", "text/plain");
    });
    server.Get("/quotes", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("[quote(a,1)]", "text/plain");
    });
    server.Get("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    World w;
    std::string base = "httplite:127.0.0.1:" + std::to_string(port);
    w.bus.add_route(route("post", "manual:post", {base + "/checkout"}));
    w.bus.add_route(route("get", "manual:get", {base + "/quotes?method=GET&replyTo=direct:reply"}));
    w.bus.add_route(route("reply", "direct:reply", {"mock:reply"}));
    w.bus.add_route(route("bad", "manual:bad", {base + "/broken?method=GET"}));
    w.bus.start();
    w.feed("post", parse_term("order(o1,widget)"));
    w.feed("get", Term::atom("refresh"));
    w.feed("bad", Term::atom("x"));
    w.bus.stop();
    server.stop();
    t.join();

    CHECK(posted == std::vector<std::string>{"order(o1,widget)"});
    auto replies = w.comps.mock->received("reply");
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].body == parse_term("[quote(a,1)]"));
    CHECK(*replies[0].header("httpStatus") == Term::number(200));
    auto dl = w.bus.dead_letters();
    REQUIRE(dl.size() == 1);
    CHECK(dl[0].cause == Errc::HttpStatus);

    World w2;
    w2.bus.add_route(route("r", "manual:a", {base + "/x?method=PUT"}));
    CHECK(code_of([&] { w2.bus.start(); }) == Errc::BadParam);
}

TEST_CASE("httplite producer to a closed port") {
    World w;
    auto port = testsupport::free_port();
    w.bus.add_route(route("r", "manual:a", {"httplite:127.0.0.1:" + std::to_string(port) + "/x"}));
    w.bus.start();
    w.manual->emit("a", Term::atom("x"));
    w.bus.stop();
    REQUIRE(w.bus.dead_letters().size() == 1);
    CHECK(w.bus.dead_letters()[0].cause == Errc::ConnectionRefused);
}

TEST_CASE("chatstub records one row per exchange") {
    auto clock = std::make_shared<SimulatedClock>();
    World w(clock);
    w.bus.add_route(route("chat", "manual:c", {"chatstub:bots/sometoken?chatId=-364531"}));
    w.bus.start();
    clock->advance(1500);
    w.manual->emit("c", parse_term("arriving(o1,0.42)"));
    w.bus.stop();
    auto rows = w.comps.chatstub->transcript().rows();
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == TranscriptRow{"sometoken", "-364531", "arriving(o1,0.42)", 1500});
    CHECK(w.comps.chatstub->transcript().count_for_chat("-364531") == 1);
    CHECK(w.comps.chatstub->transcript().to_jsonl() ==
          "{\"token\":\"sometoken\",\"chatId\":\"-364531\",\"text\":\"arriving(o1,0.42)\",\"ts\":1500}\n");
}

TEST_CASE("chatstub parameter checks") {
    World w;
    w.bus.add_route(route("r", "chatstub:bots/t", {"mock:x"}));
    CHECK(code_of([&] { w.bus.start(); }) == Errc::UnsupportedConsumer);
    World w2;
    w2.bus.add_route(route("r", "manual:a", {"chatstub:bots/t"}));
    CHECK(code_of([&] { w2.bus.start(); }) == Errc::MissingParam);
    World w3;
    w3.bus.add_route(route("r", "manual:a", {"chatstub:bots/?chatId=1"}));
    CHECK(code_of([&] { w3.bus.start(); }) == Errc::MissingParam);
}

TEST_CASE("timer on the simulated clock ticks exactly") {
    auto clock = std::make_shared<SimulatedClock>();
    World w(clock);
    w.bus.add_route(route("t", "timer:beat?periodMs=100", {"mock:beats"}));
    w.bus.start();
    clock->advance(1000);
    REQUIRE(w.bus.await_idle(std::chrono::seconds(5)));
    w.bus.stop();
    clock->advance(1000);
    auto got = w.comps.mock->received("beats");
    REQUIRE(got.size() == 10);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].body == Term::number(double(i)));
    CHECK(*got[0].header("timerName") == Term::string("beat"));
}

TEST_CASE("timer on the wall clock stays in a tolerance band") {
    World w;
    w.bus.add_route(route("t", "timer:beat?periodMs=20", {"mock:beats"}));
    w.bus.start();
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    w.bus.stop();
    auto n = w.comps.mock->count("beats");
    // 15 nominal; allow for a loaded machine
    CHECK(n >= 5);
    CHECK(n <= 16);
}

TEST_CASE("timer parameter checks") {
    World w;
    w.bus.add_route(route("t", "timer:x", {"mock:x"}));
    CHECK(code_of([&] { w.bus.start(); }) == Errc::MissingParam);
    World w2;
    w2.bus.add_route(route("t", "timer:x?periodMs=0", {"mock:x"}));
    CHECK(code_of([&] { w2.bus.start(); }) == Errc::BadParam);
    World w3;
    w3.bus.add_route(route("t", "timer:x?periodMs=abc", {"mock:x"}));
    CHECK(code_of([&] { w3.bus.start(); }) == Errc::BadParam);
}
