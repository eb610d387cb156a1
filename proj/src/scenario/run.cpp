#include <httplib.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "masbus/agents.hpp"
#include "masbus/artifacts.hpp"
#include "masbus/components.hpp"
#include "masbus/net.hpp"
#include "masbus/route_config.hpp"
#include "masbus/scenario.hpp"

namespace masbus {

namespace {

constexpr const char* kProduction = "production_agent";
constexpr const char* kDistribution = "distribution_agent";
constexpr const char* kDelivery = "delivery_agent";
constexpr const char* kCustomer = "DummyCustomerAgent";
constexpr const char* kBrokerHost = "tcp://broker";
constexpr const char* kTrackTopic = "latLong";

using Clock_ = std::chrono::steady_clock;

Term waypoint_term(const LatLon& w) { return Term::list({Term::number(w.lat), Term::number(w.lon)}); }

// artifacts

ArtifactTemplate plc_template() {
    ArtifactTemplate t;
    t.properties["status"] = Term::atom("idle");
    t.operations["signal"] = [](std::span<const Term> params, OpContext&) {
        if (params.size() != 1) return OpResult::failed(Term::atom("bad_arguments"));
        OpResult r;
        r.property_updates["status"] = params[0];
        return r;
    };
    return t;
}

ArtifactTemplate erp_template() {
    ArtifactTemplate t;
    t.properties["checkout"] = Term::atom("none");
    t.operations["checkout"] = [](std::span<const Term> params, OpContext&) {
        if (params.size() != 1) return OpResult::failed(Term::atom("bad_arguments"));
        OpResult r;
        r.outbound.push_back({{}, params[0]});
        return r;
    };
    t.operations["confirm"] = [](std::span<const Term> params, OpContext&) {
        if (params.size() != 1) return OpResult::failed(Term::atom("bad_arguments"));
        OpResult r;
        r.property_updates["checkout"] = params[0];
        return r;
    };
    return t;
}

ArtifactTemplate quotes_template() {
    ArtifactTemplate t;
    t.properties["offers"] = Term::list({});
    t.operations["refresh"] = [](std::span<const Term>, OpContext&) {
        OpResult r;
        r.outbound.push_back({{}, Term::atom("refresh")});
        return r;
    };
    // the reply body is a list of quote(Name, Price); the artifact producer
    // spreads it over the parameters
    t.operations["update"] = [](std::span<const Term> params, OpContext&) {
        for (const auto& q : params)
            if (!q.is_structure() || q.name() != "quote" || q.arity() != 2 || !q.items()[1].is_number())
                return OpResult::failed(Term::atom("bad_quote"));
        OpResult r;
        r.property_updates["offers"] = Term::list({params.begin(), params.end()});
        return r;
    };
    return t;
}

// agents

bool is_property(const Percept& p, const char* artifact, const char* name) {
    return p.kind == Percept::Kind::property_changed && p.artifact == artifact && p.name == name;
}

AgentBehavior production_behavior(const std::string& product) {
    AgentBehavior b;
    b.initial = {focus("plc"), focus("erp")};
    b.on_percept = [product](AgentContext& ctx, const Percept& p) -> std::vector<Effect> {
        if (is_property(p, "plc", "status") && p.value == Term::atom("done") && !ctx.believes("finished")) {
            Term order = Term::structure("order", {Term::atom("o1"), Term::atom(product)});
            ctx.beliefs["finished"] = order;
            return {log(Term::structure("stage", {Term::atom("i")})), artifact_op("erp", "checkout", {order})};
        }
        if (is_property(p, "erp", "checkout") && p.value != Term::atom("none") && !ctx.believes("checked_out")) {
            ctx.beliefs["checked_out"] = p.value;
            return {log(Term::structure("stage", {Term::atom("ii")})),
                    send(kDistribution, Performative::achieve, Term::structure("hire_freight", {Term::atom("o1")}))};
        }
        return {};
    };
    return b;
}

AgentBehavior distribution_behavior() {
    AgentBehavior b;
    b.on_message = [](AgentContext& ctx, const AclMessage& m) -> std::vector<Effect> {
        if (m.performative != Performative::achieve || !m.content.is_structure() || m.content.name() != "hire_freight")
            return {};
        ctx.beliefs["order"] = m.content.items()[0];
        return {focus("quotes"), artifact_op("quotes", "refresh")};
    };
    b.on_percept = [](AgentContext& ctx, const Percept& p) -> std::vector<Effect> {
        if (!is_property(p, "quotes", "offers") || p.value.items().empty() || ctx.believes("hired")) return {};
        if (!ctx.believes("order")) return {};
        const Term* best = nullptr;
        for (const auto& q : p.value.items()) {
            if (!best) {
                best = &q;
                continue;
            }
            double price = q.items()[1].as_number(), best_price = best->items()[1].as_number();
            if (price < best_price || (price == best_price && q.items()[0].text() < best->items()[0].text()))
                best = &q;
        }
        std::string winner = best->items()[0].text();
        Term order = ctx.beliefs.at("order");
        ctx.beliefs["hired"] = *best;
        return {send(winner, Performative::tell, Term::structure("hired", {order})),
                log(Term::structure("winner", {Term::atom(winner), best->items()[1]})),
                log(Term::structure("stage", {Term::atom("iii")})),
                send(kDelivery, Performative::achieve, Term::structure("track", {order}))};
    };
    return b;
}

AgentBehavior delivery_behavior() {
    AgentBehavior b;
    b.on_message = [](AgentContext& ctx, const AclMessage& m) -> std::vector<Effect> {
        if (m.performative != Performative::achieve || !m.content.is_structure() || m.content.name() != "track")
            return {};
        ctx.beliefs["order"] = m.content.items()[0];
        return {focus("TrackedArtifact"), log(Term::structure("tracking", {m.content.items()[0]}))};
    };
    b.on_percept = [](AgentContext& ctx, const Percept& p) -> std::vector<Effect> {
        std::vector<Effect> out;
        if (is_property(p, "TrackedArtifact", "distanceKm") && !ctx.believes("moving")) {
            ctx.beliefs["moving"] = p.value;
            out.push_back(log(Term::structure("stage", {Term::atom("iv")})));
        }
        if (p.kind == Percept::Kind::signal && p.artifact == "TrackedArtifact" && p.name == "near_destination" &&
            !ctx.believes("notified")) {
            ctx.beliefs["notified"] = p.value;
            Term order = ctx.believes("order") ? ctx.beliefs.at("order") : Term::atom("unknown");
            out.push_back(log(Term::structure("near", {p.value})));
            out.push_back(send(kCustomer, Performative::tell, Term::structure("arriving", {order, p.value})));
        }
        return out;
    };
    return b;
}

// external stubs

// ERP and supplier-quote service behind one HTTP server.
class EnterpriseStub {
public:
    explicit EnterpriseStub(const std::vector<SupplierQuote>& quotes) {
        std::vector<Term> items;
        for (const auto& q : quotes)
            items.push_back(Term::structure("quote", {Term::atom(q.name), Term::number(q.price)}));
        quotes_body_ = render_term(Term::list(items));
        server_.Post("/checkout", [this](const httplib::Request& req, httplib::Response& res) {
            std::size_t n;
            {
                std::lock_guard lock(mu_);
                checkouts_.push_back(req.body);
                n = checkouts_.size();
            }
            Term order = parse_or_string(req.body);
            res.set_content(render_term(Term::structure("confirmed", {order, Term::number(static_cast<double>(n))})),
                            "text/plain");
        });
        server_.Get("/quotes", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(quotes_body_, "text/plain");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw Error(Errc::BindFailure, "enterprise stub cannot bind");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~EnterpriseStub() { stop(); }

    void stop() {
        if (!thread_.joinable()) return;
        server_.stop();
        thread_.join();
    }

    int port() const { return port_; }

    std::vector<std::string> checkouts() const {
        std::lock_guard lock(mu_);
        return checkouts_;
    }

private:
    httplib::Server server_;
    std::string quotes_body_;
    int port_ = 0;
    std::thread thread_;
    mutable std::mutex mu_;
    std::vector<std::string> checkouts_;
};

// Publishes one waypoint per clock tick once armed.
class TrackerStub {
public:
    TrackerStub(std::shared_ptr<Broker> broker, std::vector<LatLon> waypoints, Clock& clock, std::int64_t period)
        : broker_(std::move(broker)), waypoints_(std::move(waypoints)), clock_(clock), period_(period) {}

    ~TrackerStub() { stop(); }

    void arm() {
        std::lock_guard lock(mu_);
        if (timer_) return;
        timer_ = clock_.schedule_every(period_, [this](std::int64_t tick) {
            if (tick < 0 || static_cast<std::size_t>(tick) >= waypoints_.size()) return;
            broker_->publish(kTrackTopic, render_term(waypoint_term(waypoints_[static_cast<std::size_t>(tick)])));
            published_.fetch_add(1);
        });
    }

    void stop() {
        std::optional<Clock::TimerId> t;
        {
            std::lock_guard lock(mu_);
            t.swap(timer_);
        }
        if (t) clock_.cancel(*t);
    }

    std::size_t published() const { return published_.load(); }
    bool exhausted() const { return published_.load() >= waypoints_.size(); }

private:
    std::shared_ptr<Broker> broker_;
    std::vector<LatLon> waypoints_;
    Clock& clock_;
    std::int64_t period_;
    std::mutex mu_;
    std::optional<Clock::TimerId> timer_;
    std::atomic<std::size_t> published_{0};
};

std::uint16_t free_port() {
    // bind-then-release; the listener rebinds it right after with SO_REUSEADDR
    TcpLineListener probe("127.0.0.1", 0, [](const std::string&) {});
    probe.start();
    std::uint16_t p = probe.port();
    probe.stop();
    return p;
}

// Collects stage stamps from agent logs and the transcript.
class StageRecorder {
public:
    StageRecorder(Clock& clock, Clock_::time_point start) : clock_(clock), start_(start) {}

    void stamp(const std::string& stage) {
        {
            std::lock_guard lock(mu_);
            for (const auto& s : stages_)
                if (s.stage == stage) return;
            auto elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock_::now() - start_).count();
            stages_.push_back({stage, ++seq_, clock_.now_ms(), elapsed});
        }
        cv_.notify_all();
    }

    std::uint64_t event() {
        std::lock_guard lock(mu_);
        return ++seq_;
    }

    void set_near(std::uint64_t seq, double distance) {
        std::lock_guard lock(mu_);
        near_seq_ = seq;
        near_distance_ = distance;
    }

    void note_tracking() {
        {
            std::lock_guard lock(mu_);
            tracking_ = true;
        }
        cv_.notify_all();
    }

    bool tracking() const {
        std::lock_guard lock(mu_);
        return tracking_;
    }

    std::size_t count() const {
        std::lock_guard lock(mu_);
        return stages_.size();
    }

    /// Wall-clock wait used in real-time mode.
    bool wait_for_count(std::size_t n, std::chrono::milliseconds timeout) {
        std::unique_lock lock(mu_);
        return cv_.wait_for(lock, timeout, [&] { return stages_.size() >= n; });
    }

    void fill(ScenarioReport& r) const {
        std::lock_guard lock(mu_);
        r.stages = stages_;
        r.near_signal_seq = near_seq_;
        r.near_signal_distance_km = near_distance_;
    }

private:
    Clock& clock_;
    Clock_::time_point start_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::vector<StageStamp> stages_;
    std::uint64_t seq_ = 0;
    std::optional<std::uint64_t> near_seq_;
    std::optional<double> near_distance_;
    bool tracking_ = false;
};

const char* kStageNames[] = {"i", "ii", "iii", "iv", "v"};

std::string customer_routes_xml(const ScenarioConfig& cfg) {
    return "<routes>\n"
           "  <aliases>\n"
           "    <alias scheme=\"telegram\" component=\"chatstub\"/>\n"
           "  </aliases>\n"
           "  <route id=\"customer_chat\">\n"
           "    <from uri=\"jason:DummyCustomerAgent\"/>\n"
           "    <to uri=\"telegram:bots/" + cfg.chat_token + "?chatId=" + cfg.chat_id + "\"/>\n"
           "  </route>\n"
           "</routes>\n";
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg, ScenarioOptions options) {
    validate_config(cfg);
    const auto started = Clock_::now();

    std::shared_ptr<Clock> clock;
    std::shared_ptr<SimulatedClock> sim;
    if (options.simulated_time) {
        sim = std::make_shared<SimulatedClock>();
        clock = sim;
    } else {
        clock = std::make_shared<WallClock>();
    }
    const std::string run_id = "run" + std::to_string(cfg.seed);

    AgentRegistry registry(run_id);
    Environment env;
    env.create_artifact(env.default_workspace(), "plc", plc_template());
    env.create_artifact(env.default_workspace(), "erp", erp_template());
    env.create_artifact(env.default_workspace(), "quotes", quotes_template());
    env.create_artifact(env.default_workspace(), "TrackedArtifact",
                        tracker_template(cfg.destination.lat, cfg.destination.lon, cfg.near_threshold_km));

    BusOptions bus_options;
    bus_options.run_id = run_id;
    bus_options.clock = clock;
    Bus bus(bus_options);
    StandardComponents comps = install_standard_components(bus, registry, env);

    EnterpriseStub enterprise(cfg.supplier_quotes);
    const std::uint16_t plc_port = free_port();
    const std::string erp_base = "httplite:127.0.0.1:" + std::to_string(enterprise.port());

    // customer notification, declared as a route file
    RouteFile customer = parse_routes_xml(customer_routes_xml(cfg), "customer_chat.xml");
    AliasTable aliases = customer.aliases;
    aliases.add("mqtt", "mqttlite");
    apply_aliases(bus, aliases);
    for (auto& r : customer.routes) bus.add_route(r);

    // shipment tracking, built in code
    bus.add_route(RouteBuilder("tracking")
                      .from("mqtt : foo? host=tcp://broker & subscribeTopicName=latLong")
                      .set_header("ArtifactName", constant("TrackedArtifact"))
                      .set_header("OperationName", constant("giveDistance"))
                      .to("artifact : cartago")
                      .build());

    bus.add_route(RouteBuilder("plc_in")
                      .from("tcpline:127.0.0.1:" + std::to_string(plc_port))
                      .set_header("ArtifactName", constant("plc"))
                      .set_header("OperationName", constant("signal"))
                      .to("artifact:cartago")
                      .build());
    bus.add_route(RouteBuilder("erp_out")
                      .from("artifact:cartago?artifactName=erp")
                      .to(erp_base + "/checkout?method=POST&replyTo=direct:erp_reply")
                      .to("mock:erp_log")
                      .build());
    bus.add_route(RouteBuilder("erp_reply")
                      .from("direct:erp_reply")
                      .set_header("ArtifactName", constant("erp"))
                      .set_header("OperationName", constant("confirm"))
                      .to("artifact:cartago")
                      .build());
    bus.add_route(RouteBuilder("quotes_out")
                      .from("artifact:cartago?artifactName=quotes")
                      .to(erp_base + "/quotes?method=GET&replyTo=direct:quotes_reply")
                      .build());
    bus.add_route(RouteBuilder("quotes_reply")
                      .from("direct:quotes_reply")
                      .set_header("ArtifactName", constant("quotes"))
                      .set_header("OperationName", constant("update"))
                      .to("artifact:cartago")
                      .build());
    for (const auto& q : cfg.supplier_quotes)
        bus.add_route(RouteBuilder("hire_" + q.name)
                          .from("jason:" + q.name)
                          .to("chatstub:bots/freight?chatId=" + q.name)
                          .to("mock:hire")
                          .build());

    StageRecorder recorder(*clock, started);
    TrackerStub tracker(comps.mqttlite->broker(kBrokerHost), cfg.track_waypoints, *clock, cfg.tick_period_ms);

    comps.chatstub->transcript().set_listener([&](const TranscriptRow& row) {
        if (row.chat_id == cfg.chat_id) recorder.stamp("v");
    });

    AgentRuntime runtime(registry, env, clock);
    runtime.set_log_listener([&](const AgentLogEntry& e) {
        const Term& t = e.entry;
        if (t.is_structure() && t.name() == "stage" && t.arity() == 1) {
            recorder.stamp(t.items()[0].text());
        } else if (t.is_structure() && t.name() == "tracking") {
            recorder.note_tracking();
            tracker.arm();
        } else if (t.is_structure() && t.name() == "near" && t.arity() == 1 && t.items()[0].is_number()) {
            recorder.set_near(recorder.event(), t.items()[0].as_number());
        }
    });

    bus.start();
    runtime.spawn(kProduction, production_behavior(cfg.product));
    runtime.spawn(kDistribution, distribution_behavior());
    runtime.spawn(kDelivery, delivery_behavior());

    auto settle = [&] {
        for (;;) {
            std::size_t handled = runtime.run_pending();
            bus.await_idle(std::chrono::seconds(10));
            if (handled == 0 && runtime.run_pending() == 0) return;
        }
    };

    std::optional<std::string> timed_out;
    std::int64_t waited = 0;
    const auto hard_deadline = started + std::chrono::milliseconds(cfg.stage_timeout_ms) * 6;

    if (sim) {
        settle();
        send_line("127.0.0.1", plc_port, "done", std::chrono::milliseconds(5000));
        settle();
        std::size_t reached = recorder.count();
        std::int64_t since = sim->now_ms();
        while (recorder.count() < 5) {
            if (recorder.count() != reached) {
                reached = recorder.count();
                since = sim->now_ms();
            }
            waited = sim->now_ms() - since;
            if (waited >= cfg.stage_timeout_ms || Clock_::now() > hard_deadline) {
                timed_out = kStageNames[reached];
                break;
            }
            sim->advance(cfg.tick_period_ms);
            settle();
        }
    } else {
        runtime.start();
        send_line("127.0.0.1", plc_port, "done", std::chrono::milliseconds(5000));
        for (std::size_t n = 1; n <= 5; ++n) {
            if (!recorder.wait_for_count(n, std::chrono::milliseconds(cfg.stage_timeout_ms))) {
                timed_out = kStageNames[recorder.count()];
                waited = cfg.stage_timeout_ms;
                break;
            }
        }
        // let in-flight work (later waypoints, hire rows) land before the snapshot
        bus.await_idle(std::chrono::seconds(5));
    }

    tracker.stop();
    if (!sim) runtime.stop();
    bus.stop();
    enterprise.stop();

    ScenarioReport report;
    report.run_id = run_id;
    report.seed = cfg.seed;
    report.simulated_time = options.simulated_time;
    recorder.fill(report);

    for (const auto& ex : comps.mock->received("hire")) {
        AclMessage m;
        auto text = [&](const char* key) {
            const Term* t = ex.header(key);
            return t ? t->text() : std::string();
        };
        m.msg_id = text(jason_headers::msg_id);
        m.sender = text(jason_headers::sender);
        m.receiver = text(jason_headers::receiver);
        m.performative = performative_from_string(text(jason_headers::performative));
        m.content = ex.body;
        if (!report.hire_message) report.hire_message = m;
    }
    if (report.hire_message) {
        report.winner_supplier = report.hire_message->receiver;
        for (const auto& q : cfg.supplier_quotes)
            if (q.name == report.winner_supplier) report.winner_price = q.price;
    }

    report.erp_checkout_requests = enterprise.checkouts();
    if (auto c = env.property(env.default_workspace(), "erp", "checkout"); c && *c != Term::atom("none"))
        report.erp_confirmation = render_term(*c);
    report.chat_transcript = comps.chatstub->transcript().rows();
    for (const auto& d : bus.dead_letters())
        report.dead_letters.push_back({d.route_id, std::string(to_string(d.stage)), std::string(to_string(d.cause)),
                                       d.endpoint, d.message});

    // waypoints must reach the tracker exactly as published, in order
    report.published_waypoints = tracker.published();
    std::vector<std::vector<Term>> calls;
    bool all_ok = true;
    for (const auto& c : env.call_log()) {
        if (c.artifact != "TrackedArtifact" || c.operation != "giveDistance") continue;
        calls.push_back(c.params);
        all_ok = all_ok && c.ok;
        if (c.ok && c.params.size() == 2)
            report.distances_km.push_back(haversine_km(c.params[0].as_number(), c.params[1].as_number(),
                                                       cfg.destination.lat, cfg.destination.lon));
    }
    bool order_ok = all_ok && calls.size() == report.published_waypoints;
    for (std::size_t i = 0; order_ok && i < calls.size(); ++i)
        order_ok = calls[i] == std::vector<Term>{Term::number(cfg.track_waypoints[i].lat),
                                                 Term::number(cfg.track_waypoints[i].lon)};
    report.delivery_order_ok = order_ok;

    for (const auto& e : runtime.log_entries()) report.agent_log.push_back(e.agent + ": " + render_term(e.entry));
    for (const auto& e : runtime.errors())
        report.effect_errors.push_back(e.agent + ": " + std::string(to_string(e.code)) + ": " + e.message);

    if (timed_out) {
        report.timeout_stage = timed_out;
        throw ScenarioTimeout(*timed_out, waited, std::move(report));
    }
    return report;
}

}  // namespace masbus
