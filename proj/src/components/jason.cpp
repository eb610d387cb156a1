#include "masbus/components/jason.hpp"

namespace masbus {

Headers acl_headers(const AclMessage& m) {
    Headers h;
    h.emplace(jason_headers::performative, Term::atom(std::string(to_string(m.performative))));
    h.emplace(jason_headers::sender, Term::atom(m.sender));
    h.emplace(jason_headers::receiver, Term::atom(m.receiver));
    h.emplace(jason_headers::msg_id, Term::string(m.msg_id));
    if (m.in_reply_to) h.emplace(jason_headers::in_reply_to, Term::string(*m.in_reply_to));
    return h;
}

namespace {

class JasonConsumer final : public Consumer {
public:
    JasonConsumer(AgentRegistry& registry, std::string dummy, RouteContext& route)
        : registry_(registry), dummy_(std::move(dummy)), route_(route) {}

    ~JasonConsumer() override { stop(); }

    void start() override {
        registry_.register_dummy(dummy_, route_.route_id(), [&route = route_](const AclMessage& m) {
            route.submit(route.make_exchange(acl_headers(m), m.content));
        });
        registered_ = true;
    }

    void stop() override {
        if (!registered_) return;
        registry_.unregister_dummy(dummy_);
        registered_ = false;
    }

private:
    AgentRegistry& registry_;
    std::string dummy_;
    RouteContext& route_;
    bool registered_ = false;
};

class JasonProducer final : public Producer {
public:
    JasonProducer(AgentRegistry& registry, std::string target, Performative default_performative,
                  std::string sender_alias)
        : registry_(registry),
          target_(std::move(target)),
          default_performative_(default_performative),
          sender_alias_(std::move(sender_alias)) {}

    void deliver(const Exchange& ex) override {
        AclMessage m;
        m.receiver = target_;
        m.performative = default_performative_;
        if (const Term* p = ex.header(jason_headers::performative)) m.performative = performative_from_string(p->text());
        m.sender = sender_alias_;
        if (const Term* s = ex.header(jason_headers::sender)) m.sender = s->text();
        if (const Term* r = ex.header(jason_headers::in_reply_to)) m.in_reply_to = r->text();
        m.content = ex.body;
        registry_.send_message(std::move(m));
    }

private:
    AgentRegistry& registry_;
    std::string target_;
    Performative default_performative_;
    std::string sender_alias_;
};

}  // namespace

std::unique_ptr<Consumer> JasonComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    if (uri.path.empty()) throw Error(Errc::MissingParam, "jason consumer needs a dummy agent name");
    return std::make_unique<JasonConsumer>(registry_, uri.path, route);
}

std::unique_ptr<Producer> JasonComponent::create_producer(const EndpointUri& uri, RouteContext& route) {
    if (uri.path.empty()) throw Error(Errc::MissingParam, "jason producer needs a target agent name");
    Performative p = performative_from_string(uri.param_or("performative", "tell"));
    std::string alias = uri.param_or("sender", "");
    if (alias.empty()) alias = route.from().path.empty() ? route.from().scheme : route.from().path;
    return std::make_unique<JasonProducer>(registry_, uri.path, p, std::move(alias));
}

}  // namespace masbus
