#pragma once

#include "masbus/acl.hpp"
#include "masbus/bus.hpp"

namespace masbus {

/// Header keys the jason component reads and writes.
namespace jason_headers {
inline constexpr const char* performative = "performative";
inline constexpr const char* sender = "sender";
inline constexpr const char* receiver = "receiver";
inline constexpr const char* msg_id = "msgId";
inline constexpr const char* in_reply_to = "inReplyTo";
}  // namespace jason_headers

/// Bridges ACL messages and exchanges.
///
/// Consumer `jason:<Dummy>`: registers the dummy agent `<Dummy>` while the
/// route runs; every message sent to it becomes an exchange whose body is the
/// message content and whose headers carry performative, sender, receiver and
/// msgId.
///
/// Producer `jason:<agent>[?performative=P][&sender=S]`: turns the exchange
/// into an ACL message for `<agent>`. Header values win over URI params; the
/// performative defaults to tell and the sender to the route's inbound
/// endpoint name.
class JasonComponent final : public Component {
public:
    explicit JasonComponent(AgentRegistry& registry) : registry_(registry) {}

    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;

private:
    AgentRegistry& registry_;
};

/// Exchange layout produced by the jason consumer for `m`.
Headers acl_headers(const AclMessage& m);

}  // namespace masbus
