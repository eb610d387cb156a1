#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "masbus/term.hpp"

namespace masbus {

/// KQML-style performatives. `tell` is the analogue of FIPA inform (the
/// receiver should believe the content) and `achieve` of FIPA request (the
/// receiver should adopt the content as a goal).
enum class Performative { tell, untell, achieve, unachieve, askOne, askAll };

std::string_view to_string(Performative p);
/// Throws Error{UnknownPerformative}.
Performative performative_from_string(std::string_view text);
const std::vector<Performative>& all_performatives();

struct AclMessage {
    std::string msg_id;
    std::string sender;
    std::string receiver;
    Performative performative = Performative::tell;
    Term content;
    std::optional<std::string> in_reply_to;

    friend bool operator==(const AclMessage&, const AclMessage&) = default;
};

enum class AgentKind { local, dummy };
enum class DeliveryOutcome { local, routed };

/// Name directory for local agents (with mailboxes) and dummy agents (bound
/// to a route consumer). Sending is local-first: a dummy is only reached when
/// the receiver is not a local agent, and the two are never both present
/// under one name.
class AgentRegistry {
public:
    using DummySink = std::function<void(const AclMessage&)>;

    explicit AgentRegistry(std::string run_id = "run");

    void register_local(const std::string& name);
    void register_dummy(const std::string& name, const std::string& route_id, DummySink sink);
    void unregister_dummy(const std::string& name);

    /// Fills in msg_id when empty. Throws Error{UnknownReceiver} or
    /// Error{InvalidMessage}.
    DeliveryOutcome send_message(AclMessage m);

    /// Oldest message or nullopt. Throws UnknownAgent / NotLocalAgent.
    std::optional<AclMessage> receive(const std::string& agent);

    bool contains(const std::string& name) const;
    std::optional<AgentKind> kind(const std::string& name) const;
    std::optional<std::string> bound_route(const std::string& name) const;
    std::size_t mailbox_size(const std::string& name) const;
    std::vector<std::string> local_agents() const;
    std::vector<std::string> dummy_agents() const;

    std::string next_msg_id();

    /// Called (outside the registry lock) after a message lands in a mailbox.
    void set_mailbox_listener(std::function<void(const std::string&)> fn);

    struct Counters {
        std::uint64_t sent_local = 0;
        std::uint64_t enqueued = 0;
        std::uint64_t sent_routed = 0;
    };
    Counters counters() const;

private:
    struct Entry {
        AgentKind kind = AgentKind::local;
        std::deque<AclMessage> mailbox;
        std::string route_id;
        DummySink sink;
    };

    std::string run_id_;
    mutable std::mutex mu_;
    std::map<std::string, Entry> entries_;
    std::atomic<std::uint64_t> next_id_{1};
    Counters counters_;
    std::function<void(const std::string&)> listener_;
};

}  // namespace masbus
