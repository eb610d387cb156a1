#include "masbus/acl.hpp"

#include "masbus/error.hpp"

namespace masbus {

std::string_view to_string(Performative p) {
    switch (p) {
        case Performative::tell: return "tell";
        case Performative::untell: return "untell";
        case Performative::achieve: return "achieve";
        case Performative::unachieve: return "unachieve";
        case Performative::askOne: return "askOne";
        case Performative::askAll: return "askAll";
    }
    return "tell";
}

const std::vector<Performative>& all_performatives() {
    static const std::vector<Performative> all{Performative::tell,      Performative::untell,
                                               Performative::achieve,   Performative::unachieve,
                                               Performative::askOne,    Performative::askAll};
    return all;
}

Performative performative_from_string(std::string_view text) {
    for (auto p : all_performatives())
        if (to_string(p) == text) return p;
    throw Error(Errc::UnknownPerformative, "unknown performative '" + std::string(text) + "'");
}

AgentRegistry::AgentRegistry(std::string run_id) : run_id_(std::move(run_id)) {}

void AgentRegistry::register_local(const std::string& name) {
    if (name.empty()) throw Error(Errc::InvalidMessage, "agent name must be non-empty");
    std::lock_guard lock(mu_);
    if (entries_.contains(name)) throw Error(Errc::DuplicateName, "agent '" + name + "' already exists");
    entries_.emplace(name, Entry{});
}

void AgentRegistry::register_dummy(const std::string& name, const std::string& route_id, DummySink sink) {
    if (name.empty()) throw Error(Errc::InvalidMessage, "dummy agent name must be non-empty");
    std::lock_guard lock(mu_);
    if (entries_.contains(name)) throw Error(Errc::DuplicateName, "agent '" + name + "' already exists");
    Entry e;
    e.kind = AgentKind::dummy;
    e.route_id = route_id;
    e.sink = std::move(sink);
    entries_.emplace(name, std::move(e));
}

void AgentRegistry::unregister_dummy(const std::string& name) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(name);
    if (it != entries_.end() && it->second.kind == AgentKind::dummy) entries_.erase(it);
}

DeliveryOutcome AgentRegistry::send_message(AclMessage m) {
    if (m.sender.empty() || m.receiver.empty())
        throw Error(Errc::InvalidMessage, "sender and receiver must be non-empty");
    if (m.msg_id.empty()) m.msg_id = next_msg_id();

    DummySink sink;
    std::function<void(const std::string&)> listener;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(m.receiver);
        if (it == entries_.end()) throw Error(Errc::UnknownReceiver, "no agent named '" + m.receiver + "'");
        if (it->second.kind == AgentKind::local) {
            it->second.mailbox.push_back(m);
            ++counters_.sent_local;
            ++counters_.enqueued;
            listener = listener_;
        } else {
            sink = it->second.sink;
            ++counters_.sent_routed;
        }
    }
    if (sink) {
        sink(m);
        return DeliveryOutcome::routed;
    }
    if (listener) listener(m.receiver);
    return DeliveryOutcome::local;
}

std::optional<AclMessage> AgentRegistry::receive(const std::string& agent) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(agent);
    if (it == entries_.end()) throw Error(Errc::UnknownAgent, "no agent named '" + agent + "'");
    if (it->second.kind != AgentKind::local) throw Error(Errc::NotLocalAgent, "'" + agent + "' is a dummy agent");
    auto& box = it->second.mailbox;
    if (box.empty()) return std::nullopt;
    AclMessage m = std::move(box.front());
    box.pop_front();
    return m;
}

bool AgentRegistry::contains(const std::string& name) const {
    std::lock_guard lock(mu_);
    return entries_.contains(name);
}

std::optional<AgentKind> AgentRegistry::kind(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(name);
    if (it == entries_.end()) return std::nullopt;
    return it->second.kind;
}

std::optional<std::string> AgentRegistry::bound_route(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(name);
    if (it == entries_.end() || it->second.kind != AgentKind::dummy) return std::nullopt;
    return it->second.route_id;
}

std::size_t AgentRegistry::mailbox_size(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(Errc::UnknownAgent, "no agent named '" + name + "'");
    return it->second.mailbox.size();
}

std::vector<std::string> AgentRegistry::local_agents() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_)
        if (e.kind == AgentKind::local) out.push_back(name);
    return out;
}

std::vector<std::string> AgentRegistry::dummy_agents() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_)
        if (e.kind == AgentKind::dummy) out.push_back(name);
    return out;
}

std::string AgentRegistry::next_msg_id() { return run_id_ + "-msg-" + std::to_string(next_id_.fetch_add(1)); }

void AgentRegistry::set_mailbox_listener(std::function<void(const std::string&)> fn) {
    std::lock_guard lock(mu_);
    listener_ = std::move(fn);
}

AgentRegistry::Counters AgentRegistry::counters() const {
    std::lock_guard lock(mu_);
    return counters_;
}

}  // namespace masbus
