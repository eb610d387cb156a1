#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "masbus/exchange.hpp"
#include "masbus/term.hpp"

namespace masbus {

struct Origin {
    enum class Kind { agent, route };
    Kind kind = Kind::agent;
    std::string name;

    static Origin agent(std::string name) { return {Kind::agent, std::move(name)}; }
    static Origin route(std::string route_id) { return {Kind::route, std::move(route_id)}; }

    friend bool operator==(const Origin&, const Origin&) = default;
};

struct OperationRequest {
    std::string artifact_name;
    std::string operation_name;
    std::vector<Term> params;
    Origin origin;
    std::string workspace;  // empty: the default workspace
};

struct Signal {
    std::string label;
    Term payload;
};

struct OutboundPayload {
    Headers headers;
    Term body;
};

struct OpResult {
    bool ok = true;
    Term reason;
    std::map<std::string, Term> property_updates;
    std::vector<Signal> signals;
    std::vector<OutboundPayload> outbound;

    static OpResult success() { return {}; }
    static OpResult failed(Term why) {
        OpResult r;
        r.ok = false;
        r.reason = std::move(why);
        return r;
    }
};

/// What an operation sees of its artifact: the observable properties
/// (read-only; change them through OpResult::property_updates) and private
/// variables it may mutate directly.
struct OpContext {
    const std::map<std::string, Term>& properties;
    std::map<std::string, Term>& vars;

    const Term* property(const std::string& name) const {
        auto it = properties.find(name);
        return it == properties.end() ? nullptr : &it->second;
    }
};

using Operation = std::function<OpResult(std::span<const Term> params, OpContext& ctx)>;

struct ArtifactTemplate {
    std::map<std::string, Term> properties;
    std::map<std::string, Term> vars;
    std::map<std::string, Operation> operations;
};

struct Percept {
    enum class Kind { property_changed, signal, op_failed };

    std::string agent;
    std::string artifact;
    Kind kind = Kind::property_changed;
    std::string name;  // property, signal label, or failed operation
    std::optional<Term> old_value;
    Term value;  // new value, signal payload, or failure reason
    std::uint64_t seq = 0;
};

struct CallRecord {
    std::string workspace;
    std::string artifact;
    std::string operation;
    std::vector<Term> params;
    Origin origin;
    bool ok = true;
};

/// Workspaces of artifacts. Operations on one artifact are serialised;
/// different artifacts run concurrently. Percepts are pushed into per-agent
/// queues which the agents poll.
class Environment {
public:
    explicit Environment(std::string default_workspace = "main");
    ~Environment();

    const std::string& default_workspace() const { return default_workspace_; }

    void create_workspace(const std::string& name);
    void create_artifact(const std::string& workspace, const std::string& name, ArtifactTemplate tmpl);
    bool has_workspace(const std::string& name) const;
    bool has_artifact(const std::string& workspace, const std::string& name) const;

    /// Adds `agent` to the observers and returns one snapshot percept per
    /// current property (old value absent).
    std::vector<Percept> focus(const std::string& agent, const std::string& workspace, const std::string& artifact);
    void stop_focus(const std::string& agent, const std::string& workspace, const std::string& artifact);
    std::set<std::string> observers(const std::string& workspace, const std::string& artifact) const;

    /// Throws UnknownWorkspace / UnknownArtifact / UnknownOperation /
    /// OperationFailed. Failures for agent-originated requests are also
    /// pushed to the agent as an op_failed percept.
    OpResult execute_op(const OperationRequest& req);

    void artifact_send(const std::string& workspace, const std::string& artifact, Headers headers, Term body);
    /// Payloads queued before attaching are handed over immediately, in order.
    void attach_outbox(const std::string& workspace, const std::string& artifact,
                       std::function<void(OutboundPayload)> consumer);
    void detach_outbox(const std::string& workspace, const std::string& artifact);
    std::size_t outbox_size(const std::string& workspace, const std::string& artifact) const;

    std::optional<Term> property(const std::string& workspace, const std::string& artifact,
                                 const std::string& name) const;

    std::optional<Percept> poll_percept(const std::string& agent);
    std::vector<Percept> drain_percepts(const std::string& agent);
    std::size_t pending_percepts(const std::string& agent) const;
    void set_percept_listener(std::function<void(const std::string&)> fn);

    std::vector<CallRecord> call_log() const;

private:
    struct Artifact;
    Artifact& find(const std::string& workspace, const std::string& artifact) const;
    std::uint64_t push_percept(Percept p);
    void notify(const std::set<std::string>& agents);

    std::string default_workspace_;
    mutable std::shared_mutex ws_mu_;
    std::map<std::string, std::map<std::string, std::unique_ptr<Artifact>>> workspaces_;

    mutable std::mutex percept_mu_;
    std::map<std::string, std::deque<Percept>> percepts_;
    std::map<std::string, std::uint64_t> percept_seq_;
    std::function<void(const std::string&)> percept_listener_;

    mutable std::mutex log_mu_;
    std::vector<CallRecord> call_log_;
};

}  // namespace masbus
