#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "masbus/acl.hpp"
#include "masbus/clock.hpp"
#include "masbus/environment.hpp"
#include "masbus/error.hpp"

namespace masbus {

namespace effect {

struct Send {
    std::string receiver;
    Performative performative = Performative::tell;
    Term content;
    std::optional<std::string> in_reply_to;
};

struct ArtifactOp {
    OperationRequest request;  // origin is filled in by the runtime
};

struct Focus {
    std::string workspace;
    std::string artifact;
};

struct Log {
    Term entry;
};

}  // namespace effect

using Effect = std::variant<effect::Send, effect::ArtifactOp, effect::Focus, effect::Log>;

Effect send(std::string receiver, Performative p, Term content);
Effect artifact_op(std::string artifact, std::string operation, std::vector<Term> params = {},
                   std::string workspace = {});
Effect focus(std::string artifact, std::string workspace = {});
Effect log(Term entry);

struct AgentContext {
    const std::string& name;
    std::map<std::string, Term>& beliefs;
    std::int64_t now_ms = 0;

    bool believes(const std::string& key) const { return beliefs.contains(key); }
};

/// A deterministic reactive program standing in for a BDI agent: given the
/// same private beliefs and input it returns the same effects.
struct AgentBehavior {
    std::function<std::vector<Effect>(AgentContext&, const AclMessage&)> on_message;
    std::function<std::vector<Effect>(AgentContext&, const Percept&)> on_percept;
    std::vector<Effect> initial;
};

struct AgentLogEntry {
    std::string agent;
    Term entry;
    std::int64_t at_ms = 0;
};

struct EffectError {
    std::string agent;
    Errc code;
    std::string message;
};

/// Hosts local agents. Each agent processes its inputs (mailbox first, then
/// percepts) one at a time; different agents may run on different threads.
class AgentRuntime {
public:
    AgentRuntime(AgentRegistry& registry, Environment& env, std::shared_ptr<Clock> clock = nullptr);
    ~AgentRuntime();

    AgentRuntime(const AgentRuntime&) = delete;
    AgentRuntime& operator=(const AgentRuntime&) = delete;

    /// Registers a local agent and runs its initial effects. Throws
    /// DuplicateName.
    void spawn(const std::string& name, AgentBehavior behavior);

    /// Handles one pending input of `agent`; false when it had none.
    bool step(const std::string& agent);

    /// Steps every agent (in name order) until none has pending input, on
    /// the calling thread. Returns the number of inputs handled.
    std::size_t run_pending();

    /// One worker thread per agent, woken by mailbox and percept listeners.
    void start();
    void stop();

    std::vector<AgentLogEntry> log_entries() const;
    std::vector<EffectError> errors() const;
    void set_log_listener(std::function<void(const AgentLogEntry&)> fn);
    std::map<std::string, Term> beliefs(const std::string& agent) const;

private:
    struct Agent;

    Agent& agent(const std::string& name) const;
    void execute(Agent& a, const std::vector<Effect>& effects);
    void wake();

    AgentRegistry& registry_;
    Environment& env_;
    std::shared_ptr<Clock> clock_;

    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<Agent>> agents_;
    std::vector<AgentLogEntry> log_;
    std::vector<EffectError> errors_;
    std::function<void(const AgentLogEntry&)> log_listener_;

    std::mutex wake_mu_;
    std::condition_variable wake_cv_;
    std::uint64_t wake_gen_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace masbus
