#include "masbus/agents.hpp"

#include <deque>

namespace masbus {

Effect send(std::string receiver, Performative p, Term content) {
    return effect::Send{std::move(receiver), p, std::move(content), std::nullopt};
}

Effect artifact_op(std::string artifact, std::string operation, std::vector<Term> params, std::string workspace) {
    OperationRequest req;
    req.artifact_name = std::move(artifact);
    req.operation_name = std::move(operation);
    req.params = std::move(params);
    req.workspace = std::move(workspace);
    return effect::ArtifactOp{std::move(req)};
}

Effect focus(std::string artifact, std::string workspace) {
    return effect::Focus{std::move(workspace), std::move(artifact)};
}

Effect log(Term entry) { return effect::Log{std::move(entry)}; }

struct AgentRuntime::Agent {
    std::string name;
    AgentBehavior behavior;
    std::map<std::string, Term> beliefs;
    std::mutex exec_mu;
};

AgentRuntime::AgentRuntime(AgentRegistry& registry, Environment& env, std::shared_ptr<Clock> clock)
    : registry_(registry), env_(env), clock_(std::move(clock)) {
    registry_.set_mailbox_listener([this](const std::string&) { wake(); });
    env_.set_percept_listener([this](const std::string&) { wake(); });
}

AgentRuntime::~AgentRuntime() {
    stop();
    registry_.set_mailbox_listener(nullptr);
    env_.set_percept_listener(nullptr);
}

AgentRuntime::Agent& AgentRuntime::agent(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = agents_.find(name);
    if (it == agents_.end()) throw Error(Errc::UnknownAgent, "no local agent '" + name + "' in runtime");
    return *it->second;
}

void AgentRuntime::spawn(const std::string& name, AgentBehavior behavior) {
    registry_.register_local(name);
    auto a = std::make_unique<Agent>();
    a->name = name;
    a->behavior = std::move(behavior);
    Agent* raw = a.get();
    {
        std::lock_guard lock(mu_);
        agents_.emplace(name, std::move(a));
    }
    std::lock_guard exec(raw->exec_mu);
    execute(*raw, raw->behavior.initial);
}

bool AgentRuntime::step(const std::string& name) {
    Agent& a = agent(name);
    std::lock_guard exec(a.exec_mu);
    std::int64_t now = clock_ ? clock_->now_ms() : 0;
    if (auto msg = registry_.receive(name)) {
        if (a.behavior.on_message) {
            AgentContext ctx{a.name, a.beliefs, now};
            execute(a, a.behavior.on_message(ctx, *msg));
        }
        return true;
    }
    if (auto p = env_.poll_percept(name)) {
        if (a.behavior.on_percept) {
            AgentContext ctx{a.name, a.beliefs, now};
            execute(a, a.behavior.on_percept(ctx, *p));
        }
        return true;
    }
    return false;
}

std::size_t AgentRuntime::run_pending() {
    std::size_t handled = 0;
    for (bool progress = true; progress;) {
        progress = false;
        std::vector<std::string> names;
        {
            std::lock_guard lock(mu_);
            for (const auto& [n, _] : agents_) names.push_back(n);
        }
        for (const auto& n : names) {
            while (step(n)) {
                ++handled;
                progress = true;
            }
        }
    }
    return handled;
}

void AgentRuntime::execute(Agent& a, const std::vector<Effect>& effects) {
    // snapshot percepts from focus are handled after the current batch
    std::deque<std::vector<Effect>> batches{effects};
    auto fail = [&](const Error& e) {
        std::lock_guard lock(mu_);
        errors_.push_back(EffectError{a.name, e.code(), e.what()});
    };
    while (!batches.empty()) {
        std::vector<Effect> batch = std::move(batches.front());
        batches.pop_front();
        for (const auto& eff : batch) {
            if (const auto* s = std::get_if<effect::Send>(&eff)) {
                AclMessage m;
                m.sender = a.name;
                m.receiver = s->receiver;
                m.performative = s->performative;
                m.content = s->content;
                m.in_reply_to = s->in_reply_to;
                try {
                    registry_.send_message(std::move(m));
                } catch (const Error& e) {
                    fail(e);
                }
            } else if (const auto* op = std::get_if<effect::ArtifactOp>(&eff)) {
                OperationRequest req = op->request;
                req.origin = Origin::agent(a.name);
                try {
                    env_.execute_op(req);
                } catch (const Error& e) {
                    fail(e);
                }
            } else if (const auto* f = std::get_if<effect::Focus>(&eff)) {
                std::vector<Percept> snapshot;
                try {
                    snapshot = env_.focus(a.name, f->workspace, f->artifact);
                } catch (const Error& e) {
                    fail(e);
                }
                if (a.behavior.on_percept) {
                    std::int64_t now = clock_ ? clock_->now_ms() : 0;
                    for (const auto& p : snapshot) {
                        AgentContext ctx{a.name, a.beliefs, now};
                        batches.push_back(a.behavior.on_percept(ctx, p));
                    }
                }
            } else if (const auto* l = std::get_if<effect::Log>(&eff)) {
                AgentLogEntry entry{a.name, l->entry, clock_ ? clock_->now_ms() : 0};
                std::function<void(const AgentLogEntry&)> listener;
                {
                    std::lock_guard lock(mu_);
                    log_.push_back(entry);
                    listener = log_listener_;
                }
                if (listener) listener(entry);
            }
        }
    }
}

void AgentRuntime::wake() {
    {
        std::lock_guard lock(wake_mu_);
        ++wake_gen_;
    }
    wake_cv_.notify_all();
}

void AgentRuntime::start() {
    std::vector<std::string> names;
    {
        std::lock_guard lock(mu_);
        for (const auto& [n, _] : agents_) names.push_back(n);
    }
    {
        std::lock_guard lock(wake_mu_);
        if (!workers_.empty()) return;
        stopping_ = false;
    }
    for (const auto& n : names) {
        workers_.emplace_back([this, n] {
            std::uint64_t seen = 0;
            for (;;) {
                {
                    std::unique_lock lock(wake_mu_);
                    wake_cv_.wait(lock, [&] { return stopping_ || wake_gen_ != seen; });
                    if (stopping_) return;
                    seen = wake_gen_;
                }
                while (step(n)) {
                }
            }
        });
    }
    wake();
}

void AgentRuntime::stop() {
    {
        std::lock_guard lock(wake_mu_);
        stopping_ = true;
    }
    wake_cv_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
}

std::vector<AgentLogEntry> AgentRuntime::log_entries() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::vector<EffectError> AgentRuntime::errors() const {
    std::lock_guard lock(mu_);
    return errors_;
}

void AgentRuntime::set_log_listener(std::function<void(const AgentLogEntry&)> fn) {
    std::lock_guard lock(mu_);
    log_listener_ = std::move(fn);
}

std::map<std::string, Term> AgentRuntime::beliefs(const std::string& name) const {
    Agent& a = agent(name);
    std::lock_guard exec(a.exec_mu);
    return a.beliefs;
}

}  // namespace masbus
