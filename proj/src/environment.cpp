#include "masbus/environment.hpp"

#include "masbus/error.hpp"

namespace masbus {

struct Environment::Artifact {
    std::string name;
    std::mutex mu;  // serialises operations and guards the fields below
    std::map<std::string, Term> properties;
    std::map<std::string, Term> vars;
    std::map<std::string, Operation> operations;
    std::set<std::string> observers;

    std::mutex outbox_mu;
    std::deque<OutboundPayload> outbox;
    std::function<void(OutboundPayload)> outbox_consumer;

    void flush_outbox_locked() {
        while (outbox_consumer && !outbox.empty()) {
            OutboundPayload p = std::move(outbox.front());
            outbox.pop_front();
            outbox_consumer(std::move(p));
        }
    }
};

Environment::Environment(std::string default_workspace) : default_workspace_(std::move(default_workspace)) {
    workspaces_[default_workspace_];
}

Environment::~Environment() = default;

void Environment::create_workspace(const std::string& name) {
    if (name.empty()) throw Error(Errc::DuplicateName, "workspace name must be non-empty");
    std::unique_lock lock(ws_mu_);
    if (workspaces_.contains(name)) throw Error(Errc::DuplicateName, "workspace '" + name + "' already exists");
    workspaces_[name];
}

void Environment::create_artifact(const std::string& workspace, const std::string& name, ArtifactTemplate tmpl) {
    if (name.empty()) throw Error(Errc::DuplicateName, "artifact name must be non-empty");
    std::unique_lock lock(ws_mu_);
    auto ws = workspaces_.find(workspace.empty() ? default_workspace_ : workspace);
    if (ws == workspaces_.end()) throw Error(Errc::UnknownWorkspace, "no workspace '" + workspace + "'");
    if (ws->second.contains(name))
        throw Error(Errc::DuplicateName, "artifact '" + name + "' already exists in '" + ws->first + "'");
    auto a = std::make_unique<Artifact>();
    a->name = name;
    a->properties = std::move(tmpl.properties);
    a->vars = std::move(tmpl.vars);
    a->operations = std::move(tmpl.operations);
    ws->second.emplace(name, std::move(a));
}

bool Environment::has_workspace(const std::string& name) const {
    std::shared_lock lock(ws_mu_);
    return workspaces_.contains(name);
}

bool Environment::has_artifact(const std::string& workspace, const std::string& name) const {
    std::shared_lock lock(ws_mu_);
    auto ws = workspaces_.find(workspace.empty() ? default_workspace_ : workspace);
    return ws != workspaces_.end() && ws->second.contains(name);
}

Environment::Artifact& Environment::find(const std::string& workspace, const std::string& artifact) const {
    std::shared_lock lock(ws_mu_);
    const std::string& ws_name = workspace.empty() ? default_workspace_ : workspace;
    auto ws = workspaces_.find(ws_name);
    if (ws == workspaces_.end()) throw Error(Errc::UnknownWorkspace, "no workspace '" + ws_name + "'");
    auto it = ws->second.find(artifact);
    if (it == ws->second.end())
        throw Error(Errc::UnknownArtifact, "no artifact '" + artifact + "' in '" + ws_name + "'");
    return *it->second;
}

std::vector<Percept> Environment::focus(const std::string& agent, const std::string& workspace,
                                        const std::string& artifact) {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.mu);
    a.observers.insert(agent);
    std::vector<Percept> snapshot;
    std::lock_guard plock(percept_mu_);
    for (const auto& [prop, value] : a.properties) {
        Percept p;
        p.agent = agent;
        p.artifact = a.name;
        p.kind = Percept::Kind::property_changed;
        p.name = prop;
        p.value = value;
        p.seq = ++percept_seq_[agent];
        snapshot.push_back(std::move(p));
    }
    return snapshot;
}

void Environment::stop_focus(const std::string& agent, const std::string& workspace, const std::string& artifact) {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.mu);
    a.observers.erase(agent);
}

std::set<std::string> Environment::observers(const std::string& workspace, const std::string& artifact) const {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.mu);
    return a.observers;
}

std::uint64_t Environment::push_percept(Percept p) {
    std::lock_guard lock(percept_mu_);
    p.seq = ++percept_seq_[p.agent];
    auto seq = p.seq;
    percepts_[p.agent].push_back(std::move(p));
    return seq;
}

void Environment::notify(const std::set<std::string>& agents) {
    std::function<void(const std::string&)> listener;
    {
        std::lock_guard lock(percept_mu_);
        listener = percept_listener_;
    }
    if (!listener) return;
    for (const auto& a : agents) listener(a);
}

OpResult Environment::execute_op(const OperationRequest& req) {
    auto fail_to_origin = [&](const Error& err, const Term& reason) {
        {
            std::lock_guard lock(log_mu_);
            call_log_.push_back(CallRecord{req.workspace.empty() ? default_workspace_ : req.workspace,
                                           req.artifact_name, req.operation_name, req.params, req.origin, false});
        }
        if (req.origin.kind == Origin::Kind::agent && !req.origin.name.empty()) {
            Percept p;
            p.agent = req.origin.name;
            p.artifact = req.artifact_name;
            p.kind = Percept::Kind::op_failed;
            p.name = req.operation_name;
            p.value = reason;
            push_percept(std::move(p));
            notify({req.origin.name});
        }
        throw err;
    };

    if (req.artifact_name.empty() || req.operation_name.empty()) {
        Error e(Errc::UnknownOperation, "operation request needs artifact and operation names");
        fail_to_origin(e, Term::atom("bad_request"));
    }

    Artifact* art = nullptr;
    try {
        art = &find(req.workspace, req.artifact_name);
    } catch (const Error& e) {
        fail_to_origin(e, Term::atom(std::string(to_string(e.code()))));
    }

    std::set<std::string> touched;
    OpResult result;
    {
        std::lock_guard lock(art->mu);
        auto op = art->operations.find(req.operation_name);
        if (op == art->operations.end()) {
            Error e(Errc::UnknownOperation,
                    "artifact '" + req.artifact_name + "' has no operation '" + req.operation_name + "'");
            fail_to_origin(e, Term::atom("UnknownOperation"));
        }

        auto vars = art->vars;
        OpContext ctx{art->properties, vars};
        try {
            result = op->second(std::span<const Term>(req.params), ctx);
        } catch (const std::exception& ex) {
            result = OpResult::failed(Term::string(ex.what()));
        }
        if (!result.ok) {
            std::string why = result.reason.text();
            Error e(Errc::OperationFailed, req.artifact_name + "." + req.operation_name + " failed: " + why, why);
            fail_to_origin(e, result.reason);
        }
        art->vars = std::move(vars);

        {
            std::lock_guard log(log_mu_);
            call_log_.push_back(CallRecord{req.workspace.empty() ? default_workspace_ : req.workspace,
                                           req.artifact_name, req.operation_name, req.params, req.origin, true});
        }

        for (const auto& [prop, value] : result.property_updates) {
            auto cur = art->properties.find(prop);
            std::optional<Term> old;
            if (cur != art->properties.end()) {
                if (cur->second == value) continue;
                old = cur->second;
                cur->second = value;
            } else {
                art->properties.emplace(prop, value);
            }
            for (const auto& agent : art->observers) {
                Percept p;
                p.agent = agent;
                p.artifact = art->name;
                p.kind = Percept::Kind::property_changed;
                p.name = prop;
                p.old_value = old;
                p.value = value;
                push_percept(std::move(p));
                touched.insert(agent);
            }
        }
        for (const auto& sig : result.signals) {
            for (const auto& agent : art->observers) {
                Percept p;
                p.agent = agent;
                p.artifact = art->name;
                p.kind = Percept::Kind::signal;
                p.name = sig.label;
                p.value = sig.payload;
                push_percept(std::move(p));
                touched.insert(agent);
            }
        }
        if (!result.outbound.empty()) {
            std::lock_guard out(art->outbox_mu);
            for (const auto& payload : result.outbound) art->outbox.push_back(payload);
            art->flush_outbox_locked();
        }
    }
    notify(touched);
    return result;
}

void Environment::artifact_send(const std::string& workspace, const std::string& artifact, Headers headers,
                                Term body) {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.outbox_mu);
    a.outbox.push_back(OutboundPayload{std::move(headers), std::move(body)});
    a.flush_outbox_locked();
}

void Environment::attach_outbox(const std::string& workspace, const std::string& artifact,
                                std::function<void(OutboundPayload)> consumer) {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.outbox_mu);
    if (a.outbox_consumer)
        throw Error(Errc::AlreadyAttached, "artifact '" + artifact + "' already has an attached consumer");
    a.outbox_consumer = std::move(consumer);
    a.flush_outbox_locked();
}

void Environment::detach_outbox(const std::string& workspace, const std::string& artifact) {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.outbox_mu);
    a.outbox_consumer = nullptr;
}

std::size_t Environment::outbox_size(const std::string& workspace, const std::string& artifact) const {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.outbox_mu);
    return a.outbox.size();
}

std::optional<Term> Environment::property(const std::string& workspace, const std::string& artifact,
                                          const std::string& name) const {
    auto& a = find(workspace, artifact);
    std::lock_guard lock(a.mu);
    auto it = a.properties.find(name);
    if (it == a.properties.end()) return std::nullopt;
    return it->second;
}

std::optional<Percept> Environment::poll_percept(const std::string& agent) {
    std::lock_guard lock(percept_mu_);
    auto it = percepts_.find(agent);
    if (it == percepts_.end() || it->second.empty()) return std::nullopt;
    Percept p = std::move(it->second.front());
    it->second.pop_front();
    return p;
}

std::vector<Percept> Environment::drain_percepts(const std::string& agent) {
    std::lock_guard lock(percept_mu_);
    std::vector<Percept> out;
    auto it = percepts_.find(agent);
    if (it == percepts_.end()) return out;
    out.assign(std::make_move_iterator(it->second.begin()), std::make_move_iterator(it->second.end()));
    it->second.clear();
    return out;
}

std::size_t Environment::pending_percepts(const std::string& agent) const {
    std::lock_guard lock(percept_mu_);
    auto it = percepts_.find(agent);
    return it == percepts_.end() ? 0 : it->second.size();
}

void Environment::set_percept_listener(std::function<void(const std::string&)> fn) {
    std::lock_guard lock(percept_mu_);
    percept_listener_ = std::move(fn);
}

std::vector<CallRecord> Environment::call_log() const {
    std::lock_guard lock(log_mu_);
    return call_log_;
}

}  // namespace masbus
