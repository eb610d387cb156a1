#include "masbus/components/artifact.hpp"

#include "masbus/components/core.hpp"

namespace masbus {

std::vector<Term> body_to_params(const Term& body) {
    if (body.is_list()) return body.items();
    return {body};
}

std::string ArtifactComponent::workspace_for(const EndpointUri& uri) const {
    if (uri.path.empty() || uri.path == "cartago") return env_.default_workspace();
    return uri.path;
}

namespace {

class ArtifactConsumer final : public Consumer {
public:
    ArtifactConsumer(Environment& env, std::string workspace, std::string artifact, RouteContext& route)
        : env_(env), workspace_(std::move(workspace)), artifact_(std::move(artifact)), route_(route) {}

    ~ArtifactConsumer() override { stop(); }

    void start() override {
        env_.attach_outbox(workspace_, artifact_, [&route = route_, artifact = artifact_](OutboundPayload p) {
            Headers h = std::move(p.headers);
            h.insert_or_assign(artifact_headers::artifact_name, Term::atom(artifact));
            route.submit(route.make_exchange(std::move(h), std::move(p.body)));
        });
        attached_ = true;
    }

    void stop() override {
        if (!attached_) return;
        env_.detach_outbox(workspace_, artifact_);
        attached_ = false;
    }

private:
    Environment& env_;
    std::string workspace_;
    std::string artifact_;
    RouteContext& route_;
    bool attached_ = false;
};

class ArtifactProducer final : public Producer {
public:
    ArtifactProducer(Environment& env, std::string workspace, std::optional<std::string> artifact,
                     std::optional<std::string> operation, std::string route_id)
        : env_(env),
          workspace_(std::move(workspace)),
          artifact_(std::move(artifact)),
          operation_(std::move(operation)),
          route_id_(std::move(route_id)) {}

    void deliver(const Exchange& ex) override {
        OperationRequest req;
        req.workspace = workspace_;
        if (const Term* a = ex.header(artifact_headers::artifact_name))
            req.artifact_name = a->text();
        else if (artifact_)
            req.artifact_name = *artifact_;
        else
            throw Error(Errc::MissingArtifactName, "no ArtifactName header or artifactName parameter");
        if (const Term* o = ex.header(artifact_headers::operation_name))
            req.operation_name = o->text();
        else if (operation_)
            req.operation_name = *operation_;
        else
            throw Error(Errc::MissingOperationName, "no OperationName header or operationName parameter");
        req.params = body_to_params(ex.body);
        req.origin = Origin::route(route_id_);
        env_.execute_op(req);
    }

private:
    Environment& env_;
    std::string workspace_;
    std::optional<std::string> artifact_;
    std::optional<std::string> operation_;
    std::string route_id_;
};

}  // namespace

std::unique_ptr<Consumer> ArtifactComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    std::string artifact = require_param(uri, "artifactName");
    std::string ws = workspace_for(uri);
    if (!env_.has_artifact(ws, artifact))
        throw Error(Errc::UnknownArtifact, "no artifact '" + artifact + "' in workspace '" + ws + "'");
    return std::make_unique<ArtifactConsumer>(env_, ws, artifact, route);
}

std::unique_ptr<Producer> ArtifactComponent::create_producer(const EndpointUri& uri, RouteContext& route) {
    return std::make_unique<ArtifactProducer>(env_, workspace_for(uri), uri.param("artifactName"),
                                              uri.param("operationName"), route.route_id());
}

}  // namespace masbus
