#pragma once

#include "masbus/bus.hpp"
#include "masbus/environment.hpp"

namespace masbus {

namespace artifact_headers {
inline constexpr const char* artifact_name = "ArtifactName";
inline constexpr const char* operation_name = "OperationName";
}  // namespace artifact_headers

/// Bridges artifact operations and exchanges. The URI path names the
/// workspace; `cartago` (or an empty path) means the default workspace.
///
/// Consumer `artifact:<ws>?artifactName=A`: every payload A sends becomes an
/// exchange carrying the payload headers plus ArtifactName=A.
///
/// Producer `artifact:<ws>[?artifactName=A][&operationName=Op]`: executes an
/// operation request. The artifact and operation come from the
/// ArtifactName/OperationName headers (exact spelling), falling back to the
/// URI params. A list body supplies the positional parameters; any other body
/// is passed as the single parameter.
class ArtifactComponent final : public Component {
public:
    explicit ArtifactComponent(Environment& env) : env_(env) {}

    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;

    std::string workspace_for(const EndpointUri& uri) const;

private:
    Environment& env_;
};

/// Body-to-parameter rule used by the artifact producer.
std::vector<Term> body_to_params(const Term& body);

}  // namespace masbus
