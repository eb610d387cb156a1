#pragma once

#include <memory>

#include "masbus/acl.hpp"
#include "masbus/bus.hpp"
#include "masbus/components/artifact.hpp"
#include "masbus/components/chatstub.hpp"
#include "masbus/components/core.hpp"
#include "masbus/components/httplite.hpp"
#include "masbus/components/jason.hpp"
#include "masbus/components/mqttlite.hpp"
#include "masbus/components/tcpline.hpp"
#include "masbus/environment.hpp"

namespace masbus {

struct StandardComponents {
    std::shared_ptr<DirectComponent> direct;
    std::shared_ptr<TimerComponent> timer;
    std::shared_ptr<MockComponent> mock;
    std::shared_ptr<JasonComponent> jason;
    std::shared_ptr<ArtifactComponent> artifact;
    std::shared_ptr<MqttLiteComponent> mqttlite;
    std::shared_ptr<TcpLineComponent> tcpline;
    std::shared_ptr<HttpLiteComponent> httplite;
    std::shared_ptr<ChatStubComponent> chatstub;
};

/// Registers every built-in scheme under its own name. The registry and
/// environment must outlive the bus.
StandardComponents install_standard_components(Bus& bus, AgentRegistry& registry, Environment& env);

}  // namespace masbus
