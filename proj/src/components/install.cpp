#include "masbus/components.hpp"

namespace masbus {

StandardComponents install_standard_components(Bus& bus, AgentRegistry& registry, Environment& env) {
    StandardComponents c;
    c.direct = std::make_shared<DirectComponent>();
    c.timer = std::make_shared<TimerComponent>();
    c.mock = std::make_shared<MockComponent>();
    c.jason = std::make_shared<JasonComponent>(registry);
    c.artifact = std::make_shared<ArtifactComponent>(env);
    c.mqttlite = std::make_shared<MqttLiteComponent>();
    c.tcpline = std::make_shared<TcpLineComponent>();
    c.httplite = std::make_shared<HttpLiteComponent>();
    c.chatstub = std::make_shared<ChatStubComponent>();
    bus.register_component("direct", c.direct);
    bus.register_component("timer", c.timer);
    bus.register_component("mock", c.mock);
    bus.register_component("jason", c.jason);
    bus.register_component("artifact", c.artifact);
    bus.register_component("mqttlite", c.mqttlite);
    bus.register_component("tcpline", c.tcpline);
    bus.register_component("httplite", c.httplite);
    bus.register_component("chatstub", c.chatstub);
    return c;
}

}  // namespace masbus
