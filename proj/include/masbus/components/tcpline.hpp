#pragma once

#include "masbus/bus.hpp"

namespace masbus {

/// `tcpline:<host>:<port>` - newline-delimited text over TCP.
/// Consumer: listens and turns each line into an exchange (term body when
/// the line parses, string otherwise). Producer: connects per exchange and
/// writes the rendered body plus "\n". `ackTimeoutMs=N` makes the producer
/// wait for the listener's acknowledgement.
class TcpLineComponent final : public Component {
public:
    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;
};

}  // namespace masbus
