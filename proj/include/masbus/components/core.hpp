#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "masbus/bus.hpp"

namespace masbus {

/// `direct:<name>` - synchronous in-process hop. The producer runs the
/// consuming route on its own thread and returns when that route is done.
class DirectComponent final : public Component {
public:
    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;

    bool has_consumer(const std::string& name) const;

private:
    friend class DirectConsumer;
    friend class DirectProducer;

    mutable std::mutex mu_;
    std::map<std::string, RouteContext*> consumers_;
};

/// `timer:<name>?periodMs=N` - emits body number(tick) every N ms of the
/// bus clock, starting at tick 0.
class TimerComponent final : public Component {
public:
    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
};

/// `mock:<name>[?delayMs=N]` - in-memory sink that records every exchange it
/// is handed. Inspection helpers are for tests and tooling.
class MockComponent final : public Component {
public:
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;

    std::vector<Exchange> received(const std::string& name) const;
    std::size_t count(const std::string& name) const;
    void clear();

private:
    friend class MockProducer;

    mutable std::mutex mu_;
    std::map<std::string, std::vector<Exchange>> received_;
};

/// Integer parameter lookup shared by the components; throws MissingParam or
/// BadParam.
long long require_int_param(const EndpointUri& uri, const std::string& key);
std::string require_param(const EndpointUri& uri, const std::string& key);

}  // namespace masbus
