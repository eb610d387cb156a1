#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "masbus/bus.hpp"

namespace masbus {

/// In-process topic broker. Publishing fans out to every current subscriber
/// exactly once; only retained publishes are replayed to later subscribers.
class Broker {
public:
    using SubscriptionId = std::uint64_t;
    using Handler = std::function<void(const std::string& topic, const std::string& payload)>;

    SubscriptionId subscribe(const std::string& topic, Handler handler);
    void unsubscribe(SubscriptionId id);
    /// Returns the number of subscribers the payload was handed to.
    std::size_t publish(const std::string& topic, const std::string& payload, bool retain = false);

    std::size_t subscriber_count(const std::string& topic) const;
    std::optional<std::string> retained(const std::string& topic) const;

private:
    mutable std::mutex mu_;
    std::map<SubscriptionId, std::pair<std::string, std::shared_ptr<Handler>>> subscriptions_;
    std::map<std::string, std::string> retained_;
    SubscriptionId next_id_ = 1;
};

/// `mqttlite:<client>?host=H&subscribeTopicName=T` consumer and
/// `mqttlite:<client>?host=H&publishTopicName=T[&retain=true]` producer.
/// Brokers are addressed by the `host` string, e.g. `tcp://broker`.
/// Inbound payloads become term bodies when they parse, string bodies
/// otherwise; outbound bodies are rendered.
class MqttLiteComponent final : public Component {
public:
    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;

    /// The broker for `host`, created on first use.
    std::shared_ptr<Broker> broker(const std::string& host);

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Broker>> brokers_;
};

}  // namespace masbus
