#include "masbus/components/mqttlite.hpp"

#include <vector>

#include "masbus/components/core.hpp"

namespace masbus {

Broker::SubscriptionId Broker::subscribe(const std::string& topic, Handler handler) {
    std::optional<std::string> replay;
    SubscriptionId id;
    auto h = std::make_shared<Handler>(std::move(handler));
    {
        std::lock_guard lock(mu_);
        id = next_id_++;
        subscriptions_.emplace(id, std::make_pair(topic, h));
        if (auto it = retained_.find(topic); it != retained_.end()) replay = it->second;
    }
    if (replay) (*h)(topic, *replay);
    return id;
}

void Broker::unsubscribe(SubscriptionId id) {
    std::lock_guard lock(mu_);
    subscriptions_.erase(id);
}

std::size_t Broker::publish(const std::string& topic, const std::string& payload, bool retain) {
    std::vector<std::shared_ptr<Handler>> targets;
    {
        std::lock_guard lock(mu_);
        if (retain) retained_[topic] = payload;
        for (const auto& [id, sub] : subscriptions_)
            if (sub.first == topic) targets.push_back(sub.second);
    }
    for (const auto& h : targets) (*h)(topic, payload);
    return targets.size();
}

std::size_t Broker::subscriber_count(const std::string& topic) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [id, sub] : subscriptions_)
        if (sub.first == topic) ++n;
    return n;
}

std::optional<std::string> Broker::retained(const std::string& topic) const {
    std::lock_guard lock(mu_);
    auto it = retained_.find(topic);
    if (it == retained_.end()) return std::nullopt;
    return it->second;
}

std::shared_ptr<Broker> MqttLiteComponent::broker(const std::string& host) {
    std::lock_guard lock(mu_);
    auto& b = brokers_[host];
    if (!b) b = std::make_shared<Broker>();
    return b;
}

namespace {

class MqttConsumer final : public Consumer {
public:
    MqttConsumer(std::shared_ptr<Broker> broker, std::string topic, RouteContext& route)
        : broker_(std::move(broker)), topic_(std::move(topic)), route_(route) {}

    ~MqttConsumer() override { stop(); }

    void start() override {
        id_ = broker_->subscribe(topic_, [&route = route_](const std::string& topic, const std::string& payload) {
            Headers h;
            h.emplace("topic", Term::string(topic));
            route.submit(route.make_exchange(std::move(h), parse_or_string(payload)));
        });
    }

    void stop() override {
        if (!id_) return;
        broker_->unsubscribe(*id_);
        id_.reset();
    }

private:
    std::shared_ptr<Broker> broker_;
    std::string topic_;
    RouteContext& route_;
    std::optional<Broker::SubscriptionId> id_;
};

class MqttProducer final : public Producer {
public:
    MqttProducer(std::shared_ptr<Broker> broker, std::string topic, bool retain)
        : broker_(std::move(broker)), topic_(std::move(topic)), retain_(retain) {}

    void deliver(const Exchange& ex) override { broker_->publish(topic_, render_term(ex.body), retain_); }

private:
    std::shared_ptr<Broker> broker_;
    std::string topic_;
    bool retain_;
};

}  // namespace

std::unique_ptr<Consumer> MqttLiteComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    std::string host = require_param(uri, "host");
    std::string topic = require_param(uri, "subscribeTopicName");
    return std::make_unique<MqttConsumer>(broker(host), topic, route);
}

std::unique_ptr<Producer> MqttLiteComponent::create_producer(const EndpointUri& uri, RouteContext&) {
    std::string host = require_param(uri, "host");
    std::string topic = require_param(uri, "publishTopicName");
    return std::make_unique<MqttProducer>(broker(host), topic, uri.param_or("retain", "false") == "true");
}

}  // namespace masbus
