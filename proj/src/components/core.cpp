#include "masbus/components/core.hpp"

#include <charconv>
#include <thread>

namespace masbus {

std::string require_param(const EndpointUri& uri, const std::string& key) {
    auto v = uri.param(key);
    if (!v || v->empty()) throw Error(Errc::MissingParam, format_uri(uri) + " requires parameter '" + key + "'");
    return *v;
}

long long require_int_param(const EndpointUri& uri, const std::string& key) {
    std::string text = require_param(uri, key);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(Errc::BadParam, "parameter '" + key + "' must be an integer, got '" + text + "'");
    return value;
}

// direct

class DirectConsumer final : public Consumer {
public:
    DirectConsumer(DirectComponent& owner, std::string name, RouteContext& route)
        : owner_(owner), name_(std::move(name)), route_(route) {}

    void start() override {
        std::lock_guard lock(owner_.mu_);
        if (owner_.consumers_.contains(name_))
            throw Error(Errc::DuplicateName, "direct:" + name_ + " already has a consumer");
        owner_.consumers_.emplace(name_, &route_);
    }

    void stop() override {
        std::lock_guard lock(owner_.mu_);
        auto it = owner_.consumers_.find(name_);
        if (it != owner_.consumers_.end() && it->second == &route_) owner_.consumers_.erase(it);
    }

    bool internal() const override { return true; }

private:
    DirectComponent& owner_;
    std::string name_;
    RouteContext& route_;
};

class DirectProducer final : public Producer {
public:
    DirectProducer(DirectComponent& owner, std::string name) : owner_(owner), name_(std::move(name)) {}

    void deliver(const Exchange& ex) override {
        RouteContext* target = nullptr;
        {
            std::lock_guard lock(owner_.mu_);
            auto it = owner_.consumers_.find(name_);
            if (it != owner_.consumers_.end()) target = it->second;
        }
        if (!target) throw Error(Errc::NoConsumer, "no consumer for direct:" + name_);
        target->process_now(target->make_exchange(ex.headers, ex.body));
    }

private:
    DirectComponent& owner_;
    std::string name_;
};

std::unique_ptr<Consumer> DirectComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    return std::make_unique<DirectConsumer>(*this, uri.path, route);
}

std::unique_ptr<Producer> DirectComponent::create_producer(const EndpointUri& uri, RouteContext&) {
    return std::make_unique<DirectProducer>(*this, uri.path);
}

bool DirectComponent::has_consumer(const std::string& name) const {
    std::lock_guard lock(mu_);
    return consumers_.contains(name);
}

// timer

namespace {

class TimerConsumer final : public Consumer {
public:
    TimerConsumer(std::string name, long long period_ms, RouteContext& route)
        : name_(std::move(name)), period_ms_(period_ms), route_(route) {}

    ~TimerConsumer() override { stop(); }

    void start() override {
        if (id_) return;
        id_ = route_.bus().clock().schedule_every(period_ms_, [this](std::int64_t tick) {
            Headers h;
            h.emplace("timerName", Term::string(name_));
            route_.submit(route_.make_exchange(std::move(h), Term::number(static_cast<double>(tick))));
        });
    }

    void stop() override {
        if (!id_) return;
        route_.bus().clock().cancel(*id_);
        id_.reset();
    }

private:
    std::string name_;
    long long period_ms_;
    RouteContext& route_;
    std::optional<Clock::TimerId> id_;
};

}  // namespace

std::unique_ptr<Consumer> TimerComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    long long period = require_int_param(uri, "periodMs");
    if (period <= 0) throw Error(Errc::BadParam, "periodMs must be positive");
    return std::make_unique<TimerConsumer>(uri.path, period, route);
}

// mock

class MockProducer final : public Producer {
public:
    MockProducer(MockComponent& owner, std::string name, long long delay_ms)
        : owner_(owner), name_(std::move(name)), delay_ms_(delay_ms) {}

    void deliver(const Exchange& ex) override {
        if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
        std::lock_guard lock(owner_.mu_);
        owner_.received_[name_].push_back(ex);
    }

private:
    MockComponent& owner_;
    std::string name_;
    long long delay_ms_;
};

std::unique_ptr<Producer> MockComponent::create_producer(const EndpointUri& uri, RouteContext&) {
    long long delay = uri.param("delayMs") ? require_int_param(uri, "delayMs") : 0;
    return std::make_unique<MockProducer>(*this, uri.path, delay);
}

std::vector<Exchange> MockComponent::received(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = received_.find(name);
    return it == received_.end() ? std::vector<Exchange>{} : it->second;
}

std::size_t MockComponent::count(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = received_.find(name);
    return it == received_.end() ? 0 : it->second.size();
}

void MockComponent::clear() {
    std::lock_guard lock(mu_);
    received_.clear();
}

}  // namespace masbus
