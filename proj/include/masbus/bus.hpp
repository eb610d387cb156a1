#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "masbus/clock.hpp"
#include "masbus/error.hpp"
#include "masbus/exchange.hpp"
#include "masbus/uri.hpp"

namespace masbus {

class Bus;

struct ProcessorSpec {
    enum class Kind { SetHeader, Transform };

    Kind kind = Kind::SetHeader;
    std::string name;  // header name or transform name
    Term value;        // constant for SetHeader, unused for Transform

    static ProcessorSpec set_header(std::string header, Term value);
    static ProcessorSpec transform(std::string transform_name);

    friend bool operator==(const ProcessorSpec&, const ProcessorSpec&) = default;
};

struct RouteDefinition {
    std::string route_id;
    EndpointUri from;
    std::vector<ProcessorSpec> processors;
    std::vector<EndpointUri> to;

    friend bool operator==(const RouteDefinition&, const RouteDefinition&) = default;
};

/// Throws Error{InvalidRoute} when `to` is empty or a processor is malformed.
void validate_route(const RouteDefinition& def);

using Transform = std::function<void(Exchange&)>;

/// The route a consumer or producer was created for.
class RouteContext {
public:
    virtual ~RouteContext() = default;

    virtual const std::string& route_id() const = 0;
    virtual const EndpointUri& from() const = 0;
    virtual Bus& bus() = 0;

    /// New exchange with a fresh id and trace = [from endpoint].
    virtual Exchange make_exchange(Headers headers, Term body) = 0;
    /// Enqueue for the route's worker; exchanges from one consumer are
    /// processed in submission order.
    virtual void submit(Exchange ex) = 0;
    /// Process on the calling thread. Used by synchronous hops.
    virtual void process_now(Exchange ex) = 0;
};

class Consumer {
public:
    virtual ~Consumer() = default;
    virtual void start() = 0;
    virtual void stop() = 0;
    /// Internal consumers (fed by other routes) stay active while the bus
    /// drains; external ones are stopped first.
    virtual bool internal() const { return false; }
};

class Producer {
public:
    virtual ~Producer() = default;
    /// Throws on failure; the bus records a dead letter.
    virtual void deliver(const Exchange& ex) = 0;
};

class Component {
public:
    virtual ~Component() = default;
    virtual std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route);
    virtual std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route);
};

struct DeadLetter {
    std::string route_id;
    Errc stage = Errc::ProducerFailure;  // TransformFailure, ProducerFailure or Dropped
    Errc cause = Errc::ProducerFailure;  // code of the underlying error
    std::string message;
    std::string endpoint;
    Exchange exchange;
};

struct DeliveryRecord {
    std::string exchange_id;
    std::string route_id;
    std::vector<std::string> endpoints;
    std::size_t failed_producers = 0;
};

struct BusReport {
    std::uint64_t exchanges_created = 0;
    std::uint64_t producer_deliveries = 0;
    std::uint64_t completed = 0;
    std::uint64_t dropped = 0;
    std::vector<DeadLetter> dead_letters;
};

struct BusOptions {
    std::string run_id = "run";
    std::chrono::milliseconds drain_timeout{5000};
    std::shared_ptr<Clock> clock;  // defaults to a WallClock
};

class Bus {
public:
    explicit Bus(BusOptions options = {});
    ~Bus();

    Bus(const Bus&) = delete;
    Bus& operator=(const Bus&) = delete;

    void register_component(std::string scheme, std::shared_ptr<Component> component);
    bool has_component(std::string_view scheme) const;
    std::shared_ptr<Component> component(std::string_view scheme) const;

    void register_transform(std::string name, Transform fn);

    /// Returns the route id (assigned as route-<n> when empty). Starts the
    /// route immediately when the bus is running.
    std::string add_route(RouteDefinition def);
    std::vector<std::string> route_ids() const;
    const RouteDefinition& route(const std::string& route_id) const;
    bool route_running(const std::string& route_id) const;

    void start();
    void stop();
    bool running() const noexcept { return running_.load(); }

    void stop_route(const std::string& route_id);
    void start_route(const std::string& route_id);

    /// Runs the route's processors and producers on the calling thread.
    void process_exchange(const std::string& route_id, Exchange ex);

    /// Delivers through a transient producer for `uri`; the exchange is
    /// created in the context of `origin`.
    void send_to(const EndpointUri& uri, Headers headers, Term body, RouteContext& origin);

    /// Waits until no exchange is queued or being processed.
    bool await_idle(std::chrono::milliseconds timeout);

    std::vector<DeadLetter> dead_letters() const;
    BusReport report() const;

    void set_delivery_listener(std::function<void(const DeliveryRecord&)> fn);

    Clock& clock() { return *clock_; }
    std::shared_ptr<Clock> clock_ptr() const { return clock_; }
    const std::string& run_id() const { return options_.run_id; }
    std::string next_exchange_id();

private:
    struct RouteRuntime;
    friend struct RouteRuntime;

    void start_route_locked(RouteRuntime& rt);
    void stop_routes_locked(const std::vector<RouteRuntime*>& routes);
    void record_dead_letter(DeadLetter dl);
    void process(RouteRuntime& rt, Exchange ex);
    void begin_work();
    void end_work(std::uint64_t n = 1);
    RouteRuntime& runtime(const std::string& route_id) const;

    BusOptions options_;
    std::shared_ptr<Clock> clock_;

    std::mutex lifecycle_mu_;
    mutable std::shared_mutex state_mu_;
    std::map<std::string, std::shared_ptr<Component>, std::less<>> components_;
    std::map<std::string, Transform, std::less<>> transforms_;
    std::map<std::string, std::unique_ptr<RouteRuntime>> routes_;
    std::vector<std::string> route_order_;
    std::atomic<bool> running_{false};

    mutable std::mutex dl_mu_;
    std::vector<DeadLetter> dead_letters_;

    std::mutex idle_mu_;
    std::condition_variable idle_cv_;
    std::uint64_t in_flight_ = 0;

    std::atomic<std::uint64_t> next_id_{1};
    std::atomic<std::uint64_t> exchanges_created_{0};
    std::atomic<std::uint64_t> producer_deliveries_{0};
    std::atomic<std::uint64_t> completed_{0};
    std::atomic<std::uint64_t> dropped_{0};

    std::mutex listener_mu_;
    std::function<void(const DeliveryRecord&)> delivery_listener_;
};

}  // namespace masbus
