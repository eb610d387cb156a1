#include "masbus/bus.hpp"

#include <deque>
#include <thread>

namespace masbus {

ProcessorSpec ProcessorSpec::set_header(std::string header, Term value) {
    return ProcessorSpec{Kind::SetHeader, std::move(header), std::move(value)};
}

ProcessorSpec ProcessorSpec::transform(std::string transform_name) {
    return ProcessorSpec{Kind::Transform, std::move(transform_name), Term::atom("nil")};
}

void validate_route(const RouteDefinition& def) {
    if (def.to.empty()) throw Error(Errc::InvalidRoute, "route '" + def.route_id + "' has no 'to' endpoint");
    if (!is_valid_scheme(def.from.scheme))
        throw Error(Errc::InvalidRoute, "route '" + def.route_id + "' has an invalid 'from' scheme");
    for (const auto& to : def.to)
        if (!is_valid_scheme(to.scheme))
            throw Error(Errc::InvalidRoute, "route '" + def.route_id + "' has an invalid 'to' scheme");
    for (const auto& p : def.processors)
        if (p.name.empty()) throw Error(Errc::InvalidRoute, "processor with empty name in '" + def.route_id + "'");
}

std::unique_ptr<Consumer> Component::create_consumer(const EndpointUri& uri, RouteContext&) {
    throw Error(Errc::UnsupportedConsumer, "'" + uri.scheme + "' endpoints cannot be consumed from");
}

std::unique_ptr<Producer> Component::create_producer(const EndpointUri& uri, RouteContext&) {
    throw Error(Errc::UnsupportedProducer, "'" + uri.scheme + "' endpoints cannot be produced to");
}

struct Bus::RouteRuntime final : RouteContext {
    RouteRuntime(Bus& owner, RouteDefinition d) : bus_(owner), def(std::move(d)), from_text(format_uri(def.from)) {
        for (const auto& u : def.to) to_text.push_back(format_uri(u));
    }

    const std::string& route_id() const override { return def.route_id; }
    const EndpointUri& from() const override { return def.from; }
    Bus& bus() override { return bus_; }

    Exchange make_exchange(Headers headers, Term body) override {
        Exchange ex;
        ex.id = bus_.next_exchange_id();
        ex.headers = std::move(headers);
        ex.body = std::move(body);
        ex.created_at = std::chrono::steady_clock::now();
        ex.trace.push_back(from_text);
        bus_.exchanges_created_.fetch_add(1);
        return ex;
    }

    void submit(Exchange ex) override {
        {
            std::lock_guard lock(q_mu);
            if (accepting) {
                ++pending;
                bus_.begin_work();
                queue.push_back(std::move(ex));
                q_cv.notify_one();
                return;
            }
        }
        drop(std::move(ex), "route is not running");
    }

    void process_now(Exchange ex) override {
        {
            std::lock_guard lock(q_mu);
            if (!accepting) {
                drop(std::move(ex), "route is not running");
                return;
            }
            ++pending;
        }
        bus_.begin_work();
        bus_.process(*this, std::move(ex));
        finish_one();
    }

    void drop(Exchange ex, std::string why) {
        bus_.dropped_.fetch_add(1);
        bus_.record_dead_letter(
            DeadLetter{def.route_id, Errc::Dropped, Errc::RouteNotRunning, std::move(why), from_text, std::move(ex)});
    }

    void finish_one() {
        {
            std::lock_guard lock(q_mu);
            --pending;
        }
        idle_cv.notify_all();
        bus_.end_work();
    }

    void worker_loop() {
        for (;;) {
            Exchange ex;
            {
                std::unique_lock lock(q_mu);
                q_cv.wait(lock, [&] { return !queue.empty() || closing; });
                if (queue.empty()) return;
                ex = std::move(queue.front());
                queue.pop_front();
            }
            bus_.process(*this, std::move(ex));
            finish_one();
        }
    }

    bool wait_drained(std::chrono::steady_clock::time_point deadline) {
        std::unique_lock lock(q_mu);
        return idle_cv.wait_until(lock, deadline, [&] { return pending == 0; });
    }

    void drop_queued() {
        std::deque<Exchange> leftover;
        {
            std::lock_guard lock(q_mu);
            leftover.swap(queue);
            pending -= leftover.size();
        }
        for (auto& ex : leftover) {
            drop(std::move(ex), "drain timeout expired before delivery");
            bus_.end_work();
        }
        idle_cv.notify_all();
    }

    void open_worker() {
        {
            std::lock_guard lock(q_mu);
            accepting = true;
            closing = false;
        }
        worker = std::thread([this] { worker_loop(); });
    }

    void close_worker() {
        {
            std::lock_guard lock(q_mu);
            accepting = false;
            closing = true;
        }
        q_cv.notify_all();
        if (worker.joinable()) worker.join();
    }

    Bus& bus_;
    RouteDefinition def;
    std::string from_text;
    std::vector<std::string> to_text;

    std::vector<Transform> transforms;
    std::unique_ptr<Consumer> consumer;
    std::vector<std::unique_ptr<Producer>> producers;
    std::atomic<bool> running{false};

    std::mutex process_mu;

    std::mutex q_mu;
    std::condition_variable q_cv;
    std::condition_variable idle_cv;
    std::deque<Exchange> queue;
    std::size_t pending = 0;
    bool accepting = false;
    bool closing = false;
    std::thread worker;
};

Bus::Bus(BusOptions options) : options_(std::move(options)), clock_(options_.clock) {
    if (!clock_) clock_ = std::make_shared<WallClock>();
}

Bus::~Bus() {
    if (running_.load()) {
        try {
            stop();
        } catch (...) {
        }
    }
}

void Bus::register_component(std::string scheme, std::shared_ptr<Component> component) {
    std::lock_guard life(lifecycle_mu_);
    if (running_.load()) throw Error(Errc::BusRunning, "cannot register '" + scheme + "' while running");
    if (!is_valid_scheme(scheme)) throw Error(Errc::BadScheme, "invalid scheme '" + scheme + "'");
    std::unique_lock lock(state_mu_);
    if (components_.contains(scheme)) throw Error(Errc::DuplicateScheme, "scheme '" + scheme + "' already registered");
    components_.emplace(std::move(scheme), std::move(component));
}

bool Bus::has_component(std::string_view scheme) const {
    std::shared_lock lock(state_mu_);
    return components_.find(scheme) != components_.end();
}

std::shared_ptr<Component> Bus::component(std::string_view scheme) const {
    std::shared_lock lock(state_mu_);
    auto it = components_.find(scheme);
    if (it == components_.end()) throw Error(Errc::UnknownScheme, "no component for scheme '" + std::string(scheme) + "'");
    return it->second;
}

void Bus::register_transform(std::string name, Transform fn) {
    std::unique_lock lock(state_mu_);
    transforms_[std::move(name)] = std::move(fn);
}

std::string Bus::add_route(RouteDefinition def) {
    std::lock_guard life(lifecycle_mu_);
    validate_route(def);
    RouteRuntime* rt = nullptr;
    {
        std::unique_lock lock(state_mu_);
        if (def.route_id.empty()) {
            std::size_t n = routes_.size() + 1;
            while (routes_.contains("route-" + std::to_string(n))) ++n;
            def.route_id = "route-" + std::to_string(n);
        }
        if (routes_.contains(def.route_id))
            throw Error(Errc::DuplicateRouteId, "route id '" + def.route_id + "' already in use");
        auto owned = std::make_unique<RouteRuntime>(*this, std::move(def));
        rt = owned.get();
        route_order_.push_back(rt->def.route_id);
        routes_.emplace(rt->def.route_id, std::move(owned));
    }
    if (running_.load()) {
        try {
            start_route_locked(*rt);
        } catch (...) {
            std::unique_lock lock(state_mu_);
            route_order_.pop_back();
            routes_.erase(rt->def.route_id);
            throw;
        }
    }
    return rt->def.route_id;
}

std::vector<std::string> Bus::route_ids() const {
    std::shared_lock lock(state_mu_);
    return route_order_;
}

Bus::RouteRuntime& Bus::runtime(const std::string& route_id) const {
    std::shared_lock lock(state_mu_);
    auto it = routes_.find(route_id);
    if (it == routes_.end()) throw Error(Errc::UnknownRoute, "no route '" + route_id + "'");
    return *it->second;
}

const RouteDefinition& Bus::route(const std::string& route_id) const { return runtime(route_id).def; }

bool Bus::route_running(const std::string& route_id) const { return runtime(route_id).running.load(); }

namespace {

// Builds producers and the consumer without activating anything.
void prepare(Bus& bus, RouteContext& ctx, const RouteDefinition& def,
             const std::map<std::string, Transform, std::less<>>& transforms, std::vector<Transform>& resolved,
             std::vector<std::unique_ptr<Producer>>& producers, std::unique_ptr<Consumer>& consumer) {
    resolved.clear();
    for (const auto& p : def.processors) {
        if (p.kind == ProcessorSpec::Kind::Transform) {
            auto it = transforms.find(p.name);
            if (it == transforms.end())
                throw Error(Errc::UnknownTransform, "transform '" + p.name + "' is not registered");
            resolved.push_back(it->second);
        } else {
            resolved.emplace_back();
        }
    }
    auto from_component = bus.component(def.from.scheme);
    std::vector<std::shared_ptr<Component>> to_components;
    for (const auto& to : def.to) to_components.push_back(bus.component(to.scheme));

    producers.clear();
    for (std::size_t i = 0; i < def.to.size(); ++i) producers.push_back(to_components[i]->create_producer(def.to[i], ctx));
    consumer = from_component->create_consumer(def.from, ctx);
}

}  // namespace

void Bus::start_route_locked(RouteRuntime& rt) {
    std::map<std::string, Transform, std::less<>> transforms;
    {
        std::shared_lock lock(state_mu_);
        transforms = transforms_;
    }
    prepare(*this, rt, rt.def, transforms, rt.transforms, rt.producers, rt.consumer);
    rt.open_worker();
    try {
        rt.consumer->start();
    } catch (...) {
        rt.close_worker();
        rt.consumer.reset();
        rt.producers.clear();
        throw;
    }
    rt.running.store(true);
}

void Bus::start() {
    std::lock_guard life(lifecycle_mu_);
    if (running_.load()) throw Error(Errc::AlreadyRunning, "bus is already running");

    std::vector<RouteRuntime*> routes;
    std::map<std::string, Transform, std::less<>> transforms;
    {
        std::shared_lock lock(state_mu_);
        for (const auto& id : route_order_) routes.push_back(routes_.at(id).get());
        transforms = transforms_;
    }

    std::vector<RouteRuntime*> prepared;
    auto rollback = [&] {
        for (auto* rt : prepared) {
            if (rt->running.load()) {
                try {
                    rt->consumer->stop();
                } catch (...) {
                }
                rt->running.store(false);
            }
            rt->close_worker();
            rt->consumer.reset();
            rt->producers.clear();
        }
    };

    try {
        for (auto* rt : routes) {
            prepare(*this, *rt, rt->def, transforms, rt->transforms, rt->producers, rt->consumer);
            rt->open_worker();
            prepared.push_back(rt);
        }
        // Internal consumers first so that anything fed by an external
        // consumer finds its downstream route active.
        for (bool internal_pass : {true, false}) {
            for (auto* rt : prepared) {
                if (rt->consumer->internal() != internal_pass) continue;
                rt->consumer->start();
                rt->running.store(true);
            }
        }
    } catch (...) {
        rollback();
        throw;
    }
    running_.store(true);
}

void Bus::stop_routes_locked(const std::vector<RouteRuntime*>& routes) {
    for (auto* rt : routes) {
        if (!rt->running.load() || rt->consumer->internal()) continue;
        try {
            rt->consumer->stop();
        } catch (...) {
        }
    }
    auto deadline = std::chrono::steady_clock::now() + options_.drain_timeout;
    for (auto* rt : routes)
        if (rt->running.load()) rt->wait_drained(deadline);
    for (auto* rt : routes)
        if (rt->running.load()) rt->drop_queued();
    for (auto* rt : routes) {
        if (!rt->running.load() || !rt->consumer->internal()) continue;
        try {
            rt->consumer->stop();
        } catch (...) {
        }
    }
    for (auto* rt : routes) {
        if (!rt->running.load()) continue;
        rt->close_worker();
        rt->drop_queued();
        rt->running.store(false);
        rt->consumer.reset();
        rt->producers.clear();
    }
}

void Bus::stop() {
    std::lock_guard life(lifecycle_mu_);
    if (!running_.load()) throw Error(Errc::AlreadyStopped, "bus is not running");
    std::vector<RouteRuntime*> routes;
    {
        std::shared_lock lock(state_mu_);
        for (const auto& id : route_order_) routes.push_back(routes_.at(id).get());
    }
    stop_routes_locked(routes);
    running_.store(false);
}

void Bus::stop_route(const std::string& route_id) {
    std::lock_guard life(lifecycle_mu_);
    auto& rt = runtime(route_id);
    if (!rt.running.load()) throw Error(Errc::RouteNotRunning, "route '" + route_id + "' is not running");
    stop_routes_locked({&rt});
}

void Bus::start_route(const std::string& route_id) {
    std::lock_guard life(lifecycle_mu_);
    if (!running_.load()) throw Error(Errc::RouteNotRunning, "bus is not running");
    auto& rt = runtime(route_id);
    if (rt.running.load()) throw Error(Errc::AlreadyRunning, "route '" + route_id + "' is already running");
    start_route_locked(rt);
}

void Bus::process_exchange(const std::string& route_id, Exchange ex) {
    auto& rt = runtime(route_id);
    if (!rt.running.load()) throw Error(Errc::RouteNotRunning, "route '" + route_id + "' is not running");
    rt.process_now(std::move(ex));
}

void Bus::process(RouteRuntime& rt, Exchange ex) {
    std::lock_guard lock(rt.process_mu);
    const auto& procs = rt.def.processors;
    for (std::size_t i = 0; i < procs.size(); ++i) {
        if (procs[i].kind == ProcessorSpec::Kind::SetHeader) {
            ex.headers.insert_or_assign(procs[i].name, procs[i].value);
            continue;
        }
        try {
            rt.transforms[i](ex);
        } catch (const std::exception& e) {
            const auto* err = dynamic_cast<const Error*>(&e);
            record_dead_letter(DeadLetter{rt.def.route_id, Errc::TransformFailure,
                                          err ? err->code() : Errc::TransformFailure, e.what(),
                                          "transform:" + procs[i].name, ex});
            return;
        }
    }

    std::size_t failed = 0;
    for (std::size_t i = 0; i < rt.producers.size(); ++i) {
        ex.trace.push_back(rt.to_text[i]);
        try {
            rt.producers[i]->deliver(ex);
            producer_deliveries_.fetch_add(1);
        } catch (const std::exception& e) {
            ++failed;
            const auto* err = dynamic_cast<const Error*>(&e);
            record_dead_letter(DeadLetter{rt.def.route_id, Errc::ProducerFailure,
                                          err ? err->code() : Errc::ProducerFailure, e.what(), rt.to_text[i], ex});
        }
    }
    completed_.fetch_add(1);

    std::function<void(const DeliveryRecord&)> listener;
    {
        std::lock_guard l(listener_mu_);
        listener = delivery_listener_;
    }
    if (listener) listener(DeliveryRecord{ex.id, rt.def.route_id, ex.trace, failed});
}

void Bus::send_to(const EndpointUri& uri, Headers headers, Term body, RouteContext& origin) {
    auto producer = component(uri.scheme)->create_producer(uri, origin);
    Exchange ex = origin.make_exchange(std::move(headers), std::move(body));
    ex.trace.push_back(format_uri(uri));
    producer->deliver(ex);
}

void Bus::begin_work() {
    std::lock_guard lock(idle_mu_);
    ++in_flight_;
}

void Bus::end_work(std::uint64_t n) {
    {
        std::lock_guard lock(idle_mu_);
        in_flight_ -= n;
    }
    idle_cv_.notify_all();
}

bool Bus::await_idle(std::chrono::milliseconds timeout) {
    std::unique_lock lock(idle_mu_);
    return idle_cv_.wait_for(lock, timeout, [&] { return in_flight_ == 0; });
}

void Bus::record_dead_letter(DeadLetter dl) {
    std::lock_guard lock(dl_mu_);
    dead_letters_.push_back(std::move(dl));
}

std::vector<DeadLetter> Bus::dead_letters() const {
    std::lock_guard lock(dl_mu_);
    return dead_letters_;
}

BusReport Bus::report() const {
    BusReport r;
    r.exchanges_created = exchanges_created_.load();
    r.producer_deliveries = producer_deliveries_.load();
    r.completed = completed_.load();
    r.dropped = dropped_.load();
    r.dead_letters = dead_letters();
    return r;
}

void Bus::set_delivery_listener(std::function<void(const DeliveryRecord&)> fn) {
    std::lock_guard lock(listener_mu_);
    delivery_listener_ = std::move(fn);
}

std::string Bus::next_exchange_id() { return options_.run_id + "-ex-" + std::to_string(next_id_.fetch_add(1)); }

}  // namespace masbus
