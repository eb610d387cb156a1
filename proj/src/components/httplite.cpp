#include "masbus/components/httplite.hpp"

#include <httplib.h>

#include <thread>

#include "masbus/net.hpp"

namespace masbus {

HttpTarget parse_http_target(const std::string& uri_path) {
    HttpTarget t;
    auto slash = uri_path.find('/');
    std::string host_port = uri_path.substr(0, slash);
    if (slash != std::string::npos) t.path = uri_path.substr(slash);
    auto [host, port] = split_host_port(host_port);
    t.host = host;
    t.port = port;
    return t;
}

namespace {

class HttpConsumer final : public Consumer {
public:
    HttpConsumer(HttpTarget target, RouteContext& route) : target_(std::move(target)), route_(route) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            if (req.path != target_.path) {
                res.status = 404;
                return;
            }
            Headers h;
            h.emplace("httpMethod", Term::string(req.method));
            h.emplace("httpPath", Term::string(req.path));
            route_.submit(route_.make_exchange(std::move(h), parse_or_string(req.body)));
            res.status = 200;
        };
        server_.Get(".*", handler);
        server_.Post(".*", handler);
    }

    ~HttpConsumer() override { stop(); }

    void start() override {
        if (!server_.bind_to_port(target_.host, target_.port))
            throw Error(Errc::BindFailure,
                        "cannot listen on " + target_.host + ":" + std::to_string(target_.port));
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        // stop() is a no-op until the loop runs
        server_.wait_until_ready();
    }

    void stop() override {
        if (!thread_.joinable()) return;
        server_.stop();
        thread_.join();
    }

private:
    HttpTarget target_;
    RouteContext& route_;
    httplib::Server server_;
    std::thread thread_;
};

class HttpProducer final : public Producer {
public:
    HttpProducer(HttpTarget target, bool get, std::optional<EndpointUri> reply_to, RouteContext& route)
        : target_(std::move(target)), get_(get), reply_to_(std::move(reply_to)), route_(route) {}

    void deliver(const Exchange& ex) override {
        httplib::Client client(target_.host, target_.port);
        client.set_connection_timeout(std::chrono::seconds(2));
        client.set_read_timeout(std::chrono::seconds(5));
        auto res = get_ ? client.Get(target_.path)
                        : client.Post(target_.path, render_term(ex.body), "text/plain");
        std::string where = target_.host + ":" + std::to_string(target_.port) + target_.path;
        if (!res)
            throw Error(Errc::ConnectionRefused, "request to " + where + " failed: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw Error(Errc::HttpStatus, where + " answered " + std::to_string(res->status),
                        std::to_string(res->status));
        if (reply_to_ && !res->body.empty()) {
            Headers h;
            h.emplace("httpStatus", Term::number(res->status));
            route_.bus().send_to(*reply_to_, std::move(h), parse_or_string(res->body), route_);
        }
    }

private:
    HttpTarget target_;
    bool get_;
    std::optional<EndpointUri> reply_to_;
    RouteContext& route_;
};

bool method_is_get(const EndpointUri& uri) {
    std::string m = uri.param_or("method", "POST");
    if (m == "GET") return true;
    if (m == "POST") return false;
    throw Error(Errc::BadParam, "method must be GET or POST, got '" + m + "'");
}

}  // namespace

std::unique_ptr<Consumer> HttpLiteComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    return std::make_unique<HttpConsumer>(parse_http_target(uri.path), route);
}

std::unique_ptr<Producer> HttpLiteComponent::create_producer(const EndpointUri& uri, RouteContext& route) {
    std::optional<EndpointUri> reply;
    if (auto r = uri.param("replyTo")) reply = parse_uri(*r);
    return std::make_unique<HttpProducer>(parse_http_target(uri.path), method_is_get(uri), std::move(reply), route);
}

}  // namespace masbus
