#include "masbus/components/tcpline.hpp"

#include "masbus/components/core.hpp"
#include "masbus/net.hpp"

namespace masbus {

namespace {

class TcpLineConsumer final : public Consumer {
public:
    TcpLineConsumer(std::string host, std::uint16_t port, RouteContext& route)
        : listener_(std::move(host), port, [&route](const std::string& line) {
              route.submit(route.make_exchange({}, parse_or_string(line)));
          }) {}

    void start() override { listener_.start(); }
    void stop() override { listener_.stop(); }

private:
    TcpLineListener listener_;
};

class TcpLineProducer final : public Producer {
public:
    TcpLineProducer(std::string host, std::uint16_t port, std::chrono::milliseconds ack)
        : host_(std::move(host)), port_(port), ack_(ack) {}

    void deliver(const Exchange& ex) override { send_line(host_, port_, render_term(ex.body), ack_); }

private:
    std::string host_;
    std::uint16_t port_;
    std::chrono::milliseconds ack_;
};

}  // namespace

std::unique_ptr<Consumer> TcpLineComponent::create_consumer(const EndpointUri& uri, RouteContext& route) {
    auto [host, port] = split_host_port(uri.path);
    return std::make_unique<TcpLineConsumer>(host, port, route);
}

std::unique_ptr<Producer> TcpLineComponent::create_producer(const EndpointUri& uri, RouteContext&) {
    auto [host, port] = split_host_port(uri.path);
    long long ack = uri.param("ackTimeoutMs") ? require_int_param(uri, "ackTimeoutMs") : 0;
    return std::make_unique<TcpLineProducer>(host, port, std::chrono::milliseconds{ack});
}

}  // namespace masbus
