#pragma once

#include "masbus/bus.hpp"

namespace masbus {

/// `httplite:<host>:<port>/<path>[?method=GET|POST][&replyTo=<uri>]`
///
/// Producer: sends the rendered body (POST, the default) or a bare GET.
/// Non-2xx answers throw HttpStatus, unreachable servers ConnectionRefused.
/// With replyTo, a non-empty response body is forwarded to that endpoint
/// with an httpStatus header.
///
/// Consumer: serves <path> and turns each request into an exchange with
/// httpMethod and httpPath headers, answering 200 once it is queued.
class HttpLiteComponent final : public Component {
public:
    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override;
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;
};

struct HttpTarget {
    std::string host;
    std::uint16_t port = 0;
    std::string path = "/";
};

/// Splits `host:port/path`; throws BadParam.
HttpTarget parse_http_target(const std::string& uri_path);

}  // namespace masbus
