#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace masbus {

/// `scheme:path?k1=v1&k2=v2`. Params keep insertion order and have unique keys.
struct EndpointUri {
    std::string scheme;
    std::string path;
    std::vector<std::pair<std::string, std::string>> params;

    std::optional<std::string> param(std::string_view key) const;
    std::string param_or(std::string_view key, std::string fallback) const;

    friend bool operator==(const EndpointUri&, const EndpointUri&) = default;
};

/// Accepts the typeset form used in route listings: whitespace around `:`,
/// `?`, `=` and `&` is dropped. Values are taken verbatim up to the next `&`,
/// so `host=tcp://broker` keeps its `://`.
EndpointUri parse_uri(std::string_view text);

std::string format_uri(const EndpointUri& uri);

bool is_valid_scheme(std::string_view scheme);

}  // namespace masbus
