#include "masbus/uri.hpp"

#include <algorithm>
#include <cctype>

#include "masbus/error.hpp"

namespace masbus {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

bool is_valid_scheme(std::string_view scheme) {
    if (scheme.empty() || scheme.front() < 'a' || scheme.front() > 'z') return false;
    return std::all_of(scheme.begin(), scheme.end(),
                       [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); });
}

std::optional<std::string> EndpointUri::param(std::string_view key) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    return std::nullopt;
}

std::string EndpointUri::param_or(std::string_view key, std::string fallback) const {
    auto v = param(key);
    return v ? *v : std::move(fallback);
}

EndpointUri parse_uri(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) throw Error(Errc::EmptyInput, "endpoint uri is empty");

    auto colon = s.find(':');
    if (colon == std::string_view::npos)
        throw Error(Errc::MissingScheme, "no ':' in endpoint uri '" + std::string(s) + "'");

    EndpointUri uri;
    std::string_view scheme = trim(s.substr(0, colon));
    if (scheme.empty()) throw Error(Errc::MissingScheme, "empty scheme in '" + std::string(s) + "'");
    if (!is_valid_scheme(scheme))
        throw Error(Errc::BadScheme, "scheme '" + std::string(scheme) + "' must match [a-z][a-z0-9]*");
    uri.scheme = std::string(scheme);

    std::string_view rest = s.substr(colon + 1);
    auto question = rest.find('?');
    uri.path = std::string(trim(rest.substr(0, question)));
    if (question == std::string_view::npos) return uri;

    std::string_view query = trim(rest.substr(question + 1));
    if (query.empty()) return uri;

    std::size_t start = 0;
    while (start <= query.size()) {
        auto amp = query.find('&', start);
        std::string_view pair = query.substr(start, amp == std::string_view::npos ? query.npos : amp - start);
        auto eq = pair.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::BadParam, "parameter '" + std::string(trim(pair)) + "' has no '='");
        std::string key(trim(pair.substr(0, eq)));
        if (key.empty()) throw Error(Errc::BadParam, "parameter with empty key");
        if (uri.param(key)) throw Error(Errc::DuplicateParamKey, "duplicate parameter '" + key + "'");
        uri.params.emplace_back(std::move(key), std::string(trim(pair.substr(eq + 1))));
        if (amp == std::string_view::npos) break;
        start = amp + 1;
    }
    return uri;
}

std::string format_uri(const EndpointUri& uri) {
    std::string out = uri.scheme + ":" + uri.path;
    char sep = '?';
    for (const auto& [k, v] : uri.params) {
        out += sep;
        out += k;
        out += '=';
        out += v;
        sep = '&';
    }
    return out;
}

}  // namespace masbus
