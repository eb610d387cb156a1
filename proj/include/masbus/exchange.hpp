#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "masbus/term.hpp"

namespace masbus {

using Headers = std::map<std::string, Term, std::less<>>;

/// The envelope a consumer builds and producers decode. `trace` starts with
/// the consumer endpoint and grows by one entry per producer hand-off.
struct Exchange {
    std::string id;
    Headers headers;
    Term body;
    std::chrono::steady_clock::time_point created_at;
    std::vector<std::string> trace;

    const Term* header(std::string_view name) const {
        auto it = headers.find(name);
        return it == headers.end() ? nullptr : &it->second;
    }
};

}  // namespace masbus
