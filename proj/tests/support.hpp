#pragma once

// Shared test helpers: reference implementations written independently of
// the library, plus small components for driving routes by hand.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "masbus/bus.hpp"
#include "masbus/net.hpp"
#include "masbus/term.hpp"

namespace testsupport {

using namespace masbus;

// Great-circle distance via 3D unit vectors and atan2(|p x q|, p . q). Shares
// no code or formula with the haversine in the library.
inline double oracle_distance_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double r = 6371.0;
    auto rad = [](double d) { return d * std::numbers::pi / 180.0; };
    auto vec = [&](double lat, double lon) {
        return std::array<double, 3>{std::cos(rad(lat)) * std::cos(rad(lon)), std::cos(rad(lat)) * std::sin(rad(lon)),
                                     std::sin(rad(lat))};
    };
    auto p = vec(lat1, lon1), q = vec(lat2, lon2);
    std::array<double, 3> c{p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]};
    double cross = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    return r * std::atan2(cross, dot);
}

// Canonical URI text written from the grammar: drop whitespace around the
// delimiters, keep everything else.
inline std::string oracle_canonical_uri(const std::string& s) {
    auto strip = [](std::string x) {
        auto b = x.find_first_not_of(" \t");
        auto e = x.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    auto colon = s.find(':');
    std::string out = strip(s.substr(0, colon)) + ":";
    std::string rest = s.substr(colon + 1);
    auto q = rest.find('?');
    out += strip(rest.substr(0, q));
    if (q == std::string::npos) return out;
    std::string query = rest.substr(q + 1);
    char sep = '?';
    std::size_t start = 0;
    while (start <= query.size()) {
        auto amp = query.find('&', start);
        std::string pair = query.substr(start, amp == std::string::npos ? std::string::npos : amp - start);
        auto eq = pair.find('=');
        out += sep;
        out += strip(pair.substr(0, eq)) + "=" + strip(pair.substr(eq + 1));
        sep = '&';
        if (amp == std::string::npos) break;
        start = amp + 1;
    }
    return out;
}

// Random term generator covering every kind, quoted atoms and escapes.
class TermGen {
public:
    explicit TermGen(std::uint64_t seed) : rng_(seed) {}

    Term term(int depth = 0) {
        int kind = pick(0, depth >= 3 ? 2 : 4);
        switch (kind) {
            case 0: return Term::atom(atom_name());
            case 1: return Term::number(number());
            case 2: return Term::string(text());
            case 3: {
                std::vector<Term> args;
                int n = pick(1, 3);
                for (int i = 0; i < n; ++i) args.push_back(term(depth + 1));
                return Term::structure(atom_name(), std::move(args));
            }
            default: {
                std::vector<Term> items;
                int n = pick(0, 3);
                for (int i = 0; i < n; ++i) items.push_back(term(depth + 1));
                return Term::list(std::move(items));
            }
        }
    }

    std::string atom_name() {
        static const std::vector<std::string> names = {"a", "done", "giveDistance", "pos", "x_1", "TrackedArtifact",
                                                       "hello world", "it's", "Q", "z9", "with\"quote", "back\\slash",
                                                       "_under", "new\nline"};
        return names[static_cast<std::size_t>(pick(0, static_cast<int>(names.size()) - 1))];
    }

    double number() {
        switch (pick(0, 3)) {
            case 0: return pick(-1000, 1000);
            case 1: return std::uniform_real_distribution<double>(-180, 180)(rng_);
            case 2: return std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng_), pick(-30, 30));
            default: return 0.5 * pick(-9, 9);
        }
    }

    std::string text() {
        static const std::string alphabet = "abcXYZ 019,()[]'\"\\\n\t-.";
        std::string s;
        int n = pick(0, 8);
        for (int i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(pick(0, static_cast<int>(alphabet.size()) - 1))];
        return s;
    }

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// `manual:<name>` consumer whose route the test feeds directly, and a
// `fail:<name>` producer that always throws.
class ManualComponent final : public Component {
public:
    std::unique_ptr<Consumer> create_consumer(const EndpointUri& uri, RouteContext& route) override {
        struct C final : Consumer {
            C(ManualComponent& o, std::string n, RouteContext& r) : owner(o), name(std::move(n)), route(r) {}
            void start() override {
                std::lock_guard lock(owner.mu);
                owner.routes[name] = &route;
            }
            void stop() override {
                std::lock_guard lock(owner.mu);
                owner.routes.erase(name);
            }
            ManualComponent& owner;
            std::string name;
            RouteContext& route;
        };
        return std::make_unique<C>(*this, uri.path, route);
    }

    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext&) override {
        struct P final : Producer {
            explicit P(std::string n) : name(std::move(n)) {}
            void deliver(const Exchange&) override { throw Error(Errc::ConnectionRefused, "fail:" + name + " always fails"); }
            std::string name;
        };
        return std::make_unique<P>(uri.path);
    }

    /// Creates and queues an exchange on the route consuming `manual:<name>`;
    /// returns its id, or an empty string when no route is bound.
    std::string emit(const std::string& name, Term body, Headers headers = {}) {
        RouteContext* r = nullptr;
        {
            std::lock_guard lock(mu);
            auto it = routes.find(name);
            if (it != routes.end()) r = it->second;
        }
        if (!r) return {};
        Exchange ex = r->make_exchange(std::move(headers), std::move(body));
        std::string id = ex.id;
        r->submit(std::move(ex));
        return id;
    }

    bool bound(const std::string& name) {
        std::lock_guard lock(mu);
        return routes.contains(name);
    }

    std::mutex mu;
    std::map<std::string, RouteContext*> routes;
};

// Random route covering every processor kind, multi-valued params and text
// that needs XML escaping. Ids are left empty now and then.
inline RouteDefinition random_route(TermGen& gen, std::size_t index) {
    static const std::vector<std::string> schemes = {"direct", "mock", "jason", "artifact", "mqtt", "telegram", "x9"};
    static const std::vector<std::string> paths = {"", "a", "DummyCustomerAgent", "bots/sometoken", "cartago",
                                                   "127.0.0.1:8080/orders", "foo"};
    static const std::vector<std::string> values = {"1", "-364531", "tcp://broker", "a<b", "x;y>", "q\"uote",
                                                    "it's", "", "latLong"};
    static const std::vector<std::string> headers = {"ArtifactName", "OperationName", "h", "a<&>b", "x-y"};
    auto pick = [&](const std::vector<std::string>& v) {
        return v[static_cast<std::size_t>(gen.pick(0, static_cast<int>(v.size()) - 1))];
    };
    auto uri = [&] {
        EndpointUri u{pick(schemes), pick(paths), {}};
        int n = gen.pick(0, 3);
        for (int k = 0; k < n; ++k) u.params.emplace_back("k" + std::to_string(k), pick(values));
        return u;
    };
    RouteDefinition d;
    if (gen.pick(0, 4) != 0) d.route_id = "r" + std::to_string(index) + (gen.pick(0, 1) ? "_x" : "");
    d.from = uri();
    int procs = gen.pick(0, 4);
    for (int i = 0; i < procs; ++i) {
        if (gen.pick(0, 3) == 0)
            d.processors.push_back(ProcessorSpec::transform("t" + std::to_string(gen.pick(0, 9))));
        else
            d.processors.push_back(ProcessorSpec::set_header(pick(headers), gen.term()));
    }
    int tos = gen.pick(1, 3);
    for (int i = 0; i < tos; ++i) d.to.push_back(uri());
    return d;
}

inline RouteDefinition route(std::string id, const std::string& from, std::vector<std::string> to,
                             std::vector<ProcessorSpec> processors = {}) {
    RouteDefinition d;
    d.route_id = std::move(id);
    d.from = parse_uri(from);
    for (const auto& t : to) d.to.push_back(parse_uri(t));
    d.processors = std::move(processors);
    return d;
}

// A port nobody listens on right now.
inline std::uint16_t free_port() {
    TcpLineListener probe("127.0.0.1", 0, [](const std::string&) {});
    probe.start();
    auto port = probe.port();
    probe.stop();
    return port;
}

// Polls `pred` until true or the timeout expires.
inline bool eventually(const std::function<bool()>& pred, std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (pred()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    return pred();
}

}  // namespace testsupport
