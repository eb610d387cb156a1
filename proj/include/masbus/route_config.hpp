#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "masbus/bus.hpp"

namespace masbus {

/// Extra scheme names that resolve to an already registered component,
/// e.g. mqtt -> mqttlite. Declared in a route file's <aliases> block or on
/// the command line.
class AliasTable {
public:
    /// Throws BadScheme for invalid names and DuplicateScheme when `scheme`
    /// is already aliased to a different component.
    void add(const std::string& scheme, const std::string& component);
    /// Merges `other` into this table with the same rules as add().
    void merge(const AliasTable& other);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    /// The component name for `scheme`, or `scheme` itself when unaliased.
    std::string resolve(std::string_view scheme) const;

    friend bool operator==(const AliasTable&, const AliasTable&) = default;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses `scheme=component`; throws BadParam.
std::pair<std::string, std::string> parse_alias_spec(std::string_view text);

/// Registers every alias on the bus as another name for its target
/// component instance. Throws UnknownScheme when the target is missing.
void apply_aliases(Bus& bus, const AliasTable& aliases);

struct RouteFile {
    std::string source;
    AliasTable aliases;
    std::vector<RouteDefinition> routes;
};

/// Root <routes>, optional <aliases>, then <route id="..."> elements holding
/// one <from uri>, any number of <setHeader headerName><constant>v</constant>
/// </setHeader> and <transform ref/>, and one or more <to uri>. Routes
/// without an id become route-<n> (1-based document position).
///
/// Every error is an Error carrying the line and column of the offending
/// element.
RouteFile parse_routes_xml(std::string_view text, std::string source = {});

std::string render_routes_xml(const std::vector<RouteDefinition>& routes, const AliasTable& aliases = {});

/// Schemes used by `file` (from and to endpoints) that the bus cannot
/// resolve, after applying the file's aliases. Sorted, unique.
std::vector<std::string> unresolved_schemes(const RouteFile& file, const Bus& bus, const AliasTable& extra = {});

/// Fluent route construction mirroring the XML shape:
///   RouteBuilder().from(u).set_header(h, constant(v)).to(u2).build()
/// Out-of-order calls throw OrderViolation, build() on a route without from
/// or to throws Incomplete, unparsable URIs throw BadUri.
class RouteBuilder {
public:
    RouteBuilder() = default;
    explicit RouteBuilder(std::string route_id) { def_.route_id = std::move(route_id); }

    RouteBuilder& id(std::string route_id);
    RouteBuilder& from(std::string_view uri);
    RouteBuilder& from(EndpointUri uri);
    RouteBuilder& set_header(std::string name, Term value);
    RouteBuilder& transform(std::string name);
    RouteBuilder& to(std::string_view uri);
    RouteBuilder& to(EndpointUri uri);

    RouteDefinition build() const;

private:
    RouteDefinition def_;
    bool has_from_ = false;
};

}  // namespace masbus
