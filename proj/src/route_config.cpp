#include "masbus/route_config.hpp"

#include <expat.h>

#include <algorithm>
#include <memory>
#include <type_traits>
#include <optional>
#include <set>

namespace masbus {

// aliases

void AliasTable::add(const std::string& scheme, const std::string& component) {
    if (!is_valid_scheme(scheme)) throw Error(Errc::BadScheme, "invalid alias scheme '" + scheme + "'");
    if (!is_valid_scheme(component)) throw Error(Errc::BadScheme, "invalid alias target '" + component + "'");
    for (const auto& [s, c] : entries_) {
        if (s != scheme) continue;
        if (c == component) return;
        throw Error(Errc::DuplicateScheme, "alias '" + scheme + "' already points at '" + c + "'");
    }
    entries_.emplace_back(scheme, component);
}

void AliasTable::merge(const AliasTable& other) {
    for (const auto& [s, c] : other.entries_) add(s, c);
}

std::string AliasTable::resolve(std::string_view scheme) const {
    for (const auto& [s, c] : entries_)
        if (s == scheme) return c;
    return std::string(scheme);
}

std::pair<std::string, std::string> parse_alias_spec(std::string_view text) {
    auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size())
        throw Error(Errc::BadParam, "alias must look like scheme=component, got '" + std::string(text) + "'");
    return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

void apply_aliases(Bus& bus, const AliasTable& aliases) {
    for (const auto& [scheme, target] : aliases.entries()) {
        if (!bus.has_component(target))
            throw Error(Errc::UnknownScheme, "alias '" + scheme + "' targets unknown component '" + target + "'");
        if (bus.has_component(scheme) && bus.component(scheme) == bus.component(target)) continue;
        bus.register_component(scheme, bus.component(target));
    }
}

std::vector<std::string> unresolved_schemes(const RouteFile& file, const Bus& bus, const AliasTable& extra) {
    AliasTable aliases = file.aliases;
    aliases.merge(extra);
    std::set<std::string> missing;
    auto check = [&](const EndpointUri& uri) {
        if (!bus.has_component(aliases.resolve(uri.scheme))) missing.insert(uri.scheme);
    };
    for (const auto& r : file.routes) {
        check(r.from);
        for (const auto& t : r.to) check(t);
    }
    return {missing.begin(), missing.end()};
}

// XML parsing

namespace {

enum class Scope { Document, Routes, Aliases, Alias, Route, From, To, Transform, SetHeader, Constant, Done };

struct ParseState {
    XML_Parser parser = nullptr;
    std::optional<Error> error;
    std::vector<Scope> stack;
    RouteFile file;

    // current route
    RouteDefinition route;
    SourceLocation route_at;
    bool has_from = false;
    bool seen_to = false;
    std::set<std::string> ids;

    // current setHeader
    std::string header_name;
    SourceLocation header_at;
    bool has_constant = false;
    std::string constant_buf;

    SourceLocation here() const {
        return {static_cast<std::size_t>(XML_GetCurrentLineNumber(parser)),
                static_cast<std::size_t>(XML_GetCurrentColumnNumber(parser)) + 1};
    }

    void fail(Errc code, const std::string& message) { fail_at(code, message, here()); }

    void fail_at(Errc code, const std::string& message, SourceLocation where) {
        if (error) return;
        error.emplace(code, message, where);
        XML_StopParser(parser, XML_FALSE);
    }
};

using Attrs = std::vector<std::pair<std::string, std::string>>;

Attrs collect(const XML_Char** atts) {
    Attrs out;
    for (int i = 0; atts[i]; i += 2) out.emplace_back(atts[i], atts[i + 1]);
    return out;
}

// Returns false (after recording the error) when an attribute outside
// `allowed` is present or a `required` one is missing.
bool check_attrs(ParseState& st, std::string_view element, const Attrs& attrs,
                 std::initializer_list<std::string_view> allowed, std::initializer_list<std::string_view> required) {
    for (const auto& [k, v] : attrs) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            st.fail(Errc::UnknownAttribute, "<" + std::string(element) + "> does not take attribute '" + k + "'");
            return false;
        }
    }
    for (auto r : required) {
        bool found = std::any_of(attrs.begin(), attrs.end(), [&](const auto& kv) { return kv.first == r; });
        if (!found) {
            st.fail(Errc::MissingAttribute, "<" + std::string(element) + "> needs attribute '" + std::string(r) + "'");
            return false;
        }
    }
    return true;
}

std::string attr(const Attrs& attrs, std::string_view key) {
    for (const auto& [k, v] : attrs)
        if (k == key) return v;
    return {};
}

std::optional<EndpointUri> uri_attr(ParseState& st, const Attrs& attrs) {
    std::string text = attr(attrs, "uri");
    try {
        return parse_uri(text);
    } catch (const Error& e) {
        st.fail(Errc::BadUri, "bad uri '" + text + "': " + e.what());
        return std::nullopt;
    }
}

void on_start(void* data, const XML_Char* name_c, const XML_Char** atts) {
    auto& st = *static_cast<ParseState*>(data);
    if (st.error) return;
    std::string name = name_c;
    Attrs attrs = collect(atts);
    Scope parent = st.stack.back();
    auto unknown = [&] {
        st.fail(Errc::UnknownElement, "unexpected element <" + name + ">");
    };

    switch (parent) {
        case Scope::Document:
            if (name != "routes") return unknown();
            if (!check_attrs(st, name, attrs, {}, {})) return;
            st.stack.push_back(Scope::Routes);
            return;
        case Scope::Routes:
            if (name == "aliases") {
                if (!check_attrs(st, name, attrs, {}, {})) return;
                st.stack.push_back(Scope::Aliases);
            } else if (name == "route") {
                if (!check_attrs(st, name, attrs, {"id"}, {})) return;
                st.route = RouteDefinition{};
                st.route.route_id = attr(attrs, "id");
                if (st.route.route_id.empty()) st.route.route_id = "route-" + std::to_string(st.file.routes.size() + 1);
                if (!st.ids.insert(st.route.route_id).second)
                    return st.fail(Errc::DuplicateRouteId, "route id '" + st.route.route_id + "' is used twice");
                st.route_at = st.here();
                st.has_from = false;
                st.seen_to = false;
                st.stack.push_back(Scope::Route);
            } else {
                unknown();
            }
            return;
        case Scope::Aliases:
            if (name != "alias") return unknown();
            if (!check_attrs(st, name, attrs, {"scheme", "component"}, {"scheme", "component"})) return;
            try {
                st.file.aliases.add(attr(attrs, "scheme"), attr(attrs, "component"));
            } catch (const Error& e) {
                return st.fail(e.code(), e.what());
            }
            st.stack.push_back(Scope::Alias);
            return;
        case Scope::Route:
            if (name == "from") {
                if (st.has_from) return st.fail(Errc::DuplicateFrom, "route '" + st.route.route_id + "' has a second <from>");
                if (!check_attrs(st, name, attrs, {"uri"}, {"uri"})) return;
                auto uri = uri_attr(st, attrs);
                if (!uri) return;
                st.route.from = *uri;
                st.has_from = true;
                st.stack.push_back(Scope::From);
                return;
            }
            if (name != "to" && name != "setHeader" && name != "transform") return unknown();
            if (!st.has_from)
                return st.fail(Errc::MissingFrom, "<" + name + "> before <from> in route '" + st.route.route_id + "'");
            if (name == "to") {
                if (!check_attrs(st, name, attrs, {"uri"}, {"uri"})) return;
                auto uri = uri_attr(st, attrs);
                if (!uri) return;
                st.route.to.push_back(*uri);
                st.seen_to = true;
                st.stack.push_back(Scope::To);
                return;
            }
            if (st.seen_to)
                return st.fail(Errc::OrderViolation, "<" + name + "> after <to> in route '" + st.route.route_id + "'");
            if (name == "transform") {
                if (!check_attrs(st, name, attrs, {"ref"}, {"ref"})) return;
                std::string ref = attr(attrs, "ref");
                if (ref.empty()) return st.fail(Errc::MissingAttribute, "<transform> needs a non-empty ref");
                st.route.processors.push_back(ProcessorSpec::transform(ref));
                st.stack.push_back(Scope::Transform);
                return;
            }
            if (!check_attrs(st, name, attrs, {"headerName"}, {"headerName"})) return;
            st.header_name = attr(attrs, "headerName");
            if (st.header_name.empty()) return st.fail(Errc::MissingAttribute, "<setHeader> needs a non-empty headerName");
            st.header_at = st.here();
            st.has_constant = false;
            st.stack.push_back(Scope::SetHeader);
            return;
        case Scope::SetHeader:
            if (name != "constant") return unknown();
            if (st.has_constant) return st.fail(Errc::UnknownElement, "<setHeader> takes a single <constant>");
            if (!check_attrs(st, name, attrs, {}, {})) return;
            st.constant_buf.clear();
            st.stack.push_back(Scope::Constant);
            return;
        default:
            return unknown();
    }
}

void on_end(void* data, const XML_Char*) {
    auto& st = *static_cast<ParseState*>(data);
    if (st.error) return;
    Scope scope = st.stack.back();
    switch (scope) {
        case Scope::Route:
            if (!st.has_from)
                return st.fail_at(Errc::MissingFrom, "route '" + st.route.route_id + "' has no <from>", st.route_at);
            if (st.route.to.empty())
                return st.fail_at(Errc::MissingTo, "route '" + st.route.route_id + "' has no <to>", st.route_at);
            st.file.routes.push_back(std::move(st.route));
            break;
        case Scope::SetHeader:
            if (!st.has_constant)
                return st.fail_at(Errc::MissingAttribute, "<setHeader> needs a <constant> child", st.header_at);
            break;
        case Scope::Constant:
            try {
                st.route.processors.push_back(ProcessorSpec::set_header(st.header_name, constant(st.constant_buf)));
            } catch (const Error& e) {
                return st.fail(e.code(), e.what());
            }
            st.has_constant = true;
            break;
        case Scope::Routes:
            st.stack.pop_back();
            st.stack.push_back(Scope::Done);
            return;
        default:
            break;
    }
    st.stack.pop_back();
}

void on_text(void* data, const XML_Char* s, int len) {
    auto& st = *static_cast<ParseState*>(data);
    if (st.error) return;
    std::string_view text(s, static_cast<std::size_t>(len));
    if (st.stack.back() == Scope::Constant) {
        st.constant_buf.append(text);
        return;
    }
    if (text.find_first_not_of(" \t\r\n") != std::string_view::npos)
        st.fail(Errc::UnexpectedText, "unexpected text '" + std::string(text) + "'");
}

}  // namespace

RouteFile parse_routes_xml(std::string_view text, std::string source) {
    ParseState st;
    st.file.source = std::move(source);
    st.stack.push_back(Scope::Document);
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                                      &XML_ParserFree);
    if (!parser) throw Error(Errc::XmlSyntax, "cannot create XML parser");
    st.parser = parser.get();
    XML_SetUserData(st.parser, &st);
    XML_SetElementHandler(st.parser, on_start, on_end);
    XML_SetCharacterDataHandler(st.parser, on_text);

    auto status = XML_Parse(st.parser, text.data(), static_cast<int>(text.size()), XML_TRUE);
    if (st.error) throw *st.error;
    if (status != XML_STATUS_OK) {
        SourceLocation at{static_cast<std::size_t>(XML_GetCurrentLineNumber(st.parser)),
                          static_cast<std::size_t>(XML_GetCurrentColumnNumber(st.parser)) + 1};
        throw Error(Errc::XmlSyntax, XML_ErrorString(XML_GetErrorCode(st.parser)), at);
    }
    return std::move(st.file);
}

// rendering

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_routes_xml(const std::vector<RouteDefinition>& routes, const AliasTable& aliases) {
    std::string out = "<routes>\n";
    if (!aliases.empty()) {
        out += "  <aliases>\n";
        for (const auto& [s, c] : aliases.entries())
            out += "    <alias scheme=\"" + xml_escape(s) + "\" component=\"" + xml_escape(c) + "\"/>\n";
        out += "  </aliases>\n";
    }
    for (const auto& r : routes) {
        out += "  <route";
        if (!r.route_id.empty()) out += " id=\"" + xml_escape(r.route_id) + "\"";
        out += ">\n";
        out += "    <from uri=\"" + xml_escape(format_uri(r.from)) + "\"/>\n";
        for (const auto& p : r.processors) {
            if (p.kind == ProcessorSpec::Kind::Transform) {
                out += "    <transform ref=\"" + xml_escape(p.name) + "\"/>\n";
            } else {
                out += "    <setHeader headerName=\"" + xml_escape(p.name) + "\"><constant>" +
                       xml_escape(constant_text(p.value)) + "</constant></setHeader>\n";
            }
        }
        for (const auto& t : r.to) out += "    <to uri=\"" + xml_escape(format_uri(t)) + "\"/>\n";
        out += "  </route>\n";
    }
    out += "</routes>\n";
    return out;
}

// builder

namespace {

EndpointUri builder_uri(std::string_view text) {
    try {
        return parse_uri(text);
    } catch (const Error& e) {
        throw Error(Errc::BadUri, "bad uri '" + std::string(text) + "': " + e.what(), std::string(to_string(e.code())));
    }
}

}  // namespace

RouteBuilder& RouteBuilder::id(std::string route_id) {
    def_.route_id = std::move(route_id);
    return *this;
}

RouteBuilder& RouteBuilder::from(std::string_view uri) { return from(builder_uri(uri)); }

RouteBuilder& RouteBuilder::from(EndpointUri uri) {
    if (has_from_) throw Error(Errc::OrderViolation, "from() called twice");
    def_.from = std::move(uri);
    has_from_ = true;
    return *this;
}

RouteBuilder& RouteBuilder::set_header(std::string name, Term value) {
    if (!has_from_) throw Error(Errc::OrderViolation, "set_header() before from()");
    if (!def_.to.empty()) throw Error(Errc::OrderViolation, "set_header() after to()");
    if (name.empty()) throw Error(Errc::InvalidRoute, "set_header() needs a header name");
    def_.processors.push_back(ProcessorSpec::set_header(std::move(name), std::move(value)));
    return *this;
}

RouteBuilder& RouteBuilder::transform(std::string name) {
    if (!has_from_) throw Error(Errc::OrderViolation, "transform() before from()");
    if (!def_.to.empty()) throw Error(Errc::OrderViolation, "transform() after to()");
    if (name.empty()) throw Error(Errc::InvalidRoute, "transform() needs a name");
    def_.processors.push_back(ProcessorSpec::transform(std::move(name)));
    return *this;
}

RouteBuilder& RouteBuilder::to(std::string_view uri) { return to(builder_uri(uri)); }

RouteBuilder& RouteBuilder::to(EndpointUri uri) {
    if (!has_from_) throw Error(Errc::OrderViolation, "to() before from()");
    def_.to.push_back(std::move(uri));
    return *this;
}

RouteDefinition RouteBuilder::build() const {
    if (!has_from_) throw Error(Errc::Incomplete, "route has no from()");
    if (def_.to.empty()) throw Error(Errc::Incomplete, "route has no to()");
    return def_;
}

}  // namespace masbus
