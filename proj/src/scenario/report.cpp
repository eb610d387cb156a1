#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "masbus/artifacts.hpp"
#include "masbus/scenario.hpp"

namespace masbus {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

bool valid_name(const std::string& s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool valid_position(const LatLon& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90 && p.lat <= 90 && p.lon >= -180 &&
           p.lon <= 180;
}

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::InvalidConfig, why); }

}  // namespace

// Names the scenario uses for its own agents; suppliers cannot take them.
static const std::set<std::string> kReservedNames = {"production_agent", "distribution_agent", "delivery_agent",
                                                     "DummyCustomerAgent"};

void validate_config(const ScenarioConfig& cfg) {
    if (cfg.supplier_quotes.size() < 2) bad("need at least 2 supplier quotes, got " + std::to_string(cfg.supplier_quotes.size()));
    std::set<std::string> names;
    for (const auto& q : cfg.supplier_quotes) {
        if (!valid_name(q.name)) bad("supplier name '" + q.name + "' must match [A-Za-z][A-Za-z0-9_]*");
        if (kReservedNames.contains(q.name)) bad("supplier name '" + q.name + "' is reserved");
        if (!names.insert(q.name).second) bad("supplier '" + q.name + "' is listed twice");
        if (!std::isfinite(q.price) || q.price < 0) bad("supplier '" + q.name + "' has an invalid price");
    }
    if (cfg.track_waypoints.size() < 2) bad("need at least 2 waypoints, got " + std::to_string(cfg.track_waypoints.size()));
    for (const auto& w : cfg.track_waypoints)
        if (!valid_position(w)) bad("waypoint out of range");
    if (!valid_position(cfg.destination)) bad("destination out of range");
    if (!(cfg.near_threshold_km > 0) || !std::isfinite(cfg.near_threshold_km)) bad("near_threshold_km must be positive");
    if (cfg.tick_period_ms <= 0) bad("tick_period_ms must be positive");
    if (cfg.stage_timeout_ms <= 0) bad("stage_timeout_ms must be positive");
    if (cfg.chat_id.empty()) bad("chat_id must not be empty");
    if (cfg.chat_token.empty() || cfg.chat_token.find_first_of("?&=/ ") != std::string::npos)
        bad("chat_token must be a non-empty token without ?&=/ or spaces");
    if (cfg.chat_id.find_first_of("?&= ") != std::string::npos) bad("chat_id must not contain ?&= or spaces");
    if (!is_bare_atom(cfg.product)) bad("product must be a lower-case atom");
}

std::vector<LatLon> generate_waypoints(std::uint64_t seed, LatLon destination, double threshold_km, std::size_t count) {
    if (count < 2) count = 2;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> bearing_d(0.0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> dist_d(15.0, 40.0);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    double bearing = bearing_d(rng);
    double start_km = dist_d(rng);
    // small-offset approximation is plenty for a synthetic path
    auto offset = [&](double km, double b) {
        double dlat = km * std::cos(b) / 111.32;
        double dlon = km * std::sin(b) / (111.32 * std::max(0.01, std::cos(destination.lat * std::numbers::pi / 180)));
        return LatLon{std::clamp(destination.lat + dlat, -90.0, 90.0), std::clamp(destination.lon + dlon, -180.0, 180.0)};
    };
    std::vector<LatLon> out;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        double frac = 1.0 - static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(offset(start_km * frac, bearing + jitter(rng) * frac));
    }
    out.push_back(offset(threshold_km * 0.4, bearing));
    return out;
}

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.supplier_quotes = {{"alpha", 10.0}, {"beta", 7.5}, {"gamma", 9.0}};
    cfg.destination = {45.0703, 7.6869};
    cfg.track_waypoints = {{45.2100, 7.4200}, {45.1700, 7.5100}, {45.1300, 7.5800},
                           {45.0950, 7.6400}, {45.0760, 7.6780}, {45.0705, 7.6866}};
    cfg.near_threshold_km = 1.0;
    return cfg;
}

ScenarioConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("config must be a JSON object");
    static const std::set<std::string> known = {"seed", "supplier_quotes", "track_waypoints", "generated_waypoints",
                                                "destination", "near_threshold_km", "tick_period_ms",
                                                "stage_timeout_ms", "chat_id", "chat_token", "product"};
    for (const auto& [k, v] : j.items())
        if (!known.contains(k)) bad("unknown config field '" + k + "'");

    ScenarioConfig cfg;
    auto latlon = [](const json& v, const std::string& what) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            bad(what + " must be [lat, lon]");
        return LatLon{v[0].get<double>(), v[1].get<double>()};
    };
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (!j.contains("supplier_quotes") || !j.at("supplier_quotes").is_array()) bad("supplier_quotes must be a list");
        for (const auto& q : j.at("supplier_quotes")) {
            if (!q.is_object() || !q.contains("name") || !q.contains("price")) bad("each quote needs name and price");
            cfg.supplier_quotes.push_back({q.at("name").get<std::string>(), q.at("price").get<double>()});
        }
        if (!j.contains("destination")) bad("destination is required");
        cfg.destination = latlon(j.at("destination"), "destination");
        if (j.contains("near_threshold_km")) cfg.near_threshold_km = j.at("near_threshold_km").get<double>();
        if (j.contains("tick_period_ms")) cfg.tick_period_ms = j.at("tick_period_ms").get<std::int64_t>();
        if (j.contains("stage_timeout_ms")) cfg.stage_timeout_ms = j.at("stage_timeout_ms").get<std::int64_t>();
        if (j.contains("chat_id")) cfg.chat_id = j.at("chat_id").get<std::string>();
        if (j.contains("chat_token")) cfg.chat_token = j.at("chat_token").get<std::string>();
        if (j.contains("product")) cfg.product = j.at("product").get<std::string>();
        if (j.contains("track_waypoints")) {
            if (!j.at("track_waypoints").is_array()) bad("track_waypoints must be a list");
            for (const auto& w : j.at("track_waypoints")) cfg.track_waypoints.push_back(latlon(w, "waypoint"));
        } else {
            std::size_t n = j.value("generated_waypoints", std::size_t{8});
            cfg.track_waypoints = generate_waypoints(cfg.seed, cfg.destination, cfg.near_threshold_km, n);
        }
    } catch (const json::exception& e) {
        bad(std::string("bad config value: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

std::string config_to_json(const ScenarioConfig& cfg) {
    ojson j;
    j["seed"] = cfg.seed;
    j["supplier_quotes"] = ojson::array();
    for (const auto& q : cfg.supplier_quotes) j["supplier_quotes"].push_back({{"name", q.name}, {"price", q.price}});
    j["track_waypoints"] = ojson::array();
    for (const auto& w : cfg.track_waypoints) j["track_waypoints"].push_back({w.lat, w.lon});
    j["destination"] = {cfg.destination.lat, cfg.destination.lon};
    j["near_threshold_km"] = cfg.near_threshold_km;
    j["tick_period_ms"] = cfg.tick_period_ms;
    j["stage_timeout_ms"] = cfg.stage_timeout_ms;
    j["chat_id"] = cfg.chat_id;
    j["chat_token"] = cfg.chat_token;
    j["product"] = cfg.product;
    return j.dump(2);
}

const SupplierQuote& best_quote(const std::vector<SupplierQuote>& quotes) {
    if (quotes.empty()) throw Error(Errc::InvalidConfig, "no quotes");
    const SupplierQuote* best = &quotes.front();
    for (const auto& q : quotes)
        if (q.price < best->price || (q.price == best->price && q.name < best->name)) best = &q;
    return *best;
}

ScenarioTimeout::ScenarioTimeout(std::string stage, std::int64_t waited_ms, ScenarioReport partial)
    : Error(Errc::StageTimeout, "stage " + stage + " not reached after " + std::to_string(waited_ms) + " ms", stage),
      stage_(std::move(stage)),
      waited_ms_(waited_ms),
      report_(std::move(partial)) {}

// report checks

std::vector<std::string> assert_report(const ScenarioReport& r, const ScenarioConfig& cfg) {
    std::vector<std::string> v;
    static const std::vector<std::string> order = {"i", "ii", "iii", "iv", "v"};

    std::vector<std::string> seen;
    for (const auto& s : r.stages) seen.push_back(s.stage);
    for (const auto& st : order)
        if (std::find(seen.begin(), seen.end(), st) == seen.end()) v.push_back("stage " + st + " never completed");
    for (std::size_t i = 1; i < r.stages.size(); ++i) {
        const auto& a = r.stages[i - 1];
        const auto& b = r.stages[i];
        auto rank = [&](const std::string& s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
        if (rank(b.stage) <= rank(a.stage) || b.seq <= a.seq || b.logical_ms < a.logical_ms || b.elapsed_ns < a.elapsed_ns)
            v.push_back("stage " + b.stage + " recorded out of order after stage " + a.stage);
    }

    const SupplierQuote& best = best_quote(cfg.supplier_quotes);
    if (r.winner_supplier != best.name)
        v.push_back("winner is '" + r.winner_supplier + "' but the cheapest quote is '" + best.name + "'");
    else if (!r.winner_price || *r.winner_price != best.price)
        v.push_back("winner price does not match the quoted " + std::to_string(best.price));

    if (!r.hire_message) {
        v.push_back("no hire message reached a supplier");
    } else {
        if (r.hire_message->performative != Performative::tell) v.push_back("hire message performative is not tell");
        if (r.hire_message->receiver != r.winner_supplier) v.push_back("hire message went to '" + r.hire_message->receiver + "'");
    }

    std::size_t rows = 0;
    for (const auto& row : r.chat_transcript)
        if (row.chat_id == cfg.chat_id) ++rows;
    if (rows != 1)
        v.push_back("expected exactly one transcript row for chatId " + cfg.chat_id + ", found " + std::to_string(rows));
    if (rows > 0) {
        auto stage_v = std::find_if(r.stages.begin(), r.stages.end(), [](const auto& s) { return s.stage == "v"; });
        if (!r.near_signal_seq || (stage_v != r.stages.end() && *r.near_signal_seq >= stage_v->seq))
            v.push_back("customer chat row without a preceding near_destination signal");
    }

    if (!r.dead_letters.empty()) {
        std::string first = r.dead_letters.front().route_id + " (" + r.dead_letters.front().cause + ")";
        v.push_back(std::to_string(r.dead_letters.size()) + " dead letter(s), first on " + first);
    }
    if (!r.delivery_order_ok) v.push_back("waypoints did not reach the tracker in publish order");
    if (r.erp_checkout_requests.size() != 1)
        v.push_back("expected one ERP checkout, found " + std::to_string(r.erp_checkout_requests.size()));
    if (r.timeout_stage) v.push_back("timed out waiting for stage " + *r.timeout_stage);
    for (const auto& e : r.effect_errors) v.push_back("agent effect failed: " + e);
    return v;
}

// JSON

namespace {

ojson to_ojson(const ScenarioReport& r, bool with_wall_clock) {
    ojson j;
    j["run_id"] = r.run_id;
    j["seed"] = r.seed;
    j["simulated_time"] = r.simulated_time;
    j["stages"] = ojson::array();
    for (const auto& s : r.stages) {
        ojson o{{"stage", s.stage}, {"seq", s.seq}, {"logical_ms", s.logical_ms}};
        if (with_wall_clock) o["elapsed_ns"] = s.elapsed_ns;
        j["stages"].push_back(o);
    }
    j["winner_supplier"] = r.winner_supplier;
    j["winner_price"] = r.winner_price ? ojson(*r.winner_price) : ojson(nullptr);
    if (r.hire_message) {
        const auto& m = *r.hire_message;
        j["hire_message"] = {{"msg_id", m.msg_id},
                             {"sender", m.sender},
                             {"receiver", m.receiver},
                             {"performative", std::string(to_string(m.performative))},
                             {"content", render_term(m.content)}};
        if (m.in_reply_to) j["hire_message"]["in_reply_to"] = *m.in_reply_to;
    } else {
        j["hire_message"] = nullptr;
    }
    j["erp_checkout_record"] = {{"requests", r.erp_checkout_requests},
                                {"confirmation", r.erp_confirmation ? ojson(*r.erp_confirmation) : ojson(nullptr)}};
    j["chat_transcript"] = ojson::array();
    for (const auto& row : r.chat_transcript)
        j["chat_transcript"].push_back({{"token", row.token}, {"chatId", row.chat_id}, {"text", row.text}, {"ts", row.ts}});
    j["dead_letters"] = ojson::array();
    for (const auto& d : r.dead_letters)
        j["dead_letters"].push_back({{"route_id", d.route_id},
                                     {"stage", d.stage},
                                     {"cause", d.cause},
                                     {"endpoint", d.endpoint},
                                     {"message", d.message}});
    j["delivery_order_ok"] = r.delivery_order_ok;
    j["published_waypoints"] = r.published_waypoints;
    j["distances_km"] = r.distances_km;
    j["near_signal"] = r.near_signal_seq
                           ? ojson{{"seq", *r.near_signal_seq},
                                   {"distance_km", r.near_signal_distance_km ? ojson(*r.near_signal_distance_km)
                                                                             : ojson(nullptr)}}
                           : ojson(nullptr);
    j["agent_log"] = r.agent_log;
    j["effect_errors"] = r.effect_errors;
    j["timeout_stage"] = r.timeout_stage ? ojson(*r.timeout_stage) : ojson(nullptr);
    return j;
}

}  // namespace

std::string report_to_json(const ScenarioReport& report) { return to_ojson(report, true).dump(2); }

std::string report_fingerprint(const ScenarioReport& report) { return to_ojson(report, false).dump(); }

ScenarioReport report_from_json(const std::string& text) {
    ScenarioReport r;
    try {
        json j = json::parse(text);
        r.run_id = j.at("run_id").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.simulated_time = j.at("simulated_time").get<bool>();
        for (const auto& s : j.at("stages"))
            r.stages.push_back({s.at("stage").get<std::string>(), s.at("seq").get<std::uint64_t>(),
                                s.at("logical_ms").get<std::int64_t>(), s.value("elapsed_ns", std::int64_t{0})});
        r.winner_supplier = j.at("winner_supplier").get<std::string>();
        if (!j.at("winner_price").is_null()) r.winner_price = j.at("winner_price").get<double>();
        if (const auto& h = j.at("hire_message"); !h.is_null()) {
            AclMessage m;
            m.msg_id = h.at("msg_id").get<std::string>();
            m.sender = h.at("sender").get<std::string>();
            m.receiver = h.at("receiver").get<std::string>();
            m.performative = performative_from_string(h.at("performative").get<std::string>());
            m.content = parse_term(h.at("content").get<std::string>());
            if (h.contains("in_reply_to")) m.in_reply_to = h.at("in_reply_to").get<std::string>();
            r.hire_message = m;
        }
        const auto& erp = j.at("erp_checkout_record");
        r.erp_checkout_requests = erp.at("requests").get<std::vector<std::string>>();
        if (!erp.at("confirmation").is_null()) r.erp_confirmation = erp.at("confirmation").get<std::string>();
        for (const auto& row : j.at("chat_transcript"))
            r.chat_transcript.push_back({row.at("token").get<std::string>(), row.at("chatId").get<std::string>(),
                                         row.at("text").get<std::string>(), row.at("ts").get<std::int64_t>()});
        for (const auto& d : j.at("dead_letters"))
            r.dead_letters.push_back({d.at("route_id").get<std::string>(), d.at("stage").get<std::string>(),
                                      d.at("cause").get<std::string>(), d.at("endpoint").get<std::string>(),
                                      d.at("message").get<std::string>()});
        r.delivery_order_ok = j.at("delivery_order_ok").get<bool>();
        r.published_waypoints = j.at("published_waypoints").get<std::size_t>();
        r.distances_km = j.at("distances_km").get<std::vector<double>>();
        if (const auto& n = j.at("near_signal"); !n.is_null()) {
            r.near_signal_seq = n.at("seq").get<std::uint64_t>();
            if (!n.at("distance_km").is_null()) r.near_signal_distance_km = n.at("distance_km").get<double>();
        }
        r.agent_log = j.at("agent_log").get<std::vector<std::string>>();
        r.effect_errors = j.at("effect_errors").get<std::vector<std::string>>();
        if (!j.at("timeout_stage").is_null()) r.timeout_stage = j.at("timeout_stage").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, std::string("malformed report: ") + e.what());
    }
    return r;
}

}  // namespace masbus
