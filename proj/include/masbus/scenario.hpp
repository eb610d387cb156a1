#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "masbus/acl.hpp"
#include "masbus/components/chatstub.hpp"
#include "masbus/error.hpp"

namespace masbus {

struct SupplierQuote {
    std::string name;
    double price = 0.0;
};

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

/// Factory-to-customer run: a PLC finishes a product, the ERP checks it
/// out, a freight supplier is hired from sealed quotes, the shipment is
/// tracked and the customer is notified on approach.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::vector<SupplierQuote> supplier_quotes;
    std::vector<LatLon> track_waypoints;  // published one per tick, in order
    LatLon destination;
    double near_threshold_km = 1.0;
    std::int64_t tick_period_ms = 1000;
    std::int64_t stage_timeout_ms = 60000;
    std::string chat_id = "-364531";
    std::string chat_token = "sometoken";
    std::string product = "widget";
};

/// Throws InvalidConfig naming the first problem.
void validate_config(const ScenarioConfig& cfg);

/// Reads the JSON form. When `track_waypoints` is absent, `generated_waypoints`
/// (default 8) points are drawn from `seed`, heading for the destination
/// and ending inside the threshold. Throws InvalidConfig.
ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& cfg);
ScenarioConfig default_config();

/// Deterministic path from a random start 15-40 km out to a point within
/// half the threshold of `destination`.
std::vector<LatLon> generate_waypoints(std::uint64_t seed, LatLon destination, double threshold_km, std::size_t count);

struct StageStamp {
    std::string stage;  // "i" .. "v"
    std::uint64_t seq = 0;
    std::int64_t logical_ms = 0;  // scenario clock
    std::int64_t elapsed_ns = 0;  // wall time since start, excluded from fingerprints
};

struct DeadLetterSummary {
    std::string route_id;
    std::string stage;
    std::string cause;
    std::string endpoint;
    std::string message;
};

struct ScenarioReport {
    std::string run_id;
    std::uint64_t seed = 0;
    bool simulated_time = true;
    std::vector<StageStamp> stages;  // in the order they were reached
    std::string winner_supplier;
    std::optional<double> winner_price;
    std::optional<AclMessage> hire_message;
    std::vector<std::string> erp_checkout_requests;
    std::optional<std::string> erp_confirmation;
    std::vector<TranscriptRow> chat_transcript;
    std::vector<DeadLetterSummary> dead_letters;
    bool delivery_order_ok = false;
    std::size_t published_waypoints = 0;
    std::vector<double> distances_km;
    std::optional<std::uint64_t> near_signal_seq;
    std::optional<double> near_signal_distance_km;
    std::vector<std::string> agent_log;
    std::vector<std::string> effect_errors;
    std::optional<std::string> timeout_stage;
};

/// Thrown by run_scenario when a stage is not reached within
/// stage_timeout_ms; carries the report as far as it got.
class ScenarioTimeout : public Error {
public:
    ScenarioTimeout(std::string stage, std::int64_t waited_ms, ScenarioReport partial);
    const std::string& stage() const { return stage_; }
    std::int64_t waited_ms() const { return waited_ms_; }
    const ScenarioReport& report() const { return report_; }

private:
    std::string stage_;
    std::int64_t waited_ms_;
    ScenarioReport report_;
};

struct ScenarioOptions {
    bool simulated_time = true;
};

/// Throws InvalidConfig before doing anything, ScenarioTimeout on a stalled
/// stage.
ScenarioReport run_scenario(const ScenarioConfig& cfg, ScenarioOptions options = {});

/// Empty iff the report satisfies every invariant and what `cfg` implies.
std::vector<std::string> assert_report(const ScenarioReport& report, const ScenarioConfig& cfg);

/// argmin price, ties to the lexicographically smallest name.
const SupplierQuote& best_quote(const std::vector<SupplierQuote>& quotes);

std::string report_to_json(const ScenarioReport& report);
ScenarioReport report_from_json(const std::string& text);
/// The report JSON without wall-clock fields. Equal for two simulated runs
/// of the same config.
std::string report_fingerprint(const ScenarioReport& report);

}  // namespace masbus
