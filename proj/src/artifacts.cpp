#include "masbus/artifacts.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace masbus {

double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
    constexpr double rad = std::numbers::pi / 180.0;
    double phi1 = lat1_deg * rad;
    double phi2 = lat2_deg * rad;
    double dphi = (lat2_deg - lat1_deg) * rad;
    double dlambda = (lon2_deg - lon1_deg) * rad;
    double s1 = std::sin(dphi / 2);
    double s2 = std::sin(dlambda / 2);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

namespace {

std::optional<std::pair<double, double>> coordinates(std::span<const Term> params) {
    std::span<const Term> pair = params;
    if (params.size() == 1 && (params[0].is_list() || params[0].is_structure())) pair = params[0].items();
    if (pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) return std::nullopt;
    return std::make_pair(pair[0].as_number(), pair[1].as_number());
}

}  // namespace

ArtifactTemplate tracker_template(double dest_lat, double dest_lon, double threshold_km) {
    ArtifactTemplate t;
    t.vars["destLat"] = Term::number(dest_lat);
    t.vars["destLon"] = Term::number(dest_lon);
    t.vars["thresholdKm"] = Term::number(threshold_km);
    t.operations["giveDistance"] = [](std::span<const Term> params, OpContext& ctx) {
        auto pos = coordinates(params);
        if (!pos) return OpResult::failed(Term::atom("bad_arguments"));
        auto [lat, lon] = *pos;
        if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
            return OpResult::failed(Term::atom("bad_coordinates"));
        double d = haversine_km(lat, lon, ctx.vars.at("destLat").as_number(), ctx.vars.at("destLon").as_number());
        OpResult r;
        r.property_updates["distanceKm"] = Term::number(d);
        if (d < ctx.vars.at("thresholdKm").as_number())
            r.signals.push_back(Signal{"near_destination", Term::number(d)});
        return r;
    };
    return t;
}

ArtifactTemplate counter_template() {
    ArtifactTemplate t;
    t.properties["count"] = Term::number(0);
    t.vars["count"] = Term::number(0);
    t.operations["inc"] = [](std::span<const Term>, OpContext& ctx) {
        // read-modify-write; relies on the environment serialising operations
        double next = ctx.vars.at("count").as_number() + 1;
        ctx.vars["count"] = Term::number(next);
        OpResult r;
        r.property_updates["count"] = Term::number(next);
        return r;
    };
    return t;
}

}  // namespace masbus
