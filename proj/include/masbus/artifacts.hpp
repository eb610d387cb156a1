#pragma once

#include "masbus/environment.hpp"

namespace masbus {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in km (haversine, spherical Earth of radius 6371 km).
double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

/// Tracker for a shipment heading to (dest_lat, dest_lon).
///
/// Operation `giveDistance(Lat, Lon)` (also accepts a single `[Lat,Lon]` or
/// `pos(Lat,Lon)` argument) sets the observable property `distanceKm` and,
/// when the distance is below `threshold_km`, emits the signal
/// `near_destination` with the distance as payload. Out-of-range coordinates
/// fail with reason `bad_coordinates`.
ArtifactTemplate tracker_template(double dest_lat, double dest_lon, double threshold_km);

/// Counter with operation `inc` and observable property `count`.
ArtifactTemplate counter_template();

}  // namespace masbus
