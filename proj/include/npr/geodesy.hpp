// Copyright 2026 the npr-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "npr/error.hpp"

namespace npr {

inline constexpr double kEarthRadiusM = 6371008.8;  // IUGG mean radius

// WGS84 ellipsoid and UTM projection constants.
inline constexpr double kWgs84SemiMajorM = 6378137.0;
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kUtmScaleFactor = 0.9996;
inline constexpr double kUtmFalseEastingM = 500000.0;
inline constexpr double kUtmFalseNorthingSouthM = 10000000.0;

inline constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Great-circle distance on the mean sphere, in meters. Symmetric,
/// non-negative, zero iff the points coincide.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double phi1 = deg2rad(lat1);
  const double phi2 = deg2rad(lat2);
  const double dphi = deg2rad(lat2 - lat1);
  const double dlam = deg2rad(lon2 - lon1);
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlam / 2.0);
  const double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

struct UtmCoord {
  double easting = 0.0;   // meters
  double northing = 0.0;  // meters
  int zone = 0;           // 1..60
  bool north = true;      // hemisphere
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

inline int utm_zone_for(double lon) {
  int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
  return std::clamp(zone, 1, 60);
}

inline double utm_central_meridian_deg(int zone) { return (zone - 1) * 6.0 - 180.0 + 3.0; }

/// Forward Transverse Mercator projection (Snyder's series, WGS84, k0 =
/// 0.9996). Good to well under a meter inside a zone. Latitudes outside the
/// UTM band [-80, 84] are rejected.
inline UtmCoord latlon_to_utm(double lat, double lon) {
  if (!(lat >= -80.0 && lat <= 84.0)) {
    throw DomainError("latitude " + std::to_string(lat) +
                      " outside UTM validity band [-80, 84]");
  }
  if (!(lon >= -180.0 && lon < 180.0)) {
    lon = std::remainder(lon, 360.0);
    if (lon >= 180.0) lon -= 360.0;
    if (lon < -180.0) lon += 360.0;
  }
  const double a = kWgs84SemiMajorM;
  const double f = kWgs84Flattening;
  const double e2 = f * (2.0 - f);
  const double ep2 = e2 / (1.0 - e2);
  const int zone = utm_zone_for(lon);
  const double lon0 = utm_central_meridian_deg(zone);

  const double phi = deg2rad(lat);
  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);
  const double tan_phi = std::tan(phi);

  const double n_rad = a / std::sqrt(1.0 - e2 * sin_phi * sin_phi);
  const double t = tan_phi * tan_phi;
  const double c = ep2 * cos_phi * cos_phi;
  const double big_a = deg2rad(lon - lon0) * cos_phi;

  const double e4 = e2 * e2;
  const double e6 = e4 * e2;
  const double m =
      a * ((1.0 - e2 / 4.0 - 3.0 * e4 / 64.0 - 5.0 * e6 / 256.0) * phi -
           (3.0 * e2 / 8.0 + 3.0 * e4 / 32.0 + 45.0 * e6 / 1024.0) * std::sin(2.0 * phi) +
           (15.0 * e4 / 256.0 + 45.0 * e6 / 1024.0) * std::sin(4.0 * phi) -
           (35.0 * e6 / 3072.0) * std::sin(6.0 * phi));

  const double a2 = big_a * big_a;
  const double a3 = a2 * big_a;
  const double a4 = a3 * big_a;
  const double a5 = a4 * big_a;
  const double a6 = a5 * big_a;

  UtmCoord out;
  out.zone = zone;
  out.north = lat >= 0.0;
  out.easting = kUtmFalseEastingM +
                kUtmScaleFactor * n_rad *
                    (big_a + (1.0 - t + c) * a3 / 6.0 +
                     (5.0 - 18.0 * t + t * t + 72.0 * c - 58.0 * ep2) * a5 / 120.0);
  out.northing = kUtmScaleFactor *
                 (m + n_rad * tan_phi *
                          (a2 / 2.0 + (5.0 - t + 9.0 * c + 4.0 * c * c) * a4 / 24.0 +
                           (61.0 - 58.0 * t + t * t + 600.0 * c - 330.0 * ep2) * a6 / 720.0));
  if (!out.north) out.northing += kUtmFalseNorthingSouthM;
  return out;
}

/// Inverse Transverse Mercator (footpoint-latitude series).
inline LatLon utm_to_latlon(const UtmCoord& utm) {
  if (utm.zone < 1 || utm.zone > 60) {
    throw DomainError("UTM zone " + std::to_string(utm.zone) + " outside 1..60");
  }
  const double a = kWgs84SemiMajorM;
  const double f = kWgs84Flattening;
  const double e2 = f * (2.0 - f);
  const double ep2 = e2 / (1.0 - e2);
  const double e1 = (1.0 - std::sqrt(1.0 - e2)) / (1.0 + std::sqrt(1.0 - e2));

  const double x = utm.easting - kUtmFalseEastingM;
  const double y = utm.north ? utm.northing : utm.northing - kUtmFalseNorthingSouthM;

  const double e4 = e2 * e2;
  const double e6 = e4 * e2;
  const double m = y / kUtmScaleFactor;
  const double mu = m / (a * (1.0 - e2 / 4.0 - 3.0 * e4 / 64.0 - 5.0 * e6 / 256.0));

  const double e1_2 = e1 * e1;
  const double e1_3 = e1_2 * e1;
  const double e1_4 = e1_3 * e1;
  const double phi1 = mu + (3.0 * e1 / 2.0 - 27.0 * e1_3 / 32.0) * std::sin(2.0 * mu) +
                      (21.0 * e1_2 / 16.0 - 55.0 * e1_4 / 32.0) * std::sin(4.0 * mu) +
                      (151.0 * e1_3 / 96.0) * std::sin(6.0 * mu) +
                      (1097.0 * e1_4 / 512.0) * std::sin(8.0 * mu);

  const double sin1 = std::sin(phi1);
  const double cos1 = std::cos(phi1);
  const double tan1 = std::tan(phi1);
  const double c1 = ep2 * cos1 * cos1;
  const double t1 = tan1 * tan1;
  const double n1 = a / std::sqrt(1.0 - e2 * sin1 * sin1);
  const double r1 = a * (1.0 - e2) / std::pow(1.0 - e2 * sin1 * sin1, 1.5);
  const double d = x / (n1 * kUtmScaleFactor);

  const double d2 = d * d;
  const double d3 = d2 * d;
  const double d4 = d3 * d;
  const double d5 = d4 * d;
  const double d6 = d5 * d;

  const double phi =
      phi1 -
      (n1 * tan1 / r1) *
          (d2 / 2.0 -
           (5.0 + 3.0 * t1 + 10.0 * c1 - 4.0 * c1 * c1 - 9.0 * ep2) * d4 / 24.0 +
           (61.0 + 90.0 * t1 + 298.0 * c1 + 45.0 * t1 * t1 - 252.0 * ep2 - 3.0 * c1 * c1) * d6 /
               720.0);
  const double lam =
      (d - (1.0 + 2.0 * t1 + c1) * d3 / 6.0 +
       (5.0 - 2.0 * c1 + 28.0 * t1 - 3.0 * c1 * c1 + 8.0 * ep2 + 24.0 * t1 * t1) * d5 / 120.0) /
      cos1;

  return LatLon{rad2deg(phi), utm_central_meridian_deg(utm.zone) + rad2deg(lam)};
}

}  // namespace npr
