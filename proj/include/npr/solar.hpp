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
#include <optional>

#include "npr/corpus.hpp"
#include "npr/error.hpp"
#include "npr/geodesy.hpp"
#include "npr/time_util.hpp"

namespace npr {

// Solar position from the NOAA solar calculator equations (Julian-century
// formulation: geometric mean longitude/anomaly, equation of center,
// apparent longitude, corrected obliquity, the var-y equation of time).
// Low precision by design: roughly 0.1 degrees / a few seconds of sunset
// over 1900-2100, far inside the tolerances day/night classification needs.

struct SolarConfig {
  /// Zenith angle defining "sunset". 90.833 is the standard refraction- and
  /// semidiameter-corrected horizon; 96/102/108 give civil/nautical/
  /// astronomical twilight.
  double sunset_zenith_deg = 90.833;
  /// Signed minutes added to sunset (and subtracted from sunrise) before a
  /// timestamp counts as night.
  double sunset_offset_min = 0.0;

  void validate() const {
    if (!(sunset_zenith_deg >= 80.0 && sunset_zenith_deg <= 108.0)) {
      throw DomainError("sunset_zenith_deg must lie in [80, 108]");
    }
  }
};

namespace detail {

struct SunGeometry {
  double declination_rad = 0.0;
  double eq_of_time_min = 0.0;
};

inline SunGeometry sun_geometry(double julian_day) {
  const double jc = (julian_day - 2451545.0) / 36525.0;
  double gmls = std::fmod(280.46646 + jc * (36000.76983 + jc * 0.0003032), 360.0);
  if (gmls < 0.0) gmls += 360.0;
  const double gmas = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
  const double eeo = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
  const double gmas_r = deg2rad(gmas);
  const double eq_of_center = std::sin(gmas_r) * (1.914602 - jc * (0.004817 + 0.000014 * jc)) +
                              std::sin(2.0 * gmas_r) * (0.019993 - 0.000101 * jc) +
                              std::sin(3.0 * gmas_r) * 0.000289;
  const double true_long = gmls + eq_of_center;
  const double omega = deg2rad(125.04 - 1934.136 * jc);
  const double app_long = true_long - 0.00569 - 0.00478 * std::sin(omega);
  const double mean_obliq =
      23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
  const double obliq = mean_obliq + 0.00256 * std::cos(omega);
  const double obliq_r = deg2rad(obliq);

  SunGeometry g;
  g.declination_rad = std::asin(std::sin(obliq_r) * std::sin(deg2rad(app_long)));
  const double var_y = std::tan(obliq_r / 2.0) * std::tan(obliq_r / 2.0);
  const double gmls_r = deg2rad(gmls);
  g.eq_of_time_min =
      4.0 * rad2deg(var_y * std::sin(2.0 * gmls_r) - 2.0 * eeo * std::sin(gmas_r) +
                    4.0 * eeo * var_y * std::sin(gmas_r) * std::cos(2.0 * gmls_r) -
                    0.5 * var_y * var_y * std::sin(4.0 * gmls_r) -
                    1.25 * eeo * eeo * std::sin(2.0 * gmas_r));
  return g;
}

inline double julian_day_of(UnixSeconds t) {
  return 2440587.5 + static_cast<double>(t) / 86400.0;
}

}  // namespace detail

/// Geometric (unrefracted) solar elevation in degrees, in [-90, 90].
inline double solar_elevation_deg(double lat, double lon, UnixSeconds when_utc) {
  const auto g = detail::sun_geometry(detail::julian_day_of(when_utc));
  const double minutes_utc = static_cast<double>(seconds_of_day(when_utc)) / 60.0;
  double tst = std::fmod(minutes_utc + g.eq_of_time_min + 4.0 * lon, 1440.0);
  if (tst < 0.0) tst += 1440.0;
  const double ha_r = deg2rad(tst / 4.0 - 180.0);
  const double lat_r = deg2rad(lat);
  const double cos_zen = std::sin(lat_r) * std::sin(g.declination_rad) +
                         std::cos(lat_r) * std::cos(g.declination_rad) * std::cos(ha_r);
  return 90.0 - rad2deg(std::acos(std::clamp(cos_zen, -1.0, 1.0)));
}

namespace detail {

/// Sunrise (descending=false) or sunset (descending=true) of the local solar
/// day whose solar noon falls 720 - 4*lon minutes after UTC midnight of
/// `date`. Returns nothing when the sun never crosses the zenith threshold
/// that day (polar day/night).
inline std::optional<UnixSeconds> crossing_utc(double lat, double lon, const CivilDate& date,
                                               double zenith_deg, bool descending) {
  const UnixSeconds midnight = to_unix_seconds(date, 0, 0, 0);
  double estimate_min = 720.0 - 4.0 * lon;
  for (int iter = 0; iter < 4; ++iter) {
    const double jd = julian_day_of(midnight) + estimate_min / 1440.0;
    const auto g = sun_geometry(jd);
    const double lat_r = deg2rad(lat);
    const double cos_ha = std::cos(deg2rad(zenith_deg)) /
                              (std::cos(lat_r) * std::cos(g.declination_rad)) -
                          std::tan(lat_r) * std::tan(g.declination_rad);
    if (cos_ha > 1.0 || cos_ha < -1.0) return std::nullopt;
    const double ha_deg = rad2deg(std::acos(cos_ha));
    estimate_min = 720.0 - 4.0 * lon - g.eq_of_time_min + (descending ? 4.0 : -4.0) * ha_deg;
  }
  return midnight + static_cast<UnixSeconds>(std::llround(estimate_min * 60.0));
}

}  // namespace detail

/// Instant at which the solar elevation crosses (90 - zenith) downward on the
/// given local solar date. Absent during polar day/night.
inline std::optional<UnixSeconds> sunset_utc(double lat, double lon, const CivilDate& date,
                                             double sunset_zenith_deg = 90.833) {
  return detail::crossing_utc(lat, lon, date, sunset_zenith_deg, /*descending=*/true);
}

inline std::optional<UnixSeconds> sunrise_utc(double lat, double lon, const CivilDate& date,
                                              double sunset_zenith_deg = 90.833) {
  return detail::crossing_utc(lat, lon, date, sunset_zenith_deg, /*descending=*/false);
}

/// True iff `when_utc` lies in a night interval [sunset + offset,
/// next sunrise - offset] at the given place. During polar day/night (no
/// crossings) the instantaneous elevation decides.
inline bool is_night(double lat, double lon, UnixSeconds when_utc, const SolarConfig& cfg = {}) {
  cfg.validate();
  const auto offset_s = static_cast<UnixSeconds>(std::llround(cfg.sunset_offset_min * 60.0));

  // Local solar date containing the instant (longitude = 4 min per degree).
  const auto local_shift = static_cast<UnixSeconds>(std::llround(lon * 240.0));
  const CivilDate local_date = civil_date_of(when_utc + local_shift);
  const std::int64_t day_index = days_from_civil(local_date.year, local_date.month, local_date.day);

  bool any_interval = false;
  for (std::int64_t d : {day_index - 1, day_index}) {
    const CivilDate eve = civil_from_days(d);
    const CivilDate morrow = civil_from_days(d + 1);
    const auto sunset = sunset_utc(lat, lon, eve, cfg.sunset_zenith_deg);
    const auto sunrise = sunrise_utc(lat, lon, morrow, cfg.sunset_zenith_deg);
    if (!sunset || !sunrise) continue;
    any_interval = true;
    const UnixSeconds begin = *sunset + offset_s;
    const UnixSeconds end = *sunrise - offset_s;
    if (begin < end && when_utc > begin && when_utc < end) return true;
  }
  if (!any_interval) {
    // Polar day or night around this date: classify by instantaneous elevation.
    return solar_elevation_deg(lat, lon, when_utc) < 90.0 - cfg.sunset_zenith_deg;
  }
  return false;
}

/// Record overload used by evaluation and routing. Throws
/// MissingTimestampError so callers can fall back to brightness.
inline bool is_night(const ImageRecord& record, const SolarConfig& cfg = {}) {
  if (!record.timestamp_utc) {
    throw MissingTimestampError("record \"" + record.id + "\" has no timestamp");
  }
  return is_night(record.lat, record.lon, *record.timestamp_utc, cfg);
}

}  // namespace npr
