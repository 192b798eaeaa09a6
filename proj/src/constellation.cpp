#include "satmm/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace satmm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Waypoint gaps at or above this use great-circle interpolation.
constexpr double kLinearInterpolationLimitKm = 500.0;

int ring_distance(int a, int b, int n) {
  const int d = std::abs(a - b);
  return std::min(d, n - d);
}

int positive_mod(int v, int n) {
  const int r = v % n;
  return r < 0 ? r + n : r;
}

Vec3 unit_vector(double lat_deg, double lon_deg) {
  const double lat = lat_deg * kDeg;
  const double lon = lon_deg * kDeg;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

GroundPoint from_unit_vector(const Vec3& u, double altitude_m) {
  const double lat = std::asin(std::clamp(u.z / u.norm(), -1.0, 1.0)) / kDeg;
  const double lon = std::atan2(u.y, u.x) / kDeg;
  return GroundPoint{lat, lon, altitude_m}.normalized();
}

}  // namespace

std::vector<std::string> ShellConfig::validate() const {
  std::vector<std::string> errors;
  if (num_orbits < 3) errors.emplace_back("num_orbits must be ≥ 3");
  if (sats_per_orbit < 3) errors.emplace_back("sats_per_orbit must be ≥ 3");
  if (!(altitude_km > 0.0)) errors.emplace_back("altitude_km must be > 0");
  if (!(min_elevation_deg > 0.0 && min_elevation_deg < 90.0))
    errors.emplace_back("min_elevation_deg must be in (0, 90)");
  if (!(phase_offset >= 0.0 && phase_offset < 1.0)) errors.emplace_back("phase_offset must be in [0, 1)");
  if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0))
    errors.emplace_back("inclination_deg must be in [0, 180]");
  return errors;
}

GridCoord to_coord(SatelliteId id, const ShellConfig& shell) {
  const int i = index_of(id);
  return {i / shell.sats_per_orbit, i % shell.sats_per_orbit};
}

SatelliteId to_id(GridCoord c, const ShellConfig& shell) { return sat(c.x * shell.sats_per_orbit + c.y); }

GridCoord wrap(int x, int y, const ShellConfig& shell) {
  return {positive_mod(x, shell.num_orbits), positive_mod(y, shell.sats_per_orbit)};
}

int grid_distance(GridCoord a, GridCoord b, const ShellConfig& shell) {
  return ring_distance(a.x, b.x, shell.num_orbits) + ring_distance(a.y, b.y, shell.sats_per_orbit);
}

int grid_distance(SatelliteId a, SatelliteId b, const ShellConfig& shell) {
  return grid_distance(to_coord(a, shell), to_coord(b, shell), shell);
}

std::vector<SatelliteId> shortest_grid_path(SatelliteId from, SatelliteId to, const ShellConfig& shell) {
  const GridCoord a = to_coord(from, shell);
  const GridCoord b = to_coord(to, shell);
  std::vector<SatelliteId> path{from};

  auto step_dir = [](int src, int dst, int n) {
    const int forward = positive_mod(dst - src, n);
    if (forward == 0) return 0;
    return forward <= n - forward ? 1 : -1;
  };

  GridCoord cur = a;
  const int dx = step_dir(a.x, b.x, shell.num_orbits);
  while (cur.x != b.x) {
    cur = wrap(cur.x + dx, cur.y, shell);
    path.push_back(to_id(cur, shell));
  }
  const int dy = step_dir(a.y, b.y, shell.sats_per_orbit);
  while (cur.y != b.y) {
    cur = wrap(cur.x, cur.y + dy, shell);
    path.push_back(to_id(cur, shell));
  }
  return path;
}

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

GroundPoint GroundPoint::normalized() const {
  GroundPoint p = *this;
  p.latitude_deg = std::clamp(p.latitude_deg, -90.0, 90.0);
  double lon = std::fmod(p.longitude_deg, 360.0);
  if (lon <= -180.0) lon += 360.0;
  if (lon > 180.0) lon -= 360.0;
  p.longitude_deg = lon;
  return p;
}

double orbital_period_s(const ShellConfig& shell) {
  const double a = shell.orbital_radius_km();
  return kTwoPi * std::sqrt(a * a * a / kEarthMuKm3S2);
}

Vec3 satellite_position(SatelliteId id, double seconds, const ShellConfig& shell) {
  const GridCoord c = to_coord(id, shell);
  const double r = shell.orbital_radius_km();
  const double mean_motion = kTwoPi / orbital_period_s(shell);
  const double raan = kTwoPi * c.x / shell.num_orbits;
  const double spacing = kTwoPi / shell.sats_per_orbit;
  const double u = spacing * c.y + shell.phase_offset * spacing * c.x + mean_motion * seconds;
  const double inc = shell.inclination_deg * kDeg;

  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  return {r * (co * cu - so * su * ci), r * (so * cu + co * su * ci), r * su * si};
}

Vec3 satellite_position(SatelliteId id, int slot, const ShellConfig& shell, double slot_seconds) {
  return satellite_position(id, slot * slot_seconds, shell);
}

Vec3 ground_position(const GroundPoint& p, double seconds) {
  const double r = kEarthRadiusKm + p.altitude_m / 1000.0;
  const double lon_inertial = p.longitude_deg + seconds * kEarthRotationRadS / kDeg;
  return unit_vector(p.latitude_deg, lon_inertial) * r;
}

GroundPoint sub_satellite_point(SatelliteId id, double seconds, const ShellConfig& shell) {
  const Vec3 s = satellite_position(id, seconds, shell);
  GroundPoint p = from_unit_vector(s, 0.0);
  p.longitude_deg -= seconds * kEarthRotationRadS / kDeg;
  return p.normalized();
}

double elevation_deg(const GroundPoint&, const Vec3& ground_eci, const Vec3& sat_eci) {
  const Vec3 d = sat_eci - ground_eci;
  const double s = d.dot(ground_eci) / (d.norm() * ground_eci.norm());
  return std::asin(std::clamp(s, -1.0, 1.0)) / kDeg;
}

double surface_distance_km(const GroundPoint& a, const GroundPoint& b) {
  const double la1 = a.latitude_deg * kDeg, la2 = b.latitude_deg * kDeg;
  const double dla = la2 - la1;
  const double dlo = (b.longitude_deg - a.longitude_deg) * kDeg;
  const double h = std::sin(dla / 2) * std::sin(dla / 2) +
                   std::cos(la1) * std::cos(la2) * std::sin(dlo / 2) * std::sin(dlo / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double slant_range_km(const Vec3& ground_eci, const Vec3& sat_eci) { return (sat_eci - ground_eci).norm(); }

Snapshot::Snapshot(const ShellConfig& shell, double seconds) : shell_(shell), seconds_(seconds) {
  positions_.reserve(static_cast<std::size_t>(shell.size()));
  for (int i = 0; i < shell.size(); ++i) positions_.push_back(satmm::satellite_position(sat(i), seconds, shell));
}

double Snapshot::elevation_deg(const GroundPoint& p, SatelliteId id) const {
  return satmm::elevation_deg(p, ground_position(p, seconds_), position(id));
}

bool Snapshot::is_visible(const GroundPoint& p, SatelliteId id) const {
  return elevation_deg(p, id) >= shell_.min_elevation_deg;
}

std::vector<SatelliteId> Snapshot::visible_from(const GroundPoint& p) const {
  const Vec3 g = ground_position(p, seconds_);
  const double rg = g.norm();
  const double r = shell_.orbital_radius_km();
  const double min_el = shell_.min_elevation_deg * kDeg;
  std::vector<SatelliteId> out;
  // Coarse cone test on the Earth-central angle; the exact elevation check follows.
  double cos_limit = -1.0;
  if (rg < r) {
    const double central = std::acos(std::clamp(rg * std::cos(min_el) / r, -1.0, 1.0)) - min_el;
    cos_limit = std::cos(std::min(std::numbers::pi, central + 1.0 * kDeg));
  }
  const double sin_min = std::sin(min_el);
  for (int i = 0; i < shell_.size(); ++i) {
    const Vec3& s = positions_[static_cast<std::size_t>(i)];
    if (s.dot(g) < cos_limit * r * rg) continue;
    const Vec3 d = s - g;
    if (d.dot(g) >= sin_min * d.norm() * rg) out.push_back(sat(i));
  }
  return out;
}

std::optional<SatelliteId> Snapshot::best_visible(const GroundPoint& p) const {
  std::optional<SatelliteId> best;
  double best_el = -1e9;
  for (SatelliteId id : visible_from(p)) {
    const double el = elevation_deg(p, id);
    if (el > best_el) {
      best_el = el;
      best = id;
    }
  }
  return best;
}

std::vector<SatelliteId> visible_satellites(const GroundPoint& p, int slot, const ShellConfig& shell,
                                            double slot_seconds) {
  return Snapshot(shell, slot * slot_seconds).visible_from(p);
}

GroundPoint interpolate_trajectory(std::span<const Waypoint> trajectory, double seconds) {
  if (trajectory.empty()) throw ConstellationError("no waypoints");
  if (trajectory.size() == 1 || seconds <= trajectory.front().seconds) return trajectory.front().point;
  if (seconds >= trajectory.back().seconds) return trajectory.back().point;

  auto it = std::upper_bound(trajectory.begin(), trajectory.end(), seconds,
                             [](double s, const Waypoint& w) { return s < w.seconds; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double f = (seconds - a.seconds) / (b.seconds - a.seconds);
  const double alt = a.point.altitude_m + f * (b.point.altitude_m - a.point.altitude_m);

  if (surface_distance_km(a.point, b.point) >= kLinearInterpolationLimitKm) {
    const Vec3 ua = unit_vector(a.point.latitude_deg, a.point.longitude_deg);
    const Vec3 ub = unit_vector(b.point.latitude_deg, b.point.longitude_deg);
    const double omega = std::acos(std::clamp(ua.dot(ub), -1.0, 1.0));
    const double s = std::sin(omega);
    const Vec3 u = ua * (std::sin((1 - f) * omega) / s) + ub * (std::sin(f * omega) / s);
    return from_unit_vector(u, alt);
  }

  double dlon = b.point.longitude_deg - a.point.longitude_deg;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  return GroundPoint{a.point.latitude_deg + f * (b.point.latitude_deg - a.point.latitude_deg),
                     a.point.longitude_deg + f * dlon, alt}
      .normalized();
}

bool VisibilityTimeline::visible(int slot, SatelliteId id) const {
  const auto& s = slots[static_cast<std::size_t>(slot)];
  return std::binary_search(s.begin(), s.end(), id);
}

VisibilityTimeline build_visibility_timeline(std::span<const Waypoint> trajectory, int horizon,
                                             const ShellConfig& shell, double slot_seconds, int node) {
  if (trajectory.empty()) throw ConstellationError("no waypoints");
  VisibilityTimeline tl;
  tl.node = node;
  tl.slots.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  for (int k = 0; k < horizon; ++k) {
    const double t = k * slot_seconds;
    tl.slots.push_back(Snapshot(shell, t).visible_from(interpolate_trajectory(trajectory, t)));
  }
  return tl;
}

}  // namespace satmm
