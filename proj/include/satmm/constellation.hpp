#pragma once

// Walker shell with +Grid inter-satellite links.
//
// Satellites sit on an X x Y torus: x is the orbit (plane) index, y the slot
// inside the orbit. Positions come from ideal circular Keplerian orbits over a
// spherical, rotating Earth. All functions here are pure.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace satmm {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kEarthMuKm3S2 = 398600.4418;
constexpr double kEarthRotationRadS = 7.2921159e-5;
constexpr double kSpeedOfLightKmS = 299792.458;

enum class SatelliteId : std::int32_t {};

constexpr std::int32_t index_of(SatelliteId id) { return static_cast<std::int32_t>(id); }
constexpr SatelliteId sat(std::int32_t index) { return static_cast<SatelliteId>(index); }

struct ShellConfig {
  int num_orbits = 72;
  int sats_per_orbit = 22;
  double altitude_km = 540.0;
  double inclination_deg = 53.0;
  double phase_offset = 0.5;  // fraction of the in-orbit spacing added per orbit index
  double min_elevation_deg = 25.0;

  int size() const { return num_orbits * sats_per_orbit; }
  double orbital_radius_km() const { return kEarthRadiusKm + altitude_km; }
  bool contains(SatelliteId id) const { return index_of(id) >= 0 && index_of(id) < size(); }

  // Empty when the shell is usable; otherwise one message per broken invariant.
  std::vector<std::string> validate() const;
};

struct GridCoord {
  int x = 0;  // orbit index in [0, X)
  int y = 0;  // in-orbit slot in [0, Y)

  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

GridCoord to_coord(SatelliteId id, const ShellConfig& shell);
SatelliteId to_id(GridCoord c, const ShellConfig& shell);

// Coordinates are reduced modulo the torus size.
GridCoord wrap(int x, int y, const ShellConfig& shell);

// Minimum +Grid hop count on the torus.
int grid_distance(GridCoord a, GridCoord b, const ShellConfig& shell);
int grid_distance(SatelliteId a, SatelliteId b, const ShellConfig& shell);

// Shortest path walking the orbit axis first, then the in-orbit axis. When both
// directions around a ring are equally short the increasing direction is used.
// Both endpoints are included.
std::vector<SatelliteId> shortest_grid_path(SatelliteId from, SatelliteId to, const ShellConfig& shell);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
};

struct GroundPoint {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;

  // Longitude folded into (-180, 180], latitude clamped to [-90, 90].
  GroundPoint normalized() const;
};

double orbital_period_s(const ShellConfig& shell);

// Earth-centered inertial position in km, `seconds` after the shell epoch.
Vec3 satellite_position(SatelliteId sat, double seconds, const ShellConfig& shell);
Vec3 satellite_position(SatelliteId sat, int slot, const ShellConfig& shell, double slot_seconds);

// Earth-centered inertial position of a ground point at `seconds`.
Vec3 ground_position(const GroundPoint& p, double seconds);

// Point on the surface directly below the satellite.
GroundPoint sub_satellite_point(SatelliteId sat, double seconds, const ShellConfig& shell);

double elevation_deg(const GroundPoint& p, const Vec3& ground_eci, const Vec3& sat_eci);

// Great-circle distance over the Earth's surface.
double surface_distance_km(const GroundPoint& a, const GroundPoint& b);

// Slant range between a ground point and a satellite.
double slant_range_km(const Vec3& ground_eci, const Vec3& sat_eci);

// Positions of every satellite at one instant; the unit of work the simulator
// reuses across all ground nodes in a slot.
class Snapshot {
 public:
  Snapshot(const ShellConfig& shell, double seconds);

  double seconds() const { return seconds_; }
  const ShellConfig& shell() const { return shell_; }
  const Vec3& position(SatelliteId id) const { return positions_[static_cast<std::size_t>(index_of(id))]; }

  std::vector<SatelliteId> visible_from(const GroundPoint& p) const;
  double elevation_deg(const GroundPoint& p, SatelliteId id) const;
  bool is_visible(const GroundPoint& p, SatelliteId id) const;
  // Highest-elevation visible satellite, ties to the lowest id.
  std::optional<SatelliteId> best_visible(const GroundPoint& p) const;

 private:
  ShellConfig shell_;
  double seconds_;
  std::vector<Vec3> positions_;
};

std::vector<SatelliteId> visible_satellites(const GroundPoint& p, int slot, const ShellConfig& shell,
                                            double slot_seconds = 1.0);

struct Waypoint {
  double seconds = 0.0;
  GroundPoint point;
};

// Position along a trajectory at `seconds`; clamps outside the covered span.
GroundPoint interpolate_trajectory(std::span<const Waypoint> trajectory, double seconds);

struct VisibilityTimeline {
  int node = 0;
  std::vector<std::vector<SatelliteId>> slots;  // sorted ids per slot

  int horizon() const { return static_cast<int>(slots.size()); }
  bool visible(int slot, SatelliteId id) const;
};

VisibilityTimeline build_visibility_timeline(std::span<const Waypoint> trajectory, int horizon,
                                             const ShellConfig& shell, double slot_seconds = 1.0,
                                             int node = 0);

struct ConstellationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace satmm
