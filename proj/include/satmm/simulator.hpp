#pragma once

// Time-slotted engine comparing three mobility-management mechanisms over the
// same constellation, ground stations and user traces:
//
//   ClusterAnchor   anchors on satellites, one per cluster, tracking users and GSs
//   GroundAnchor    each user anchored at a nearby ground station
//   FixedSatAnchor  each user anchored at its first ingress satellite forever
//
// Ground-routed paths are unavailable while the ground station at their end is
// re-converging after a GS-satellite handover.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satmm/ada.hpp"
#include "satmm/constellation.hpp"
#include "satmm/mobility.hpp"

namespace satmm {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MechanismKind { ClusterAnchor, GroundAnchor, FixedSatAnchor };

const char* to_string(MechanismKind k);
std::optional<MechanismKind> parse_mechanism(std::string_view name);

struct Mechanism {
  MechanismKind kind = MechanismKind::ClusterAnchor;
  AdaParams ada;  // used by ClusterAnchor only
};

struct ConvergenceModel {
  int convergence_slots = 10;
};

enum class LatencyMode { PerHop, Geometric };

const char* to_string(LatencyMode m);

struct GroundStation {
  NodeId id{};
  std::string name;
  GroundPoint location;
  double server_latency_ms = 5.0;
};

struct UserTrace {
  NodeId id{};
  std::string name;
  std::vector<Waypoint> waypoints;
};

// Static users scattered around randomly chosen ground stations.
struct RandomUsers {
  int count = 0;
  double radius_km = 300.0;
  int first_id = 100000;
};

struct Scenario {
  ShellConfig shell;
  std::vector<GroundStation> ground_stations;
  std::vector<UserTrace> users;
  RandomUsers random_users;
  Mechanism mechanism;
  ConvergenceModel convergence;
  int horizon = 3600;
  double slot_seconds = 1.0;
  double per_hop_ms = 4.0;
  LatencyMode latency_mode = LatencyMode::PerHop;
  std::uint64_t rng_seed = 1;
  GroundPoint reference_point{40.0, 0.0, 0.0};
  int reanchor_hysteresis_slots = 60;
  // GroundAnchor uplink egress: the anchor GS, or the instantaneous nearest GS.
  bool ground_anchor_uplink_via_anchor = true;

  std::vector<std::string> validate() const;
};

// Resolved ADA parameters: explicit values, or the shell defaults when unset (H < 0
// or discovery_window < 1).
AdaParams effective_ada(const Scenario& scenario);

// One-way ground-satellite propagation delay.
double gsl_one_way_ms(double slant_range_km);

struct LinkLatency {
  double user_gsl_ms = 0.0;
  double gs_gsl_ms = 0.0;
  double server_ms = 0.0;
};

// Round-trip time over a connected downlink/uplink pair. Per-hop mode charges
// per_hop_ms per ISL hop; geometric mode charges the ISL arc length at light
// speed, with satellites placed at `seconds`. Both add the two GSL legs twice
// and the server adder once.
double probe_rtt(const std::optional<Path>& down, const std::optional<Path>& up, const LinkLatency& links,
                 const Scenario& scenario, double seconds = 0.0);

struct GsHandover {
  int t = 0;
  NodeId gs{};
  std::optional<SatelliteId> from;
  SatelliteId to{};
};

// Per-slot geometry shared by every mechanism of one scenario: visibility,
// the baseline ingress choice, GS attachments and the serving ground station.
class Environment {
 public:
  explicit Environment(const Scenario& scenario);

  const std::vector<UserTrace>& users() const { return users_; }
  const std::vector<GroundStation>& ground_stations() const { return gss_; }
  int horizon() const { return horizon_; }

  const VisibilityTimeline& timeline(std::size_t user) const { return timelines_[user]; }
  // Keep the current satellite while visible, otherwise take the highest one.
  std::optional<SatelliteId> baseline_ingress(std::size_t user, int t) const;
  // Nearest GS with re-selection hysteresis; the user's server sits behind it.
  std::size_t home_gs(std::size_t user, int t) const;
  std::size_t nearest_gs(std::size_t user, int t) const;
  GroundPoint user_position(std::size_t user, int t) const;

  std::optional<SatelliteId> gs_ingress(std::size_t gs, int t) const;
  const std::vector<GsHandover>& gs_handovers() const { return handovers_; }
  std::size_t gs_index(NodeId id) const;

 private:
  struct Segment {
    int start = 0;
    std::optional<SatelliteId> ingress;
  };

  double slot_seconds_;
  int horizon_;
  std::vector<UserTrace> users_;
  std::vector<GroundStation> gss_;
  std::vector<VisibilityTimeline> timelines_;
  std::vector<std::vector<std::int32_t>> baseline_;  // -1 when unconnected
  std::vector<std::vector<std::int32_t>> home_;
  std::vector<std::vector<std::int32_t>> nearest_;
  std::vector<std::vector<Segment>> gs_segments_;
  std::vector<GsHandover> handovers_;
};

struct AnchorRef {
  enum class Kind { Satellite, GroundStation };
  Kind kind = Kind::Satellite;
  std::int32_t id = 0;

  friend bool operator==(const AnchorRef&, const AnchorRef&) = default;
};

std::string to_string(const AnchorRef& a);

struct UserSlot {
  NodeId user{};
  bool connected_up = false;
  bool connected_down = false;
  std::optional<double> rtt_ms;
  std::optional<SatelliteId> ingress;
  std::optional<AnchorRef> anchor;
  std::optional<NodeAddress> address;
  bool address_changed = false;
  bool handover = false;
  bool registering = false;  // first registration of the run
  NodeId server_gs{};
  std::optional<Path> down;
  std::optional<Path> up;
};

struct SlotRecord {
  int t = 0;
  std::vector<UserSlot> users;
  std::vector<MmMessage> messages;
  std::int64_t control_message_hops = 0;  // sum of delivered message hop costs
  std::int64_t route_update_hops = 0;     // routing-protocol flooding charged to baselines
  int gs_handovers = 0;
};

struct RunLog {
  MechanismKind mechanism = MechanismKind::ClusterAnchor;
  LatencyMode latency_mode = LatencyMode::PerHop;
  double slot_seconds = 1.0;
  std::vector<SlotRecord> slots;
  std::vector<GsHandover> gs_handovers;
  std::optional<AnchorPlan> plan;             // ClusterAnchor only
  std::vector<NodeAddress> released_bindings;  // deregistrations at old anchors
};

// Sum of grid distances from one satellite to every satellite: the hop cost
// charged for one flooded routing update.
std::int64_t flooding_cost(const ShellConfig& shell);

class Simulation {
 public:
  Simulation(const Scenario& scenario, std::shared_ptr<const Environment> env);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  bool done() const { return t_ >= scenario_.horizon; }
  int next_slot() const { return t_; }
  SlotRecord step();

  const Scenario& scenario() const { return scenario_; }
  const Environment& environment() const { return *env_; }
  // ClusterAnchor only.
  const AnchorNetwork* network() const { return network_ ? &*network_ : nullptr; }
  const std::optional<AnchorPlan>& plan() const { return plan_; }
  const std::vector<NodeAddress>& released_bindings() const { return released_; }

 private:
  struct UserState {
    SlotAssignment assignment;                // ClusterAnchor
    std::optional<NodeAddress> address;       // ClusterAnchor
    std::optional<std::size_t> anchor_gs;     // GroundAnchor
    std::optional<SatelliteId> anchor_sat;    // FixedSatAnchor
    std::optional<SatelliteId> known_ingress; // anchor's view (baselines)
    std::optional<SatelliteId> last_ingress;
    std::uint32_t address_counter = 0;
  };

  void step_cluster_anchor(int t, SlotRecord& rec);
  void step_ground_anchor(int t, SlotRecord& rec);
  void step_fixed_sat_anchor(int t, SlotRecord& rec);
  bool converging(std::size_t gs, int t) const;
  void finish_probe(int t, std::size_t user, UserSlot& us);

  Scenario scenario_;
  std::shared_ptr<const Environment> env_;
  std::optional<AnchorPlan> plan_;
  std::optional<AnchorNetwork> network_;
  std::vector<GreedyAssigner> assigners_;
  std::vector<UserState> states_;
  std::vector<int> last_gs_handover_;
  std::vector<NodeAddress> released_;
  std::size_t next_handover_ = 0;
  std::int64_t flood_cost_ = 0;
  int t_ = 0;
};

RunLog run(const Scenario& scenario);
RunLog run(const Scenario& scenario, std::shared_ptr<const Environment> env);

// Copy of the scenario with random users materialised from rng_seed.
Scenario resolve_users(const Scenario& scenario);

}  // namespace satmm
