#include "satmm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace satmm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr std::int32_t kNone = -1;

std::optional<SatelliteId> from_raw(std::int32_t v) {
  return v == kNone ? std::nullopt : std::optional<SatelliteId>(sat(v));
}

double isl_arc_km(const Path& p, const ShellConfig& shell, double seconds) {
  double km = 0.0;
  const double r = shell.orbital_radius_km();
  for (std::size_t i = 1; i < p.satellites.size(); ++i) {
    const Vec3 a = satellite_position(p.satellites[i - 1], seconds, shell);
    const Vec3 b = satellite_position(p.satellites[i], seconds, shell);
    km += r * std::acos(std::clamp(a.dot(b) / (r * r), -1.0, 1.0));
  }
  return km;
}

// Point `distance_km` from `origin` along `bearing_deg`.
GroundPoint destination_point(const GroundPoint& origin, double bearing_deg, double distance_km) {
  const double d = distance_km / kEarthRadiusKm;
  const double lat1 = origin.latitude_deg * kDeg;
  const double lon1 = origin.longitude_deg * kDeg;
  const double brg = bearing_deg * kDeg;
  const double lat2 = std::asin(std::sin(lat1) * std::cos(d) + std::cos(lat1) * std::sin(d) * std::cos(brg));
  const double lon2 =
      lon1 + std::atan2(std::sin(brg) * std::sin(d) * std::cos(lat1), std::cos(d) - std::sin(lat1) * std::sin(lat2));
  return GroundPoint{lat2 / kDeg, lon2 / kDeg, 0.0}.normalized();
}

}  // namespace

const char* to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::ClusterAnchor: return "cluster-anchor";
    case MechanismKind::GroundAnchor: return "ground-anchor";
    case MechanismKind::FixedSatAnchor: return "fixed-sat-anchor";
  }
  return "?";
}

std::optional<MechanismKind> parse_mechanism(std::string_view name) {
  for (auto k : {MechanismKind::ClusterAnchor, MechanismKind::GroundAnchor, MechanismKind::FixedSatAnchor}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

const char* to_string(LatencyMode m) { return m == LatencyMode::PerHop ? "per-hop" : "geometric"; }

std::string to_string(const AnchorRef& a) {
  return (a.kind == AnchorRef::Kind::Satellite ? "S" : "G") + std::to_string(a.id);
}

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> errors;
  for (const auto& e : shell.validate()) errors.push_back("shell: " + e);
  if (horizon < 2) errors.emplace_back("sim.horizon_slots must be ≥ 2");
  if (!(slot_seconds > 0.0)) errors.emplace_back("sim.slot_seconds must be > 0");
  if (!(per_hop_ms >= 0.0)) errors.emplace_back("sim.per_hop_ms must be ≥ 0");
  if (convergence.convergence_slots < 0) errors.emplace_back("sim.convergence_slots must be ≥ 0");
  if (reanchor_hysteresis_slots < 1) errors.emplace_back("sim.reanchor_hysteresis_slots must be ≥ 1");
  if (mechanism.ada.H < 0 && mechanism.ada.H != -1) errors.emplace_back("ada.H must be ≥ 0");
  if (ground_stations.empty()) errors.emplace_back("gs: at least one ground station is required");
  if (users.empty() && random_users.count <= 0) errors.emplace_back("users: at least one user is required");
  if (random_users.count < 0) errors.emplace_back("random_users.count must be ≥ 0");

  std::set<std::int32_t> gs_ids;
  for (const auto& g : ground_stations) {
    if (!gs_ids.insert(index_of(g.id)).second) errors.push_back("gs: duplicate id " + std::to_string(index_of(g.id)));
    if (std::abs(g.location.latitude_deg) > 90.0) errors.push_back("gs." + g.name + ": |lat| must be ≤ 90");
  }
  std::set<std::int32_t> user_ids;
  const double last_slot_s = (horizon - 1) * slot_seconds;
  for (const auto& u : users) {
    if (!user_ids.insert(index_of(u.id)).second)
      errors.push_back("users: duplicate id " + std::to_string(index_of(u.id)));
    if (u.waypoints.empty()) {
      errors.push_back("users." + u.name + ": no waypoints");
      continue;
    }
    for (std::size_t i = 1; i < u.waypoints.size(); ++i) {
      if (!(u.waypoints[i].seconds > u.waypoints[i - 1].seconds)) {
        errors.push_back("users." + u.name + ": timestamps must be strictly increasing");
        break;
      }
    }
    if (u.waypoints.size() > 1 && (u.waypoints.front().seconds > 0.0 || u.waypoints.back().seconds < last_slot_s)) {
      errors.push_back("users." + u.name + ": trace does not cover the horizon");
    }
  }
  if (random_users.count > 0 && user_ids.contains(random_users.first_id)) {
    errors.emplace_back("random_users.first_id collides with a listed user");
  }
  return errors;
}

AdaParams effective_ada(const Scenario& scenario) {
  AdaParams p = AdaParams::defaults_for(scenario.shell, scenario.slot_seconds);
  if (scenario.mechanism.ada.H >= 0) p.H = scenario.mechanism.ada.H;
  if (scenario.mechanism.ada.discovery_window >= 1) p.discovery_window = scenario.mechanism.ada.discovery_window;
  return p;
}

double gsl_one_way_ms(double slant_range_km) { return slant_range_km / kSpeedOfLightKmS * 1000.0; }

double probe_rtt(const std::optional<Path>& down, const std::optional<Path>& up, const LinkLatency& links,
                 const Scenario& scenario, double seconds) {
  if (!down || !up) throw SimulationError("RTT probe on a disconnected pair");
  double isl_ms = 0.0;
  if (scenario.latency_mode == LatencyMode::PerHop) {
    isl_ms = (down->hops() + up->hops()) * scenario.per_hop_ms;
  } else {
    const double km = isl_arc_km(*down, scenario.shell, seconds) + isl_arc_km(*up, scenario.shell, seconds);
    isl_ms = km / kSpeedOfLightKmS * 1000.0;
  }
  return isl_ms + 2.0 * (links.user_gsl_ms + links.gs_gsl_ms) + links.server_ms;
}

std::int64_t flooding_cost(const ShellConfig& shell) {
  std::int64_t total = 0;
  for (int i = 0; i < shell.size(); ++i) total += grid_distance(sat(0), sat(i), shell);
  return total;
}

Scenario resolve_users(const Scenario& scenario) {
  Scenario out = scenario;
  if (scenario.random_users.count <= 0 || scenario.ground_stations.empty()) return out;
  std::mt19937_64 rng(scenario.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, scenario.ground_stations.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < scenario.random_users.count; ++i) {
    const GroundStation& gs = scenario.ground_stations[pick(rng)];
    const double bearing = 360.0 * unit(rng);
    const double dist = scenario.random_users.radius_km * std::sqrt(unit(rng));
    UserTrace u;
    u.id = node(scenario.random_users.first_id + i);
    u.name = "random-" + std::to_string(i);
    u.waypoints.push_back({0.0, destination_point(gs.location, bearing, dist)});
    out.users.push_back(std::move(u));
  }
  out.random_users.count = 0;
  return out;
}

Environment::Environment(const Scenario& scenario)
    : slot_seconds_(scenario.slot_seconds), horizon_(scenario.horizon) {
  users_ = resolve_users(scenario).users;
  std::sort(users_.begin(), users_.end(), [](const UserTrace& a, const UserTrace& b) { return a.id < b.id; });
  gss_ = scenario.ground_stations;
  const ShellConfig& shell = scenario.shell;
  const std::size_t nu = users_.size();
  const std::size_t ng = gss_.size();
  const auto h = static_cast<std::size_t>(horizon_);

  timelines_.resize(nu);
  baseline_.assign(nu, std::vector<std::int32_t>(h, kNone));
  home_.assign(nu, std::vector<std::int32_t>(h, 0));
  nearest_.assign(nu, std::vector<std::int32_t>(h, 0));
  for (std::size_t u = 0; u < nu; ++u) {
    timelines_[u].node = index_of(users_[u].id);
    timelines_[u].slots.reserve(h);
  }
  gs_segments_.resize(ng);
  std::vector<std::optional<SatelliteId>> gs_current(ng);
  std::vector<int> away(nu, 0);

  for (int t = 0; t < horizon_; ++t) {
    const Snapshot snap(shell, t * slot_seconds_);

    for (std::size_t g = 0; g < ng; ++g) {
      const GroundPoint& loc = gss_[g].location;
      auto cur = gs_current[g];
      if (cur && snap.is_visible(loc, *cur)) continue;
      const auto next = snap.best_visible(loc);
      if (t == 0 || next != cur) gs_segments_[g].push_back({t, next});
      if (t > 0 && next && next != cur) handovers_.push_back({t, gss_[g].id, cur, *next});
      gs_current[g] = next;
    }

    for (std::size_t u = 0; u < nu; ++u) {
      const GroundPoint p = interpolate_trajectory(users_[u].waypoints, t * slot_seconds_);
      auto vis = snap.visible_from(p);

      const std::int32_t prev = t > 0 ? baseline_[u][static_cast<std::size_t>(t - 1)] : kNone;
      std::int32_t chosen = kNone;
      if (prev != kNone && std::binary_search(vis.begin(), vis.end(), sat(prev))) {
        chosen = prev;
      } else {
        double best_el = -1e9;
        for (SatelliteId s : vis) {
          const double el = snap.elevation_deg(p, s);
          if (el > best_el) {
            best_el = el;
            chosen = index_of(s);
          }
        }
      }
      baseline_[u][static_cast<std::size_t>(t)] = chosen;
      timelines_[u].slots.push_back(std::move(vis));

      std::size_t nearest = 0;
      double best_km = std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < ng; ++g) {
        const double km = surface_distance_km(p, gss_[g].location);
        if (km < best_km) {
          best_km = km;
          nearest = g;
        }
      }
      nearest_[u][static_cast<std::size_t>(t)] = static_cast<std::int32_t>(nearest);
      std::int32_t home = t == 0 ? static_cast<std::int32_t>(nearest) : home_[u][static_cast<std::size_t>(t - 1)];
      if (static_cast<std::size_t>(home) != nearest) {
        if (++away[u] >= scenario.reanchor_hysteresis_slots) {
          home = static_cast<std::int32_t>(nearest);
          away[u] = 0;
        }
      } else {
        away[u] = 0;
      }
      home_[u][static_cast<std::size_t>(t)] = home;
    }
  }
}

std::optional<SatelliteId> Environment::baseline_ingress(std::size_t user, int t) const {
  return from_raw(baseline_[user][static_cast<std::size_t>(t)]);
}

std::size_t Environment::home_gs(std::size_t user, int t) const {
  return static_cast<std::size_t>(home_[user][static_cast<std::size_t>(t)]);
}

std::size_t Environment::nearest_gs(std::size_t user, int t) const {
  return static_cast<std::size_t>(nearest_[user][static_cast<std::size_t>(t)]);
}

GroundPoint Environment::user_position(std::size_t user, int t) const {
  return interpolate_trajectory(users_[user].waypoints, t * slot_seconds_);
}

std::optional<SatelliteId> Environment::gs_ingress(std::size_t gs, int t) const {
  const auto& segs = gs_segments_[gs];
  auto it = std::upper_bound(segs.begin(), segs.end(), t, [](int v, const Segment& s) { return v < s.start; });
  if (it == segs.begin()) return std::nullopt;
  return std::prev(it)->ingress;
}

std::size_t Environment::gs_index(NodeId id) const {
  for (std::size_t g = 0; g < gss_.size(); ++g) {
    if (gss_[g].id == id) return g;
  }
  throw SimulationError("unknown ground station " + std::to_string(index_of(id)));
}

Simulation::Simulation(const Scenario& scenario, std::shared_ptr<const Environment> env)
    : scenario_(scenario), env_(std::move(env)) {
  if (env_->horizon() != scenario_.horizon) throw SimulationError("environment horizon mismatch");
  states_.resize(env_->users().size());
  last_gs_handover_.assign(env_->ground_stations().size(), std::numeric_limits<int>::min() / 2);
  flood_cost_ = flooding_cost(scenario_.shell);

  if (scenario_.mechanism.kind == MechanismKind::ClusterAnchor) {
    plan_ = plan_anchors(scenario_.shell, scenario_.reference_point, effective_ada(scenario_), scenario_.slot_seconds);
    std::vector<NodeId> gs_ids;
    for (const auto& g : env_->ground_stations()) gs_ids.push_back(g.id);
    network_.emplace(scenario_.shell, plan_->division, std::move(gs_ids));
    assigners_.reserve(env_->users().size());
    for (std::size_t u = 0; u < env_->users().size(); ++u) {
      assigners_.emplace_back(env_->timeline(u), network_->division());
    }
  }
}

bool Simulation::converging(std::size_t gs, int t) const {
  return t - last_gs_handover_[gs] < scenario_.convergence.convergence_slots;
}

SlotRecord Simulation::step() {
  if (done()) throw SimulationError("simulation already finished");
  const int t = t_;
  SlotRecord rec;
  rec.t = t;

  std::vector<const GsHandover*> events;
  const auto& hs = env_->gs_handovers();
  while (next_handover_ < hs.size() && hs[next_handover_].t == t) events.push_back(&hs[next_handover_++]);
  for (const GsHandover* e : events) last_gs_handover_[env_->gs_index(e->gs)] = t;
  rec.gs_handovers = static_cast<int>(events.size());

  if (scenario_.mechanism.kind == MechanismKind::ClusterAnchor) {
    if (t == 0) {
      for (std::size_t g = 0; g < env_->ground_stations().size(); ++g) {
        if (auto ing = env_->gs_ingress(g, 0)) {
          auto msgs = update_gs_location(*network_, env_->ground_stations()[g].id, *ing, t);
          rec.messages.insert(rec.messages.end(), msgs.begin(), msgs.end());
        }
      }
    }
    for (const GsHandover* e : events) {
      auto msgs = update_gs_location(*network_, e->gs, e->to, t);
      rec.messages.insert(rec.messages.end(), msgs.begin(), msgs.end());
    }
    step_cluster_anchor(t, rec);
  } else {
    rec.route_update_hops = static_cast<std::int64_t>(events.size()) * flood_cost_;
    if (scenario_.mechanism.kind == MechanismKind::GroundAnchor) {
      step_ground_anchor(t, rec);
    } else {
      step_fixed_sat_anchor(t, rec);
    }
  }

  for (const MmMessage& m : rec.messages) {
    if (m.delivered) rec.control_message_hops += m.hop_cost;
  }
  ++t_;
  return rec;
}

void Simulation::step_cluster_anchor(int t, SlotRecord& rec) {
  const ShellConfig& shell = scenario_.shell;
  for (std::size_t u = 0; u < states_.size(); ++u) {
    UserState& st = states_[u];
    const NodeId id = env_->users()[u].id;
    const std::size_t home = env_->home_gs(u, t);
    UserSlot us;
    us.user = id;
    us.server_gs = env_->ground_stations()[home].id;

    const SlotAssignment a = assigners_[u].step(t, st.assignment);
    us.handover = st.assignment.ingress && a.ingress && *st.assignment.ingress != *a.ingress;
    st.assignment = a;

    if (a.ingress) {
      const SatelliteId ingress = *a.ingress;
      AnchorState& target = network_->state(*a.anchor);
      if (!st.address) {
        Registration r = register_user(target, id, ingress, t, shell);
        st.address = r.address;
        us.registering = true;
        rec.messages.insert(rec.messages.end(), r.messages.begin(), r.messages.end());
      } else if (st.address->anchor() != a.anchor) {
        Registration r = inter_cluster_handover(id, *st.address, network_->state(*st.address->anchor()), target,
                                                ingress, t, shell);
        released_.push_back(*r.released);
        st.address = r.address;
        us.address_changed = true;
        rec.messages.insert(rec.messages.end(), r.messages.begin(), r.messages.end());
      } else if (auto m = update_user_location(target, *st.address, ingress, t, shell)) {
        rec.messages.push_back(*m);
      }
      us.ingress = ingress;
      us.anchor = AnchorRef{AnchorRef::Kind::Satellite, index_of(*a.anchor)};
      us.address = st.address;

      if (!us.registering && env_->gs_ingress(home, t)) {
        const NodeId gs = env_->ground_stations()[home].id;
        us.down = route_gs_to_user(gs, *st.address, *network_);
        us.up = route_user_to_gs(NodeAddress::ground_station(gs), ingress, *network_);
        us.connected_down = us.down.has_value();
        us.connected_up = us.up.has_value();
      }
    }
    finish_probe(t, u, us);
    rec.users.push_back(std::move(us));
  }
}

void Simulation::step_ground_anchor(int t, SlotRecord& rec) {
  const ShellConfig& shell = scenario_.shell;
  for (std::size_t u = 0; u < states_.size(); ++u) {
    UserState& st = states_[u];
    const NodeId id = env_->users()[u].id;
    const auto ingress = env_->baseline_ingress(u, t);
    const std::size_t home = env_->home_gs(u, t);
    UserSlot us;
    us.user = id;
    us.handover = st.last_ingress && ingress && *st.last_ingress != *ingress;
    st.last_ingress = ingress;

    if (ingress) {
      if (!st.anchor_gs) {
        st.anchor_gs = home;
        st.known_ingress.reset();
        us.registering = true;
      } else if (*st.anchor_gs != home) {
        st.anchor_gs = home;
        st.known_ingress.reset();
        ++st.address_counter;
        us.address_changed = true;
      }
      const std::size_t anchor = *st.anchor_gs;
      const auto anchor_sat = env_->gs_ingress(anchor, t);
      const bool reachable = anchor_sat && !converging(anchor, t);
      // Reactive update: the anchor learns the new ingress only after this slot's probe.
      const bool fresh = st.known_ingress == ingress;
      if (!fresh) {
        MmMessage m;
        m.kind = st.known_ingress ? MessageKind::UserLocationUpdate : MessageKind::UserRegister;
        m.subject = id;
        m.ingress = *ingress;
        m.destination_anchor = anchor_sat.value_or(*ingress);
        m.delivered = reachable;
        m.hop_cost = reachable ? grid_distance(*ingress, *anchor_sat, shell) : 0;
        rec.messages.push_back(m);
        if (reachable) st.known_ingress = ingress;
      }
      us.ingress = ingress;
      us.anchor = AnchorRef{AnchorRef::Kind::GroundStation, index_of(env_->ground_stations()[anchor].id)};

      if (!us.registering) {
        if (reachable && fresh) {
          us.down = path_via(*anchor_sat, *anchor_sat, *ingress, shell);
        }
        const std::size_t egress = scenario_.ground_anchor_uplink_via_anchor ? anchor : env_->nearest_gs(u, t);
        const auto egress_sat = env_->gs_ingress(egress, t);
        if (egress_sat && !converging(egress, t)) us.up = path_via(*ingress, *ingress, *egress_sat, shell);
        us.connected_down = us.down.has_value();
        us.connected_up = us.up.has_value();
      }
    }
    us.server_gs = env_->ground_stations()[st.anchor_gs.value_or(home)].id;
    finish_probe(t, u, us);
    rec.users.push_back(std::move(us));
  }
}

void Simulation::step_fixed_sat_anchor(int t, SlotRecord& rec) {
  const ShellConfig& shell = scenario_.shell;
  for (std::size_t u = 0; u < states_.size(); ++u) {
    UserState& st = states_[u];
    const NodeId id = env_->users()[u].id;
    const auto ingress = env_->baseline_ingress(u, t);
    const std::size_t home = env_->home_gs(u, t);
    UserSlot us;
    us.user = id;
    us.server_gs = env_->ground_stations()[home].id;
    us.handover = st.last_ingress && ingress && *st.last_ingress != *ingress;
    st.last_ingress = ingress;

    if (ingress) {
      const bool fresh = st.known_ingress == ingress;
      if (!st.anchor_sat) {
        st.anchor_sat = ingress;
        st.known_ingress = ingress;
        us.registering = true;
        rec.messages.push_back({MessageKind::UserRegister, id, *ingress, *ingress, 0, true});
        rec.messages.push_back({MessageKind::AddressGrant, id, *ingress, *ingress, 0, true});
      } else if (st.known_ingress != ingress) {
        rec.messages.push_back({MessageKind::UserLocationUpdate, id, *ingress, *st.anchor_sat,
                                grid_distance(*ingress, *st.anchor_sat, shell), true});
        st.known_ingress = ingress;
      }
      us.ingress = ingress;
      us.anchor = AnchorRef{AnchorRef::Kind::Satellite, index_of(*st.anchor_sat)};
      us.address = NodeAddress::user(*st.anchor_sat, 0);

      const auto gs_sat = env_->gs_ingress(home, t);
      if (!us.registering && gs_sat) {
        // Any satellite the GS reaches has a stable ISL route to the anchor; the
        // reverse direction leaves the mesh through the GS's converging route.
        if (fresh) us.down = path_via(*gs_sat, *st.anchor_sat, *ingress, shell);
        if (!converging(home, t)) us.up = path_via(*ingress, *st.anchor_sat, *gs_sat, shell);
        us.connected_down = us.down.has_value();
        us.connected_up = us.up.has_value();
      }
    }
    finish_probe(t, u, us);
    rec.users.push_back(std::move(us));
  }
}

void Simulation::finish_probe(int t, std::size_t user, UserSlot& us) {
  if (!(us.connected_down && us.connected_up)) return;
  const double seconds = t * scenario_.slot_seconds;
  const GroundPoint up = env_->user_position(user, t);
  const Vec3 user_eci = ground_position(up, seconds);
  const Vec3 ingress_eci = satellite_position(*us.ingress, seconds, scenario_.shell);

  auto gs_leg_ms = [&](const Path& p, bool at_end) {
    const SatelliteId s = at_end ? p.satellites.back() : p.satellites.front();
    // Leg to whichever GS attaches to `s` for this user: the server GS.
    const GroundPoint& loc = env_->ground_stations()[env_->gs_index(us.server_gs)].location;
    return gsl_one_way_ms(slant_range_km(ground_position(loc, seconds), satellite_position(s, seconds, scenario_.shell)));
  };

  LinkLatency links;
  links.user_gsl_ms = gsl_one_way_ms(slant_range_km(user_eci, ingress_eci));
  links.gs_gsl_ms = 0.5 * (gs_leg_ms(*us.down, false) + gs_leg_ms(*us.up, true));
  links.server_ms = env_->ground_stations()[env_->gs_index(us.server_gs)].server_latency_ms;
  us.rtt_ms = probe_rtt(us.down, us.up, links, scenario_, seconds);
}

RunLog run(const Scenario& scenario, std::shared_ptr<const Environment> env) {
  Simulation sim(scenario, env);
  RunLog log;
  log.mechanism = scenario.mechanism.kind;
  log.latency_mode = scenario.latency_mode;
  log.slot_seconds = scenario.slot_seconds;
  log.slots.reserve(static_cast<std::size_t>(scenario.horizon));
  while (!sim.done()) log.slots.push_back(sim.step());
  log.gs_handovers = env->gs_handovers();
  log.plan = sim.plan();
  log.released_bindings = sim.released_bindings();
  return log;
}

RunLog run(const Scenario& scenario) {
  const auto errors = scenario.validate();
  if (!errors.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw SimulationError(msg);
  }
  return run(scenario, std::make_shared<const Environment>(scenario));
}

}  // namespace satmm
