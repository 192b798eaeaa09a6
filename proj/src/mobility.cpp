#include "satmm/mobility.hpp"

#include <algorithm>

namespace satmm {

struct AnchorStateAccess {
  static auto& users(AnchorState& s) { return s.user_bindings_; }
  static auto& gss(AnchorState& s) { return s.gs_bindings_; }
  static std::uint32_t take_suffix(AnchorState& s) { return s.next_suffix_++; }
};

std::string to_string(const NodeAddress& a) {
  if (a.is_ground_station()) return "gs:" + std::to_string(a.suffix);
  return "S" + std::to_string(a.prefix) + ":" + std::to_string(a.suffix);
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::UserRegister: return "UserRegister";
    case MessageKind::UserLocationUpdate: return "UserLocationUpdate";
    case MessageKind::GsLocationUpdate: return "GsLocationUpdate";
    case MessageKind::AddressGrant: return "AddressGrant";
  }
  return "?";
}

AnchorState::AnchorState(SatelliteId anchor, std::vector<SatelliteId> members)
    : anchor_(anchor), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
}

bool AnchorState::manages(SatelliteId s) const { return std::binary_search(members_.begin(), members_.end(), s); }

const LocationBinding* AnchorState::find_user(const NodeAddress& a) const {
  auto it = user_bindings_.find(a);
  return it == user_bindings_.end() ? nullptr : &it->second;
}

const LocationBinding* AnchorState::find_gs(const NodeAddress& a) const {
  auto it = gs_bindings_.find(a);
  return it == gs_bindings_.end() ? nullptr : &it->second;
}

Registration register_user(AnchorState& anchor, NodeId user, SatelliteId ingress, int t, const ShellConfig& shell) {
  if (!anchor.manages(ingress)) throw MobilityError("wrong anchor");
  Registration r;
  r.address = NodeAddress::user(anchor.anchor(), AnchorStateAccess::take_suffix(anchor));
  AnchorStateAccess::users(anchor)[r.address] = LocationBinding{r.address, user, ingress, t};
  const int hops = grid_distance(ingress, anchor.anchor(), shell);
  r.messages.push_back({MessageKind::UserRegister, user, ingress, anchor.anchor(), hops, true});
  r.messages.push_back({MessageKind::AddressGrant, user, anchor.anchor(), ingress, hops, true});
  return r;
}

std::optional<MmMessage> update_user_location(AnchorState& anchor, const NodeAddress& address,
                                              SatelliteId new_ingress, int t, const ShellConfig& shell) {
  auto& users = AnchorStateAccess::users(anchor);
  auto it = users.find(address);
  if (it == users.end()) throw MobilityError("unknown address " + to_string(address));
  if (!anchor.manages(new_ingress)) throw MobilityError("ingress outside cluster; inter-cluster handover required");
  if (it->second.ingress == new_ingress) return std::nullopt;
  it->second.ingress = new_ingress;
  it->second.updated_at = t;
  return MmMessage{MessageKind::UserLocationUpdate, it->second.node, new_ingress, anchor.anchor(),
                   grid_distance(new_ingress, anchor.anchor(), shell), true};
}

void deregister_user(AnchorState& anchor, const NodeAddress& address) {
  AnchorStateAccess::users(anchor).erase(address);
}

Registration inter_cluster_handover(NodeId user, const NodeAddress& old_address, AnchorState& old_anchor,
                                    AnchorState& new_anchor, SatelliteId new_ingress, int t,
                                    const ShellConfig& shell) {
  if (old_anchor.anchor() == new_anchor.anchor()) {
    throw MobilityError("same anchor; use an intra-cluster location update");
  }
  if (!old_anchor.find_user(old_address)) throw MobilityError("unknown address " + to_string(old_address));
  Registration r = register_user(new_anchor, user, new_ingress, t, shell);
  deregister_user(old_anchor, old_address);
  r.released = old_address;
  return r;
}

AnchorNetwork::AnchorNetwork(const ShellConfig& shell, const ClusterDivision& division,
                             std::vector<NodeId> ground_stations)
    : shell_(shell), division_(division), ground_stations_(ground_stations.begin(), ground_stations.end()) {
  for (const auto& [anchor, members] : division_.clusters()) anchors_.emplace(anchor, AnchorState(anchor, members));
}

AnchorState& AnchorNetwork::state(SatelliteId anchor) {
  auto it = anchors_.find(anchor);
  if (it == anchors_.end()) throw MobilityError("not an anchor: " + std::to_string(index_of(anchor)));
  return it->second;
}

const AnchorState& AnchorNetwork::state(SatelliteId anchor) const {
  auto it = anchors_.find(anchor);
  if (it == anchors_.end()) throw MobilityError("not an anchor: " + std::to_string(index_of(anchor)));
  return it->second;
}

std::vector<MmMessage> update_gs_location(AnchorNetwork& network, NodeId gs, SatelliteId new_ingress, int t) {
  if (!network.is_ground_station(gs)) throw MobilityError("unknown ground station " + std::to_string(index_of(gs)));
  const NodeAddress address = NodeAddress::ground_station(gs);
  std::vector<MmMessage> out;
  out.reserve(network.anchors().size());
  for (const auto& [anchor_id, unused] : network.anchors()) {
    AnchorState& s = network.state(anchor_id);
    AnchorStateAccess::gss(s)[address] = LocationBinding{address, gs, new_ingress, t};
    out.push_back({MessageKind::GsLocationUpdate, gs, new_ingress, anchor_id,
                   grid_distance(new_ingress, anchor_id, network.shell()), true});
  }
  return out;
}

Path path_via(SatelliteId from, SatelliteId anchor, SatelliteId to, const ShellConfig& shell) {
  Path p;
  p.anchor = anchor;
  p.satellites = shortest_grid_path(from, anchor, shell);
  const auto second = shortest_grid_path(anchor, to, shell);
  p.satellites.insert(p.satellites.end(), second.begin() + 1, second.end());
  p.to_anchor_hops = grid_distance(from, anchor, shell);
  p.from_anchor_hops = grid_distance(anchor, to, shell);
  return p;
}

std::optional<Path> route_gs_to_user(NodeId source_gs, const NodeAddress& user_address, const AnchorNetwork& network) {
  const auto anchor = user_address.anchor();
  if (!anchor || !network.division().is_anchor(*anchor)) return std::nullopt;
  const AnchorState& state = network.state(*anchor);
  const LocationBinding* user = state.find_user(user_address);
  const LocationBinding* gs = state.find_gs(NodeAddress::ground_station(source_gs));
  if (!user || !gs) return std::nullopt;
  return path_via(gs->ingress, *anchor, user->ingress, network.shell());
}

std::optional<Path> route_user_to_gs(const NodeAddress& dest_gs_address, SatelliteId user_ingress,
                                     const AnchorNetwork& network) {
  if (!dest_gs_address.is_ground_station()) return std::nullopt;
  const SatelliteId anchor = network.division().anchor_of(user_ingress);
  const LocationBinding* gs = network.state(anchor).find_gs(dest_gs_address);
  if (!gs) return std::nullopt;
  return path_via(user_ingress, anchor, gs->ingress, network.shell());
}

}  // namespace satmm
