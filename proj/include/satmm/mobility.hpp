#pragma once

// Satellite-anchor location management and passing-anchor routing.
//
// Each anchor allocates user addresses under its own prefix and holds two
// binding tables: users registered with it, and every ground station in the
// network. Routes never depend on a converged routing protocol: a packet is
// tunnelled to the anchor over the torus and from there to the ingress
// satellite recorded in the anchor's binding.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "satmm/ada.hpp"
#include "satmm/constellation.hpp"

namespace satmm {

enum class NodeId : std::int32_t {};

constexpr std::int32_t index_of(NodeId id) { return static_cast<std::int32_t>(id); }
constexpr NodeId node(std::int32_t index) { return static_cast<NodeId>(index); }

struct MobilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NodeAddress {
  static constexpr std::int32_t kOperatorPrefix = -1;

  std::int32_t prefix = kOperatorPrefix;  // allocating anchor, or the operator marker for GSs
  std::uint32_t suffix = 0;

  static NodeAddress user(SatelliteId anchor, std::uint32_t suffix) { return {index_of(anchor), suffix}; }
  static NodeAddress ground_station(NodeId gs) { return {kOperatorPrefix, static_cast<std::uint32_t>(index_of(gs))}; }

  bool is_ground_station() const { return prefix == kOperatorPrefix; }
  std::optional<SatelliteId> anchor() const {
    return is_ground_station() ? std::nullopt : std::optional<SatelliteId>(sat(prefix));
  }

  friend auto operator<=>(const NodeAddress&, const NodeAddress&) = default;
};

std::string to_string(const NodeAddress& a);

struct LocationBinding {
  NodeAddress address;
  NodeId node{};
  SatelliteId ingress{};
  int updated_at = 0;
};

enum class MessageKind { UserRegister, UserLocationUpdate, GsLocationUpdate, AddressGrant };

const char* to_string(MessageKind k);

struct MmMessage {
  MessageKind kind = MessageKind::UserLocationUpdate;
  NodeId subject{};
  SatelliteId ingress{};             // where the message enters the ISL mesh
  SatelliteId destination_anchor{};  // where it leaves it
  int hop_cost = 0;                  // filled on delivery
  bool delivered = true;
};

class AnchorState {
 public:
  AnchorState(SatelliteId anchor, std::vector<SatelliteId> members);

  SatelliteId anchor() const { return anchor_; }
  bool manages(SatelliteId sat) const;
  const std::vector<SatelliteId>& members() const { return members_; }

  const std::map<NodeAddress, LocationBinding>& user_bindings() const { return user_bindings_; }
  const std::map<NodeAddress, LocationBinding>& gs_bindings() const { return gs_bindings_; }
  std::uint32_t next_suffix() const { return next_suffix_; }

  const LocationBinding* find_user(const NodeAddress& a) const;
  const LocationBinding* find_gs(const NodeAddress& a) const;

 private:
  friend struct AnchorStateAccess;

  SatelliteId anchor_;
  std::vector<SatelliteId> members_;  // sorted
  std::map<NodeAddress, LocationBinding> user_bindings_;
  std::map<NodeAddress, LocationBinding> gs_bindings_;
  std::uint32_t next_suffix_ = 0;
};

struct Registration {
  NodeAddress address;
  std::vector<MmMessage> messages;
  std::optional<NodeAddress> released;  // binding dropped at the previous anchor, if any
};

// Allocates a fresh address under this anchor's prefix and binds it to `ingress`.
Registration register_user(AnchorState& anchor, NodeId user, SatelliteId ingress, int t, const ShellConfig& shell);

// Moves an existing binding to `new_ingress` inside the same cluster. Returns
// no message when the ingress is unchanged.
std::optional<MmMessage> update_user_location(AnchorState& anchor, const NodeAddress& address,
                                              SatelliteId new_ingress, int t, const ShellConfig& shell);

// Drops a user binding. Free of charge; callers log it.
void deregister_user(AnchorState& anchor, const NodeAddress& address);

Registration inter_cluster_handover(NodeId user, const NodeAddress& old_address, AnchorState& old_anchor,
                                    AnchorState& new_anchor, SatelliteId new_ingress, int t,
                                    const ShellConfig& shell);

// All anchors of one cluster division plus the configured ground stations.
class AnchorNetwork {
 public:
  AnchorNetwork(const ShellConfig& shell, const ClusterDivision& division, std::vector<NodeId> ground_stations);

  const ShellConfig& shell() const { return shell_; }
  const ClusterDivision& division() const { return division_; }

  AnchorState& state(SatelliteId anchor);
  const AnchorState& state(SatelliteId anchor) const;
  AnchorState& anchor_for(SatelliteId ingress) { return state(division_.anchor_of(ingress)); }
  const std::map<SatelliteId, AnchorState>& anchors() const { return anchors_; }

  bool is_ground_station(NodeId gs) const { return ground_stations_.contains(gs); }

 private:
  ShellConfig shell_;
  ClusterDivision division_;
  std::map<SatelliteId, AnchorState> anchors_;
  std::set<NodeId> ground_stations_;
};

// Notifies every anchor of a ground station's new ingress; one message per anchor.
std::vector<MmMessage> update_gs_location(AnchorNetwork& network, NodeId gs, SatelliteId new_ingress, int t);

struct Path {
  std::vector<SatelliteId> satellites;  // ingress to egress, anchor included once
  SatelliteId anchor{};
  int to_anchor_hops = 0;
  int from_anchor_hops = 0;

  int hops() const { return to_anchor_hops + from_anchor_hops; }
};

// Concatenation of the two shortest torus segments through `anchor`.
Path path_via(SatelliteId from, SatelliteId anchor, SatelliteId to, const ShellConfig& shell);

// GS ingress -> user's anchor (from the address prefix) -> user's ingress (from
// that anchor's binding). Empty when any binding is missing.
std::optional<Path> route_gs_to_user(NodeId source_gs, const NodeAddress& user_address, const AnchorNetwork& network);

// User ingress -> its anchor -> destination GS ingress (from the anchor's GS bindings).
std::optional<Path> route_user_to_gs(const NodeAddress& dest_gs_address, SatelliteId user_ingress,
                                     const AnchorNetwork& network);

}  // namespace satmm
