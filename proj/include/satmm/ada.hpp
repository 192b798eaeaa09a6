#pragma once

// Anchor deployment and assignment.
//
// A cluster pattern is a fixed set of torus offsets around an anchor. Pattern
// discovery picks the largest detour-feasible cluster among the satellites a
// reference ground point sees over a window; deployment covers the whole shell
// with pattern instances; assignment walks one user's visibility timeline and
// keeps it on the same anchor for as long as possible.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "satmm/constellation.hpp"

namespace satmm {

struct AdaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdaParams {
  int H = 0;                 // maximum extra hops over the shortest path
  int discovery_window = 1;  // slots unioned into the discovery visible set

  static AdaParams defaults_for(const ShellConfig& shell, double slot_seconds);
};

// Minimal signed torus offset.
struct Offset {
  int dx = 0;
  int dy = 0;

  friend auto operator<=>(const Offset&, const Offset&) = default;
};

Offset canonical_offset(int dx, int dy, const ShellConfig& shell);

struct ClusterPattern {
  std::vector<Offset> offsets;  // sorted, always holds {0, 0}
  int built_with_H = 0;

  // Members of the instance anchored at `anchor`, sorted by id.
  std::vector<SatelliteId> instance(SatelliteId anchor, const ShellConfig& shell) const;
};

struct PatternDiscovery {
  ClusterPattern pattern;
  SatelliteId anchor{};
  std::vector<SatelliteId> members;  // the winning candidate cluster
};

// Candidates are ranked by size, then by their offset set (lexicographically
// smallest first), then by anchor id. Only the first key is a real preference;
// the other two make the choice independent of where the visible set sits on
// the torus.
PatternDiscovery discover_pattern(std::span<const SatelliteId> visible_union, int H, const ShellConfig& shell);
ClusterPattern pattern_discovery(std::span<const SatelliteId> visible_union, int H, const ShellConfig& shell);

class ClusterDivision {
 public:
  ClusterDivision() = default;
  explicit ClusterDivision(std::vector<SatelliteId> anchor_of);

  static ClusterDivision singletons(int satellites);

  SatelliteId anchor_of(SatelliteId member) const { return anchor_of_[static_cast<std::size_t>(index_of(member))]; }
  const std::vector<SatelliteId>& anchor_map() const { return anchor_of_; }
  const std::map<SatelliteId, std::vector<SatelliteId>>& clusters() const { return clusters_; }
  std::vector<SatelliteId> anchors() const;
  int satellite_count() const { return static_cast<int>(anchor_of_.size()); }
  bool is_anchor(SatelliteId id) const { return clusters_.contains(id); }

  // Partition invariants; empty when all hold.
  std::vector<std::string> validate(const ShellConfig& shell) const;

 private:
  std::vector<SatelliteId> anchor_of_;
  std::map<SatelliteId, std::vector<SatelliteId>> clusters_;
};

// Greedy cover of the shell by pattern instances. Only satellites not yet
// covered are assigned to the chosen anchor, and only uncovered satellites
// are eligible anchors, so the result is always a partition in which every
// anchor belongs to its own cluster.
ClusterDivision deploy_anchors(const ShellConfig& shell, const ClusterPattern& pattern);

int detour_bound(GridCoord member, GridCoord anchor, const ShellConfig& shell);

struct DelayAudit {
  bool passed = true;
  int H = 0;
  int violations = 0;
  // Member with the largest detour bound, and its anchor.
  SatelliteId worst_member{};
  SatelliteId worst_anchor{};
  int worst_detour = 0;
  int slack() const { return H - worst_detour; }
};

DelayAudit check_delay_constraint(const ClusterDivision& division, int H, const ShellConfig& shell);

struct SlotAssignment {
  std::optional<SatelliteId> ingress;
  std::optional<SatelliteId> anchor;

  bool connected() const { return ingress.has_value(); }
  friend bool operator==(const SlotAssignment&, const SlotAssignment&) = default;
};

struct AssignmentTimeline {
  std::vector<SlotAssignment> slots;

  int horizon() const { return static_cast<int>(slots.size()); }
  // Consecutive connected slot pairs whose anchors differ.
  int anchor_changes() const;
  int ingress_changes() const;
};

// Number of (user, k) pairs connected at k-1 and k through the same anchor.
std::int64_t objective_value(std::span<const AssignmentTimeline> assignments, const ClusterDivision& division);

// Online form of the greedy assignment: decides slot k from slot k-1 with
// lookahead over the precomputed timeline.
class GreedyAssigner {
 public:
  GreedyAssigner(const VisibilityTimeline& timeline, const ClusterDivision& division);

  SlotAssignment step(int k, const SlotAssignment& previous) const;

  // Slots from k onward during which `id` stays visible.
  int run_length(SatelliteId id, int k) const;
  // Slots from k onward during which at least one member of the cluster stays visible.
  int cluster_run_length(SatelliteId anchor, int k) const;

 private:
  std::optional<SatelliteId> longest_member(int k, std::optional<SatelliteId> cluster) const;

  const VisibilityTimeline* timeline_;
  const ClusterDivision* division_;
};

AssignmentTimeline assign_greedy(const VisibilityTimeline& timeline, const ClusterDivision& division);

// Exhaustive maximiser of the single-user objective. Test oracle only.
AssignmentTimeline assign_bruteforce(const VisibilityTimeline& timeline, const ClusterDivision& division);

std::int64_t candidate_cluster_weight(std::span<const SatelliteId> candidate,
                                      std::span<const VisibilityTimeline> timelines);

// Union of satellites visible from `reference` over `window` slots starting at slot 0.
std::vector<SatelliteId> visible_union(const GroundPoint& reference, int window, const ShellConfig& shell,
                                       double slot_seconds);

struct AnchorPlan {
  AdaParams params;
  std::vector<SatelliteId> visible_union;
  PatternDiscovery discovery;
  ClusterDivision division;
  DelayAudit audit;
};

AnchorPlan plan_anchors(const ShellConfig& shell, const GroundPoint& reference, const AdaParams& params,
                        double slot_seconds);

}  // namespace satmm
