#include "satmm/ada.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace satmm {

AdaParams AdaParams::defaults_for(const ShellConfig& shell, double slot_seconds) {
  AdaParams p;
  p.H = (shell.num_orbits + shell.sats_per_orbit) / 2;
  p.discovery_window = std::max(1, static_cast<int>(std::ceil(orbital_period_s(shell) / slot_seconds)));
  return p;
}

Offset canonical_offset(int dx, int dy, const ShellConfig& shell) {
  auto fold = [](int d, int n) {
    int r = d % n;
    if (r < 0) r += n;
    return r > n / 2 ? r - n : r;
  };
  return {fold(dx, shell.num_orbits), fold(dy, shell.sats_per_orbit)};
}

std::vector<SatelliteId> ClusterPattern::instance(SatelliteId anchor, const ShellConfig& shell) const {
  const GridCoord a = to_coord(anchor, shell);
  std::vector<SatelliteId> out;
  out.reserve(offsets.size());
  for (const Offset& o : offsets) out.push_back(to_id(wrap(a.x + o.dx, a.y + o.dy, shell), shell));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PatternDiscovery discover_pattern(std::span<const SatelliteId> visible_union, int H, const ShellConfig& shell) {
  if (visible_union.empty()) throw AdaError("pattern discovery needs a non-empty visible set");
  if (H < 0) throw AdaError("H must be ≥ 0");

  std::vector<SatelliteId> sats(visible_union.begin(), visible_union.end());
  std::sort(sats.begin(), sats.end());
  sats.erase(std::unique(sats.begin(), sats.end()), sats.end());

  PatternDiscovery best;
  bool have_best = false;
  for (SatelliteId candidate : sats) {
    const GridCoord c = to_coord(candidate, shell);
    std::vector<SatelliteId> members;
    for (SatelliteId j : sats) {
      if (2 * grid_distance(to_coord(j, shell), c, shell) <= H) members.push_back(j);
    }
    if (have_best && members.size() < best.members.size()) continue;

    std::vector<Offset> offsets;
    offsets.reserve(members.size());
    for (SatelliteId j : members) {
      const GridCoord m = to_coord(j, shell);
      offsets.push_back(canonical_offset(m.x - c.x, m.y - c.y, shell));
    }
    std::sort(offsets.begin(), offsets.end());

    // Ascending id order means an exact tie keeps the earlier (lower) anchor.
    const bool better = !have_best || members.size() > best.members.size() || offsets < best.pattern.offsets;
    if (better) {
      best.anchor = candidate;
      best.members = std::move(members);
      best.pattern.offsets = std::move(offsets);
      best.pattern.built_with_H = H;
      have_best = true;
    }
  }
  return best;
}

ClusterPattern pattern_discovery(std::span<const SatelliteId> visible_union, int H, const ShellConfig& shell) {
  return discover_pattern(visible_union, H, shell).pattern;
}

ClusterDivision::ClusterDivision(std::vector<SatelliteId> anchor_of) : anchor_of_(std::move(anchor_of)) {
  for (int i = 0; i < static_cast<int>(anchor_of_.size()); ++i) {
    clusters_[anchor_of_[static_cast<std::size_t>(i)]].push_back(sat(i));
  }
}

ClusterDivision ClusterDivision::singletons(int satellites) {
  std::vector<SatelliteId> a;
  a.reserve(static_cast<std::size_t>(satellites));
  for (int i = 0; i < satellites; ++i) a.push_back(sat(i));
  return ClusterDivision(std::move(a));
}

std::vector<SatelliteId> ClusterDivision::anchors() const {
  std::vector<SatelliteId> out;
  out.reserve(clusters_.size());
  for (const auto& [anchor, members] : clusters_) out.push_back(anchor);
  return out;
}

std::vector<std::string> ClusterDivision::validate(const ShellConfig& shell) const {
  std::vector<std::string> errors;
  if (satellite_count() != shell.size()) {
    errors.push_back("division covers " + std::to_string(satellite_count()) + " satellites, shell has " +
                     std::to_string(shell.size()));
  }
  std::size_t members = 0;
  for (const auto& [anchor, cluster] : clusters_) {
    members += cluster.size();
    if (!shell.contains(anchor)) {
      errors.push_back("anchor " + std::to_string(index_of(anchor)) + " outside shell");
      continue;
    }
    if (!std::binary_search(cluster.begin(), cluster.end(), anchor)) {
      errors.push_back("anchor " + std::to_string(index_of(anchor)) + " is not a member of its own cluster");
    }
  }
  if (members != anchor_of_.size()) errors.emplace_back("clusters do not partition the satellite set");
  return errors;
}

ClusterDivision deploy_anchors(const ShellConfig& shell, const ClusterPattern& pattern) {
  const int n = shell.size();
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<SatelliteId> anchor_of(static_cast<std::size_t>(n), sat(-1));
  int remaining = n;

  while (remaining > 0) {
    int best_overlap = 0;
    std::optional<SatelliteId> best;
    for (int a = 0; a < n; ++a) {
      if (covered[static_cast<std::size_t>(a)]) continue;
      int overlap = 0;
      for (SatelliteId m : pattern.instance(sat(a), shell)) {
        if (!covered[static_cast<std::size_t>(index_of(m))]) ++overlap;
      }
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = sat(a);
      }
    }
    // The anchor itself is uncovered, so a pattern missing {0,0} could still stall here.
    if (!best) throw AdaError("pattern makes no progress");
    for (SatelliteId m : pattern.instance(*best, shell)) {
      auto& c = covered[static_cast<std::size_t>(index_of(m))];
      if (c) continue;
      c = 1;
      anchor_of[static_cast<std::size_t>(index_of(m))] = *best;
      --remaining;
    }
    if (!covered[static_cast<std::size_t>(index_of(*best))]) throw AdaError("pattern lacks the (0,0) offset");
  }
  return ClusterDivision(std::move(anchor_of));
}

int detour_bound(GridCoord member, GridCoord anchor, const ShellConfig& shell) {
  return 2 * grid_distance(anchor, member, shell);
}

DelayAudit check_delay_constraint(const ClusterDivision& division, int H, const ShellConfig& shell) {
  DelayAudit audit;
  audit.H = H;
  bool first = true;
  for (const auto& [anchor, members] : division.clusters()) {
    for (SatelliteId m : members) {
      const int detour = detour_bound(to_coord(m, shell), to_coord(anchor, shell), shell);
      if (detour > H) ++audit.violations;
      if (first || detour > audit.worst_detour) {
        audit.worst_detour = detour;
        audit.worst_member = m;
        audit.worst_anchor = anchor;
        first = false;
      }
    }
  }
  audit.passed = audit.violations == 0;
  return audit;
}

int AssignmentTimeline::anchor_changes() const {
  int changes = 0;
  for (std::size_t k = 1; k < slots.size(); ++k) {
    if (slots[k].anchor && slots[k - 1].anchor && *slots[k].anchor != *slots[k - 1].anchor) ++changes;
  }
  return changes;
}

int AssignmentTimeline::ingress_changes() const {
  int changes = 0;
  for (std::size_t k = 1; k < slots.size(); ++k) {
    if (slots[k].ingress && slots[k - 1].ingress && *slots[k].ingress != *slots[k - 1].ingress) ++changes;
  }
  return changes;
}

std::int64_t objective_value(std::span<const AssignmentTimeline> assignments, const ClusterDivision& division) {
  std::int64_t total = 0;
  if (assignments.empty()) return total;
  const int horizon = assignments.front().horizon();
  for (const AssignmentTimeline& a : assignments) {
    if (a.horizon() != horizon) throw AdaError("assignment timelines have mismatched horizons");
    for (int k = 1; k < horizon; ++k) {
      const auto& prev = a.slots[static_cast<std::size_t>(k - 1)].ingress;
      const auto& cur = a.slots[static_cast<std::size_t>(k)].ingress;
      if (prev && cur && division.anchor_of(*prev) == division.anchor_of(*cur)) ++total;
    }
  }
  return total;
}

GreedyAssigner::GreedyAssigner(const VisibilityTimeline& timeline, const ClusterDivision& division)
    : timeline_(&timeline), division_(&division) {}

int GreedyAssigner::run_length(SatelliteId id, int k) const {
  int n = 0;
  while (k + n < timeline_->horizon() && timeline_->visible(k + n, id)) ++n;
  return n;
}

int GreedyAssigner::cluster_run_length(SatelliteId anchor, int k) const {
  int n = 0;
  for (int t = k; t < timeline_->horizon(); ++t) {
    const auto& vis = timeline_->slots[static_cast<std::size_t>(t)];
    const bool any = std::any_of(vis.begin(), vis.end(),
                                 [&](SatelliteId s) { return division_->anchor_of(s) == anchor; });
    if (!any) break;
    ++n;
  }
  return n;
}

std::optional<SatelliteId> GreedyAssigner::longest_member(int k, std::optional<SatelliteId> cluster) const {
  std::optional<SatelliteId> best;
  int best_run = -1;
  for (SatelliteId s : timeline_->slots[static_cast<std::size_t>(k)]) {
    if (cluster && division_->anchor_of(s) != *cluster) continue;
    const int run = run_length(s, k);
    if (run > best_run) {  // ids are sorted, so ties keep the lowest
      best_run = run;
      best = s;
    }
  }
  return best;
}

SlotAssignment GreedyAssigner::step(int k, const SlotAssignment& previous) const {
  const auto& vis = timeline_->slots[static_cast<std::size_t>(k)];
  if (vis.empty()) return {};

  if (previous.ingress && timeline_->visible(k, *previous.ingress)) return previous;

  if (previous.anchor && previous.ingress) {
    if (auto member = longest_member(k, previous.anchor)) return {member, previous.anchor};
  }

  std::set<SatelliteId> candidates;
  for (SatelliteId s : vis) candidates.insert(division_->anchor_of(s));
  std::optional<SatelliteId> best_cluster;
  int best_run = -1;
  for (SatelliteId a : candidates) {
    const int run = cluster_run_length(a, k);
    if (run > best_run) {
      best_run = run;
      best_cluster = a;
    }
  }
  return {longest_member(k, best_cluster), best_cluster};
}

AssignmentTimeline assign_greedy(const VisibilityTimeline& timeline, const ClusterDivision& division) {
  GreedyAssigner assigner(timeline, division);
  AssignmentTimeline out;
  out.slots.reserve(static_cast<std::size_t>(timeline.horizon()));
  SlotAssignment prev;
  for (int k = 0; k < timeline.horizon(); ++k) {
    prev = assigner.step(k, prev);
    out.slots.push_back(prev);
  }
  return out;
}

AssignmentTimeline assign_bruteforce(const VisibilityTimeline& timeline, const ClusterDivision& division) {
  constexpr int kMaxSlots = 12;
  constexpr std::size_t kMaxVisible = 6;
  const int horizon = timeline.horizon();
  if (horizon > kMaxSlots) throw AdaError("instance too large for oracle");
  for (const auto& v : timeline.slots) {
    if (v.size() > kMaxVisible) throw AdaError("instance too large for oracle");
  }

  // Satellites sharing an anchor are interchangeable for the objective, so the
  // search branches over the distinct anchors visible in each slot.
  std::vector<std::vector<SatelliteId>> choices(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    std::set<SatelliteId> anchors;
    for (SatelliteId s : timeline.slots[static_cast<std::size_t>(k)]) anchors.insert(division.anchor_of(s));
    choices[static_cast<std::size_t>(k)].assign(anchors.begin(), anchors.end());
  }
  // Pairs still obtainable from slot k onward if every remaining pair scored.
  std::vector<int> reachable(static_cast<std::size_t>(horizon) + 1, 0);
  for (int k = horizon - 1; k >= 1; --k) {
    const bool pair = !choices[static_cast<std::size_t>(k)].empty() && !choices[static_cast<std::size_t>(k - 1)].empty();
    reachable[static_cast<std::size_t>(k)] = reachable[static_cast<std::size_t>(k) + 1] + (pair ? 1 : 0);
  }

  std::vector<std::optional<SatelliteId>> current(static_cast<std::size_t>(horizon));
  std::vector<std::optional<SatelliteId>> best_seq;
  int best = -1;

  std::function<void(int, int)> search = [&](int k, int score) {
    if (k == horizon) {
      if (score > best) {
        best = score;
        best_seq = current;
      }
      return;
    }
    if (k >= 1 && score + reachable[static_cast<std::size_t>(k)] <= best) return;
    const auto& opts = choices[static_cast<std::size_t>(k)];
    if (opts.empty()) {
      current[static_cast<std::size_t>(k)].reset();
      search(k + 1, score);
      return;
    }
    for (SatelliteId a : opts) {
      current[static_cast<std::size_t>(k)] = a;
      const auto& prev = k > 0 ? current[static_cast<std::size_t>(k - 1)] : std::nullopt;
      search(k + 1, score + (prev && *prev == a ? 1 : 0));
    }
  };
  search(0, 0);

  AssignmentTimeline out;
  out.slots.resize(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const auto& anchor = best_seq[static_cast<std::size_t>(k)];
    if (!anchor) continue;
    for (SatelliteId s : timeline.slots[static_cast<std::size_t>(k)]) {
      if (division.anchor_of(s) == *anchor) {
        out.slots[static_cast<std::size_t>(k)] = {s, anchor};
        break;
      }
    }
  }
  return out;
}

std::int64_t candidate_cluster_weight(std::span<const SatelliteId> candidate,
                                      std::span<const VisibilityTimeline> timelines) {
  std::int64_t w = 0;
  for (const VisibilityTimeline& tl : timelines) {
    for (SatelliteId p : candidate) {
      for (int k = 0; k < tl.horizon(); ++k) {
        if (tl.visible(k, p)) ++w;
      }
    }
  }
  return w - 1;
}

std::vector<SatelliteId> visible_union(const GroundPoint& reference, int window, const ShellConfig& shell,
                                       double slot_seconds) {
  std::vector<char> seen(static_cast<std::size_t>(shell.size()), 0);
  for (int k = 0; k < window; ++k) {
    for (SatelliteId s : Snapshot(shell, k * slot_seconds).visible_from(reference)) {
      seen[static_cast<std::size_t>(index_of(s))] = 1;
    }
  }
  std::vector<SatelliteId> out;
  for (int i = 0; i < shell.size(); ++i) {
    if (seen[static_cast<std::size_t>(i)]) out.push_back(sat(i));
  }
  return out;
}

AnchorPlan plan_anchors(const ShellConfig& shell, const GroundPoint& reference, const AdaParams& params,
                        double slot_seconds) {
  AnchorPlan plan;
  plan.params = params;
  plan.visible_union = visible_union(reference, params.discovery_window, shell, slot_seconds);
  if (plan.visible_union.empty()) throw AdaError("reference point sees no satellite during the discovery window");
  plan.discovery = discover_pattern(plan.visible_union, params.H, shell);
  plan.division = deploy_anchors(shell, plan.discovery.pattern);
  plan.audit = check_delay_constraint(plan.division, params.H, shell);
  return plan;
}

}  // namespace satmm
