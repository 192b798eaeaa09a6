#include <map>

#include "doctest.h"
#include "support.hpp"

using namespace satmm;
using satmm::testing::Gen;

namespace {

ShellConfig grid(int x, int y) {
  ShellConfig s;
  s.num_orbits = x;
  s.sats_per_orbit = y;
  return s;
}

std::vector<SatelliteId> block(const ShellConfig& s, int x0, int y0, int w, int h) {
  std::vector<SatelliteId> out;
  for (int dx = 0; dx < w; ++dx) {
    for (int dy = 0; dy < h; ++dy) out.push_back(to_id(wrap(x0 + dx, y0 + dy, s), s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Straight transcription of the greedy cover: repeatedly take the uncovered
// satellite (lowest id on ties) whose pattern instance covers the most
// uncovered satellites.
std::vector<int> literal_cover(const ShellConfig& s, const std::vector<Offset>& pattern) {
  const int n = s.size();
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (;;) {
    int best = -1;
    int best_gain = 0;
    for (int a = 0; a < n; ++a) {
      if (owner[static_cast<std::size_t>(a)] >= 0) continue;
      std::set<int> inst;
      for (const Offset& o : pattern) {
        inst.insert((((a / s.sats_per_orbit + o.dx) % s.num_orbits + s.num_orbits) % s.num_orbits) *
                        s.sats_per_orbit +
                    ((a % s.sats_per_orbit + o.dy) % s.sats_per_orbit + s.sats_per_orbit) % s.sats_per_orbit);
      }
      int gain = 0;
      for (int m : inst) gain += owner[static_cast<std::size_t>(m)] < 0;
      if (gain > best_gain) {
        best_gain = gain;
        best = a;
      }
    }
    if (best < 0) break;
    for (const Offset& o : pattern) {
      const GridCoord c = wrap(best / s.sats_per_orbit + o.dx, best % s.sats_per_orbit + o.dy, s);
      auto& slot = owner[static_cast<std::size_t>(index_of(to_id(c, s)))];
      if (slot < 0) slot = best;
    }
  }
  return owner;
}

VisibilityTimeline fixed(std::vector<std::vector<int>> slots) {
  VisibilityTimeline tl;
  for (auto& v : slots) {
    std::vector<SatelliteId> ids;
    for (int i : v) ids.push_back(sat(i));
    std::sort(ids.begin(), ids.end());
    tl.slots.push_back(std::move(ids));
  }
  return tl;
}

}  // namespace

TEST_CASE("ADA defaults") {
  const ShellConfig s;
  const AdaParams p = AdaParams::defaults_for(s, 1.0);
  CHECK(p.H == 47);
  CHECK(p.discovery_window == static_cast<int>(std::ceil(orbital_period_s(s))));
  CHECK(AdaParams::defaults_for(grid(36, 36), 1.0).H == 36);
}

TEST_CASE("canonical offsets fold to the minimal signed representative") {
  const ShellConfig s = grid(10, 7);
  CHECK(canonical_offset(9, 0, s) == Offset{-1, 0});
  CHECK(canonical_offset(5, 0, s) == Offset{5, 0});
  CHECK(canonical_offset(-5, 0, s) == Offset{5, 0});
  CHECK(canonical_offset(0, 4, s) == Offset{0, -3});
  CHECK(canonical_offset(0, -10, s) == Offset{0, -3});
}

TEST_CASE("detour bound examples") {
  const ShellConfig s = grid(10, 10);
  CHECK(detour_bound({4, 4}, {4, 4}, s) == 0);
  CHECK(detour_bound({4, 5}, {4, 4}, s) == 2);
}

TEST_CASE("detour bound holds with equality on a 10x10 shell") {
  const ShellConfig s = grid(10, 10);
  const int n = s.size();
  std::vector<std::vector<int>> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = satmm::testing::bfs_hops(sat(i), s);
  auto D = [&](int a, int b) { return d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < n; ++i) {
      const int bound = detour_bound(to_coord(sat(i), s), to_coord(sat(a), s), s);
      bool attained = false;
      for (int j = 0; j < n; ++j) {
        const int detour = D(j, a) + D(a, i) - D(j, i);
        REQUIRE(detour <= bound);
        attained = attained || detour == bound;
      }
      CHECK(attained);
    }
  }
}

TEST_CASE("pattern discovery") {
  const ShellConfig s = grid(10, 10);

  SUBCASE("single visible satellite gives the trivial pattern") {
    const std::vector<SatelliteId> one{sat(42)};
    for (int H : {0, 3, 50}) {
      const auto d = discover_pattern(one, H, s);
      CHECK(d.pattern.offsets == std::vector<Offset>{{0, 0}});
      CHECK(d.anchor == sat(42));
    }
  }

  SUBCASE("5x5 block with H=4 gives the 13-element diamond at the centre") {
    const auto vis = block(s, 2, 3, 5, 5);
    const auto d = discover_pattern(vis, 4, s);
    CHECK(d.anchor == to_id({4, 5}, s));
    REQUIRE(d.pattern.offsets.size() == 13);
    for (const Offset& o : d.pattern.offsets) CHECK(std::abs(o.dx) + std::abs(o.dy) <= 2);
    CHECK(std::binary_search(d.pattern.offsets.begin(), d.pattern.offsets.end(), Offset{0, 0}));
    CHECK(d.pattern.built_with_H == 4);

    // Exhaustive scan oracle: the largest H-feasible cluster has 13 members.
    std::size_t best = 0;
    for (SatelliteId c : vis) {
      std::size_t size = 0;
      for (SatelliteId j : vis) size += 2 * grid_distance(c, j, s) <= 4;
      best = std::max(best, size);
    }
    CHECK(best == 13);
  }

  SUBCASE("equal-size candidates resolve to the lowest id") {
    const std::vector<SatelliteId> two{sat(7), sat(61)};
    CHECK(discover_pattern(two, 2, s).anchor == sat(7));
  }

  SUBCASE("translating the visible set translates nothing in the pattern") {
    Gen gen(21);
    for (int round = 0; round < 30; ++round) {
      std::set<SatelliteId> vis;
      const int count = gen.uniform(1, 30);
      while (static_cast<int>(vis.size()) < count) vis.insert(sat(gen.uniform(0, s.size() - 1)));
      const int H = gen.uniform(0, 8);
      const std::vector<SatelliteId> base(vis.begin(), vis.end());
      const int dx = gen.uniform(0, 9);
      const int dy = gen.uniform(0, 9);
      std::vector<SatelliteId> moved;
      for (SatelliteId id : base) {
        const GridCoord c = to_coord(id, s);
        moved.push_back(to_id(wrap(c.x + dx, c.y + dy, s), s));
      }
      CHECK(pattern_discovery(base, H, s).offsets == pattern_discovery(moved, H, s).offsets);
    }
  }

  SUBCASE("every offset respects the detour bound it was built with") {
    Gen gen(22);
    for (int round = 0; round < 30; ++round) {
      const ShellConfig r = gen.shell(3, 14);
      std::set<SatelliteId> vis;
      const int count = gen.uniform(1, r.size());
      while (static_cast<int>(vis.size()) < count) vis.insert(sat(gen.uniform(0, r.size() - 1)));
      const int H = gen.uniform(0, 10);
      const auto p = pattern_discovery(std::vector<SatelliteId>(vis.begin(), vis.end()), H, r);
      CHECK(std::binary_search(p.offsets.begin(), p.offsets.end(), Offset{0, 0}));
      for (const Offset& o : p.offsets) CHECK(2 * grid_distance(GridCoord{0, 0}, wrap(o.dx, o.dy, r), r) <= H);
    }
  }

  CHECK_THROWS_AS(pattern_discovery({}, 4, s), AdaError);
  const std::vector<SatelliteId> one{sat(1)};
  CHECK_THROWS_AS(pattern_discovery(one, -1, s), AdaError);
}

TEST_CASE("deploying anchors") {
  SUBCASE("identity pattern gives singletons") {
    const ShellConfig s = grid(5, 4);
    const auto d = deploy_anchors(s, ClusterPattern{{{0, 0}}, 0});
    CHECK(d.clusters().size() == 20);
    for (int i = 0; i < 20; ++i) CHECK(d.anchor_of(sat(i)) == sat(i));
  }

  SUBCASE("3x3 block pattern on 6x6 gives four clusters of nine") {
    const ShellConfig s = grid(6, 6);
    ClusterPattern p;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) p.offsets.push_back({dx, dy});
    }
    std::sort(p.offsets.begin(), p.offsets.end());
    const auto d = deploy_anchors(s, p);
    REQUIRE(d.clusters().size() == 4);
    for (const auto& [a, m] : d.clusters()) CHECK(m.size() == 9);
    const auto literal = literal_cover(s, p.offsets);
    for (int i = 0; i < s.size(); ++i) CHECK(index_of(d.anchor_of(sat(i))) == literal[static_cast<std::size_t>(i)]);
  }

  SUBCASE("whole-orbit pattern gives one cluster per orbit") {
    const ShellConfig s = grid(7, 5);
    ClusterPattern p;
    for (int dy = -2; dy <= 2; ++dy) p.offsets.push_back({0, dy});
    const auto d = deploy_anchors(s, p);
    CHECK(d.clusters().size() == 7);
  }

  SUBCASE("random patterns: partition, literal agreement, delay audit") {
    Gen gen(23);
    for (int round = 0; round < 40; ++round) {
      const ShellConfig s = gen.shell(3, 12);
      std::set<SatelliteId> vis;
      const int count = gen.uniform(1, s.size());
      while (static_cast<int>(vis.size()) < count) vis.insert(sat(gen.uniform(0, s.size() - 1)));
      const int H = gen.uniform(0, 12);
      const auto pattern = pattern_discovery(std::vector<SatelliteId>(vis.begin(), vis.end()), H, s);
      const auto d = deploy_anchors(s, pattern);
      CHECK(d.validate(s).empty());
      const auto literal = literal_cover(s, pattern.offsets);
      for (int i = 0; i < s.size(); ++i) CHECK(index_of(d.anchor_of(sat(i))) == literal[static_cast<std::size_t>(i)]);
      for (const auto& [a, members] : d.clusters()) {
        const auto inst = pattern.instance(a, s);
        for (SatelliteId m : members) CHECK(std::binary_search(inst.begin(), inst.end(), m));
      }
      CHECK(check_delay_constraint(d, H, s).passed);
    }
  }
}

TEST_CASE("delay constraint audit") {
  const ShellConfig s = grid(8, 8);
  CHECK(check_delay_constraint(ClusterDivision::singletons(64), 0, s).passed);

  // Radius-2 diamond around (4,4), everything else singleton.
  std::vector<SatelliteId> anchor_of;
  const SatelliteId centre = to_id({4, 4}, s);
  for (int i = 0; i < 64; ++i) anchor_of.push_back(grid_distance(sat(i), centre, s) <= 2 ? centre : sat(i));
  const ClusterDivision d(anchor_of);
  CHECK(check_delay_constraint(d, 4, s).passed);
  const auto audit = check_delay_constraint(d, 3, s);
  CHECK_FALSE(audit.passed);
  CHECK(audit.worst_detour == 4);
  CHECK(grid_distance(audit.worst_member, centre, s) == 2);
  CHECK(audit.worst_anchor == centre);
  CHECK(audit.slack() == -1);

  Gen gen(24);
  std::vector<std::vector<int>> dist;
  for (int i = 0; i < 64; ++i) dist.push_back(satmm::testing::bfs_hops(sat(i), s));
  for (int round = 0; round < 30; ++round) {
    const auto div = gen.division(s, gen.uniform(1, 64));
    const int H = gen.uniform(0, 10);
    // All-triples check: worst detour over every (source j, anchor A, member i).
    bool ok = true;
    for (int i = 0; i < 64 && ok; ++i) {
      const int a = index_of(div.anchor_of(sat(i)));
      for (int j = 0; j < 64; ++j) {
        const auto& dj = dist[static_cast<std::size_t>(j)];
        const int detour = dj[static_cast<std::size_t>(a)] + dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] -
                           dj[static_cast<std::size_t>(i)];
        if (detour > H) ok = false;
      }
    }
    CHECK(check_delay_constraint(div, H, s).passed == ok);
  }
}

TEST_CASE("objective value") {
  const ShellConfig s = grid(4, 4);
  const auto div = ClusterDivision::singletons(16);
  AssignmentTimeline same;
  for (int k = 0; k < 10; ++k) same.slots.push_back({sat(3), sat(3)});
  CHECK(objective_value(std::span(&same, 1), div) == 9);

  AssignmentTimeline alternating;
  for (int k = 0; k < 10; ++k) alternating.slots.push_back({sat(k % 2), sat(k % 2)});
  CHECK(objective_value(std::span(&alternating, 1), div) == 0);

  AssignmentTimeline shorter;
  shorter.slots.resize(3);
  std::vector<AssignmentTimeline> mismatched{same, shorter};
  CHECK_THROWS_AS(objective_value(mismatched, div), AdaError);

  Gen gen(25);
  for (int round = 0; round < 10; ++round) {
    const auto d = gen.division(s, gen.uniform(1, 8));
    std::vector<AssignmentTimeline> users;
    for (int u = 0; u < 5; ++u) {
      AssignmentTimeline a;
      for (int k = 0; k < 20; ++k) {
        if (gen.coin(0.15)) {
          a.slots.push_back({});
        } else {
          const SatelliteId id = sat(gen.uniform(0, 15));
          a.slots.push_back({id, d.anchor_of(id)});
        }
      }
      users.push_back(std::move(a));
    }
    CHECK(objective_value(users, d) == satmm::testing::objective_by_enumeration(users, d));
  }
}

TEST_CASE("greedy assignment rules") {
  std::vector<SatelliteId> anchor_of(16);
  for (int i = 0; i < 16; ++i) anchor_of[static_cast<std::size_t>(i)] = sat(i < 8 ? 0 : 8);
  const ClusterDivision d(anchor_of);

  SUBCASE("single visible satellite is forced") {
    const auto a = assign_greedy(fixed({{5}, {5}, {5}, {5}}), d);
    for (const auto& slot : a.slots) CHECK(slot == SlotAssignment{sat(5), sat(0)});
    CHECK(a.anchor_changes() == 0);
  }

  SUBCASE("alternating same-cluster satellites never change anchor") {
    const auto a = assign_greedy(fixed({{1}, {2}, {1}, {2}, {1}}), d);
    CHECK(a.ingress_changes() == 4);
    CHECK(a.anchor_changes() == 0);
    CHECK(objective_value(std::span(&a, 1), d) == 4);
  }

  SUBCASE("current ingress is kept while visible") {
    const auto a = assign_greedy(fixed({{1, 9}, {1, 9}, {1, 2, 9}}), d);
    CHECK(a.slots[2].ingress == a.slots[0].ingress);
  }

  SUBCASE("intra-cluster switch takes the longest-visible member, lowest id on ties") {
    const auto a = assign_greedy(fixed({{1}, {2, 3, 9}, {3, 9}, {3}}), d);
    CHECK(a.slots[1].ingress == sat(3));
    const auto b = assign_greedy(fixed({{1}, {2, 3}, {}}), d);
    CHECK(b.slots[1].ingress == sat(2));
  }

  SUBCASE("new cluster is the one visible longest") {
    const auto a = assign_greedy(fixed({{1, 9}, {2, 10}, {10}, {11}}), d);
    CHECK(a.slots[0].anchor == sat(8));
    CHECK(a.anchor_changes() == 0);
  }

  SUBCASE("empty slots are unassigned and break pairs") {
    const auto a = assign_greedy(fixed({{1}, {}, {1}}), d);
    CHECK_FALSE(a.slots[1].connected());
    CHECK(objective_value(std::span(&a, 1), d) == 0);
  }
}

TEST_CASE("greedy invariants and optimality on random instances") {
  Gen gen(26);
  for (int round = 0; round < 150; ++round) {
    const ShellConfig s = gen.shell(3, 8);
    const auto d = gen.division(s, gen.uniform(1, s.size()));
    const auto tl = gen.timeline(s, gen.uniform(1, 12), 4);
    const auto g = assign_greedy(tl, d);
    const auto b = assign_bruteforce(tl, d);
    REQUIRE(g.horizon() == tl.horizon());
    for (int k = 0; k < tl.horizon(); ++k) {
      const auto& slot = g.slots[static_cast<std::size_t>(k)];
      CHECK(slot.connected() == !tl.slots[static_cast<std::size_t>(k)].empty());
      if (slot.ingress) {
        CHECK(tl.visible(k, *slot.ingress));
        CHECK(slot.anchor == d.anchor_of(*slot.ingress));
      }
    }
    CHECK(objective_value(std::span(&g, 1), d) == objective_value(std::span(&b, 1), d));
    CHECK(g.anchor_changes() == satmm::testing::min_anchor_changes_exhaustive(tl, d));
  }
}

TEST_CASE("brute-force oracle") {
  const auto d = ClusterDivision::singletons(16);
  const auto single = fixed({{3}, {3}, {4}});
  CHECK(assign_bruteforce(single, d).slots == assign_greedy(single, d).slots);
  const auto gap = fixed({{3}, {}, {3}});
  const auto b = assign_bruteforce(gap, d);
  CHECK(objective_value(std::span(&b, 1), d) == 0);
  CHECK_THROWS_WITH_AS(assign_bruteforce(fixed(std::vector<std::vector<int>>(13, {1})), d),
                       "instance too large for oracle", AdaError);
  CHECK_THROWS_AS(assign_bruteforce(fixed({{0, 1, 2, 3, 4, 5, 6}}), d), AdaError);
}

TEST_CASE("candidate cluster weight") {
  const ShellConfig s = grid(4, 4);
  const std::vector<SatelliteId> cand{sat(1), sat(2)};
  const std::vector<VisibilityTimeline> none{fixed({{5}, {6}})};
  CHECK(candidate_cluster_weight(cand, none) == -1);
  const std::vector<VisibilityTimeline> always{fixed({{1}, {1}, {1}, {1}})};
  CHECK(candidate_cluster_weight(cand, always) == 3);

  Gen gen(27);
  for (int round = 0; round < 20; ++round) {
    std::vector<VisibilityTimeline> tls;
    const int users = gen.uniform(1, 5);
    for (int u = 0; u < users; ++u) tls.push_back(gen.timeline(s, 15, 4));
    std::set<SatelliteId> c;
    const int size = gen.uniform(0, 8);
    while (static_cast<int>(c.size()) < size) c.insert(sat(gen.uniform(0, 15)));
    const std::vector<SatelliteId> candidate(c.begin(), c.end());
    std::int64_t expected = 0;
    for (const auto& tl : tls) {
      for (SatelliteId p : candidate) {
        for (const auto& slot : tl.slots) expected += std::count(slot.begin(), slot.end(), p);
      }
    }
    CHECK(candidate_cluster_weight(candidate, tls) == expected - 1);
  }
}

TEST_CASE("anchor plan for the Starlink-like shell") {
  const ShellConfig s;
  const AdaParams p = AdaParams::defaults_for(s, 1.0);
  const AnchorPlan plan = plan_anchors(s, GroundPoint{40.0, 0.0, 0.0}, p, 1.0);
  CHECK(plan.division.validate(s).empty());
  CHECK(plan.audit.passed);
  CHECK(plan.discovery.pattern.offsets.size() > 1);
  CHECK(plan.division.clusters().size() < static_cast<std::size_t>(s.size()));
}
