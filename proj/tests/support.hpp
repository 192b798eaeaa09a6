#pragma once

// Seeded generators and independent oracles shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include "satmm/ada.hpp"
#include "satmm/constellation.hpp"
#include "satmm/simulator.hpp"

namespace satmm::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  ShellConfig shell(int min_side, int max_side) {
    ShellConfig s;
    s.num_orbits = uniform(min_side, max_side);
    s.sats_per_orbit = uniform(min_side, max_side);
    return s;
  }

  // Random partition: `anchors` distinct anchors, every other satellite joins one.
  ClusterDivision division(const ShellConfig& shell, int anchors) {
    const int n = shell.size();
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    std::shuffle(ids.begin(), ids.end(), rng_);
    anchors = std::clamp(anchors, 1, n);
    std::vector<SatelliteId> anchor_of(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int a = i < anchors ? ids[static_cast<std::size_t>(i)] : ids[static_cast<std::size_t>(uniform(0, anchors - 1))];
      anchor_of[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] = sat(a);
    }
    return ClusterDivision(std::move(anchor_of));
  }

  // Visibility drawn from a small pool so satellites recur across slots.
  VisibilityTimeline timeline(const ShellConfig& shell, int horizon, int max_visible, double gap_chance = 0.1) {
    const int pool_size = std::min(shell.size(), 2 * max_visible + 2);
    std::vector<int> pool;
    while (static_cast<int>(pool.size()) < pool_size) {
      const int s = uniform(0, shell.size() - 1);
      if (std::find(pool.begin(), pool.end(), s) == pool.end()) pool.push_back(s);
    }
    VisibilityTimeline tl;
    for (int k = 0; k < horizon; ++k) {
      std::set<SatelliteId> vis;
      if (!coin(gap_chance)) {
        const int count = uniform(1, max_visible);
        while (static_cast<int>(vis.size()) < count) vis.insert(sat(pool[static_cast<std::size_t>(uniform(0, pool_size - 1))]));
      }
      tl.slots.emplace_back(vis.begin(), vis.end());
    }
    return tl;
  }

 private:
  std::mt19937_64 rng_;
};

// Hop counts by breadth-first search over the +Grid adjacency graph.
inline std::vector<int> bfs_hops(SatelliteId source, const ShellConfig& shell) {
  const int X = shell.num_orbits;
  const int Y = shell.sats_per_orbit;
  std::vector<int> dist(static_cast<std::size_t>(X * Y), -1);
  std::deque<int> queue{index_of(source)};
  dist[static_cast<std::size_t>(index_of(source))] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    const int x = v / Y;
    const int y = v % Y;
    const int next[4] = {((x + 1) % X) * Y + y, ((x + X - 1) % X) * Y + y, x * Y + (y + 1) % Y, x * Y + (y + Y - 1) % Y};
    for (int w : next) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

// Same-anchor consecutive connected pairs, summed literally over <user, p, q, k, A>.
inline std::int64_t objective_by_enumeration(const std::vector<AssignmentTimeline>& users,
                                             const ClusterDivision& division) {
  std::int64_t total = 0;
  const int n = division.satellite_count();
  for (const auto& u : users) {
    for (int k = 1; k < u.horizon(); ++k) {
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
          const bool x_prev = u.slots[static_cast<std::size_t>(k - 1)].ingress == sat(p);
          const bool x_cur = u.slots[static_cast<std::size_t>(k)].ingress == sat(q);
          if (!x_prev || !x_cur) continue;
          for (SatelliteId a : division.anchors()) {
            if (division.anchor_of(sat(p)) == a && division.anchor_of(sat(q)) == a) ++total;
          }
        }
      }
    }
  }
  return total;
}

// Fewest anchor changes over every satellite-level assignment sequence.
inline int min_anchor_changes_exhaustive(const VisibilityTimeline& tl, const ClusterDivision& division) {
  int best = 1 << 30;
  std::vector<std::optional<SatelliteId>> chosen(tl.slots.size());
  auto rec = [&](auto&& self, std::size_t k, int changes) -> void {
    if (changes >= best) return;
    if (k == tl.slots.size()) {
      best = changes;
      return;
    }
    if (tl.slots[k].empty()) {
      chosen[k].reset();
      self(self, k + 1, changes);
      return;
    }
    for (SatelliteId s : tl.slots[k]) {
      chosen[k] = s;
      const bool change = k > 0 && chosen[k - 1] && division.anchor_of(*chosen[k - 1]) != division.anchor_of(s);
      self(self, k + 1, changes + (change ? 1 : 0));
    }
  };
  rec(rec, 0, 0);
  return best;
}

inline std::filesystem::path scenarios_dir() { return SATMM_SCENARIOS_DIR; }

// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(SATMM_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace satmm::testing
