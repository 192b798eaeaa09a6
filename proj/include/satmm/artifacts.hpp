#pragma once

// Run orchestration across mechanisms and seeds, and the files each run leaves
// behind. Every number is written with six decimals and nothing depends on the
// wall clock, so identical inputs give identical bytes.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "satmm/metrics.hpp"
#include "satmm/scenario.hpp"

namespace satmm {

void write_slots_csv(std::ostream& out, const RunLog& log);
void write_summary_csv(std::ostream& out, MechanismKind mechanism, std::uint64_t seed, const MetricsSummary& s);
void write_timeseries_csv(std::ostream& out, const RunLog& log, const MetricsSummary& s);
void write_comparison_csv(std::ostream& out, std::uint64_t seed, const Comparison& c, bool header = true);

nlohmann::json division_json(const AnchorPlan& plan, const ShellConfig& shell);

struct RunResult {
  MechanismKind mechanism = MechanismKind::ClusterAnchor;
  std::uint64_t seed = 0;
  std::filesystem::path directory;
  MetricsSummary summary;
};

struct MatrixResult {
  std::vector<RunResult> runs;
  std::vector<std::pair<std::uint64_t, Comparison>> comparisons;  // per seed, when cluster-anchor ran
  std::filesystem::path comparison_path;

  bool any_violation() const;
};

// One directory per (mechanism, seed) named `<mechanism>-seed<N>`, plus
// comparison.csv at the top level. Mechanisms of one seed share the geometry.
MatrixResult run_matrix(const Scenario& scenario, const std::vector<MechanismKind>& mechanisms,
                        const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir);

}  // namespace satmm
