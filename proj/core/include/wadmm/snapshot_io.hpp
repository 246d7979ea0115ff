#pragma once

#include <string>
#include <vector>

#include "wadmm/outer_admm.hpp"

namespace wadmm {

// Writes snapshots as <dir>/snapshots/mu_<i>_<k>.csv and zeta_<k>.csv
// (worker indices are 1-based, matching the split numbering) and accumulates
// the per-snapshot metrics for metrics.json. Snapshot CSVs are byte-stable
// across reruns; metrics.json carries wall-clock times and is not.
class SnapshotWriter {
 public:
  SnapshotWriter(std::string output_dir, const SampleSet& samples);

  void operator()(const Snapshot& snap);

  // Writes <dir>/metrics.json including the run totals.
  void finish(const OuterResult& result);

  int snapshots_written() const { return snapshots_written_; }

 private:
  std::string dir_;
  const SampleSet* samples_;
  int snapshots_written_ = 0;
  struct Entry {
    int k;
    double max_pairwise;
    double objective;
    double inner_deviation;
    double wall_clock_sec;
  };
  std::vector<Entry> entries_;
};

void write_manifest(const std::string& output_dir, const SolveConfig& config);

}  // namespace wadmm
