#include "wadmm/snapshot_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace wadmm {

namespace fs = std::filesystem;

SnapshotWriter::SnapshotWriter(std::string output_dir, const SampleSet& samples)
    : dir_(std::move(output_dir)), samples_(&samples) {
  fs::create_directories(fs::path(dir_) / "snapshots");
}

void SnapshotWriter::operator()(const Snapshot& snap) {
  const fs::path snapdir = fs::path(dir_) / "snapshots";
  for (size_t i = 0; i < snap.mus.size(); ++i) {
    const std::string name =
        "mu_" + std::to_string(i + 1) + "_" + std::to_string(snap.k) + ".csv";
    write_measure_csv((snapdir / name).string(), *samples_, snap.mus[i]);
  }
  write_measure_csv((snapdir / ("zeta_" + std::to_string(snap.k) + ".csv")).string(),
                    *samples_, snap.zeta);
  entries_.push_back({snap.k, snap.report.max_pairwise, snap.report.objective,
                      snap.inner_deviation, snap.wall_clock_sec});
  ++snapshots_written_;
}

void SnapshotWriter::finish(const OuterResult& result) {
  nlohmann::json j;
  j["snapshots"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    j["snapshots"].push_back({{"k", e.k},
                              {"max_pairwise", e.max_pairwise},
                              {"objective", e.objective},
                              {"inner_deviation", e.inner_deviation},
                              {"wall_clock_sec", e.wall_clock_sec}});
  }
  j["final"] = {{"iterations", result.iterations},
                {"wall_clock_sec", result.wall_clock_sec},
                {"reached_consensus_tol", result.reached_consensus_tol},
                {"tau_warning", result.tau_warning},
                {"tau_bound_seen", result.tau_bound_seen}};
  if (!entries_.empty()) {
    j["final"]["max_pairwise"] = entries_.back().max_pairwise;
    j["final"]["objective"] = entries_.back().objective;
  }
  std::ofstream os(fs::path(dir_) / "metrics.json", std::ios::binary);
  if (!os) throw std::runtime_error("SnapshotWriter: cannot write metrics.json");
  os << j.dump(2) << "\n";
}

void write_manifest(const std::string& output_dir, const SolveConfig& config) {
  fs::create_directories(output_dir);
  std::ofstream os(fs::path(output_dir) / "manifest", std::ios::binary);
  if (!os) throw std::runtime_error("write_manifest: cannot open manifest");
  os << render_config(config);
  if (!os) throw std::runtime_error("write_manifest: write failed");
}

}  // namespace wadmm
