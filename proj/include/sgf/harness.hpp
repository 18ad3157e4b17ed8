#pragma once

#include <string>
#include <vector>

#include "sgf/config.hpp"

namespace sgf::harness {

enum class Mode { train_lower, train_hier, eval, sweep, oracle, scale };

Mode parse_mode(const std::string& text);
std::string to_string(Mode mode);

struct RunReport {
  std::string directory;            // out/<run-id>
  std::vector<std::string> summary;  // human-readable result lines
};

// Executes one mode and writes its artifacts under output_dir/run_id:
// config.echo, metrics.csv, slots.csv, checkpoints/, plots/ plus a
// mode-specific table (eval.csv, sweep.csv, oracle.csv or scale.csv).
RunReport run(Mode mode, const ExperimentConfig& config);

std::string slots_csv_header();
std::string slots_csv_row(const sim::SlotRecord& rec);
std::string metrics_csv_header();

}  // namespace sgf::harness
