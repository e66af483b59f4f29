#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "core/fairness.hpp"
#include "core/report.hpp"

namespace fairaudit {

// Run-level entry points behind the CLI subcommands. Each writes its outputs
// plus a manifest.json recording the resolved configuration; created_at in
// the manifest is the only timestamp anywhere in a run's outputs. Files are
// written atomically (temp + rename).

enum class ThresholdMode { OptimizeOnBaseline, OptimizePerProtocol, Fixed };

struct OccludeConfig {
  std::string images_dir;
  std::string landmarks_csv;
  std::string assets_dir;
  int protocol = 1;  // 1 or 4
  uint64_t seed = 0;
  double opacity_threshold = 0.5;
  std::string out_dir;
};

// Occluded image and mask per landmarks row; provenance per artifact in the
// manifest. Deterministic for a fixed seed.
void run_occlude(const OccludeConfig& config);

struct EvaluateConfig {
  std::string pairs_csv;
  double alpha = 0.5;
  ThresholdMode threshold_mode = ThresholdMode::OptimizeOnBaseline;
  double fixed_threshold = 0.0;
  std::string baseline_report;  // optional report.json path
  std::string out_dir;
};

// Writes report.json, report.txt and manifest.json; returns the report.
FairnessReport run_evaluate(const EvaluateConfig& config);

struct FoirConfig {
  std::string pairs_csv;
  std::string manifest_csv;
  double fraction = 0.6;
  std::optional<double> threshold;  // set for a fixed threshold
  std::string threshold_report;     // report.json supplying the threshold
  double significance = 0.05;
  std::string out_dir;
};

// Writes foir.json, foir.txt and manifest.json; returns the report.
FoirReport run_foir(const FoirConfig& config);

// Renders already-written reports; writes rendered.txt under out_dir when
// given, and always returns the rendering.
std::string run_report(const std::string& report_json,
                       const std::string& baseline_json,
                       const std::string& foir_json,
                       const std::string& out_dir);

}  // namespace fairaudit
