#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/fairness.hpp"
#include "core/foir.hpp"
#include "core/stats.hpp"

namespace fairaudit {

// JSON report files are deterministic: fixed key order, no timestamps.
// Timestamps live in run manifests only (single created_at field).

std::string fairness_report_to_json(const FairnessReport& report);
FairnessReport fairness_report_from_json(const std::string& text,
                                         const std::string& origin);
FairnessReport load_fairness_report(const std::string& path);
void save_fairness_report(const FairnessReport& report, const std::string& path);

// Text tables in the published layout: one row per scenario, one column per
// metric, percent-change annotations (F = fairer, U = unfairer) under the
// occluded row when a baseline is given.
std::string render_fairness_report(const FairnessReport& report,
                                   const FairnessReport* baseline);

struct FoirStratum {
  std::map<std::string, FoirCell> cells;  // by group
  std::optional<AnovaResult> anova;
  std::string anova_na_reason;  // set when anova is absent
};

struct FoirReport {
  double threshold = 0.0;
  double fraction = 0.6;
  double significance = 0.05;
  std::string threshold_mode;
  std::vector<std::string> groups;                // sorted
  std::map<std::string, FoirStratum> strata;      // by outcome key
  size_t excluded_undefined_total = 0;
};

std::string foir_report_to_json(const FoirReport& report);
FoirReport foir_report_from_json(const std::string& text,
                                 const std::string& origin);
FoirReport load_foir_report(const std::string& path);
void save_foir_report(const FoirReport& report, const std::string& path);

// FM / FNM blocks with one column per group plus a p-value column;
// significant p-values are starred.
std::string render_foir_report(const FoirReport& report);

}  // namespace fairaudit
