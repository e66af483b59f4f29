#pragma once

#include <span>
#include <string>
#include <vector>

namespace fairaudit {

enum class GroundTruth { Genuine, Impostor };
enum class Decision { Match, NonMatch };

// One verification trial: similarity score (higher = more similar), genuine
// or impostor label, and the demographic group of the pair.
struct PairRecord {
  std::string pair_id;
  double score = 0.0;
  GroundTruth ground_truth = GroundTruth::Genuine;
  std::string group;
};

// Per-group confusion summary at one threshold. Match is the positive class,
// so tpr = 1 - fnmr and fpr = fmr.
struct GroupRates {
  std::string group;
  long n_genuine = 0;
  long n_impostor = 0;
  double accuracy = 0.0;
  double fmr = 0.0;
  double fnmr = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double selection_rate = 0.0;
};

struct ThresholdResult {
  double threshold = 0.0;
  double overall_accuracy = 0.0;
  std::vector<GroupRates> per_group;
  // overall accuracy minus the population standard deviation of per-group
  // accuracies, both on the [0,1] scale
  double objective_value = 0.0;
};

// Decision convention: score >= threshold is a Match (boundary inclusive).
Decision classify(double score, double threshold);

// One GroupRates per distinct group, sorted by group name. A group with zero
// genuine or zero impostor pairs raises DegenerateGroup naming the group.
std::vector<GroupRates> group_rates(std::span<const PairRecord> pairs,
                                    double threshold);

double overall_accuracy(std::span<const PairRecord> pairs, double threshold);

struct ThresholdGrid {
  enum class Kind { ScoreMidpoints, Explicit };
  Kind kind = Kind::ScoreMidpoints;
  std::vector<double> values;  // used by Explicit

  static ThresholdGrid midpoints() { return {}; }
  static ThresholdGrid explicit_list(std::vector<double> thresholds);
};

// Candidate thresholds for a dataset: midpoints between consecutive distinct
// sorted scores, plus one point below the minimum and one above the maximum.
std::vector<double> candidate_thresholds(std::span<const PairRecord> pairs,
                                         const ThresholdGrid& grid);

// Maximizes overall accuracy minus the population standard deviation of
// per-group accuracies over the candidate grid; smallest maximizer wins ties.
ThresholdResult optimize_threshold(
    std::span<const PairRecord> pairs,
    const ThresholdGrid& grid = ThresholdGrid::midpoints());

// Pair CSV: header `pair_id,score,ground_truth,group`, ground_truth in
// {genuine, impostor} case-insensitively. Malformed rows and duplicate
// pair_ids fail with line-numbered Parse errors.
std::vector<PairRecord> load_pairs_csv(const std::string& path);

}  // namespace fairaudit
