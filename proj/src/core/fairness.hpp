#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/verification.hpp"

namespace fairaudit {

// Range (max - min) and mean absolute difference of FMR, FNMR and group
// error. delta_err is in percentage points; the rest stay on the [0,1] rate
// scale.
struct DispersionSet {
  double delta_fmr = 0.0;
  double mad_fmr = 0.0;
  double delta_fnmr = 0.0;
  double mad_fnmr = 0.0;
  double delta_err = 0.0;
};

// Population standard deviation of per-group accuracies, in percentage
// points. Needs >= 2 groups.
double std_of_accuracy(std::span<const GroupRates> rates);

// Skewed error ratio: max group error over min group error (error = 1 -
// accuracy). A zero-error group makes the ratio undefined.
double skewed_error_ratio(std::span<const GroupRates> rates);

// Fairness discrepancy rate: 1 - (alpha * A + (1-alpha) * B) where A and B
// are the largest pairwise absolute FMR and FNMR gaps. 1 is fairest.
double fairness_discrepancy_rate(std::span<const GroupRates> rates, double alpha);

// Inequity rate: (max FMR / min FMR)^alpha * (max FNMR / min FNMR)^(1-alpha).
// 1 is fairest; undefined when a minimum rate is zero.
double inequity_rate(std::span<const GroupRates> rates, double alpha);

// Upper-bound-normalized Gini coefficient:
//   n/(n-1) * sum_ij |x_i - x_j| / (2 n^2 mean)
// over ordered pairs including i = j. Values must be nonnegative with a
// positive mean.
double gini_coefficient(std::span<const double> values);

// Gini aggregation: alpha * gini(FMR sample) + (1-alpha) * gini(FNMR sample).
double garbe(std::span<const GroupRates> rates, double alpha);

// Largest pairwise absolute selection-rate gap.
double dp_difference(std::span<const GroupRates> rates);

// max(largest pairwise TPR gap, largest pairwise FPR gap).
double eo_difference(std::span<const GroupRates> rates);

DispersionSet dispersion(std::span<const GroupRates> rates);

// A fully assembled evaluation at one threshold. Operations above are strict
// (they raise on undefined inputs); report assembly records per-metric
// undefined reasons instead so a report can always be produced.
struct FairnessReport {
  double threshold = 0.0;
  double alpha = 0.5;
  std::string threshold_mode;  // optimize-baseline | optimize-per-protocol | fixed
  double overall_accuracy = 0.0;
  std::optional<double> objective_value;
  std::vector<GroupRates> per_group;
  std::map<std::string, double> metrics;               // by metric key
  std::map<std::string, std::string> undefined;        // metric key -> reason
  DispersionSet disp;

  std::optional<double> metric(const std::string& key) const;
};

// Metric keys, in rendering order.
const std::vector<std::string>& fairness_metric_keys();   // the seven metrics
const std::vector<std::string>& dispersion_metric_keys(); // delta/MAD fields

// Builds a report from per-group rates; metrics whose preconditions fail are
// recorded in `undefined` with the thrown reason.
FairnessReport build_fairness_report(std::span<const GroupRates> rates,
                                     double threshold, double alpha,
                                     double overall_accuracy);

struct MetricDelta {
  std::optional<double> baseline;
  std::optional<double> value;
  std::optional<double> absolute_change;  // value - baseline when both defined
  std::optional<double> percent_change;   // undefined when baseline is 0
  // +1 fairer, -1 unfairer, 0 no change / not applicable
  int direction = 0;
};

// Per-metric percent changes against a baseline report, labeled with the
// fairer direction (lower is fairer for every key except fdr, where higher
// is fairer). Requires matching alpha and group sets.
std::map<std::string, MetricDelta> compare_to_baseline(
    const FairnessReport& baseline, const FairnessReport& occluded);

// True when an increase in the metric means a fairer outcome (fdr only).
bool higher_is_fairer(const std::string& metric_key);

}  // namespace fairaudit
