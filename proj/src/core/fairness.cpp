#include "core/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "core/error.hpp"

namespace fairaudit {

namespace {

void require_groups(std::span<const GroupRates> rates, size_t minimum,
                    const char* op) {
  if (rates.size() < minimum)
    raise(ErrorCode::InsufficientData,
          std::string(op) + ": need at least " + std::to_string(minimum) +
              " groups, got " + std::to_string(rates.size()));
}

void require_alpha(double alpha, const char* op) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    raise(ErrorCode::InvalidParameter,
          std::string(op) + ": alpha must lie in [0, 1]");
}

double max_pairwise_gap(std::span<const GroupRates> rates,
                        double (*field)(const GroupRates&)) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : rates) {
    lo = std::min(lo, field(r));
    hi = std::max(hi, field(r));
  }
  return hi - lo;
}

double get_fmr(const GroupRates& r) { return r.fmr; }
double get_fnmr(const GroupRates& r) { return r.fnmr; }
double get_tpr(const GroupRates& r) { return r.tpr; }
double get_fpr(const GroupRates& r) { return r.fpr; }
double get_selection(const GroupRates& r) { return r.selection_rate; }

}  // namespace

double std_of_accuracy(std::span<const GroupRates> rates) {
  require_groups(rates, 2, "std_of_accuracy");
  double mean = 0.0;
  for (const auto& r : rates) mean += r.accuracy * 100.0;
  mean /= static_cast<double>(rates.size());
  double variance = 0.0;
  for (const auto& r : rates)
    variance += (r.accuracy * 100.0 - mean) * (r.accuracy * 100.0 - mean);
  variance /= static_cast<double>(rates.size());
  return std::sqrt(variance);
}

double skewed_error_ratio(std::span<const GroupRates> rates) {
  require_groups(rates, 2, "skewed_error_ratio");
  double min_err = std::numeric_limits<double>::infinity();
  double max_err = 0.0;
  for (const auto& r : rates) {
    const double err = 1.0 - r.accuracy;
    min_err = std::min(min_err, err);
    max_err = std::max(max_err, err);
  }
  if (min_err <= 0.0)
    raise(ErrorCode::UndefinedMetric,
          "skewed_error_ratio: a group has zero error");
  return max_err / min_err;
}

double fairness_discrepancy_rate(std::span<const GroupRates> rates,
                                 double alpha) {
  require_groups(rates, 2, "fairness_discrepancy_rate");
  require_alpha(alpha, "fairness_discrepancy_rate");
  const double a = max_pairwise_gap(rates, get_fmr);
  const double b = max_pairwise_gap(rates, get_fnmr);
  return 1.0 - (alpha * a + (1.0 - alpha) * b);
}

double inequity_rate(std::span<const GroupRates> rates, double alpha) {
  require_groups(rates, 2, "inequity_rate");
  require_alpha(alpha, "inequity_rate");
  double min_fmr = std::numeric_limits<double>::infinity(), max_fmr = 0.0;
  double min_fnmr = std::numeric_limits<double>::infinity(), max_fnmr = 0.0;
  for (const auto& r : rates) {
    min_fmr = std::min(min_fmr, r.fmr);
    max_fmr = std::max(max_fmr, r.fmr);
    min_fnmr = std::min(min_fnmr, r.fnmr);
    max_fnmr = std::max(max_fnmr, r.fnmr);
  }
  if (min_fmr <= 0.0)
    raise(ErrorCode::UndefinedMetric, "inequity_rate: minimum FMR is zero");
  if (min_fnmr <= 0.0)
    raise(ErrorCode::UndefinedMetric, "inequity_rate: minimum FNMR is zero");
  return std::pow(max_fmr / min_fmr, alpha) *
         std::pow(max_fnmr / min_fnmr, 1.0 - alpha);
}

double gini_coefficient(std::span<const double> values) {
  if (values.size() < 2)
    raise(ErrorCode::InsufficientData,
          "gini_coefficient: need at least 2 values");
  double mean = 0.0;
  for (double v : values) {
    if (v < 0.0)
      raise(ErrorCode::InvalidInput, "gini_coefficient: negative value");
    mean += v;
  }
  const auto n = static_cast<double>(values.size());
  mean /= n;
  if (mean <= 0.0)
    raise(ErrorCode::UndefinedMetric, "gini_coefficient: zero mean");
  double abs_diff_sum = 0.0;  // ordered pairs, i = j contributes 0
  for (double a : values)
    for (double b : values) abs_diff_sum += std::fabs(a - b);
  return (n / (n - 1.0)) * abs_diff_sum / (2.0 * n * n * mean);
}

double garbe(std::span<const GroupRates> rates, double alpha) {
  require_groups(rates, 2, "garbe");
  require_alpha(alpha, "garbe");
  std::vector<double> fmr, fnmr;
  fmr.reserve(rates.size());
  fnmr.reserve(rates.size());
  for (const auto& r : rates) {
    fmr.push_back(r.fmr);
    fnmr.push_back(r.fnmr);
  }
  return alpha * gini_coefficient(fmr) + (1.0 - alpha) * gini_coefficient(fnmr);
}

double dp_difference(std::span<const GroupRates> rates) {
  require_groups(rates, 2, "dp_difference");
  return max_pairwise_gap(rates, get_selection);
}

double eo_difference(std::span<const GroupRates> rates) {
  require_groups(rates, 2, "eo_difference");
  return std::max(max_pairwise_gap(rates, get_tpr),
                  max_pairwise_gap(rates, get_fpr));
}

DispersionSet dispersion(std::span<const GroupRates> rates) {
  require_groups(rates, 2, "dispersion");
  DispersionSet d;
  d.delta_fmr = max_pairwise_gap(rates, get_fmr);
  d.delta_fnmr = max_pairwise_gap(rates, get_fnmr);
  double min_err = std::numeric_limits<double>::infinity();
  double max_err = 0.0;
  std::vector<double> fmr, fnmr;
  for (const auto& r : rates) {
    const double err = 1.0 - r.accuracy;
    min_err = std::min(min_err, err);
    max_err = std::max(max_err, err);
    fmr.push_back(r.fmr);
    fnmr.push_back(r.fnmr);
  }
  d.delta_err = (max_err - min_err) * 100.0;
  const auto n = static_cast<double>(rates.size());
  double sum_fmr = 0.0, sum_fnmr = 0.0;
  for (double a : fmr)
    for (double b : fmr) sum_fmr += std::fabs(a - b);
  for (double a : fnmr)
    for (double b : fnmr) sum_fnmr += std::fabs(a - b);
  d.mad_fmr = sum_fmr / (n * n);
  d.mad_fnmr = sum_fnmr / (n * n);
  return d;
}

std::optional<double> FairnessReport::metric(const std::string& key) const {
  auto it = metrics.find(key);
  if (it == metrics.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& fairness_metric_keys() {
  static const std::vector<std::string> keys = {
      "std_accuracy", "ser", "eo_difference", "dp_difference",
      "fdr",          "ir",  "garbe"};
  return keys;
}

const std::vector<std::string>& dispersion_metric_keys() {
  static const std::vector<std::string> keys = {
      "delta_fmr", "mad_fmr", "delta_fnmr", "mad_fnmr", "delta_err"};
  return keys;
}

FairnessReport build_fairness_report(std::span<const GroupRates> rates,
                                     double threshold, double alpha,
                                     double overall_acc) {
  require_alpha(alpha, "build_fairness_report");
  FairnessReport report;
  report.threshold = threshold;
  report.alpha = alpha;
  report.overall_accuracy = overall_acc;
  report.per_group.assign(rates.begin(), rates.end());

  const auto record = [&](const std::string& key,
                          const std::function<double()>& compute) {
    try {
      report.metrics[key] = compute();
    } catch (const Error& e) {
      report.undefined[key] = e.what();
    }
  };
  record("std_accuracy", [&] { return std_of_accuracy(rates); });
  record("ser", [&] { return skewed_error_ratio(rates); });
  record("fdr", [&] { return fairness_discrepancy_rate(rates, alpha); });
  record("ir", [&] { return inequity_rate(rates, alpha); });
  record("garbe", [&] { return garbe(rates, alpha); });
  record("dp_difference", [&] { return dp_difference(rates); });
  record("eo_difference", [&] { return eo_difference(rates); });
  try {
    report.disp = dispersion(rates);
    report.metrics["delta_fmr"] = report.disp.delta_fmr;
    report.metrics["mad_fmr"] = report.disp.mad_fmr;
    report.metrics["delta_fnmr"] = report.disp.delta_fnmr;
    report.metrics["mad_fnmr"] = report.disp.mad_fnmr;
    report.metrics["delta_err"] = report.disp.delta_err;
  } catch (const Error& e) {
    for (const auto& key : dispersion_metric_keys()) report.undefined[key] = e.what();
  }
  return report;
}

bool higher_is_fairer(const std::string& metric_key) { return metric_key == "fdr"; }

std::map<std::string, MetricDelta> compare_to_baseline(
    const FairnessReport& baseline, const FairnessReport& occluded) {
  if (baseline.alpha != occluded.alpha)
    raise(ErrorCode::InvalidInput,
          "compare_to_baseline: reports use different alpha");
  if (baseline.per_group.size() != occluded.per_group.size())
    raise(ErrorCode::InvalidInput,
          "compare_to_baseline: reports cover different group sets");
  for (size_t i = 0; i < baseline.per_group.size(); ++i)
    if (baseline.per_group[i].group != occluded.per_group[i].group)
      raise(ErrorCode::InvalidInput,
            "compare_to_baseline: reports cover different group sets");

  std::map<std::string, MetricDelta> deltas;
  std::vector<std::string> keys = fairness_metric_keys();
  for (const auto& key : dispersion_metric_keys()) keys.push_back(key);
  for (const auto& key : keys) {
    MetricDelta delta;
    delta.baseline = baseline.metric(key);
    delta.value = occluded.metric(key);
    if (delta.baseline && delta.value) {
      const double base = *delta.baseline;
      const double value = *delta.value;
      delta.absolute_change = value - base;
      if (base != 0.0) delta.percent_change = 100.0 * (value - base) / base;
      if (value != base) {
        const bool increased = value > base;
        const bool fairer = higher_is_fairer(key) ? increased : !increased;
        delta.direction = fairer ? +1 : -1;
      }
    }
    deltas[key] = delta;
  }
  return deltas;
}

}  // namespace fairaudit
