#include "fairaudit/fairaudit.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/fairness.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/verification.hpp"

namespace {

thread_local std::string g_last_error;

fa_status status_from(fairaudit::ErrorCode code) {
  using fairaudit::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidParameter: return FA_EINVAL;
    case ErrorCode::Io: return FA_EIO;
    case ErrorCode::Parse: return FA_EPARSE;
    case ErrorCode::DegenerateGroup: return FA_EDEGENERATE_GROUP;
    case ErrorCode::UndefinedMetric: return FA_EUNDEFINED_METRIC;
    case ErrorCode::InsufficientData:
    case ErrorCode::DegenerateVariance: return FA_EINSUFFICIENT_DATA;
    case ErrorCode::ShapeMismatch: return FA_ESHAPE;
    case ErrorCode::MissingAsset: return FA_EMISSING_ASSET;
    case ErrorCode::DegenerateFit: return FA_EINVAL;
    case ErrorCode::Internal: return FA_ERROR;
  }
  return FA_ERROR;
}

fa_status fail(fa_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes + last-error text.
template <typename Body>
fa_status guarded(Body&& body) {
  try {
    return body();
  } catch (const fairaudit::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FA_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FA_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return FA_ERROR;
  }
}

std::string string_or_empty(const char* text) { return text ? text : ""; }

}  // namespace

struct fa_dataset {
  std::vector<fairaudit::PairRecord> pairs;
  std::vector<std::string> groups;  // sorted
};

struct fa_threshold_result {
  fairaudit::ThresholdResult result;
};

struct fa_report {
  fairaudit::FairnessReport report;
};

extern "C" {

const char* fa_version(void) { return "0.1.0"; }

const char* fa_last_error(void) { return g_last_error.c_str(); }

fa_status fa_dataset_load(const char* pairs_csv_path, fa_dataset** out) {
  if (!pairs_csv_path || !out) return fail(FA_EINVAL, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto dataset = std::make_unique<fa_dataset>();
    dataset->pairs = fairaudit::load_pairs_csv(pairs_csv_path);
    std::vector<std::string> groups;
    for (const auto& pair : dataset->pairs) groups.push_back(pair.group);
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    dataset->groups = std::move(groups);
    *out = dataset.release();
    return FA_OK;
  });
}

void fa_dataset_free(fa_dataset* dataset) { delete dataset; }

size_t fa_dataset_size(const fa_dataset* dataset) {
  return dataset ? dataset->pairs.size() : 0;
}

size_t fa_dataset_group_count(const fa_dataset* dataset) {
  return dataset ? dataset->groups.size() : 0;
}

const char* fa_dataset_group_name(const fa_dataset* dataset, size_t index) {
  if (!dataset || index >= dataset->groups.size()) return nullptr;
  return dataset->groups[index].c_str();
}

fa_status fa_optimize_threshold(const fa_dataset* dataset,
                                fa_threshold_result** out) {
  if (!dataset || !out) return fail(FA_EINVAL, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto result = std::make_unique<fa_threshold_result>();
    result->result = fairaudit::optimize_threshold(dataset->pairs);
    *out = result.release();
    return FA_OK;
  });
}

void fa_threshold_result_free(fa_threshold_result* result) { delete result; }

double fa_threshold_value(const fa_threshold_result* result) {
  return result ? result->result.threshold : 0.0;
}

double fa_threshold_objective(const fa_threshold_result* result) {
  return result ? result->result.objective_value : 0.0;
}

double fa_threshold_overall_accuracy(const fa_threshold_result* result) {
  return result ? result->result.overall_accuracy : 0.0;
}

fa_status fa_evaluate(const fa_dataset* dataset, double threshold, double alpha,
                      fa_report** out) {
  if (!dataset || !out) return fail(FA_EINVAL, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto report = std::make_unique<fa_report>();
    const auto rates = fairaudit::group_rates(dataset->pairs, threshold);
    report->report = fairaudit::build_fairness_report(
        rates, threshold, alpha,
        fairaudit::overall_accuracy(dataset->pairs, threshold));
    report->report.threshold_mode = "fixed";
    *out = report.release();
    return FA_OK;
  });
}

void fa_report_free(fa_report* report) { delete report; }

double fa_report_threshold(const fa_report* report) {
  return report ? report->report.threshold : 0.0;
}

double fa_report_alpha(const fa_report* report) {
  return report ? report->report.alpha : 0.0;
}

double fa_report_overall_accuracy(const fa_report* report) {
  return report ? report->report.overall_accuracy : 0.0;
}

fa_status fa_report_metric(const fa_report* report, fa_metric metric,
                           double* out) {
  if (!report || !out) return fail(FA_EINVAL, "NULL argument");
  static const char* kKeys[] = {
      "std_accuracy", "ser",       "fdr",        "ir",
      "garbe",        "dp_difference", "eo_difference", "delta_fmr",
      "mad_fmr",      "delta_fnmr", "mad_fnmr",  "delta_err"};
  const int index = static_cast<int>(metric);
  if (index < 0 || index >= 12) return fail(FA_EINVAL, "unknown metric");
  const std::string key = kKeys[index];
  if (const auto value = report->report.metric(key)) {
    *out = *value;
    return FA_OK;
  }
  const auto reason = report->report.undefined.find(key);
  return fail(FA_EUNDEFINED_METRIC,
              reason != report->report.undefined.end()
                  ? reason->second.c_str()
                  : "metric undefined for these inputs");
}

size_t fa_report_group_count(const fa_report* report) {
  return report ? report->report.per_group.size() : 0;
}

const char* fa_report_group_name(const fa_report* report, size_t index) {
  if (!report || index >= report->report.per_group.size()) return nullptr;
  return report->report.per_group[index].group.c_str();
}

fa_status fa_report_group_rate(const fa_report* report, size_t index,
                               fa_rate rate, double* out) {
  if (!report || !out) return fail(FA_EINVAL, "NULL argument");
  if (index >= report->report.per_group.size())
    return fail(FA_EINVAL, "group index out of range");
  const fairaudit::GroupRates& g = report->report.per_group[index];
  switch (rate) {
    case FA_RATE_ACCURACY: *out = g.accuracy; return FA_OK;
    case FA_RATE_FMR: *out = g.fmr; return FA_OK;
    case FA_RATE_FNMR: *out = g.fnmr; return FA_OK;
    case FA_RATE_TPR: *out = g.tpr; return FA_OK;
    case FA_RATE_FPR: *out = g.fpr; return FA_OK;
    case FA_RATE_SELECTION: *out = g.selection_rate; return FA_OK;
    case FA_RATE_N_GENUINE: *out = static_cast<double>(g.n_genuine); return FA_OK;
    case FA_RATE_N_IMPOSTOR: *out = static_cast<double>(g.n_impostor); return FA_OK;
  }
  return fail(FA_EINVAL, "unknown rate");
}

fa_status fa_report_save_json(const fa_report* report, const char* path) {
  if (!report || !path) return fail(FA_EINVAL, "NULL argument");
  return guarded([&] {
    fairaudit::save_fairness_report(report->report, path);
    return FA_OK;
  });
}

fa_status fa_report_load_json(const char* path, fa_report** out) {
  if (!path || !out) return fail(FA_EINVAL, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto report = std::make_unique<fa_report>();
    report->report = fairaudit::load_fairness_report(path);
    *out = report.release();
    return FA_OK;
  });
}

fa_status fa_report_render(const fa_report* report,
                           const fa_report* baseline_or_null, char** out_text) {
  if (!report || !out_text) return fail(FA_EINVAL, "NULL argument");
  *out_text = nullptr;
  return guarded([&] {
    const std::string text = fairaudit::render_fairness_report(
        report->report,
        baseline_or_null ? &baseline_or_null->report : nullptr);
    char* buffer = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buffer) return fail(FA_ERROR, "out of memory");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    *out_text = buffer;
    return FA_OK;
  });
}

void fa_string_free(char* text) { std::free(text); }

fa_status fa_run_occlude(const fa_occlude_options* options) {
  if (!options) return fail(FA_EINVAL, "NULL options");
  return guarded([&] {
    fairaudit::OccludeConfig config;
    config.images_dir = string_or_empty(options->images_dir);
    config.landmarks_csv = string_or_empty(options->landmarks_csv);
    config.assets_dir = string_or_empty(options->assets_dir);
    config.protocol = options->protocol;
    config.seed = options->seed;
    config.opacity_threshold =
        options->opacity_threshold > 0.0 ? options->opacity_threshold : 0.5;
    config.out_dir = string_or_empty(options->out_dir);
    fairaudit::run_occlude(config);
    return FA_OK;
  });
}

fa_status fa_run_evaluate(const fa_evaluate_options* options) {
  if (!options) return fail(FA_EINVAL, "NULL options");
  return guarded([&] {
    fairaudit::EvaluateConfig config;
    config.pairs_csv = string_or_empty(options->pairs_csv);
    config.alpha = options->alpha >= 0.0 ? options->alpha : 0.5;
    switch (options->threshold_mode) {
      case FA_THRESHOLD_OPTIMIZE_BASELINE:
        config.threshold_mode = fairaudit::ThresholdMode::OptimizeOnBaseline;
        break;
      case FA_THRESHOLD_OPTIMIZE_PER_PROTOCOL:
        config.threshold_mode = fairaudit::ThresholdMode::OptimizePerProtocol;
        break;
      case FA_THRESHOLD_FIXED:
        config.threshold_mode = fairaudit::ThresholdMode::Fixed;
        break;
      default:
        return fail(FA_EINVAL, "unknown threshold mode");
    }
    config.fixed_threshold = options->fixed_threshold;
    config.baseline_report = string_or_empty(options->baseline_report);
    config.out_dir = string_or_empty(options->out_dir);
    fairaudit::run_evaluate(config);
    return FA_OK;
  });
}

fa_status fa_run_foir(const fa_foir_options* options) {
  if (!options) return fail(FA_EINVAL, "NULL options");
  return guarded([&] {
    fairaudit::FoirConfig config;
    config.pairs_csv = string_or_empty(options->pairs_csv);
    config.manifest_csv = string_or_empty(options->manifest_csv);
    config.fraction = options->fraction > 0.0 ? options->fraction : 0.6;
    config.threshold_report = string_or_empty(options->threshold_report);
    if (config.threshold_report.empty()) config.threshold = options->threshold;
    config.significance =
        options->significance > 0.0 ? options->significance : 0.05;
    config.out_dir = string_or_empty(options->out_dir);
    fairaudit::run_foir(config);
    return FA_OK;
  });
}

fa_status fa_run_report(const char* report_json,
                        const char* baseline_json_or_null,
                        const char* foir_json_or_null,
                        const char* out_dir_or_null) {
  return guarded([&] {
    const std::string text = fairaudit::run_report(
        string_or_empty(report_json), string_or_empty(baseline_json_or_null),
        string_or_empty(foir_json_or_null), string_or_empty(out_dir_or_null));
    std::fputs(text.c_str(), stdout);
    return FA_OK;
  });
}

}  // extern "C"
