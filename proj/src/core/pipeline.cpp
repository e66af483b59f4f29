#include "core/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/compositor.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/raster.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;

namespace fairaudit {

namespace {

using Json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::Io, "cannot create '" + tmp.string() + "'");
    out << text;
    if (!out) raise(ErrorCode::Io, "write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    raise(ErrorCode::Io, "cannot move '" + tmp.string() + "' into place: " +
                             ec.message());
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    Json config, Json extra) {
  Json manifest;
  manifest["schema"] = "fairaudit.manifest/1";
  manifest["created_at"] = utc_timestamp();  // sole timestamp in any output
  manifest["command"] = command;
  manifest["config"] = std::move(config);
  for (auto& [key, value] : extra.items()) manifest[key] = std::move(value);
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) raise(ErrorCode::InvalidParameter, "output dir not set");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    raise(ErrorCode::Io, "cannot create output dir '" + out_dir +
                             "': " + ec.message());
}

std::string threshold_mode_key(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::OptimizeOnBaseline: return "optimize-baseline";
    case ThresholdMode::OptimizePerProtocol: return "optimize-per-protocol";
    case ThresholdMode::Fixed: return "fixed";
  }
  raise(ErrorCode::Internal, "bad threshold mode");
}

}  // namespace

void run_occlude(const OccludeConfig& config) {
  if (config.protocol != 1 && config.protocol != 4)
    raise(ErrorCode::InvalidParameter,
          "protocol must be 1 or 4, got " + std::to_string(config.protocol));
  if (!(config.opacity_threshold >= 0.0 && config.opacity_threshold < 1.0))
    raise(ErrorCode::InvalidParameter, "opacity threshold must lie in [0, 1)");
  const auto landmarks = load_landmarks_csv(config.landmarks_csv);
  if (landmarks.empty())
    raise(ErrorCode::InvalidInput,
          config.landmarks_csv + ": no landmark records");
  const AssetLibrary assets = AssetLibrary::load(config.assets_dir);
  ensure_out_dir(config.out_dir);
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "masks");

  const Protocol protocol =
      config.protocol == 1 ? Protocol::P1 : Protocol::P4;
  Json artifact_rows = Json::array();
  for (const auto& [image_id, lm] : landmarks) {
    const fs::path image_path =
        fs::path(config.images_dir) / (image_id + ".png");
    if (!fs::exists(image_path))
      raise(ErrorCode::Io, "missing image '" + image_path.string() + "'");
    const Raster source = read_png(image_path.string());
    const auto warnings =
        landmark_bounds_warnings(lm, source.width, source.height);
    const uint64_t stream_seed = derive_stream_seed(config.seed, image_id);
    const OcclusionArtifact artifact = apply_protocol(
        source, lm, protocol, assets, stream_seed, config.opacity_threshold);

    const fs::path occluded_path = out_dir / "images" / (image_id + ".png");
    const fs::path mask_path = out_dir / "masks" / (image_id + "_mask.png");
    write_png(occluded_path.string(), artifact.image);
    write_mask_png(mask_path.string(), artifact.mask);

    Json row;
    row["image_id"] = image_id;
    row["protocol"] = artifact.provenance.protocol;
    row["categories"] = artifact.provenance.categories;
    row["asset_ids"] = artifact.provenance.asset_ids;
    row["seed"] = artifact.provenance.seed;
    row["image"] = "images/" + image_id + ".png";
    row["mask"] = "masks/" + image_id + "_mask.png";
    row["mask_empty"] = artifact.provenance.mask_empty;
    row["warnings"] = warnings;
    artifact_rows.push_back(std::move(row));
  }

  Json cfg;
  cfg["images_dir"] = config.images_dir;
  cfg["landmarks_csv"] = config.landmarks_csv;
  cfg["assets_dir"] = config.assets_dir;
  cfg["protocol"] = config.protocol;
  cfg["seed"] = config.seed;
  cfg["opacity_threshold"] = config.opacity_threshold;
  cfg["out_dir"] = config.out_dir;
  Json extra;
  extra["artifacts"] = std::move(artifact_rows);
  write_manifest(out_dir, "occlude", std::move(cfg), std::move(extra));
}

FairnessReport run_evaluate(const EvaluateConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
    raise(ErrorCode::InvalidParameter, "alpha must lie in [0, 1]");
  const auto pairs = load_pairs_csv(config.pairs_csv);

  std::optional<FairnessReport> baseline;
  if (!config.baseline_report.empty())
    baseline = load_fairness_report(config.baseline_report);

  double threshold = 0.0;
  std::optional<double> objective;
  switch (config.threshold_mode) {
    case ThresholdMode::Fixed:
      threshold = config.fixed_threshold;
      break;
    case ThresholdMode::OptimizeOnBaseline:
      if (baseline) {
        threshold = baseline->threshold;
      } else {
        const ThresholdResult result = optimize_threshold(pairs);
        threshold = result.threshold;
        objective = result.objective_value;
      }
      break;
    case ThresholdMode::OptimizePerProtocol: {
      const ThresholdResult result = optimize_threshold(pairs);
      threshold = result.threshold;
      objective = result.objective_value;
      break;
    }
  }
  if (!std::isfinite(threshold))
    raise(ErrorCode::InvalidParameter, "non-finite threshold");

  const auto rates = group_rates(pairs, threshold);
  FairnessReport report = build_fairness_report(
      rates, threshold, config.alpha, overall_accuracy(pairs, threshold));
  report.threshold_mode = threshold_mode_key(config.threshold_mode);
  report.objective_value = objective;

  ensure_out_dir(config.out_dir);
  const fs::path out_dir(config.out_dir);
  write_file_atomic(out_dir / "report.json", fairness_report_to_json(report));
  write_file_atomic(out_dir / "report.txt",
                    render_fairness_report(
                        report, baseline ? &*baseline : nullptr));

  Json cfg;
  cfg["pairs_csv"] = config.pairs_csv;
  cfg["alpha"] = config.alpha;
  cfg["threshold_mode"] = report.threshold_mode;
  if (config.threshold_mode == ThresholdMode::Fixed)
    cfg["fixed_threshold"] = config.fixed_threshold;
  cfg["baseline_report"] = config.baseline_report;
  cfg["out_dir"] = config.out_dir;
  Json extra;
  extra["outputs"] = Json::array({"report.json", "report.txt"});
  write_manifest(out_dir, "evaluate", std::move(cfg), std::move(extra));
  return report;
}

FoirReport run_foir(const FoirConfig& config) {
  if (!(config.fraction > 0.0 && config.fraction <= 1.0))
    raise(ErrorCode::InvalidParameter,
          "importance fraction must lie in (0, 1]");
  if (!(config.significance > 0.0 && config.significance < 1.0))
    raise(ErrorCode::InvalidParameter,
          "significance level must lie in (0, 1)");
  if (!config.threshold && config.threshold_report.empty())
    raise(ErrorCode::InvalidParameter,
          "either a threshold or a threshold report is required");

  const auto pairs = load_pairs_csv(config.pairs_csv);
  double threshold = 0.0;
  std::string mode;
  if (!config.threshold_report.empty()) {
    threshold = load_fairness_report(config.threshold_report).threshold;
    mode = "from-report";
  } else {
    threshold = *config.threshold;
    mode = "fixed";
  }

  std::map<std::string, const PairRecord*> by_id;
  for (const auto& pair : pairs) by_id[pair.pair_id] = &pair;

  static const std::vector<std::string> kHeader = {"pair_id", "saliency_path",
                                                   "mask_path"};
  const auto rows = read_csv(config.manifest_csv, kHeader);
  const fs::path base = fs::path(config.manifest_csv).parent_path();
  const auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  std::vector<OutcomeRecord> records;
  std::vector<std::string> shape_errors;
  for (const auto& row : rows) {
    const std::string loc =
        config.manifest_csv + ":" + std::to_string(row.line);
    const auto it = by_id.find(row.fields[0]);
    if (it == by_id.end())
      raise(ErrorCode::Parse,
            loc + ": pair_id '" + row.fields[0] + "' not in the pairs CSV");
    const PairRecord& pair = *it->second;
    const FloatImage saliency = read_pfm(resolve(row.fields[1]).string());
    const OcclusionMask mask = read_mask_png(resolve(row.fields[2]).string());

    OutcomeRecord record;
    record.pair_id = pair.pair_id;
    record.group = pair.group;
    const Decision decision = classify(pair.score, threshold);
    record.outcome = classify_outcome(pair.ground_truth, decision);
    try {
      const auto pixels = important_pixels(saliency, decision, config.fraction);
      record.important_pixel_count = pixels.size();
      record.foir = face_occlusion_impact_ratio(saliency, mask, decision,
                                                config.fraction);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ShapeMismatch) throw;
      shape_errors.push_back(pair.pair_id);
      continue;
    }
    records.push_back(std::move(record));
  }
  if (!shape_errors.empty()) {
    std::ostringstream msg;
    msg << "saliency/mask dimension mismatch for pair_ids:";
    for (const auto& id : shape_errors) msg << ' ' << id;
    raise(ErrorCode::ShapeMismatch, msg.str());
  }

  FoirReport report;
  report.threshold = threshold;
  report.threshold_mode = mode;
  report.fraction = config.fraction;
  report.significance = config.significance;
  std::set<std::string> groups;
  for (const auto& pair : pairs) groups.insert(pair.group);
  report.groups.assign(groups.begin(), groups.end());

  const FoirTable table = aggregate_foir(records);
  for (const auto& [outcome, cells] : table) {
    FoirStratum stratum;
    stratum.cells = cells;
    const auto samples = foir_samples(records, outcome);
    std::vector<std::vector<double>> anova_groups;
    for (const auto& [group, values] : samples)
      if (values.size() >= 2) anova_groups.push_back(values);
    if (anova_groups.size() < 2) {
      stratum.anova_na_reason =
          "fewer than 2 groups with at least 2 defined FOIR samples";
    } else {
      try {
        stratum.anova = one_way_anova(anova_groups, config.significance);
      } catch (const Error& e) {
        stratum.anova_na_reason = e.what();
      }
    }
    report.strata[outcome_key(outcome)] = std::move(stratum);
    for (const auto& [group, cell] : cells)
      report.excluded_undefined_total += cell.n_undefined;
  }

  ensure_out_dir(config.out_dir);
  const fs::path out_dir(config.out_dir);
  write_file_atomic(out_dir / "foir.json", foir_report_to_json(report));
  write_file_atomic(out_dir / "foir.txt", render_foir_report(report));

  Json cfg;
  cfg["pairs_csv"] = config.pairs_csv;
  cfg["manifest_csv"] = config.manifest_csv;
  cfg["fraction"] = config.fraction;
  cfg["threshold"] = threshold;
  cfg["threshold_mode"] = mode;
  cfg["threshold_report"] = config.threshold_report;
  cfg["significance"] = config.significance;
  cfg["out_dir"] = config.out_dir;
  Json extra;
  extra["outputs"] = Json::array({"foir.json", "foir.txt"});
  write_manifest(out_dir, "foir", std::move(cfg), std::move(extra));
  return report;
}

std::string run_report(const std::string& report_json,
                       const std::string& baseline_json,
                       const std::string& foir_json,
                       const std::string& out_dir) {
  std::ostringstream out;
  if (!report_json.empty()) {
    const FairnessReport report = load_fairness_report(report_json);
    std::optional<FairnessReport> baseline;
    if (!baseline_json.empty())
      baseline = load_fairness_report(baseline_json);
    out << render_fairness_report(report, baseline ? &*baseline : nullptr);
  }
  if (!foir_json.empty()) {
    if (!report_json.empty()) out << "\n";
    out << render_foir_report(load_foir_report(foir_json));
  }
  if (report_json.empty() && foir_json.empty())
    raise(ErrorCode::InvalidParameter, "nothing to render");
  if (!out_dir.empty()) {
    ensure_out_dir(out_dir);
    write_file_atomic(fs::path(out_dir) / "rendered.txt", out.str());
  }
  return out.str();
}

}  // namespace fairaudit
