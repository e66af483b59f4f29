#include "core/foir.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace fairaudit {

const char* outcome_key(Outcome outcome) {
  switch (outcome) {
    case Outcome::TrueMatch: return "true_match";
    case Outcome::TrueNonMatch: return "true_non_match";
    case Outcome::FalseMatch: return "false_match";
    case Outcome::FalseNonMatch: return "false_non_match";
  }
  raise(ErrorCode::Internal, "outcome_key: bad outcome");
}

std::vector<uint32_t> important_pixels(const FloatImage& map, Decision decision,
                                       double fraction) {
  if (map.values.empty())
    raise(ErrorCode::InvalidInput, "important_pixels: empty saliency map");
  if (!(fraction > 0.0 && fraction <= 1.0))
    raise(ErrorCode::InvalidParameter,
          "important_pixels: fraction must lie in (0, 1]");
  float lo = map.values[0], hi = map.values[0];
  for (float v : map.values) {
    if (!std::isfinite(v))
      raise(ErrorCode::InvalidInput, "important_pixels: non-finite attribution");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<uint32_t> pixels;
  if (decision == Decision::Match) {
    if (!(hi > 0.0f)) return pixels;  // no pixel supports a Match
    const double cutoff = fraction * static_cast<double>(hi);
    for (uint32_t i = 0; i < map.values.size(); ++i)
      if (static_cast<double>(map.values[i]) >= cutoff) pixels.push_back(i);
  } else {
    if (!(lo < 0.0f)) return pixels;  // no pixel supports a NonMatch
    const double cutoff = fraction * static_cast<double>(lo);
    for (uint32_t i = 0; i < map.values.size(); ++i)
      if (static_cast<double>(map.values[i]) <= cutoff) pixels.push_back(i);
  }
  return pixels;
}

std::optional<double> face_occlusion_impact_ratio(const FloatImage& map,
                                                  const OcclusionMask& mask,
                                                  Decision decision,
                                                  double fraction) {
  if (map.width != mask.width || map.height != mask.height)
    raise(ErrorCode::ShapeMismatch,
          "face_occlusion_impact_ratio: saliency map is " +
              std::to_string(map.width) + "x" + std::to_string(map.height) +
              " but mask is " + std::to_string(mask.width) + "x" +
              std::to_string(mask.height));
  const auto pixels = important_pixels(map, decision, fraction);
  if (pixels.empty()) return std::nullopt;
  size_t occluded = 0;
  for (uint32_t index : pixels)
    if (mask.occluded[index]) ++occluded;
  return static_cast<double>(occluded) / static_cast<double>(pixels.size());
}

Outcome classify_outcome(GroundTruth truth, Decision decision) {
  if (truth == GroundTruth::Genuine)
    return decision == Decision::Match ? Outcome::TrueMatch
                                       : Outcome::FalseNonMatch;
  return decision == Decision::Match ? Outcome::FalseMatch
                                     : Outcome::TrueNonMatch;
}

std::vector<OutcomeRecord> classify_outcomes(std::span<const PairRecord> pairs,
                                             double threshold) {
  std::vector<OutcomeRecord> records;
  records.reserve(pairs.size());
  for (const auto& pair : pairs) {
    OutcomeRecord record;
    record.pair_id = pair.pair_id;
    record.group = pair.group;
    record.outcome =
        classify_outcome(pair.ground_truth, classify(pair.score, threshold));
    records.push_back(std::move(record));
  }
  return records;
}

FoirTable aggregate_foir(std::span<const OutcomeRecord> records) {
  std::map<Outcome, std::map<std::string, std::pair<double, FoirCell>>> sums;
  for (const auto& record : records) {
    auto& [sum, cell] = sums[record.outcome][record.group];
    if (record.foir) {
      sum += *record.foir;
      cell.n += 1;
    } else {
      cell.n_undefined += 1;
    }
  }
  FoirTable table;
  for (auto& [outcome, by_group] : sums)
    for (auto& [group, entry] : by_group) {
      FoirCell cell = entry.second;
      if (cell.n > 0)
        cell.mean_foir_pct = 100.0 * entry.first / static_cast<double>(cell.n);
      table[outcome][group] = cell;
    }
  return table;
}

std::map<std::string, std::vector<double>> foir_samples(
    std::span<const OutcomeRecord> records, Outcome outcome) {
  std::map<std::string, std::vector<double>> samples;
  for (const auto& record : records)
    if (record.outcome == outcome && record.foir)
      samples[record.group].push_back(*record.foir);
  return samples;
}

}  // namespace fairaudit
