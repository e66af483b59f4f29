#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/raster.hpp"
#include "core/verification.hpp"

namespace fairaudit {

enum class Outcome { TrueMatch, TrueNonMatch, FalseMatch, FalseNonMatch };

const char* outcome_key(Outcome outcome);  // "true_match", "false_match", ...

struct OutcomeRecord {
  std::string pair_id;
  std::string group;
  Outcome outcome = Outcome::TrueMatch;
  std::optional<double> foir;  // undefined when no pixel supports the decision
  size_t important_pixel_count = 0;
};

// Pixels carrying at least `fraction` of the extremal attribution in the
// decision's direction: for Match, value >= fraction * max (requires max > 0);
// for NonMatch, value <= fraction * min (requires min < 0). Empty when the
// direction has no supporting pixel. Indices are row-major.
std::vector<uint32_t> important_pixels(const FloatImage& map, Decision decision,
                                       double fraction);

// Face occlusion impact ratio |IP intersect O| / |IP|. nullopt when IP is
// empty (the pair is excluded from aggregation but counted). Dimension
// mismatch raises ShapeMismatch.
std::optional<double> face_occlusion_impact_ratio(const FloatImage& map,
                                                  const OcclusionMask& mask,
                                                  Decision decision,
                                                  double fraction);

// Genuine+Match -> TrueMatch, Genuine+NonMatch -> FalseNonMatch,
// Impostor+Match -> FalseMatch, Impostor+NonMatch -> TrueNonMatch.
Outcome classify_outcome(GroundTruth truth, Decision decision);
std::vector<OutcomeRecord> classify_outcomes(std::span<const PairRecord> pairs,
                                             double threshold);

struct FoirCell {
  double mean_foir_pct = 0.0;  // mean FOIR as a percentage
  size_t n = 0;                // defined-FOIR records in the cell
  size_t n_undefined = 0;      // excluded records (empty important-pixel set)
};

// group -> cell, for one outcome stratum. Cells exist whenever the stratum
// saw a record for the group, even if every FOIR in it was undefined.
using FoirTable = std::map<Outcome, std::map<std::string, FoirCell>>;

FoirTable aggregate_foir(std::span<const OutcomeRecord> records);

// Defined per-pair FOIR samples per group for one stratum, for ANOVA.
std::map<std::string, std::vector<double>> foir_samples(
    std::span<const OutcomeRecord> records, Outcome outcome);

}  // namespace fairaudit
