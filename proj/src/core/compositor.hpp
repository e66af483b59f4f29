#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/raster.hpp"
#include "core/rng.hpp"

namespace fairaudit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// The five alignment landmarks, in image pixel coordinates.
struct LandmarkSet {
  Vec2 left_eye, right_eye, nose, left_mouth, right_mouth;
};

enum class OcclusionCategory { UpperFace, LowerFace, Eyes, TopOfHead };

const char* category_key(OcclusionCategory category);  // "upper_face", ...
OcclusionCategory category_from_key(const std::string& key);

// An occlusion image (RGBA) with named anchor points in asset pixel
// coordinates. Anchor names come from the landmark-target vocabulary below,
// so the engine needs no per-category knowledge.
struct OcclusionAsset {
  std::string id;
  OcclusionCategory category = OcclusionCategory::UpperFace;
  Raster image;  // 4 channels
  std::vector<std::pair<std::string, Vec2>> anchors;
};

// Row-major 2x3 affine transform: (x, y) -> (a x + b y + c, d x + e y + f).
struct AffineTransform {
  double a = 1, b = 0, c = 0;
  double d = 0, e = 1, f = 0;

  Vec2 apply(Vec2 p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
  AffineTransform inverse() const;
  static AffineTransform identity() { return {}; }
};

// Least-squares affine fit mapping anchors onto targets; exact interpolation
// for 3 correspondences. Collinear anchors raise DegenerateFit.
AffineTransform fit_affine(std::span<const Vec2> anchors,
                           std::span<const Vec2> targets);

// Residual sum of squared distances of the fit on the given correspondences.
double affine_residual(const AffineTransform& transform,
                       std::span<const Vec2> anchors,
                       std::span<const Vec2> targets);

// Landmark-target vocabulary for asset anchors: the five raw landmark names,
// midpoints mid_eyes / mid_mouth, and above_left_eye / above_right_eye (the
// eye shifted up by the inter-eye distance, for top-of-head assets).
Vec2 resolve_target(const std::string& name, const LandmarkSet& landmarks);

struct Provenance {
  int protocol = 0;  // 1 or 4
  std::vector<std::string> categories;
  std::vector<std::string> asset_ids;
  uint64_t seed = 0;
  double opacity_threshold = 0.5;
  bool mask_empty = false;
};

struct OcclusionArtifact {
  Raster image;
  OcclusionMask mask;
  Provenance provenance;
};

// Warps the asset with bilinear sampling (transparent out-of-bounds reads)
// and alpha-composites it over the canvas, but only at pixels where the
// warped opacity exceeds `opacity_threshold`; those pixels are also set in
// the mask. Pixels outside the mask are left bit-identical.
void composite_over(Raster& canvas, OcclusionMask& mask,
                    const OcclusionAsset& asset,
                    const AffineTransform& transform,
                    double opacity_threshold);

// Single-asset convenience wrapper returning a fresh artifact.
OcclusionArtifact composite(const Raster& image, const OcclusionAsset& asset,
                            const AffineTransform& transform,
                            double opacity_threshold = 0.5);

class AssetLibrary {
 public:
  // Loads <id>.png plus <id>.json sidecars ({"category": ..., "anchors":
  // {name: [x, y], ...}}) from a directory. Assets are sorted by id within
  // each category so selection is deterministic.
  static AssetLibrary load(const std::string& directory);

  void add(OcclusionAsset asset);
  const std::vector<OcclusionAsset>& assets(OcclusionCategory category) const;
  bool has(OcclusionCategory category) const;
  // MissingAsset when the category is empty.
  const OcclusionAsset& pick(OcclusionCategory category, Rng& rng) const;

 private:
  std::map<OcclusionCategory, std::vector<OcclusionAsset>> by_category_;
};

enum class Protocol { P1 = 1, P4 = 4 };

// Protocol 1: one uniformly chosen category, one uniformly chosen asset.
// Protocol 4: uniform over {single-as-P1, lower+eyes, lower+top, top+upper,
// top+eyes}; the two masks are unioned. Selection depends only on the seed.
OcclusionArtifact apply_protocol(const Raster& image,
                                 const LandmarkSet& landmarks,
                                 Protocol protocol, const AssetLibrary& assets,
                                 uint64_t stream_seed,
                                 double opacity_threshold = 0.5);

// Landmarks CSV row: image_id,le_x,le_y,re_x,re_y,n_x,n_y,lm_x,lm_y,rm_x,rm_y.
// Order of rows is preserved. Non-finite coordinates are rejected.
std::vector<std::pair<std::string, LandmarkSet>> load_landmarks_csv(
    const std::string& path);

// Out-of-bounds landmark points are reported, never silently clamped; returns
// human-readable warnings (empty when all five points are inside the image).
std::vector<std::string> landmark_bounds_warnings(const LandmarkSet& landmarks,
                                                  int width, int height);

}  // namespace fairaudit
