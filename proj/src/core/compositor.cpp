#include "core/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace fs = std::filesystem;

namespace fairaudit {

const char* category_key(OcclusionCategory category) {
  switch (category) {
    case OcclusionCategory::UpperFace: return "upper_face";
    case OcclusionCategory::LowerFace: return "lower_face";
    case OcclusionCategory::Eyes: return "eyes";
    case OcclusionCategory::TopOfHead: return "top_of_head";
  }
  raise(ErrorCode::Internal, "category_key: bad category");
}

OcclusionCategory category_from_key(const std::string& key) {
  if (key == "upper_face") return OcclusionCategory::UpperFace;
  if (key == "lower_face") return OcclusionCategory::LowerFace;
  if (key == "eyes") return OcclusionCategory::Eyes;
  if (key == "top_of_head") return OcclusionCategory::TopOfHead;
  raise(ErrorCode::Parse, "unknown occlusion category '" + key + "'");
}

AffineTransform AffineTransform::inverse() const {
  const double det = a * e - b * d;
  if (std::fabs(det) < 1e-12)
    raise(ErrorCode::DegenerateFit, "affine transform is not invertible");
  AffineTransform inv;
  inv.a = e / det;
  inv.b = -b / det;
  inv.d = -d / det;
  inv.e = a / det;
  inv.c = -(inv.a * c + inv.b * f);
  inv.f = -(inv.d * c + inv.e * f);
  return inv;
}

namespace {

// Solves the 3x3 system M x = rhs by Gaussian elimination with partial
// pivoting. M is the normal matrix of the affine fit.
void solve3(double m[3][3], double rhs[3], double out[3]) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::fabs(m[perm[row]][col]) > std::fabs(m[perm[pivot]][col]))
        pivot = row;
    std::swap(perm[col], perm[pivot]);
    const double lead = m[perm[col]][col];
    if (std::fabs(lead) < 1e-14)
      raise(ErrorCode::DegenerateFit, "fit_affine: singular normal equations");
    for (int row = col + 1; row < 3; ++row) {
      const double factor = m[perm[row]][col] / lead;
      for (int k = col; k < 3; ++k) m[perm[row]][k] -= factor * m[perm[col]][k];
      rhs[perm[row]] -= factor * rhs[perm[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double value = rhs[perm[col]];
    for (int k = col + 1; k < 3; ++k) value -= m[perm[col]][k] * out[k];
    out[col] = value / m[perm[col]][col];
  }
}

void require_non_collinear(std::span<const Vec2> points) {
  // Rank test on the 2x2 scatter matrix: the smallest eigenvalue vanishes
  // exactly when the points are collinear.
  double cx = 0.0, cy = 0.0;
  for (const auto& p : points) {
    cx += p.x;
    cy += p.y;
  }
  const auto n = static_cast<double>(points.size());
  cx /= n;
  cy /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double trace = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double half = trace / 2.0;
  const double disc = std::sqrt(std::max(0.0, half * half - det));
  const double min_eigen = half - disc;
  if (min_eigen <= 1e-9 * std::max(1.0, trace))
    raise(ErrorCode::DegenerateFit, "fit_affine: collinear anchor points");
}

}  // namespace

AffineTransform fit_affine(std::span<const Vec2> anchors,
                           std::span<const Vec2> targets) {
  if (anchors.size() != targets.size())
    raise(ErrorCode::InvalidInput,
          "fit_affine: anchor/target count mismatch");
  if (anchors.size() < 3)
    raise(ErrorCode::InvalidInput,
          "fit_affine: need at least 3 correspondences, got " +
              std::to_string(anchors.size()));
  for (const auto& p : anchors)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      raise(ErrorCode::InvalidInput, "fit_affine: non-finite anchor");
  for (const auto& p : targets)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      raise(ErrorCode::InvalidInput, "fit_affine: non-finite target");
  require_non_collinear(anchors);

  // Normal equations of min sum ||A p + t - q||^2; x and y rows decouple.
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rx[3] = {0, 0, 0};
  double ry[3] = {0, 0, 0};
  for (size_t i = 0; i < anchors.size(); ++i) {
    const double row[3] = {anchors[i].x, anchors[i].y, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
      rx[r] += row[r] * targets[i].x;
      ry[r] += row[r] * targets[i].y;
    }
  }
  AffineTransform t;
  {
    double mx[3][3];
    std::copy(&m[0][0], &m[0][0] + 9, &mx[0][0]);
    double sol[3];
    solve3(mx, rx, sol);
    t.a = sol[0];
    t.b = sol[1];
    t.c = sol[2];
  }
  {
    double sol[3];
    solve3(m, ry, sol);
    t.d = sol[0];
    t.e = sol[1];
    t.f = sol[2];
  }
  return t;
}

double affine_residual(const AffineTransform& transform,
                       std::span<const Vec2> anchors,
                       std::span<const Vec2> targets) {
  double residual = 0.0;
  for (size_t i = 0; i < anchors.size(); ++i) {
    const Vec2 mapped = transform.apply(anchors[i]);
    const double dx = mapped.x - targets[i].x;
    const double dy = mapped.y - targets[i].y;
    residual += dx * dx + dy * dy;
  }
  return residual;
}

Vec2 resolve_target(const std::string& name, const LandmarkSet& lm) {
  if (name == "left_eye") return lm.left_eye;
  if (name == "right_eye") return lm.right_eye;
  if (name == "nose") return lm.nose;
  if (name == "left_mouth") return lm.left_mouth;
  if (name == "right_mouth") return lm.right_mouth;
  if (name == "mid_eyes")
    return {(lm.left_eye.x + lm.right_eye.x) / 2.0,
            (lm.left_eye.y + lm.right_eye.y) / 2.0};
  if (name == "mid_mouth")
    return {(lm.left_mouth.x + lm.right_mouth.x) / 2.0,
            (lm.left_mouth.y + lm.right_mouth.y) / 2.0};
  const double dx = lm.right_eye.x - lm.left_eye.x;
  const double dy = lm.right_eye.y - lm.left_eye.y;
  const double inter_eye = std::sqrt(dx * dx + dy * dy);
  if (name == "above_left_eye") return {lm.left_eye.x, lm.left_eye.y - inter_eye};
  if (name == "above_right_eye")
    return {lm.right_eye.x, lm.right_eye.y - inter_eye};
  raise(ErrorCode::Parse, "unknown anchor target '" + name + "'");
}

namespace {

struct Rgba {
  double r = 0, g = 0, b = 0, a = 0;  // premultiplied, color on 0..255 scale
};

Rgba texel(const Raster& image, int x, int y) {
  if (x < 0 || y < 0 || x >= image.width || y >= image.height) return {};
  const double alpha = image.at(x, y, 3) / 255.0;
  return {image.at(x, y, 0) * alpha, image.at(x, y, 1) * alpha,
          image.at(x, y, 2) * alpha, alpha};
}

// Bilinear sample in premultiplied space; out-of-bounds reads are
// transparent. Integer positions hit texel centers exactly.
Rgba sample_bilinear(const Raster& image, double sx, double sy) {
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double tx = sx - fx;
  const double ty = sy - fy;
  const Rgba c00 = texel(image, x0, y0);
  const Rgba c10 = texel(image, x0 + 1, y0);
  const Rgba c01 = texel(image, x0, y0 + 1);
  const Rgba c11 = texel(image, x0 + 1, y0 + 1);
  const auto lerp2 = [&](double v00, double v10, double v01, double v11) {
    const double top = v00 + (v10 - v00) * tx;
    const double bottom = v01 + (v11 - v01) * tx;
    return top + (bottom - top) * ty;
  };
  return {lerp2(c00.r, c10.r, c01.r, c11.r), lerp2(c00.g, c10.g, c01.g, c11.g),
          lerp2(c00.b, c10.b, c01.b, c11.b), lerp2(c00.a, c10.a, c01.a, c11.a)};
}

uint8_t quantize(double value) {
  return static_cast<uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
}

}  // namespace

void composite_over(Raster& canvas, OcclusionMask& mask,
                    const OcclusionAsset& asset,
                    const AffineTransform& transform,
                    double opacity_threshold) {
  if (canvas.empty()) raise(ErrorCode::InvalidInput, "composite: empty image");
  if (asset.image.channels != 4)
    raise(ErrorCode::InvalidInput,
          "composite: asset '" + asset.id + "' has no alpha channel");
  if (mask.width != canvas.width || mask.height != canvas.height)
    raise(ErrorCode::ShapeMismatch, "composite: mask/canvas size mismatch");
  if (!(opacity_threshold >= 0.0 && opacity_threshold < 1.0))
    raise(ErrorCode::InvalidParameter,
          "composite: opacity threshold must lie in [0, 1)");

  const AffineTransform inv = transform.inverse();
  // Channels that carry color: gray and gray+alpha have one, RGB(A) three.
  const int color_channels = canvas.channels == 2 ? 1 : std::min(canvas.channels, 3);
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      const Vec2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      const Rgba s = sample_bilinear(asset.image, src.x, src.y);
      if (!(s.a > opacity_threshold)) continue;
      mask.set(x, y, true);
      // Premultiplied over: out = src_pm + (1 - a) * dst.
      const double src_channel[3] = {s.r, s.g, s.b};
      for (int c = 0; c < color_channels; ++c) {
        const double dst = canvas.at(x, y, c);
        // Gray canvases blend against the asset's red channel.
        const double src_pm = canvas.channels < 3 ? src_channel[0] : src_channel[c];
        canvas.at(x, y, c) = quantize(src_pm + (1.0 - s.a) * dst);
      }
    }
  }
}

OcclusionArtifact composite(const Raster& image, const OcclusionAsset& asset,
                            const AffineTransform& transform,
                            double opacity_threshold) {
  OcclusionArtifact artifact;
  artifact.image = image;
  artifact.mask = OcclusionMask::make(image.width, image.height);
  composite_over(artifact.image, artifact.mask, asset, transform,
                 opacity_threshold);
  artifact.provenance.categories.push_back(category_key(asset.category));
  artifact.provenance.asset_ids.push_back(asset.id);
  artifact.provenance.opacity_threshold = opacity_threshold;
  artifact.provenance.mask_empty = artifact.mask.count() == 0;
  return artifact;
}

AssetLibrary AssetLibrary::load(const std::string& directory) {
  if (!fs::is_directory(directory))
    raise(ErrorCode::Io, "asset directory '" + directory + "' does not exist");
  AssetLibrary library;
  std::vector<fs::path> pngs;
  for (const auto& entry : fs::directory_iterator(directory))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      pngs.push_back(entry.path());
  std::sort(pngs.begin(), pngs.end());
  for (const auto& png_path : pngs) {
    fs::path meta_path = png_path;
    meta_path.replace_extension(".json");
    if (!fs::exists(meta_path))
      raise(ErrorCode::Parse,
            "asset '" + png_path.string() + "' lacks a metadata sidecar");
    std::ifstream in(meta_path);
    nlohmann::json meta;
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::Parse, meta_path.string() + ": " + e.what());
    }
    OcclusionAsset asset;
    asset.id = png_path.stem().string();
    try {
      asset.category = category_from_key(meta.at("category").get<std::string>());
      for (const auto& [name, point] : meta.at("anchors").items())
        asset.anchors.emplace_back(
            name, Vec2{point.at(0).get<double>(), point.at(1).get<double>()});
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::Parse, meta_path.string() + ": " + e.what());
    }
    std::sort(asset.anchors.begin(), asset.anchors.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    if (asset.anchors.size() < 3)
      raise(ErrorCode::Parse, meta_path.string() + ": need at least 3 anchors");
    asset.image = read_png(png_path.string());
    if (asset.image.channels == 2) {
      // Promote gray+alpha to RGBA so compositing sees one layout.
      Raster rgba = Raster::make(asset.image.width, asset.image.height, 4);
      for (int y = 0; y < asset.image.height; ++y)
        for (int x = 0; x < asset.image.width; ++x) {
          const uint8_t g = asset.image.at(x, y, 0);
          rgba.at(x, y, 0) = rgba.at(x, y, 1) = rgba.at(x, y, 2) = g;
          rgba.at(x, y, 3) = asset.image.at(x, y, 1);
        }
      asset.image = std::move(rgba);
    }
    if (asset.image.channels != 4)
      raise(ErrorCode::Parse,
            "asset '" + png_path.string() + "' has no opacity channel");
    std::vector<Vec2> anchor_points;
    for (const auto& [name, point] : asset.anchors) anchor_points.push_back(point);
    require_non_collinear(anchor_points);
    library.add(std::move(asset));
  }
  return library;
}

void AssetLibrary::add(OcclusionAsset asset) {
  auto& bucket = by_category_[asset.category];
  bucket.push_back(std::move(asset));
  std::sort(bucket.begin(), bucket.end(),
            [](const OcclusionAsset& lhs, const OcclusionAsset& rhs) {
              return lhs.id < rhs.id;
            });
}

const std::vector<OcclusionAsset>& AssetLibrary::assets(
    OcclusionCategory category) const {
  static const std::vector<OcclusionAsset> kEmpty;
  auto it = by_category_.find(category);
  return it == by_category_.end() ? kEmpty : it->second;
}

bool AssetLibrary::has(OcclusionCategory category) const {
  auto it = by_category_.find(category);
  return it != by_category_.end() && !it->second.empty();
}

const OcclusionAsset& AssetLibrary::pick(OcclusionCategory category,
                                         Rng& rng) const {
  const auto& bucket = assets(category);
  if (bucket.empty())
    raise(ErrorCode::MissingAsset, std::string("no assets in category '") +
                                       category_key(category) + "'");
  return bucket[rng.uniform_below(static_cast<uint32_t>(bucket.size()))];
}

namespace {

constexpr OcclusionCategory kAllCategories[4] = {
    OcclusionCategory::UpperFace, OcclusionCategory::LowerFace,
    OcclusionCategory::Eyes, OcclusionCategory::TopOfHead};

// Protocol 4 two-occlusion combinations; order fixes the RNG draw sequence.
constexpr OcclusionCategory kP4Pairs[4][2] = {
    {OcclusionCategory::LowerFace, OcclusionCategory::Eyes},
    {OcclusionCategory::LowerFace, OcclusionCategory::TopOfHead},
    {OcclusionCategory::TopOfHead, OcclusionCategory::UpperFace},
    {OcclusionCategory::TopOfHead, OcclusionCategory::Eyes}};

void apply_one(OcclusionArtifact& artifact, const LandmarkSet& landmarks,
               const OcclusionAsset& asset, double opacity_threshold) {
  std::vector<Vec2> anchors, targets;
  anchors.reserve(asset.anchors.size());
  targets.reserve(asset.anchors.size());
  for (const auto& [name, point] : asset.anchors) {
    anchors.push_back(point);
    targets.push_back(resolve_target(name, landmarks));
  }
  const AffineTransform transform = fit_affine(anchors, targets);
  composite_over(artifact.image, artifact.mask, asset, transform,
                 opacity_threshold);
  artifact.provenance.categories.emplace_back(category_key(asset.category));
  artifact.provenance.asset_ids.push_back(asset.id);
}

}  // namespace

OcclusionArtifact apply_protocol(const Raster& image,
                                 const LandmarkSet& landmarks,
                                 Protocol protocol, const AssetLibrary& assets,
                                 uint64_t stream_seed,
                                 double opacity_threshold) {
  for (OcclusionCategory category : kAllCategories)
    if (!assets.has(category))
      raise(ErrorCode::MissingAsset, std::string("no assets in category '") +
                                         category_key(category) + "'");

  Rng rng(stream_seed);
  OcclusionArtifact artifact;
  artifact.image = image;
  artifact.mask = OcclusionMask::make(image.width, image.height);
  artifact.provenance.protocol = static_cast<int>(protocol);
  artifact.provenance.seed = stream_seed;
  artifact.provenance.opacity_threshold = opacity_threshold;

  const auto apply_category = [&](OcclusionCategory category) {
    apply_one(artifact, landmarks, assets.pick(category, rng),
              opacity_threshold);
  };

  if (protocol == Protocol::P1) {
    apply_category(kAllCategories[rng.uniform_below(4)]);
  } else {
    const uint32_t option = rng.uniform_below(5);
    if (option == 0) {
      apply_category(kAllCategories[rng.uniform_below(4)]);
    } else {
      apply_category(kP4Pairs[option - 1][0]);
      apply_category(kP4Pairs[option - 1][1]);
    }
  }
  artifact.provenance.mask_empty = artifact.mask.count() == 0;
  return artifact;
}

std::vector<std::pair<std::string, LandmarkSet>> load_landmarks_csv(
    const std::string& path) {
  static const std::vector<std::string> kHeader = {
      "image_id", "le_x", "le_y", "re_x", "re_y", "n_x",
      "n_y",      "lm_x", "lm_y", "rm_x", "rm_y"};
  const auto rows = read_csv(path, kHeader);
  std::vector<std::pair<std::string, LandmarkSet>> result;
  result.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string loc = path + ":" + std::to_string(row.line);
    if (row.fields[0].empty()) raise(ErrorCode::Parse, loc + ": empty image_id");
    double coords[10];
    for (int i = 0; i < 10; ++i) {
      try {
        size_t consumed = 0;
        coords[i] = std::stod(row.fields[i + 1], &consumed);
        if (consumed != row.fields[i + 1].size())
          throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        raise(ErrorCode::Parse,
              loc + ": bad coordinate '" + row.fields[i + 1] + "'");
      }
      if (!std::isfinite(coords[i]))
        raise(ErrorCode::Parse, loc + ": non-finite coordinate");
    }
    LandmarkSet lm;
    lm.left_eye = {coords[0], coords[1]};
    lm.right_eye = {coords[2], coords[3]};
    lm.nose = {coords[4], coords[5]};
    lm.left_mouth = {coords[6], coords[7]};
    lm.right_mouth = {coords[8], coords[9]};
    result.emplace_back(row.fields[0], lm);
  }
  return result;
}

std::vector<std::string> landmark_bounds_warnings(const LandmarkSet& lm,
                                                  int width, int height) {
  const std::pair<const char*, Vec2> points[5] = {
      {"left_eye", lm.left_eye},
      {"right_eye", lm.right_eye},
      {"nose", lm.nose},
      {"left_mouth", lm.left_mouth},
      {"right_mouth", lm.right_mouth}};
  std::vector<std::string> warnings;
  for (const auto& [name, p] : points) {
    if (p.x < 0.0 || p.y < 0.0 || p.x > width - 1.0 || p.y > height - 1.0) {
      warnings.push_back(std::string(name) + " (" + std::to_string(p.x) + ", " +
                         std::to_string(p.y) + ") lies outside the " +
                         std::to_string(width) + "x" + std::to_string(height) +
                         " image");
    }
  }
  return warnings;
}

}  // namespace fairaudit
