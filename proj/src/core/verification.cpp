#include "core/verification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace fairaudit {

Decision classify(double score, double threshold) {
  if (!std::isfinite(score) || !std::isfinite(threshold))
    raise(ErrorCode::InvalidInput, "classify: non-finite score or threshold");
  return score >= threshold ? Decision::Match : Decision::NonMatch;
}

namespace {

struct GroupCounts {
  long n_genuine = 0;
  long n_impostor = 0;
  long genuine_match = 0;   // true matches
  long impostor_match = 0;  // false matches
};

GroupRates rates_from_counts(const std::string& group, const GroupCounts& c) {
  if (c.n_genuine == 0)
    raise(ErrorCode::DegenerateGroup,
          "group '" + group + "' has no genuine pairs");
  if (c.n_impostor == 0)
    raise(ErrorCode::DegenerateGroup,
          "group '" + group + "' has no impostor pairs");
  GroupRates r;
  r.group = group;
  r.n_genuine = c.n_genuine;
  r.n_impostor = c.n_impostor;
  r.fmr = static_cast<double>(c.impostor_match) / static_cast<double>(c.n_impostor);
  r.fnmr = static_cast<double>(c.n_genuine - c.genuine_match) /
           static_cast<double>(c.n_genuine);
  r.tpr = 1.0 - r.fnmr;
  r.fpr = r.fmr;
  const long correct = c.genuine_match + (c.n_impostor - c.impostor_match);
  r.accuracy = static_cast<double>(correct) /
               static_cast<double>(c.n_genuine + c.n_impostor);
  r.selection_rate = static_cast<double>(c.genuine_match + c.impostor_match) /
                     static_cast<double>(c.n_genuine + c.n_impostor);
  return r;
}

void require_nonempty(std::span<const PairRecord> pairs, const char* op) {
  if (pairs.empty())
    raise(ErrorCode::InvalidInput, std::string(op) + ": empty pair list");
}

}  // namespace

std::vector<GroupRates> group_rates(std::span<const PairRecord> pairs,
                                    double threshold) {
  require_nonempty(pairs, "group_rates");
  std::map<std::string, GroupCounts> counts;  // sorted by group name
  for (const auto& pair : pairs) {
    auto& c = counts[pair.group];
    const bool match = classify(pair.score, threshold) == Decision::Match;
    if (pair.ground_truth == GroundTruth::Genuine) {
      ++c.n_genuine;
      if (match) ++c.genuine_match;
    } else {
      ++c.n_impostor;
      if (match) ++c.impostor_match;
    }
  }
  std::vector<GroupRates> rates;
  rates.reserve(counts.size());
  for (const auto& [group, c] : counts) rates.push_back(rates_from_counts(group, c));
  return rates;
}

double overall_accuracy(std::span<const PairRecord> pairs, double threshold) {
  require_nonempty(pairs, "overall_accuracy");
  long correct = 0;
  for (const auto& pair : pairs) {
    const bool match = classify(pair.score, threshold) == Decision::Match;
    const bool genuine = pair.ground_truth == GroundTruth::Genuine;
    if (match == genuine) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

ThresholdGrid ThresholdGrid::explicit_list(std::vector<double> thresholds) {
  ThresholdGrid grid;
  grid.kind = Kind::Explicit;
  grid.values = std::move(thresholds);
  return grid;
}

std::vector<double> candidate_thresholds(std::span<const PairRecord> pairs,
                                         const ThresholdGrid& grid) {
  if (grid.kind == ThresholdGrid::Kind::Explicit) {
    auto values = grid.values;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.empty())
      raise(ErrorCode::InvalidInput, "candidate_thresholds: empty explicit grid");
    return values;
  }
  require_nonempty(pairs, "candidate_thresholds");
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& pair : pairs) scores.push_back(pair.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  if (scores.size() < 2)
    raise(ErrorCode::InvalidInput,
          "candidate_thresholds: need at least 2 distinct scores");
  std::vector<double> candidates;
  candidates.reserve(scores.size() + 1);
  candidates.push_back(scores.front() - 1.0);
  for (size_t i = 0; i + 1 < scores.size(); ++i)
    candidates.push_back(0.5 * (scores[i] + scores[i + 1]));
  candidates.push_back(scores.back() + 1.0);
  return candidates;
}

ThresholdResult optimize_threshold(std::span<const PairRecord> pairs,
                                   const ThresholdGrid& grid) {
  require_nonempty(pairs, "optimize_threshold");
  const std::vector<double> candidates = candidate_thresholds(pairs, grid);

  // Group ids in sorted-name order, so objective arithmetic visits groups in
  // the same order as group_rates.
  std::map<std::string, size_t> group_ids;
  for (const auto& pair : pairs) group_ids.emplace(pair.group, 0);
  {
    size_t id = 0;
    for (auto& [name, gid] : group_ids) gid = id++;
  }
  const size_t n_groups = group_ids.size();

  struct Item {
    double score;
    uint32_t group;
    bool genuine;
  };
  std::vector<Item> items;
  items.reserve(pairs.size());
  std::vector<long> n_genuine(n_groups, 0), n_impostor(n_groups, 0);
  for (const auto& pair : pairs) {
    const auto gid = static_cast<uint32_t>(group_ids[pair.group]);
    const bool genuine = pair.ground_truth == GroundTruth::Genuine;
    items.push_back(Item{pair.score, gid, genuine});
    (genuine ? n_genuine : n_impostor)[gid]++;
  }
  for (const auto& [name, gid] : group_ids) {
    if (n_genuine[gid] == 0)
      raise(ErrorCode::DegenerateGroup, "group '" + name + "' has no genuine pairs");
    if (n_impostor[gid] == 0)
      raise(ErrorCode::DegenerateGroup, "group '" + name + "' has no impostor pairs");
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });

  // Sweep candidates in ascending order. Below the lowest candidate every
  // pair is a Match; each pair flips to NonMatch once its score drops below
  // the running threshold.
  std::vector<long> genuine_match(n_genuine.begin(), n_genuine.end());
  std::vector<long> impostor_match(n_impostor.begin(), n_impostor.end());
  const auto total = static_cast<double>(pairs.size());

  double best_objective = 0.0;
  double best_threshold = 0.0;
  double best_overall = 0.0;
  bool have_best = false;
  size_t next_flip = 0;

  for (const double threshold : candidates) {
    while (next_flip < items.size() && items[next_flip].score < threshold) {
      const Item& item = items[next_flip];
      (item.genuine ? genuine_match : impostor_match)[item.group]--;
      ++next_flip;
    }
    long total_correct = 0;
    double acc_sum = 0.0;
    std::vector<double> accuracies(n_groups);
    for (size_t g = 0; g < n_groups; ++g) {
      const long correct = genuine_match[g] + (n_impostor[g] - impostor_match[g]);
      total_correct += correct;
      accuracies[g] =
          static_cast<double>(correct) / static_cast<double>(n_genuine[g] + n_impostor[g]);
      acc_sum += accuracies[g];
    }
    const double mean = acc_sum / static_cast<double>(n_groups);
    double variance = 0.0;
    for (size_t g = 0; g < n_groups; ++g)
      variance += (accuracies[g] - mean) * (accuracies[g] - mean);
    variance /= static_cast<double>(n_groups);
    const double overall = static_cast<double>(total_correct) / total;
    const double objective = overall - std::sqrt(variance);
    if (!have_best || objective > best_objective) {
      have_best = true;
      best_objective = objective;
      best_threshold = threshold;
      best_overall = overall;
    }
  }

  ThresholdResult result;
  result.threshold = best_threshold;
  result.objective_value = best_objective;
  result.overall_accuracy = best_overall;
  result.per_group = group_rates(pairs, best_threshold);
  return result;
}

std::vector<PairRecord> load_pairs_csv(const std::string& path) {
  static const std::vector<std::string> kHeader = {"pair_id", "score",
                                                   "ground_truth", "group"};
  const auto rows = read_csv(path, kHeader);
  std::vector<PairRecord> pairs;
  pairs.reserve(rows.size());
  std::map<std::string, long> seen;
  for (const auto& row : rows) {
    const std::string loc = path + ":" + std::to_string(row.line);
    PairRecord pair;
    pair.pair_id = row.fields[0];
    if (pair.pair_id.empty()) raise(ErrorCode::Parse, loc + ": empty pair_id");
    if (auto [it, inserted] = seen.emplace(pair.pair_id, row.line); !inserted)
      raise(ErrorCode::Parse, loc + ": duplicate pair_id '" + pair.pair_id +
                                  "' (first seen on line " +
                                  std::to_string(it->second) + ")");
    try {
      size_t consumed = 0;
      pair.score = std::stod(row.fields[1], &consumed);
      if (consumed != row.fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      raise(ErrorCode::Parse, loc + ": bad score '" + row.fields[1] + "'");
    }
    if (!std::isfinite(pair.score))
      raise(ErrorCode::Parse, loc + ": non-finite score");
    std::string label = row.fields[2];
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (label == "genuine") {
      pair.ground_truth = GroundTruth::Genuine;
    } else if (label == "impostor") {
      pair.ground_truth = GroundTruth::Impostor;
    } else {
      raise(ErrorCode::Parse, loc + ": bad ground_truth '" + row.fields[2] +
                                  "' (expected genuine or impostor)");
    }
    pair.group = row.fields[3];
    if (pair.group.empty()) raise(ErrorCode::Parse, loc + ": empty group");
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) raise(ErrorCode::InvalidInput, path + ": no pair records");
  return pairs;
}

}  // namespace fairaudit
