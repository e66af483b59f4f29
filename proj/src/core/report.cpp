#include "core/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"

namespace fairaudit {

namespace {

using Json = nlohmann::ordered_json;

Json metric_or_null(const FairnessReport& report, const std::string& key) {
  if (auto value = report.metric(key)) return *value;
  return nullptr;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot create '" + path + "'");
  out << text;
  if (!out) raise(ErrorCode::Io, "write failure on '" + path + "'");
}

std::string format(const char* fmt, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), fmt, value);
  return buffer;
}

std::string pad(std::string text, size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

const std::map<std::string, std::string>& metric_labels() {
  static const std::map<std::string, std::string> labels = {
      {"std_accuracy", "STD"},   {"ser", "SER"},
      {"eo_difference", "EO"},   {"dp_difference", "DP"},
      {"fdr", "FDR"},            {"ir", "IR"},
      {"garbe", "GARBE"},        {"delta_fmr", "dFMR"},
      {"mad_fmr", "MAD_FMR"},    {"delta_fnmr", "dFNMR"},
      {"mad_fnmr", "MAD_FNMR"},  {"delta_err", "dErr"}};
  return labels;
}

std::string metric_value_text(const FairnessReport& report,
                              const std::string& key) {
  const auto value = report.metric(key);
  if (!value) return "undef";
  if (key == "mad_fmr" || key == "mad_fnmr" || key == "delta_fmr" ||
      key == "delta_fnmr")
    return format("%.3f", *value);
  if (key == "delta_err") return format("%.1f", *value);
  return format("%.2f", *value);
}

std::string delta_text(const MetricDelta& delta) {
  if (!delta.baseline || !delta.value) return "";
  if (delta.direction == 0) return "(0%)";
  std::string text;
  if (delta.percent_change) {
    const double pct = *delta.percent_change;
    text = format(pct >= 0 ? "(+%.0f%%)" : "(%.0f%%)", pct);
  } else {
    text = format(*delta.absolute_change >= 0 ? "(+%.3f abs)" : "(%.3f abs)",
                  *delta.absolute_change);
  }
  text += delta.direction > 0 ? "F" : "U";
  return text;
}

}  // namespace

std::string fairness_report_to_json(const FairnessReport& report) {
  Json j;
  j["schema"] = "fairaudit.report/1";
  j["threshold"] = report.threshold;
  j["threshold_mode"] = report.threshold_mode;
  j["alpha"] = report.alpha;
  j["overall_accuracy"] = report.overall_accuracy;
  if (report.objective_value)
    j["objective_value"] = *report.objective_value;
  else
    j["objective_value"] = nullptr;
  Json groups = Json::array();
  for (const auto& g : report.per_group) {
    Json row;
    row["group"] = g.group;
    row["n_genuine"] = g.n_genuine;
    row["n_impostor"] = g.n_impostor;
    row["accuracy"] = g.accuracy;
    row["fmr"] = g.fmr;
    row["fnmr"] = g.fnmr;
    row["tpr"] = g.tpr;
    row["fpr"] = g.fpr;
    row["selection_rate"] = g.selection_rate;
    groups.push_back(std::move(row));
  }
  j["groups"] = std::move(groups);
  Json metrics;
  for (const auto& key : fairness_metric_keys())
    metrics[key] = metric_or_null(report, key);
  j["metrics"] = std::move(metrics);
  Json disp;
  for (const auto& key : dispersion_metric_keys())
    disp[key] = metric_or_null(report, key);
  j["dispersion"] = std::move(disp);
  Json reasons;
  for (const auto& [key, reason] : report.undefined) reasons[key] = reason;
  j["metric_undefined_reasons"] = std::move(reasons);
  return j.dump(2) + "\n";
}

FairnessReport fairness_report_from_json(const std::string& text,
                                         const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Parse, origin + ": " + e.what());
  }
  FairnessReport report;
  try {
    if (j.at("schema").get<std::string>() != "fairaudit.report/1")
      raise(ErrorCode::Parse, origin + ": unknown report schema");
    report.threshold = j.at("threshold").get<double>();
    report.threshold_mode = j.at("threshold_mode").get<std::string>();
    report.alpha = j.at("alpha").get<double>();
    report.overall_accuracy = j.at("overall_accuracy").get<double>();
    if (!j.at("objective_value").is_null())
      report.objective_value = j.at("objective_value").get<double>();
    for (const auto& row : j.at("groups")) {
      GroupRates g;
      g.group = row.at("group").get<std::string>();
      g.n_genuine = row.at("n_genuine").get<long>();
      g.n_impostor = row.at("n_impostor").get<long>();
      g.accuracy = row.at("accuracy").get<double>();
      g.fmr = row.at("fmr").get<double>();
      g.fnmr = row.at("fnmr").get<double>();
      g.tpr = row.at("tpr").get<double>();
      g.fpr = row.at("fpr").get<double>();
      g.selection_rate = row.at("selection_rate").get<double>();
      report.per_group.push_back(std::move(g));
    }
    const auto load_section = [&](const char* section,
                                  const std::vector<std::string>& keys) {
      for (const auto& key : keys) {
        const auto& value = j.at(section).at(key);
        if (!value.is_null()) report.metrics[key] = value.get<double>();
      }
    };
    load_section("metrics", fairness_metric_keys());
    load_section("dispersion", dispersion_metric_keys());
    for (const auto& [key, reason] : j.at("metric_undefined_reasons").items())
      report.undefined[key] = reason.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Parse, origin + ": " + e.what());
  }
  report.disp.delta_fmr = report.metric("delta_fmr").value_or(0.0);
  report.disp.mad_fmr = report.metric("mad_fmr").value_or(0.0);
  report.disp.delta_fnmr = report.metric("delta_fnmr").value_or(0.0);
  report.disp.mad_fnmr = report.metric("mad_fnmr").value_or(0.0);
  report.disp.delta_err = report.metric("delta_err").value_or(0.0);
  return report;
}

FairnessReport load_fairness_report(const std::string& path) {
  return fairness_report_from_json(read_file(path), path);
}

void save_fairness_report(const FairnessReport& report,
                          const std::string& path) {
  write_file(path, fairness_report_to_json(report));
}

std::string render_fairness_report(const FairnessReport& report,
                                   const FairnessReport* baseline) {
  std::ostringstream out;
  out << "Fairness report @ threshold " << format("%.6f", report.threshold)
      << " (mode: " << report.threshold_mode
      << ", alpha = " << format("%.2f", report.alpha) << ")\n\n";

  out << "Group rates\n";
  out << "  " << pad("group", 14) << pad("n_gen", 8) << pad("n_imp", 8)
      << pad("accuracy", 10) << pad("fmr", 8) << pad("fnmr", 8) << pad("tpr", 8)
      << pad("fpr", 8) << "sel_rate\n";
  for (const auto& g : report.per_group) {
    out << "  " << pad(g.group, 14) << pad(std::to_string(g.n_genuine), 8)
        << pad(std::to_string(g.n_impostor), 8)
        << pad(format("%.4f", g.accuracy), 10) << pad(format("%.4f", g.fmr), 8)
        << pad(format("%.4f", g.fnmr), 8) << pad(format("%.4f", g.tpr), 8)
        << pad(format("%.4f", g.fpr), 8) << format("%.4f", g.selection_rate)
        << "\n";
  }
  out << "  overall accuracy: " << format("%.4f", report.overall_accuracy)
      << "\n\n";

  std::map<std::string, MetricDelta> deltas;
  if (baseline) deltas = compare_to_baseline(*baseline, report);

  const auto table = [&](const char* title, const std::vector<std::string>& keys,
                         size_t col) {
    out << title << "\n  " << pad("scenario", 12);
    for (const auto& key : keys) out << pad(metric_labels().at(key), col);
    out << "\n";
    if (baseline) {
      out << "  " << pad("baseline", 12);
      for (const auto& key : keys)
        out << pad(metric_value_text(*baseline, key), col);
      out << "\n";
    }
    out << "  " << pad(baseline ? "current" : "this run", 12);
    for (const auto& key : keys) out << pad(metric_value_text(report, key), col);
    out << "\n";
    if (baseline) {
      out << "  " << pad("", 12);
      for (const auto& key : keys) out << pad(delta_text(deltas.at(key)), col);
      out << "\n";
    }
  };
  table("Fairness metrics (STD, dErr in percentage points)",
        fairness_metric_keys(), 10);
  out << "\n";
  table("Dispersion", dispersion_metric_keys(), 10);
  if (baseline)
    out << "\n  annotations: percent change vs baseline; F = fairer, U = "
           "unfairer\n";
  return out.str();
}

std::string foir_report_to_json(const FoirReport& report) {
  Json j;
  j["schema"] = "fairaudit.foir/1";
  j["threshold"] = report.threshold;
  j["threshold_mode"] = report.threshold_mode;
  j["fraction"] = report.fraction;
  j["significance_level"] = report.significance;
  j["groups"] = report.groups;
  Json strata;
  for (const auto& [key, stratum] : report.strata) {
    Json s;
    Json cells;
    for (const auto& [group, cell] : stratum.cells) {
      Json c;
      if (cell.n > 0)
        c["mean_foir_pct"] = cell.mean_foir_pct;
      else
        c["mean_foir_pct"] = nullptr;
      c["n"] = cell.n;
      c["n_undefined"] = cell.n_undefined;
      cells[group] = std::move(c);
    }
    s["cells"] = std::move(cells);
    if (stratum.anova) {
      Json a;
      a["f_statistic"] = stratum.anova->f_statistic;
      a["p_value"] = stratum.anova->p_value;
      a["df_between"] = stratum.anova->df_between;
      a["df_within"] = stratum.anova->df_within;
      a["significant"] = stratum.anova->significant;
      s["anova"] = std::move(a);
    } else {
      s["anova"] = nullptr;
      s["anova_na_reason"] = stratum.anova_na_reason;
    }
    strata[key] = std::move(s);
  }
  j["strata"] = std::move(strata);
  j["excluded_undefined_total"] = report.excluded_undefined_total;
  return j.dump(2) + "\n";
}

FoirReport foir_report_from_json(const std::string& text,
                                 const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Parse, origin + ": " + e.what());
  }
  FoirReport report;
  try {
    if (j.at("schema").get<std::string>() != "fairaudit.foir/1")
      raise(ErrorCode::Parse, origin + ": unknown report schema");
    report.threshold = j.at("threshold").get<double>();
    report.threshold_mode = j.at("threshold_mode").get<std::string>();
    report.fraction = j.at("fraction").get<double>();
    report.significance = j.at("significance_level").get<double>();
    report.groups = j.at("groups").get<std::vector<std::string>>();
    for (const auto& [key, s] : j.at("strata").items()) {
      FoirStratum stratum;
      for (const auto& [group, c] : s.at("cells").items()) {
        FoirCell cell;
        if (!c.at("mean_foir_pct").is_null())
          cell.mean_foir_pct = c.at("mean_foir_pct").get<double>();
        cell.n = c.at("n").get<size_t>();
        cell.n_undefined = c.at("n_undefined").get<size_t>();
        stratum.cells[group] = cell;
      }
      if (!s.at("anova").is_null()) {
        AnovaResult a;
        a.f_statistic = s.at("anova").at("f_statistic").get<double>();
        a.p_value = s.at("anova").at("p_value").get<double>();
        a.df_between = s.at("anova").at("df_between").get<size_t>();
        a.df_within = s.at("anova").at("df_within").get<size_t>();
        a.significance_level = report.significance;
        a.significant = s.at("anova").at("significant").get<bool>();
        stratum.anova = a;
      } else if (s.contains("anova_na_reason")) {
        stratum.anova_na_reason = s.at("anova_na_reason").get<std::string>();
      }
      report.strata[key] = std::move(stratum);
    }
    report.excluded_undefined_total =
        j.at("excluded_undefined_total").get<size_t>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Parse, origin + ": " + e.what());
  }
  return report;
}

FoirReport load_foir_report(const std::string& path) {
  return foir_report_from_json(read_file(path), path);
}

void save_foir_report(const FoirReport& report, const std::string& path) {
  write_file(path, foir_report_to_json(report));
}

std::string render_foir_report(const FoirReport& report) {
  std::ostringstream out;
  out << "FOIR [%] (importance fraction " << format("%.2f", report.fraction)
      << ", threshold " << format("%.6f", report.threshold) << ")\n\n";

  const std::vector<std::pair<std::string, std::string>> blocks = {
      {"false_match", "FM"}, {"false_non_match", "FNM"}};
  const size_t col = 12;

  for (const auto& [key, label] : blocks) {
    out << "  " << label << "\n";
    out << "    " << pad("group", 14) << pad("mean", col) << pad("n", 8)
        << "excluded\n";
    const auto it = report.strata.find(key);
    for (const auto& group : report.groups) {
      std::string mean = "-";
      std::string n = "0";
      std::string excluded = "0";
      if (it != report.strata.end()) {
        const auto cell_it = it->second.cells.find(group);
        if (cell_it != it->second.cells.end()) {
          const FoirCell& cell = cell_it->second;
          if (cell.n > 0) mean = format("%.1f", cell.mean_foir_pct);
          n = std::to_string(cell.n);
          excluded = std::to_string(cell.n_undefined);
        }
      }
      out << "    " << pad(group, 14) << pad(mean, col) << pad(n, 8) << excluded
          << "\n";
    }
    if (it != report.strata.end() && it->second.anova) {
      const AnovaResult& a = *it->second.anova;
      out << "    p-value: " << format("%.3g", a.p_value)
          << (a.significant ? " *" : "") << "  (F = "
          << format("%.4f", a.f_statistic) << ", df = "
          << std::to_string(a.df_between) << "/" << std::to_string(a.df_within)
          << ")\n";
    } else {
      out << "    p-value: n/a"
          << (it != report.strata.end() && !it->second.anova_na_reason.empty()
                  ? " (" + it->second.anova_na_reason + ")"
                  : "")
          << "\n";
    }
    out << "\n";
  }
  out << "  * significant at level " << format("%.2f", report.significance)
      << "; pairs excluded for undefined FOIR: "
      << std::to_string(report.excluded_undefined_total) << "\n";
  return out.str();
}

}  // namespace fairaudit
