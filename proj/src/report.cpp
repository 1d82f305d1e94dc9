#include "uclab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace uclab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

RunReport build_report(const std::vector<RunArtifact>& artifacts,
                       const ExperimentConfig& cfg) {
  RunReport rep;
  rep.variant = std::string(variant_name(cfg.variant));
  rep.config_hash = config_hash(cfg);

  std::vector<double> accs, zooms, rewards;
  std::array<long, kEmotionCount> samples{}, zoomed{}, correct{};
  for (const auto& art : artifacts) {
    SeedSummary s;
    s.seed = art.seed;
    s.accuracy = art.terminal_accuracy;
    s.zoom_ratio = art.terminal_zoom_ratio;
    s.mean_reward = art.terminal_mean_reward;
    rep.per_seed.push_back(s);
    accs.push_back(s.accuracy);
    zooms.push_back(s.zoom_ratio);
    rewards.push_back(s.mean_reward);
    for (int i = 0; i < kEmotionCount; ++i) {
      samples[i] += art.terminal_emotions.samples[i];
      zoomed[i] += std::lround(art.terminal_emotions.zoom_ratio[i] *
                               art.terminal_emotions.samples[i]);
      correct[i] += std::lround(art.terminal_emotions.accuracy[i] *
                                art.terminal_emotions.samples[i]);
    }
  }
  std::tie(rep.accuracy_mean, rep.accuracy_std) = mean_std(accs);
  std::tie(rep.zoom_ratio_mean, rep.zoom_ratio_std) = mean_std(zooms);
  std::tie(rep.mean_reward_mean, rep.mean_reward_std) = mean_std(rewards);
  for (int i = 0; i < kEmotionCount; ++i) {
    rep.emotions.samples[i] = samples[i];
    if (samples[i] > 0) {
      rep.emotions.zoom_ratio[i] =
          static_cast<double>(zoomed[i]) / samples[i];
      rep.emotions.accuracy[i] =
          static_cast<double>(correct[i]) / samples[i];
    }
  }
  return rep;
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["variant"] = report.variant;
  j["config_hash"] = report.config_hash;
  json seeds = json::array();
  for (const auto& s : report.per_seed) {
    json e;
    e["seed"] = s.seed;
    e["accuracy"] = s.accuracy;
    e["zoom_ratio"] = s.zoom_ratio;
    e["mean_reward"] = s.mean_reward;
    seeds.push_back(std::move(e));
  }
  j["per_seed"] = std::move(seeds);
  j["aggregate"]["accuracy"] = {{"mean", report.accuracy_mean},
                                {"std", report.accuracy_std}};
  j["aggregate"]["zoom_ratio"] = {{"mean", report.zoom_ratio_mean},
                                  {"std", report.zoom_ratio_std}};
  j["aggregate"]["mean_reward"] = {{"mean", report.mean_reward_mean},
                                   {"std", report.mean_reward_std}};
  for (Emotion em : all_emotions()) {
    const int i = static_cast<int>(em);
    json e;
    e["samples"] = report.emotions.samples[i];
    e["zoom_ratio"] = report.emotions.zoom_ratio[i];
    e["accuracy"] = report.emotions.accuracy[i];
    j["per_emotion"][std::string(emotion_name(em))] = std::move(e);
  }
  return j.dump(2);
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

bool read_csv(const fs::path& path, CsvTable* table, std::string* error) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    *error = "cannot open " + path.string();
    return false;
  }
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table->header = std::move(cells);
      first = false;
    } else if (!cells.empty()) {
      if (cells.size() != table->header.size()) {
        *error = "ragged row in " + path.string();
        return false;
      }
      table->rows.push_back(std::move(cells));
    }
  }
  if (first) {
    *error = "empty file " + path.string();
    return false;
  }
  return true;
}

}  // namespace

bool write_report_from_dir(const std::string& run_dir, std::string* error) {
  std::vector<std::pair<std::string, fs::path>> metric_files;  // seed tag
  if (!fs::is_directory(run_dir)) {
    *error = "not a directory: " + run_dir;
    return false;
  }
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("metrics_seed") && name.ends_with(".csv")) {
      metric_files.emplace_back(
          name.substr(12, name.size() - 12 - 4), entry.path());
    }
  }
  if (metric_files.empty()) {
    *error = "no metrics_seed*.csv files in " + run_dir;
    return false;
  }
  std::sort(metric_files.begin(), metric_files.end());

  // Per-step aggregation across seeds.
  std::vector<CsvTable> tables(metric_files.size());
  for (std::size_t i = 0; i < metric_files.size(); ++i) {
    if (!read_csv(metric_files[i].second, &tables[i], error)) return false;
  }
  const std::size_t n_steps = tables[0].rows.size();
  for (const auto& t : tables) {
    if (t.rows.size() != n_steps) {
      *error = "seed metrics disagree on step count";
      return false;
    }
  }

  auto column_index = [&](const std::string& name) -> int {
    const auto& h = tables[0].header;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int acc_col = column_index("accuracy");
  const int zoom_col = column_index("zoom_ratio");
  if (acc_col < 0 || zoom_col < 0) {
    *error = "metrics files missing accuracy/zoom_ratio columns";
    return false;
  }

  auto write_series = [&](const std::string& file, int col) -> bool {
    std::ofstream out(fs::path(run_dir) / file, std::ios::binary);
    out << "step";
    for (const auto& [tag, _] : metric_files) out << ",seed" << tag;
    out << ",mean\n";
    for (std::size_t s = 0; s < n_steps; ++s) {
      out << tables[0].rows[s][0];
      double mean = 0.0;
      for (const auto& t : tables) {
        out << ',' << t.rows[s][col];
        mean += std::stod(t.rows[s][col]);
      }
      mean /= static_cast<double>(tables.size());
      out << ',' << format_double(mean) << "\n";
    }
    return true;
  };
  if (!write_series("accuracy_vs_step.csv", acc_col)) return false;
  if (!write_series("zoom_ratio_vs_step.csv", zoom_col)) return false;

  // Terminal summaries and per-emotion bars.
  json report;
  std::vector<double> accs, zooms, rewards;
  json per_seed = json::array();
  std::map<std::string, std::pair<double, long>> emotion_zoom, emotion_acc;
  for (const auto& [tag, path] : metric_files) {
    const fs::path terminal =
        fs::path(run_dir) / ("terminal_seed" + tag + ".csv");
    CsvTable t;
    if (!read_csv(terminal, &t, error)) return false;
    json seed_entry;
    seed_entry["seed"] = tag;
    double acc = 0, zoom = 0, reward = 0;
    for (const auto& row : t.rows) {
      const std::string& metric = row[0];
      const double value = std::stod(row[1]);
      if (metric == "accuracy") acc = value;
      if (metric == "zoom_ratio") zoom = value;
      if (metric == "mean_reward") reward = value;
      if (metric.starts_with("zoom_ratio_")) {
        auto& slot = emotion_zoom[metric.substr(11)];
        slot.first += value;
        slot.second += 1;
      }
      if (metric.starts_with("accuracy_")) {
        auto& slot = emotion_acc[metric.substr(9)];
        slot.first += value;
        slot.second += 1;
      }
    }
    seed_entry["accuracy"] = acc;
    seed_entry["zoom_ratio"] = zoom;
    seed_entry["mean_reward"] = reward;
    per_seed.push_back(std::move(seed_entry));
    accs.push_back(acc);
    zooms.push_back(zoom);
    rewards.push_back(reward);
  }
  report["per_seed"] = std::move(per_seed);
  auto [am, as] = mean_std(accs);
  auto [zm, zs] = mean_std(zooms);
  auto [rm, rs] = mean_std(rewards);
  report["aggregate"]["accuracy"] = {{"mean", am}, {"std", as}};
  report["aggregate"]["zoom_ratio"] = {{"mean", zm}, {"std", zs}};
  report["aggregate"]["mean_reward"] = {{"mean", rm}, {"std", rs}};

  // Link the report to the resolved config when the run recorded one.
  const fs::path cfg_path = fs::path(run_dir) / "resolved_config.json";
  if (fs::exists(cfg_path)) {
    std::ifstream in(cfg_path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      ExperimentConfig cfg = config_from_json_text(ss.str());
      report["variant"] = std::string(variant_name(cfg.variant));
      report["config_hash"] = config_hash(cfg);
    } catch (const ConfigError&) {
      // leave the linkage fields out rather than fail the report
    }
  }

  {
    std::ofstream out(fs::path(run_dir) / "per_emotion_bars.csv",
                      std::ios::binary);
    out << "emotion,zoom_ratio,accuracy\n";
    for (Emotion em : all_emotions()) {
      const std::string name(emotion_name(em));
      const auto z = emotion_zoom.count(name)
                         ? emotion_zoom[name].first / emotion_zoom[name].second
                         : 0.0;
      const auto a = emotion_acc.count(name)
                         ? emotion_acc[name].first / emotion_acc[name].second
                         : 0.0;
      out << name << ',' << format_double(z) << ',' << format_double(a)
          << "\n";
    }
  }
  {
    std::ofstream out(fs::path(run_dir) / "report.json", std::ios::binary);
    out << report.dump(2) << "\n";
  }
  return true;
}

}  // namespace uclab
