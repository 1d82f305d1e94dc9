#include "uclab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uclab/report.hpp"
#include "uclab/trajectory_io.hpp"

namespace uclab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve_out_dir(const std::string& out_dir) {
  const char* root = std::getenv("UCLAB_OUT_ROOT");
  if (root && *root && fs::path(out_dir).is_relative()) {
    return (fs::path(root) / out_dir).string();
  }
  return out_dir;
}

bool read_lines(const std::string& path, std::vector<std::string>* lines) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines->push_back(line);
  }
  return true;
}

}  // namespace

int cmd_train(
    const std::string& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    for (const auto& [key, value] : overrides) {
      apply_override(cfg, key, value);
    }
    resolve_variant(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 2;
  }

  const std::string out_dir = resolve_out_dir(cfg.out_dir);
  try {
    fs::create_directories(out_dir);
    {
      std::ofstream out(fs::path(out_dir) / "resolved_config.json",
                        std::ios::binary);
      if (!out) throw std::runtime_error("cannot write resolved_config.json");
      out << config_to_json(cfg) << "\n";
    }
    std::vector<RunArtifact> artifacts;
    for (std::uint64_t seed : cfg.seeds) {
      RunArtifact art = run_training(cfg, seed);
      write_run_artifact(art, cfg, out_dir);
      std::cout << "seed " << seed << ": terminal accuracy "
                << format_double(art.terminal_accuracy) << ", zoom ratio "
                << format_double(art.terminal_zoom_ratio) << "\n";
      artifacts.push_back(std::move(art));
    }
    const RunReport report = build_report(artifacts, cfg);
    std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
    out << report_to_json(report) << "\n";
    std::cout << "variant " << report.variant << ": accuracy "
              << format_double(report.accuracy_mean) << " +/- "
              << format_double(report.accuracy_std) << ", zoom ratio "
              << format_double(report.zoom_ratio_mean) << " (config "
              << report.config_hash << ")\n";
  } catch (const NonFiniteGradient& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& log_path, int budget) {
  std::vector<std::string> lines;
  if (!read_lines(log_path, &lines)) {
    std::cerr << "validate: cannot open '" << log_path << "'\n";
    return 2;
  }
  std::size_t violating = 0;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    TrajectoryRecord rec;
    try {
      rec = parse_trajectory(lines[i]);
    } catch (const ParseError& e) {
      std::cerr << "validate: line " << (i + 1) << ": " << e.what() << "\n";
      return 2;
    }
    const FsmVerdict verdict = validate(rec.trajectory, budget);
    std::string line = rec.id + ": ";
    if (verdict.legal) {
      line += "legal";
    } else {
      violating += 1;
      line += "violations:";
      for (Violation v : verdict.violations) {
        line += ' ';
        line += violation_name(v);
      }
    }
    out.push_back(std::move(line));
  }
  for (const auto& line : out) std::cout << line << "\n";
  std::cout << lines.size() << " trajectories, " << violating
            << " with violations\n";
  return violating == 0 ? 0 : 1;
}

int cmd_score(const std::string& log_path, const std::string& params_path,
              const std::string& calibrator_path,
              const std::string& out_path) {
  ExperimentConfig cfg;
  try {
    cfg = params_path.empty() ? ExperimentConfig{} : load_config(params_path);
  } catch (const ConfigError& e) {
    std::cerr << "score: " << e.what() << "\n";
    return 2;
  }
  const ResolvedVariant rv = resolve_variant(cfg);

  std::optional<CalibratorView> snapshot;
  if (!calibrator_path.empty()) {
    std::ifstream in(calibrator_path, std::ios::binary);
    if (!in) {
      std::cerr << "score: cannot open '" << calibrator_path << "'\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      snapshot = EmaCalibrator::from_json(ss.str()).snapshot();
    } catch (const std::exception& e) {
      std::cerr << "score: calibrator: " << e.what() << "\n";
      return 2;
    }
  }

  std::vector<std::string> lines;
  if (!read_lines(log_path, &lines)) {
    std::cerr << "score: cannot open '" << log_path << "'\n";
    return 2;
  }

  // Group records by group_id, keeping first-appearance order.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<TrajectoryRecord>> groups;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      TrajectoryRecord rec = parse_trajectory(lines[i]);
      if (!groups.count(rec.group_id)) group_order.push_back(rec.group_id);
      groups[rec.group_id].push_back(std::move(rec));
    } catch (const ParseError& e) {
      std::cerr << "score: line " << (i + 1) << ": " << e.what() << "\n";
      return 2;
    }
  }

  std::ostringstream result;
  for (const auto& gid : group_order) {
    const auto& records = groups[gid];
    if (records.size() < 2) {
      std::cerr << "score: group '" << gid
                << "' has fewer than 2 trajectories\n";
      return 1;
    }
    for (const auto& rec : records) {
      if (rec.labels.emotion != records[0].labels.emotion ||
          !(rec.labels.aus == records[0].labels.aus)) {
        std::cerr << "score: group '" << gid << "' has inconsistent labels\n";
        return 1;
      }
    }
    RolloutGroup group;
    group.query_id = gid;
    group.labels = records[0].labels;
    for (const auto& rec : records) group.trajectories.push_back(rec.trajectory);

    std::pair<double, double> phi{1.0, 1.0};
    if (snapshot && !rv.pin_phi) {
      phi = modulation_factors(*snapshot, group.labels.emotion,
                               cfg.calibration);
    }
    const GroupUtility util = group_utility(group, rv.reward);
    const auto breakdowns = score_group(group, phi, rv.reward, rv.score);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& b = breakdowns[i];
      json j;
      j["id"] = records[i].id;
      j["group_id"] = gid;
      j["delta"] = util.delta ? json(*util.delta) : json(nullptr);
      j["r_acc"] = b.r_acc;
      j["r_fsm"] = b.r_fsm;
      j["r_util"] = b.r_util;
      j["r_tool"] = b.r_tool;
      j["r_qual"] = b.r_qual;
      j["total"] = b.total;
      j["util_branch"] = std::string(util_branch_name(b.util_branch));
      j["delta_used"] = b.delta_used ? json(*b.delta_used) : json(nullptr);
      result << j.dump() << "\n";
    }
  }

  if (out_path.empty()) {
    std::cout << result.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "score: cannot write '" << out_path << "'\n";
      return 1;
    }
    out << result.str();
  }
  return 0;
}

int cmd_report(const std::string& run_dir) {
  std::string error;
  if (!write_report_from_dir(resolve_out_dir(run_dir), &error)) {
    std::cerr << "report: " << error << "\n";
    return 1;
  }
  std::cout << "report written to " << resolve_out_dir(run_dir) << "\n";
  return 0;
}

int cmd_dump_world(const std::string& config_path) {
  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "dump-world: " << e.what() << "\n";
    return 2;
  }
  const WorldParams& w = cfg.world;
  std::cout << "emotion            p(e)   base_acc  zoom_gain  target_aus\n";
  for (Emotion em : all_emotions()) {
    const int i = static_cast<int>(em);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-18s %.3f  %.3f     %+.3f     %s",
                  std::string(emotion_name(em)).c_str(), w.emotion_dist[i],
                  w.base_acc[i], w.zoom_gain[i],
                  w.target_au_sets[i].to_string().c_str());
    std::cout << buf << "\n";
  }
  std::cout << "quality_penalty " << w.quality_penalty << ", quality ["
            << w.quality_min << ", " << w.quality_max << "], detect "
            << w.detect_floor << " + " << w.detect_slope
            << "*g, d_fail " << w.d_fail << "\n";
  std::cout << "f1 base " << w.f1_base << " +correct " << w.f1_correct
            << " +zoom " << w.f1_zoom << ", beta sharpness "
            << w.au_beta_sharpness << ", seed " << w.seed << "\n";
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"utility-calibrated group-relative policy optimization lab"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run training per seed");
  std::string train_config;
  train->add_option("--config", train_config, "experiment config (JSON)");
  train->allow_extras();  // dotted --key value overrides

  // validate
  auto* validate_cmd =
      app.add_subcommand("validate", "check a trajectory log");
  std::string validate_log;
  int validate_budget = 4;
  validate_cmd->add_option("log", validate_log, "trajectory log (JSONL)")
      ->required();
  validate_cmd->add_option("--budget", validate_budget, "interaction budget");

  // score
  auto* score_cmd = app.add_subcommand("score", "score a trajectory log");
  std::string score_log, score_params, score_calibrator, score_out;
  score_cmd->add_option("log", score_log, "trajectory log (JSONL)")
      ->required();
  score_cmd->add_option("--params", score_params, "experiment config (JSON)");
  score_cmd->add_option("--calibrator", score_calibrator,
                        "calibrator checkpoint (JSON)");
  score_cmd->add_option("--out", score_out, "write breakdowns here");

  // report
  auto* report_cmd = app.add_subcommand("report", "aggregate a run directory");
  std::string report_dir;
  report_cmd->add_option("dir", report_dir, "run directory")->required();

  // dump-world
  auto* dump_cmd = app.add_subcommand("dump-world", "print the resolved world");
  std::string dump_config;
  dump_cmd->add_option("--config", dump_config, "experiment config (JSON)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    std::stringstream out;
    const int code = app.exit(e, out, out);
    std::cerr << out.str();
    return code == 0 ? 0 : 2;
  }

  if (train->parsed()) {
    std::vector<std::pair<std::string, std::string>> overrides;
    const auto extras = train->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& key = extras[i];
      if (key.size() < 3 || key.rfind("--", 0) != 0 ||
          i + 1 >= extras.size()) {
        std::cerr << "train: expected '--dotted.key value' pairs, got '"
                  << key << "'\n";
        return 2;
      }
      overrides.emplace_back(key.substr(2), extras[i + 1]);
      ++i;
    }
    return cmd_train(train_config, overrides);
  }
  if (validate_cmd->parsed()) return cmd_validate(validate_log, validate_budget);
  if (score_cmd->parsed()) {
    return cmd_score(score_log, score_params, score_calibrator, score_out);
  }
  if (report_cmd->parsed()) return cmd_report(report_dir);
  if (dump_cmd->parsed()) return cmd_dump_world(dump_config);
  return 2;
}

}  // namespace uclab
