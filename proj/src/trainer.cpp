#include "uclab/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace uclab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace {

struct QueryResult {
  SampleSpec sample;
  RolloutGroup group;
  std::optional<double> delta;  // valid utility gap, if estimable
};

}  // namespace

RunArtifact run_training(const ExperimentConfig& cfg, std::uint64_t seed) {
  const ResolvedVariant rv = resolve_variant(cfg);
  const OptimizerConfig& opt = cfg.optimizer;
  const WorldParams& world = cfg.world;

  RunArtifact art;
  art.seed = seed;

  PolicyParams policy;
  policy.zoom_b = opt.init_zoom_bias;
  const PolicyParams ref = policy;
  art.initial_policy = policy;

  EmaCalibrator calibrator;

  const int steps = cfg.steps;
  const int batch = opt.batch_groups;
  const int window_start =
      steps - std::max(1, static_cast<int>(
                              std::ceil(opt.terminal_window_frac * steps)));

  double term_acc = 0, term_zoom = 0, term_reward = 0;
  long term_samples = 0;
  std::array<long, kEmotionCount> em_samples{}, em_zoom{}, em_correct{};

  std::vector<QueryResult> results(batch);

  for (int step_idx = 0; step_idx < steps; ++step_idx) {
    const CalibratorView snapshot = calibrator.snapshot();
    art.snapshots.push_back(snapshot);

    // Factors for this step come from the pre-update snapshot only.
    std::array<std::pair<double, double>, kEmotionCount> phi;
    for (int i = 0; i < kEmotionCount; ++i) {
      phi[i] = rv.pin_phi ? std::make_pair(1.0, 1.0)
                          : modulation_factors(
                                snapshot, static_cast<Emotion>(i),
                                cfg.calibration);
      PhiTraceRow row;
      row.step = step_idx;
      row.emotion = i;
      row.count_prev = snapshot.counts[i];
      row.delta_bar_prev = snapshot.delta_bar[i];
      row.phi_lazy = phi[i].first;
      row.phi_unnec = phi[i].second;
      art.phi_trace.push_back(row);
    }

    // Rollout + scoring phase; queries are independent, each drawing from
    // streams derived by (run seed, step, query, rollout), so thread
    // count cannot change any result.
    auto run_query = [&](int q) {
      RngStream sample_rng(derive_seed(
          world.seed, {seed, static_cast<std::uint64_t>(step_idx),
                       static_cast<std::uint64_t>(q), 0}));
      QueryResult& res = results[q];
      res.sample = sample_query(world, sample_rng);
      res.sample.query_id =
          "s" + std::to_string(step_idx) + "_q" + std::to_string(q);

      RolloutGroup group;
      group.query_id = res.sample.query_id;
      group.labels.emotion = res.sample.emotion;
      group.labels.aus =
          world.target_au_sets[static_cast<int>(res.sample.emotion)];
      for (int i = 0; i < opt.group_size; ++i) {
        RngStream roll_rng(derive_seed(
            world.seed, {seed, static_cast<std::uint64_t>(step_idx),
                         static_cast<std::uint64_t>(q),
                         static_cast<std::uint64_t>(1 + i)}));
        group.trajectories.push_back(
            rollout(policy, res.sample, world, opt.turn_budget, roll_rng));
      }

      res.delta = group_utility(group, rv.reward).delta;
      group.rewards = score_group(
          group, phi[static_cast<int>(res.sample.emotion)], rv.reward,
          rv.score);
      res.group = std::move(group);
    };

    if (opt.threads <= 1) {
      for (int q = 0; q < batch; ++q) run_query(q);
    } else {
      std::vector<std::thread> workers;
      const int n_workers = std::min(opt.threads, batch);
      for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
          for (int q = w; q < batch; q += n_workers) run_query(q);
        });
      }
      for (auto& t : workers) t.join();
    }

    // Policy update (serial, fixed query order).
    std::vector<ScoredGroup> scored;
    scored.reserve(batch);
    for (int q = 0; q < batch; ++q) {
      scored.push_back(ScoredGroup{results[q].group, results[q].sample.features});
    }
    StepMetrics metrics;
    policy = update_step(policy, scored, ref, opt, &metrics);

    // Calibrator update with this step's valid gaps (after scoring, so
    // the next step sees the post-update state).
    DeltaBatch delta_batch;
    for (int q = 0; q < batch; ++q) {
      if (results[q].delta) {
        delta_batch[static_cast<int>(results[q].sample.emotion)].push_back(
            *results[q].delta);
      }
    }
    calibrator.update(delta_batch, cfg.calibration);

    MetricsRow row;
    row.step = step_idx;
    row.mean_reward = metrics.mean_reward;
    row.mean_r_acc = metrics.mean_r_acc;
    row.accuracy = metrics.accuracy;
    row.zoom_ratio = metrics.zoom_ratio;
    row.kl = metrics.kl;
    row.entropy = metrics.entropy;
    row.delta_bar = calibrator.snapshot().delta_bar;
    art.metrics.push_back(row);

    if (step_idx >= window_start) {
      term_acc += metrics.accuracy;
      term_zoom += metrics.zoom_ratio;
      term_reward += metrics.mean_reward;
      term_samples += 1;
      for (int q = 0; q < batch; ++q) {
        const auto& group = results[q].group;
        const int em = static_cast<int>(group.labels.emotion);
        for (const auto& t : group.trajectories) {
          em_samples[em] += 1;
          if (t.zoom_used) em_zoom[em] += 1;
          if (t.prediction && t.prediction->emotion == group.labels.emotion) {
            em_correct[em] += 1;
          }
        }
      }
    }
  }

  art.final_policy = policy;
  art.final_calibrator = calibrator;
  art.terminal_accuracy = term_acc / static_cast<double>(term_samples);
  art.terminal_zoom_ratio = term_zoom / static_cast<double>(term_samples);
  art.terminal_mean_reward = term_reward / static_cast<double>(term_samples);
  for (int i = 0; i < kEmotionCount; ++i) {
    art.terminal_emotions.samples[i] = em_samples[i];
    if (em_samples[i] > 0) {
      art.terminal_emotions.zoom_ratio[i] =
          static_cast<double>(em_zoom[i]) / em_samples[i];
      art.terminal_emotions.accuracy[i] =
          static_cast<double>(em_correct[i]) / em_samples[i];
    }
  }
  return art;
}

void write_run_artifact(const RunArtifact& artifact,
                        const ExperimentConfig& cfg,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string tag = std::to_string(artifact.seed);

  {
    std::ofstream out(out_dir + "/metrics_seed" + tag + ".csv",
                      std::ios::binary);
    out << "step,mean_reward,mean_r_acc,accuracy,zoom_ratio,kl,entropy";
    for (Emotion em : all_emotions()) {
      out << ",delta_bar_" << emotion_name(em);
    }
    out << "\n";
    for (const auto& r : artifact.metrics) {
      out << r.step << ',' << format_double(r.mean_reward) << ','
          << format_double(r.mean_r_acc) << ',' << format_double(r.accuracy)
          << ',' << format_double(r.zoom_ratio) << ',' << format_double(r.kl)
          << ',' << format_double(r.entropy);
      for (double d : r.delta_bar) out << ',' << format_double(d);
      out << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/phi_trace_seed" + tag + ".csv",
                      std::ios::binary);
    out << "step,emotion,count_prev,delta_bar_prev,phi_lazy,phi_unnec\n";
    for (const auto& r : artifact.phi_trace) {
      out << r.step << ','
          << emotion_name(static_cast<Emotion>(r.emotion)) << ','
          << r.count_prev << ',' << format_double(r.delta_bar_prev) << ','
          << format_double(r.phi_lazy) << ',' << format_double(r.phi_unnec)
          << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/policy_seed" + tag + ".json",
                      std::ios::binary);
    out << artifact.final_policy.to_json() << "\n";
  }
  {
    std::ofstream out(out_dir + "/calibrator_seed" + tag + ".json",
                      std::ios::binary);
    out << artifact.final_calibrator.to_json() << "\n";
  }
  {
    std::ofstream out(out_dir + "/terminal_seed" + tag + ".csv",
                      std::ios::binary);
    out << "metric,value\n";
    out << "accuracy," << format_double(artifact.terminal_accuracy) << "\n";
    out << "zoom_ratio," << format_double(artifact.terminal_zoom_ratio)
        << "\n";
    out << "mean_reward," << format_double(artifact.terminal_mean_reward)
        << "\n";
    for (Emotion em : all_emotions()) {
      const int i = static_cast<int>(em);
      out << "zoom_ratio_" << emotion_name(em) << ','
          << format_double(artifact.terminal_emotions.zoom_ratio[i]) << "\n";
      out << "accuracy_" << emotion_name(em) << ','
          << format_double(artifact.terminal_emotions.accuracy[i]) << "\n";
    }
  }
  (void)cfg;
}

}  // namespace uclab
