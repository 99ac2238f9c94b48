#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "petal/cnn.hpp"
#include "petal/config.hpp"
#include "petal/gdo.hpp"
#include "petal/link.hpp"
#include "petal/stats.hpp"

namespace petal {

enum class SweepKind { Eta, Iterations, TrainSize, OamIndex, Strength };

std::string to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& s);

struct SweepSpec {
  SweepKind kind = SweepKind::Eta;
  std::vector<double> points;
  int trials = 10;
  int ell = 5;
  std::uint64_t base_seed = 1;
};

/// Everything a sweep needs besides the spec: link geometry, optimizer settings, and the
/// strength used where the sweep does not vary it.
struct SweepEnv {
  const Link* link = nullptr;
  GdoConfig gdo;
  TrainConfig train;
  double cn2 = 3e-11;
  std::vector<double> classes;
  int threads = 1;
};

/// A classifier for one OAM index trained on per_label images per class and scored on a
/// disjoint held-out set of test_per_label images per class.
struct TrainedModel {
  CnnModel model;
  std::vector<double> epoch_loss;
  AccuracyReport test;
};

Dataset training_set(const Link& link, const Config& cfg, int ell, int per_label);
Dataset test_set(const Link& link, const Config& cfg, int ell);
TrainedModel train_model(const Link& link, const Config& cfg, int ell);

SweepEnv make_sweep_env(const Link& link, const Config& cfg);
SweepSpec make_sweep_spec(SweepKind kind, const Config& cfg);

/// One trial at one point. For Iterations sweeps every recorded iteration is its own point.
struct TrialRow {
  int point_index = 0;
  double point = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double cn2_true = 0.0;
  double cn2_predicted = 0.0;
  double uncorrected_mse = 0.0;
  double final_mse = 0.0;
  double best_mse = 0.0;
  int best_iter = 0;
};

struct TraceRow {
  int point_index = 0;
  int trial = 0;
  int iter = 0;
  double mse = 0.0;
  double best_so_far = 0.0;
};

struct PointStats {
  int point_index = 0;
  double point = 0.0;
  stats::Summary uncorrected, final_mse, best_mse;
};

struct SweepResult {
  SweepKind kind = SweepKind::Eta;
  int ell = 0;
  std::uint64_t base_seed = 0;
  std::vector<TrialRow> rows;      // sorted by (point_index, trial)
  std::vector<TraceRow> traces;    // sorted by (point_index, trial, iter)
  std::vector<PointStats> points;  // one per point, recomputable from rows
};

/// seed of trial t at point p: base ⊕ hash(p, t).
std::uint64_t trial_seed(std::uint64_t base, int point_index, int trial);

SweepResult sweep_eta(const SweepEnv& env, const SweepSpec& spec, const CnnModel& model);
SweepResult sweep_iterations(const SweepEnv& env, const SweepSpec& spec, const CnnModel& model);
/// Size 0 runs the corrector with a uniformly random class guess instead of the CNN.
SweepResult sweep_train_size(const SweepEnv& env, const SweepSpec& spec, const Dataset& pool);
/// models[i] was trained for ell = spec.points[i].
SweepResult sweep_oam(const SweepEnv& env, const SweepSpec& spec, std::span<const CnnModel> models);
SweepResult sweep_strength(const SweepEnv& env, const SweepSpec& spec, const CnnModel& model);

std::vector<PointStats> point_statistics(const std::vector<TrialRow>& rows);

std::string trials_csv(const SweepResult& r);
std::string stats_csv(const SweepResult& r);
std::string trace_csv(const SweepResult& r);
std::string manifest_csv(const SweepResult& r);
/// Throws InvalidConfig when two trials share a seed.
void check_seed_uniqueness(const SweepResult& r);

/// Writes trials.csv, stats.csv, trace.csv, manifest.csv, summary.json and config.txt.
void write_sweep(const SweepResult& r, const Config& cfg, const std::filesystem::path& dir);

}  // namespace petal
