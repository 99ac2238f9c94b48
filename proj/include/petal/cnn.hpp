#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "petal/field.hpp"

namespace petal {

class Link;

/// The 40 training strengths: 0.5e-11 + i · 0.2179e-11 m^{-2/3}, i = 0..39.
struct LabelGrid {
  std::vector<double> values;
};

LabelGrid label_grid();
/// Every stride-th grid value starting at index 0 (stride 4 gives the 10-class desk set).
std::vector<double> label_subset(int stride);
/// Index of the value in `classes` nearest to cn2.
int nearest_label(std::span<const double> classes, double cn2);

struct Dataset {
  std::vector<Image8> images;
  std::vector<int> labels;              // index into classes
  std::vector<double> cn2;              // strength used for each image
  std::vector<std::uint64_t> screen_seeds;
  std::vector<double> classes;          // cn2 of each class
  int per_label = 0;
  int ell = 0;

  std::size_t size() const { return images.size(); }
};

/// per_label receiver images for every class: ideal mask(ell) → 1 m → screen → 25 m →
/// intensity → Image8, each image from its own screen seed derived from base_seed.
/// Throws EmptyDataset for per_label < 1 or an empty class list.
Dataset generate_dataset(const Link& link, int ell, int per_label, std::uint64_t base_seed,
                         std::span<const double> classes, int threads = 1);

/// Held-out set: `count` images whose strengths are drawn uniformly in [cn2_min, cn2_max]
/// away from every training grid value; each is labelled with the nearest class.
Dataset generate_test_dataset(const Link& link, int ell, int count, std::uint64_t base_seed,
                              std::span<const double> classes, double cn2_min, double cn2_max, int threads = 1);

/// The first `count` images of every class, keeping class order.
Dataset take_per_label(const Dataset& data, int count);
/// `count` images per class chosen by a seeded shuffle.
Dataset random_subset(const Dataset& data, int count, std::uint64_t seed);

/// Directory layout: one PGM per image plus labels.csv (image_file,label_index,cn2,screen_seed,ell)
/// and classes.csv (label_index,cn2,per_label). Throws MissingInput or CorruptFile on load.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

struct CnnArch {
  int height = 0;
  int width = 0;
  int filters = 8;   // 5×5 kernels, stride 1, zero padding 2
  int hidden = 100;
  int classes = 40;

  int pooled_size() const { return filters * (height / 2) * (width / 2); }
  friend bool operator==(const CnnArch&, const CnnArch&) = default;
};

inline constexpr int kConvSize = 5;

/// conv(5×5, ReLU) → maxpool(2×2) → fc(hidden, ReLU) → fc(classes) → softmax.
struct CnnModel {
  CnnArch arch;
  std::vector<double> class_cn2;
  std::vector<double> conv_w, conv_b;  // filters×25, filters
  std::vector<double> fc1_w, fc1_b;    // hidden×pooled, hidden
  std::vector<double> fc2_w, fc2_b;    // classes×hidden, classes

  /// He-normal weights, zero biases.
  static CnnModel initialized(const CnnArch& arch, std::vector<double> class_cn2, std::uint64_t seed);

  std::size_t parameter_count() const;
  /// Visits every weight block in serialization order.
  template <class F>
  void for_each_block(F&& f) {
    f(conv_w); f(conv_b); f(fc1_w); f(fc1_b); f(fc2_w); f(fc2_b);
  }
  template <class F>
  void for_each_block(F&& f) const {
    f(conv_w); f(conv_b); f(fc1_w); f(fc1_b); f(fc2_w); f(fc2_b);
  }
};

/// Activations for one image; reused across calls to avoid reallocations.
struct CnnWorkspace {
  std::vector<double> input, conv, pooled, hidden, probs;
  std::vector<int> pool_index;
};

/// Pixel values scaled to [0, 1].
std::vector<double> image_to_input(const Image8& img);

/// Forward pass; returns softmax probabilities (views into ws.probs).
std::span<const double> forward(const CnnModel& model, std::span<const double> input, CnnWorkspace& ws);

/// Cross-entropy loss of one sample; accumulates its gradient into grad (same layout as model).
double backward(const CnnModel& model, std::span<const double> input, int label, CnnWorkspace& ws,
                CnnModel& grad);

struct TrainConfig {
  int epochs = 30;
  int batch = 32;
  double step = 0.01;
  int filters = 8;
  int hidden = 100;
  std::uint64_t rng_seed = 1;
};

struct TrainResult {
  CnnModel model;
  std::vector<double> epoch_loss;  // mean training cross-entropy per epoch
};

/// Mini-batch SGD on softmax cross-entropy. Deterministic for a fixed seed and dataset.
/// Throws EmptyDataset or DegenerateDataset (fewer than two classes present).
TrainResult train(const TrainConfig& cfg, const Dataset& data);

struct Prediction {
  int label = 0;
  double cn2 = 0.0;
};

/// argmax of the softmax, ties to the lowest index. Throws ShapeMismatch for a wrong-size image.
Prediction predict(const CnnModel& model, const Image8& img);

struct AccuracyReport {
  double top1 = 0.0;
  double within_one = 0.0;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
};

AccuracyReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted, int classes);
AccuracyReport evaluate(const CnnModel& model, const Dataset& data);

/// Binary model file: magic, version, architecture header, class strengths, little-endian
/// f64 weight blocks, trailing FNV-1a 64 checksum of everything before it.
void save_model(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_model(const std::filesystem::path& path);

}  // namespace petal
