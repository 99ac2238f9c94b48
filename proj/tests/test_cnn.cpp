#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <cmath>
#include <numeric>

#include "petal/cnn.hpp"
#include "petal/error.hpp"
#include "petal/io.hpp"
#include "petal/link.hpp"
#include "petal/rng.hpp"

using namespace petal;

namespace {

CnnModel zeros_like(const CnnModel& m) {
  CnnModel g = m;
  g.for_each_block([](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); });
  return g;
}

std::vector<double> random_input(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (auto& x : v) x = rng.uniform();
  return v;
}

double loss_of(const CnnModel& m, std::span<const double> input, int label) {
  CnnWorkspace ws;
  return -std::log(forward(m, input, ws)[label]);
}

template <class Fn>
void expect_error(ErrorKind kind, Fn&& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

// Two well-separated classes from the desk-scale link, shared by several cases.
const Dataset& toy_dataset() {
  static const Dataset d = [] {
    const Link link(default_link_config(64, 8e-4));
    const std::vector<double> classes{label_grid().values.front(), label_grid().values.back()};
    return generate_dataset(link, 5, 50, 99, classes);
  }();
  return d;
}

}  // namespace

TEST_CASE("label grid") {
  const auto g = label_grid().values;
  REQUIRE(g.size() == 40);
  CHECK(g[0] == doctest::Approx(0.5e-11));
  CHECK(g[39] == doctest::Approx(8.998e-11));
  CHECK(g[39] <= 9e-11);
  for (int i = 1; i < 40; ++i) CHECK(g[i] > g[i - 1]);
  const auto sub = label_subset(4);
  CHECK(sub.size() == 10);
  CHECK(sub[1] == g[4]);
  CHECK(nearest_label(sub, g[5]) == 1);
  CHECK(nearest_label(sub, 100.0) == 9);
}

TEST_CASE("dataset generation") {
  const Link link(default_link_config(64, 8e-4));
  const auto classes = label_subset(20);  // two classes
  const Dataset d = generate_dataset(link, 3, 4, 11, classes);
  CHECK(d.size() == 8);
  CHECK(std::count(d.labels.begin(), d.labels.end(), 0) == 4);
  CHECK_FALSE(d.images[0] == d.images[1]);
  std::set<std::uint64_t> seeds(d.screen_seeds.begin(), d.screen_seeds.end());
  CHECK(seeds.size() == d.size());
  expect_error(ErrorKind::EmptyDataset, [&] { generate_dataset(link, 3, 0, 11, classes); });

  // Same seed, different thread count: same images.
  const Dataset d2 = generate_dataset(link, 3, 4, 11, classes, 3);
  CHECK(d2.images == d.images);

  const Dataset t = generate_test_dataset(link, 3, 30, 12, label_subset(4), 0.5e-11, 9e-11);
  const auto grid = label_grid().values;
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.cn2[i] >= 0.5e-11);
    CHECK(t.cn2[i] <= 9e-11);
    for (double g : grid) CHECK(std::abs(t.cn2[i] - g) > 1e-16);
    CHECK(t.labels[i] == nearest_label(t.classes, t.cn2[i]));
  }

  const auto dir = std::filesystem::temp_directory_path() / "petal_test_dataset";
  save_dataset(d, dir);
  const Dataset back = load_dataset(dir);
  CHECK(back.images == d.images);
  CHECK(back.labels == d.labels);
  CHECK(back.cn2 == d.cn2);
  CHECK(back.screen_seeds == d.screen_seeds);
  CHECK(back.classes == d.classes);
  CHECK(back.ell == 3);
  std::filesystem::remove_all(dir);
  expect_error(ErrorKind::MissingInput, [&] { load_dataset(dir); });
}

TEST_CASE("subsets") {
  const Dataset& d = toy_dataset();
  const Dataset first = take_per_label(d, 10);
  CHECK(first.size() == 20);
  const Dataset r1 = random_subset(d, 10, 5), r2 = random_subset(d, 10, 5), r3 = random_subset(d, 10, 6);
  CHECK(r1.images == r2.images);
  CHECK_FALSE(r1.screen_seeds == r3.screen_seeds);
  CHECK(std::count(r1.labels.begin(), r1.labels.end(), 1) == 10);
}

TEST_CASE("softmax normalization") {
  const CnnModel m = CnnModel::initialized({16, 16, 4, 20, 7}, std::vector<double>(7, 1e-11), 3);
  CnnWorkspace ws;
  for (int s = 0; s < 20; ++s) {
    auto in = random_input(16, s);
    for (auto& v : in) v *= 1.0 + 50.0 * s;  // includes large logits
    const auto p = forward(m, in, ws);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("backpropagation matches central differences") {
  const CnnModel m = CnnModel::initialized({16, 16, 3, 12, 5}, std::vector<double>(5, 1e-11), 17);
  for (int sample = 0; sample < 3; ++sample) {
    const auto in = random_input(16, 100 + sample);
    const int label = sample % 5;
    CnnModel g = zeros_like(m);
    CnnWorkspace ws;
    backward(m, in, label, ws, g);

    const double h = 1e-4;
    double num = 0.0, den = 0.0;
    std::vector<std::vector<double>*> mblocks, gblocks;
    CnnModel probe = m;
    probe.for_each_block([&](std::vector<double>& v) { mblocks.push_back(&v); });
    g.for_each_block([&](std::vector<double>& v) { gblocks.push_back(&v); });
    for (std::size_t b = 0; b < mblocks.size(); ++b) {
      auto& w = *mblocks[b];
      // Every weight of the small blocks, a stride through the large fc1 block.
      const std::size_t stride = w.size() > 200 ? 7 : 1;
      for (std::size_t i = 0; i < w.size(); i += stride) {
        const double keep = w[i];
        w[i] = keep + h;
        const double lp = loss_of(probe, in, label);
        w[i] = keep - h;
        const double lm = loss_of(probe, in, label);
        w[i] = keep;
        const double fd = (lp - lm) / (2 * h);
        num += (fd - (*gblocks[b])[i]) * (fd - (*gblocks[b])[i]);
        den += fd * fd;
      }
    }
    CHECK(std::sqrt(num / den) < 1e-4);
  }
}

TEST_CASE("max pool selects the window argmax") {
  // One filter that passes the input through unchanged, so pooling acts on the raw pixels.
  CnnModel m = CnnModel::initialized({8, 8, 1, 4, 2}, {1e-11, 2e-11}, 1);
  std::fill(m.conv_w.begin(), m.conv_w.end(), 0.0);
  m.conv_w[12] = 1.0;
  auto in = random_input(8, 4);
  CnnWorkspace ws;
  forward(m, in, ws);
  const auto pooled = ws.pooled;
  const auto probs = std::vector<double>(ws.probs.begin(), ws.probs.end());
  // Permute the three non-selected entries of every window.
  for (int py = 0; py < 4; ++py) {
    for (int px = 0; px < 4; ++px) {
      std::vector<int> idx;
      int best = 0;
      for (int q = 0; q < 4; ++q) {
        const int i = (2 * py + q / 2) * 8 + 2 * px + q % 2;
        idx.push_back(i);
        if (in[i] > in[idx[best]]) best = q;
      }
      idx.erase(idx.begin() + best);
      const double t = in[idx[2]];
      in[idx[2]] = in[idx[1]];
      in[idx[1]] = in[idx[0]];
      in[idx[0]] = t;
    }
  }
  forward(m, in, ws);
  CHECK(ws.pooled == pooled);
  CHECK(std::vector<double>(ws.probs.begin(), ws.probs.end()) == probs);
}

TEST_CASE("prediction ties go to the lowest index") {
  CnnModel m = CnnModel::initialized({8, 8, 2, 4, 6}, {1, 2, 3, 4, 5, 6}, 1);
  std::fill(m.fc2_w.begin(), m.fc2_w.end(), 0.0);
  std::fill(m.fc2_b.begin(), m.fc2_b.end(), 0.0);
  const Image8 img{8, 8, std::vector<std::uint8_t>(64, 200)};
  const Prediction p = predict(m, img);
  CHECK(p.label == 0);
  CHECK(p.cn2 == 1);
  expect_error(ErrorKind::ShapeMismatch, [&] { predict(m, Image8{4, 4, std::vector<std::uint8_t>(16, 0)}); });
}

TEST_CASE("two extreme classes are learnable") {
  const Dataset& d = toy_dataset();
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.rng_seed = 3;
  const TrainResult r = train(cfg, d);
  const AccuracyReport acc = evaluate(r.model, d);
  CHECK(acc.top1 >= 0.99);
  CHECK(r.epoch_loss.back() <= r.epoch_loss.front());
  CHECK(predict(r.model, d.images[0]).label == d.labels[0]);
  CHECK(predict(r.model, d.images.back()).label == d.labels.back());
}

TEST_CASE("training is deterministic") {
  const Dataset d = take_per_label(toy_dataset(), 10);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.rng_seed = 8;
  const TrainResult a = train(cfg, d), b = train(cfg, d);
  CHECK(a.model.fc1_w == b.model.fc1_w);
  CHECK(a.model.conv_w == b.model.conv_w);
  CHECK(a.epoch_loss == b.epoch_loss);
  cfg.rng_seed = 9;
  CHECK_FALSE(train(cfg, d).model.fc1_w == a.model.fc1_w);
}

TEST_CASE("training preconditions") {
  Dataset d = take_per_label(toy_dataset(), 5);
  Dataset one = d;
  std::fill(one.labels.begin(), one.labels.end(), 0);
  expect_error(ErrorKind::DegenerateDataset, [&] { train(TrainConfig{}, one); });
  expect_error(ErrorKind::EmptyDataset, [&] { train(TrainConfig{}, Dataset{}); });
}

TEST_CASE("accuracy report") {
  std::vector<int> truth(400), pred(400);
  for (int i = 0; i < 400; ++i) truth[i] = pred[i] = i % 40;
  CHECK(evaluate_predictions(truth, pred, 40).top1 == 1.0);
  for (int i = 0; i < 400; ++i) pred[i] = truth[i] == 39 ? 38 : truth[i] + 1;
  const AccuracyReport off = evaluate_predictions(truth, pred, 40);
  CHECK(off.top1 == 0.0);
  CHECK(off.within_one == 1.0);
  CHECK(off.confusion[0][1] == 10);

  // Uniform random guesses: top-1 near 1/40 (binomial, 4 standard deviations).
  const int n = 8000;
  std::vector<int> t(n), p(n);
  CounterRng rng(77);
  for (int i = 0; i < n; ++i) {
    t[i] = static_cast<int>(rng.below(40));
    p[i] = static_cast<int>(rng.below(40));
  }
  const double sigma = std::sqrt(0.025 * 0.975 / n);
  CHECK(std::abs(evaluate_predictions(t, p, 40).top1 - 0.025) < 4 * sigma);
}

TEST_CASE("model files") {
  const CnnModel m = CnnModel::initialized({16, 16, 2, 10, 3}, {1e-11, 2e-11, 3e-11}, 4);
  const auto path = std::filesystem::temp_directory_path() / "petal_test_model.bin";
  save_model(m, path);
  const CnnModel back = load_model(path);
  CHECK(back.arch == m.arch);
  CHECK(back.class_cn2 == m.class_cn2);
  CHECK(back.fc1_w == m.fc1_w);
  CHECK(back.fc2_b == m.fc2_b);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  bytes[bytes.size() / 2] ^= 0x40;
  write_text(path, bytes);
  expect_error(ErrorKind::CorruptFile, [&] { load_model(path); });
  write_text(path, "PETAL");
  expect_error(ErrorKind::CorruptFile, [&] { load_model(path); });
  std::filesystem::remove(path);
  expect_error(ErrorKind::MissingInput, [&] { load_model(path); });
}

TEST_CASE("inference time on a 128x128 image") {
  const CnnModel m = CnnModel::initialized({128, 128, 8, 100, 40}, label_grid().values, 1);
  Image8 img{128, 128, std::vector<std::uint8_t>(128 * 128)};
  CounterRng rng(2);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  predict(m, img);
  const auto t0 = std::chrono::steady_clock::now();
  const int reps = 5;
  for (int i = 0; i < reps; ++i) predict(m, img);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
  MESSAGE("inference " << ms << " ms");
  CHECK(ms < 30.0);
}
