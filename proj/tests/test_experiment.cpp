#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "petal/config.hpp"
#include "petal/error.hpp"
#include "petal/experiment.hpp"
#include "petal/io.hpp"
#include "petal/render.hpp"
#include "petal/stats.hpp"

using namespace petal;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// A tiny link and budget so sweeps finish in seconds.
Config tiny_config() {
  Config c = Config::for_profile(Profile::Desk);
  c.n = 32;
  c.dx = 1.6e-3;
  c.max_iter = 20;
  c.trials = 3;
  c.channels = 3;
  c.per_label = 6;
  c.pool_per_label = 6;
  c.test_per_label = 2;
  c.epochs = 2;
  c.label_stride = 20;
  return c;
}

}  // namespace

TEST_CASE("percentiles and summary") {
  const std::vector<double> v{5, 1, 3, 2, 4};
  CHECK(stats::percentile(v, 0.5) == 3.0);
  CHECK(stats::percentile(v, 0.0) == 1.0);
  CHECK(stats::percentile(v, 1.0) == 5.0);
  CHECK(stats::percentile(v, 0.10) == doctest::Approx(1.4));
  CHECK(stats::percentile(v, 0.95) == doctest::Approx(4.8));
  const stats::Summary s = stats::summarize(v);
  CHECK(s.mean == 3.0);
  CHECK(s.std == doctest::Approx(std::sqrt(2.5)));
  CHECK(s.p10 <= s.median);
  CHECK(s.median <= s.p95);
  CHECK_THROWS_AS(stats::summarize(std::vector<double>{}), Error);
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(stats::spearman(x, std::vector<double>{2, 4, 8, 16, 32}) == doctest::Approx(1.0));
  CHECK(stats::spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Ties take average ranks: y ranks (1.5, 1.5, 3, 4, 5).
  const double r = stats::spearman(x, std::vector<double>{1, 1, 2, 3, 4});
  CHECK(r == doctest::Approx(0.9746794).epsilon(1e-6));
  CHECK(stats::slope(x, std::vector<double>{1, 3, 5, 7, 9}) == doctest::Approx(2.0));
}

TEST_CASE("config profiles and parsing") {
  const Config paper = Config::for_profile(Profile::Paper);
  CHECK(paper.n == 128);
  CHECK(paper.dx == 4e-4);
  CHECK(paper.classes().size() == 40);
  CHECK(paper.max_iter == 700);
  const Config desk = Config::for_profile(Profile::Desk);
  CHECK(desk.n == 64);
  CHECK(desk.classes().size() == 10);
  CHECK(desk.per_label == 100);
  CHECK(desk.channels == 20);
  CHECK(desk.max_iter == 300);
  CHECK(desk.link_config().grid.l == doctest::Approx(paper.link_config().grid.l));

  CHECK(paper.eta_points.size() >= 4);
  for (double e : {25.0, 275.0, 450.0, 600.0}) {
    CHECK(std::find(paper.eta_points.begin(), paper.eta_points.end(), e) != paper.eta_points.end());
  }
  CHECK(paper.train_sizes.back() == 550);
  CHECK(paper.trials == 10);

  Config c = paper;
  c.set("eta", " 2.5 ");
  c.set("eta_points", "1, 2,3");
  CHECK(c.eta == 2.5);
  CHECK(c.eta_points == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(c.set("nonsense", "1"), Error);
  CHECK_THROWS_AS(c.set("n", "12x"), Error);

  // Echo and reload reproduce the same config.
  const fs::path dir = scratch_dir("petal_test_config");
  write_text(dir / "c.txt", "# comment\n" + c.to_text());
  Config back = Config::for_profile(Profile::Desk);
  back.load_file(dir / "c.txt");
  CHECK(back.to_text() == c.to_text());
  write_text(dir / "bad.txt", "n 64\n");
  try {
    back.load_file(dir / "bad.txt");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
  }
  CHECK_THROWS_AS(parse_profile("laptop"), Error);
  fs::remove_all(dir);
}

TEST_CASE("strength points avoid the training grid") {
  const Config c = Config::for_profile(Profile::Paper);
  const auto s = c.strengths();
  CHECK(s.size() == 10);
  CHECK(s.back() == doctest::Approx(8.5e-11));
  const auto grid = label_grid().values;
  for (double v : s) {
    for (double g : grid) CHECK(std::abs(v - g) > 1e-14);
  }
  CHECK(s.front() > 0.5e-11);  // 0.5e-11 sits on the grid and is nudged
}

TEST_CASE("seed derivation is unique across the sweep grid") {
  std::set<std::uint64_t> seen;
  for (int p = 0; p < 12; ++p) {
    for (int t = 0; t < 100; ++t) CHECK(seen.insert(trial_seed(20190101, p, t)).second);
  }
}

TEST_CASE("sweeps are deterministic across thread counts") {
  Config cfg = tiny_config();
  const Link link(cfg.link_config());
  const CnnModel model = train_model(link, cfg, cfg.ell).model;
  const SweepSpec spec = [&] {
    SweepSpec s = make_sweep_spec(SweepKind::Eta, cfg);
    s.points = {0.5, 1.0};
    return s;
  }();

  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    cfg.threads = k == 0 ? 1 : 3;
    const SweepEnv env = make_sweep_env(link, cfg);
    const SweepResult r = sweep_eta(env, spec, model);
    const fs::path dir = scratch_dir(k == 0 ? "petal_sweep_a" : "petal_sweep_b");
    write_sweep(r, cfg, dir);
    csv[k] = slurp(dir / "trials.csv") + slurp(dir / "stats.csv") + slurp(dir / "trace.csv");
    CHECK(fs::exists(dir / "manifest.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "config.txt"));
    CHECK(r.rows.size() == 6);
    for (const TrialRow& row : r.rows) CHECK(row.best_mse <= row.final_mse);
    for (const PointStats& p : r.points) {
      CHECK(p.best_mse.p10 <= p.best_mse.median);
      CHECK(p.best_mse.median <= p.best_mse.p95);
    }
  }
  CHECK(csv[0] == csv[1]);
}

TEST_CASE("stats are recomputable from the trial rows") {
  Config cfg = tiny_config();
  const Link link(cfg.link_config());
  const CnnModel model = train_model(link, cfg, cfg.ell).model;
  SweepSpec spec = make_sweep_spec(SweepKind::Strength, cfg);
  spec.points = {1e-11, 6e-11};
  spec.ell = 2;
  const SweepResult r = sweep_strength(make_sweep_env(link, cfg), spec, model);
  for (const PointStats& p : r.points) {
    std::vector<double> best;
    for (const TrialRow& row : r.rows) {
      if (row.point_index == p.point_index) best.push_back(row.best_mse);
    }
    const stats::Summary s = stats::summarize(best);
    CHECK(s.mean == p.best_mse.mean);
    CHECK(s.p95 == p.best_mse.p95);
  }
  for (const TrialRow& row : r.rows) CHECK(row.cn2_true == spec.points[row.point_index]);
}

TEST_CASE("iteration sweep reads the trace") {
  Config cfg = tiny_config();
  const Link link(cfg.link_config());
  const CnnModel model = train_model(link, cfg, cfg.ell).model;
  const SweepSpec spec = make_sweep_spec(SweepKind::Iterations, cfg);
  const SweepResult r = sweep_iterations(make_sweep_env(link, cfg), spec, model);
  CHECK(r.points.size() == 3);  // iterations 0, 10, 20
  for (const PointStats& p : r.points) CHECK(static_cast<int>(p.point) % 10 == 0);
  CHECK_NOTHROW(check_seed_uniqueness(r));
  CHECK(manifest_csv(r) == "point_index,trial,seed\n" + [&] {
    std::string s;
    for (int t = 0; t < 3; ++t) s += "0," + std::to_string(t) + "," + std::to_string(trial_seed(cfg.seed, 0, t)) + "\n";
    return s;
  }());
}

TEST_CASE("train-size sweep with a zero point") {
  Config cfg = tiny_config();
  const Link link(cfg.link_config());
  SweepSpec spec = make_sweep_spec(SweepKind::TrainSize, cfg);
  spec.points = {0, 4};
  spec.trials = 2;
  const Dataset pool = training_set(link, cfg, spec.ell, cfg.pool_per_label);
  const SweepResult r = sweep_train_size(make_sweep_env(link, cfg), spec, pool);
  CHECK(r.rows.size() == 4);
  for (const TrialRow& row : r.rows) {
    CHECK(std::find(pool.classes.begin(), pool.classes.end(), row.cn2_predicted) != pool.classes.end());
  }
  spec.points = {100};
  CHECK_THROWS_AS(sweep_train_size(make_sweep_env(link, cfg), spec, pool), Error);
}

TEST_CASE("sweep spec validation") {
  Config cfg = tiny_config();
  const Link link(cfg.link_config());
  const CnnModel m = CnnModel::initialized({32, 32, 1, 4, 2}, cfg.classes(), 1);
  SweepSpec spec = make_sweep_spec(SweepKind::Eta, cfg);
  spec.points.clear();
  CHECK_THROWS_AS(sweep_eta(make_sweep_env(link, cfg), spec, m), Error);
  spec = make_sweep_spec(SweepKind::OamIndex, cfg);
  CHECK_THROWS_AS(sweep_oam(make_sweep_env(link, cfg), spec, std::vector<CnnModel>{m}), Error);
  CHECK(parse_sweep_kind("train-size") == SweepKind::TrainSize);
  CHECK_THROWS_AS(parse_sweep_kind("bogus"), Error);
}

TEST_CASE("montages") {
  const Image8 a{4, 3, std::vector<std::uint8_t>(12, 10)}, b{4, 3, std::vector<std::uint8_t>(12, 20)};
  const Image8 t = triple_montage(a, b, a, 1);
  CHECK(t.width == 3 * 4 + 4);
  CHECK(t.height == 3 + 2);
  CHECK(t.pixels[0] == 255);
  CHECK(t.pixels[1 * t.width + 1] == 10);
  CHECK(t.pixels[1 * t.width + 6] == 20);

  std::vector<Image8> strip(11, a);
  const Image8 s = montage(strip, 11, 2);
  CHECK(s.width == 11 * 4 + 12 * 2);
  CHECK(s.height == 3 + 4);
  const Image8 two_rows = montage(strip, 6, 0);
  CHECK(two_rows.width == 24);
  CHECK(two_rows.height == 6);

  CHECK_THROWS_AS(montage(std::vector<Image8>{a, Image8{2, 2, std::vector<std::uint8_t>(4, 0)}}, 2), Error);

  const fs::path dir = scratch_dir("petal_test_render");
  write_pgm(a, dir / "a.pgm");
  const std::vector<fs::path> inputs{dir / "a.pgm", dir / "missing.pgm"};
  try {
    render_montage(inputs, 2, dir / "out.pgm");
    FAIL("expected MissingInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingInput);
  }
  const std::vector<fs::path> ok{dir / "a.pgm", dir / "a.pgm", dir / "a.pgm"};
  render_montage(ok, 3, dir / "out.pgm");
  CHECK(read_pgm(dir / "out.pgm") == triple_montage(a, a, a));
  fs::remove_all(dir);
}
