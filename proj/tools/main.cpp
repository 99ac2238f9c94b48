// petal: command-line front end for the OAM turbulence-correction simulator.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "petal/config.hpp"
#include "petal/error.hpp"
#include "petal/experiment.hpp"
#include "petal/io.hpp"
#include "petal/render.hpp"
#include "petal/rng.hpp"
#include "petal/simd/kernels.hpp"
#include "petal/validate.hpp"

namespace fs = std::filesystem;
using namespace petal;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

struct Globals {
  std::string config_file;
  std::string profile = "paper";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = "out";
};

Config resolve(const Globals& g) {
  Config cfg = Config::for_profile(parse_profile(g.profile));
  if (!g.config_file.empty()) cfg.load_file(g.config_file);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (cfg.threads < 1) throw Error(ErrorKind::InvalidConfig, "threads must be >= 1");
  return cfg;
}

fs::path prepare_out(const Globals& g, const Config& cfg) {
  const fs::path out(g.out);
  fs::create_directories(out);
  write_text(out / "config.txt", cfg.to_text());
  return out;
}

void log(const char* fmt, auto... args) {
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

CnnModel model_for(const Link& link, const Config& cfg, int ell, const std::string& path) {
  if (!path.empty()) return load_model(path);
  log("training classifier for ell=%d (%zu classes x %d images)", ell, cfg.classes().size(), cfg.per_label);
  TrainedModel m = train_model(link, cfg, ell);
  log("held-out top-1 %.3f, within-one %.3f", m.test.top1, m.test.within_one);
  return std::move(m.model);
}

int cmd_gen_screens(const Globals& g, double cn2, int count) {
  const Config cfg = resolve(g);
  const fs::path out = prepare_out(g, cfg);
  const Link link(cfg.link_config());
  const double strength = cn2 > 0 ? cn2 : cfg.cn2_fixed;
  const SpectrumField spec = link.spectrum(strength);
  const double r0 = link.turbulence(strength).r0;
  std::string index = "seed,cn2,r0,screen_file\n";
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, 0x5C, i);
    const PhaseScreen s = synthesize_screen(draw_seed(seed, link.grid()), spec);
    char name[32];
    std::snprintf(name, sizeof(name), "screen_%04d.f64", i);
    write_real_field(s.phase, "phase_screen", out / name);
    char row[160];
    std::snprintf(row, sizeof(row), "%llu,%.10g,%.10g,%s\n", static_cast<unsigned long long>(seed), strength, r0, name);
    index += row;
  }
  write_text(out / "screens.csv", index);
  return 0;
}

int cmd_gen_dataset(const Globals& g, int ell) {
  const Config cfg = resolve(g);
  const fs::path out = prepare_out(g, cfg);
  const Link link(cfg.link_config());
  const int l = ell >= 0 ? ell : cfg.ell;
  save_dataset(training_set(link, cfg, l, cfg.per_label), out / "train");
  save_dataset(test_set(link, cfg, l), out / "test");
  return 0;
}

int cmd_train(const Globals& g, const std::string& data_dir, int ell) {
  const Config cfg = resolve(g);
  const fs::path out = prepare_out(g, cfg);
  const Link link(cfg.link_config());
  const int l = ell >= 0 ? ell : cfg.ell;
  const Dataset train_data = data_dir.empty() ? training_set(link, cfg, l, cfg.per_label) : load_dataset(fs::path(data_dir) / "train");
  const Dataset test_data = data_dir.empty() ? test_set(link, cfg, l) : load_dataset(fs::path(data_dir) / "test");
  TrainConfig tc = cfg.train_config();
  tc.rng_seed = derive_seed(cfg.seed, 0x7a1a, l);
  const TrainResult tr = train(tc, train_data);
  const AccuracyReport acc = evaluate(tr.model, test_data);
  save_model(tr.model, out / "model.bin");

  std::string loss = "epoch,loss\n";
  for (std::size_t e = 0; e < tr.epoch_loss.size(); ++e) loss += std::to_string(e) + "," + std::to_string(tr.epoch_loss[e]) + "\n";
  write_text(out / "loss.csv", loss);
  std::string conf;
  for (const auto& row : acc.confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) conf += (c ? "," : "") + std::to_string(row[c]);
    conf += "\n";
  }
  write_text(out / "confusion.csv", conf);
  nlohmann::json j{{"top1", acc.top1}, {"within_one", acc.within_one}, {"classes", train_data.classes.size()},
                   {"train_images", train_data.size()}, {"test_images", test_data.size()}, {"ell", l}};
  write_text(out / "accuracy.json", j.dump(2) + "\n");
  std::printf("top1 %.4f within_one %.4f\n", acc.top1, acc.within_one);
  return 0;
}

int cmd_correct(const Globals& g, const std::string& model_path, double cn2, double cn2_est, int ell) {
  const Config cfg = resolve(g);
  const fs::path out = prepare_out(g, cfg);
  const Link link(cfg.link_config());
  const int l = ell >= 0 ? ell : cfg.ell;
  const double true_cn2 = cn2 > 0 ? cn2 : cfg.cn2_fixed;
  const ChannelInstance ch = make_channel(link, true_cn2, derive_seed(cfg.seed, 1));
  const Observation distorted = distorted_pattern(link, l, ch);

  std::string source = "given";
  double est = cn2_est;
  if (est <= 0) {
    if (!model_path.empty()) {
      est = predict(load_model(model_path), distorted.image).cn2;
      source = "cnn";
    } else {
      est = true_cn2;
      source = "true";
    }
  }
  GdoConfig gc = cfg.gdo_config();
  gc.rng_seed = derive_seed(cfg.seed, 2);
  const CorrectionResult r = run_correction(link, ch, est, gc, l);

  write_pgm(r.target, out / "target.pgm");
  write_pgm(r.distorted, out / "distorted.pgm");
  write_pgm(r.corrected_best, out / "corrected.pgm");
  write_pgm(triple_montage(r.target, r.distorted, r.corrected_best), out / "triple.pgm");
  write_real_field(r.best_mask.theta, "slm_mask", out / "mask.f64");
  write_real_field(ch.phi_real.phase, "phase_screen", out / "screen.f64");
  std::string trace = "iter,mse_index,best_so_far\n";
  for (const auto& t : r.trace) {
    char row[96];
    std::snprintf(row, sizeof(row), "%d,%.10g,%.10g\n", t.iter, t.mse, t.best_so_far);
    trace += row;
  }
  write_text(out / "trace.csv", trace);
  nlohmann::json j{{"ell", l},
                   {"eta", gc.eta},
                   {"iterations", gc.max_iter},
                   {"cn2_true", true_cn2},
                   {"cn2_predicted", est},
                   {"estimate_source", source},
                   {"uncorrected_mse", r.uncorrected_mse},
                   {"best_mse", r.best_mse},
                   {"best_iter", r.best_iter},
                   {"final_mse", r.final_mse},
                   {"degenerate_iterations", r.degenerate_iterations},
                   {"channel_seed", r.channel_seed},
                   {"gdo_seed", r.gdo_seed}};
  write_text(out / "summary.json", j.dump(2) + "\n");
  std::printf("uncorrected %.4f best %.4f (iter %d) final %.4f\n", r.uncorrected_mse, r.best_mse, r.best_iter,
              r.final_mse);
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& kind_name, const std::string& model_path) {
  const Config cfg = resolve(g);
  const fs::path out = prepare_out(g, cfg);
  const Link link(cfg.link_config());
  const SweepKind kind = parse_sweep_kind(kind_name);
  const SweepSpec spec = make_sweep_spec(kind, cfg);
  const SweepEnv env = make_sweep_env(link, cfg);
  const auto t0 = std::chrono::steady_clock::now();

  SweepResult r;
  switch (kind) {
    case SweepKind::Eta: r = sweep_eta(env, spec, model_for(link, cfg, spec.ell, model_path)); break;
    case SweepKind::Iterations: r = sweep_iterations(env, spec, model_for(link, cfg, spec.ell, model_path)); break;
    case SweepKind::Strength: r = sweep_strength(env, spec, model_for(link, cfg, spec.ell, model_path)); break;
    case SweepKind::TrainSize:
      r = sweep_train_size(env, spec, training_set(link, cfg, spec.ell, cfg.pool_per_label));
      break;
    case SweepKind::OamIndex: {
      std::vector<CnnModel> models;
      for (double ell : spec.points) models.push_back(model_for(link, cfg, static_cast<int>(ell), ""));
      r = sweep_oam(env, spec, models);
      break;
    }
  }
  write_sweep(r, cfg, out);
  log("%s sweep: %zu rows in %.1f s", kind_name.c_str(), r.rows.size(),
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  for (const auto& p : r.points) {
    std::printf("%-10g uncorrected %.4f  best %.4f  final %.4f\n", p.point, p.uncorrected.mean, p.best_mse.mean,
                p.final_mse.mean);
  }
  return 0;
}

int cmd_render(const Globals& g, const std::vector<std::string>& inputs, int columns, const std::string& output) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  const fs::path target = output.empty() ? fs::path(g.out) / "montage.pgm" : fs::path(output);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  render_montage(paths, columns, target);
  return 0;
}

int cmd_validate(const Globals& g, bool quick) {
  const Config cfg = resolve(g);
  ValidationOptions o;
  o.seed = cfg.seed;
  if (quick) {
    o.unitarity_fields = 10;
    o.screens = 50;
    o.gradient_cases = 4;
  }
  std::printf("simd: %s\n", std::string(simd::name(simd::active_isa())).c_str());
  bool ok = true;
  for (const CheckResult& c : run_validation(o)) {
    std::printf("%s  %-18s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.pass;
  }
  return ok ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for CNN-assisted turbulence correction of OAM petal beams"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--profile", g.profile, "parameter profile")->check(CLI::IsMember({"paper", "desk"}));
  app.add_option("--seed", g.seed, "base seed");
  app.add_option("--threads", g.threads, "worker threads");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--set", g.overrides, "override a config key (key=value), repeatable");

  double cn2 = 0.0, cn2_est = 0.0;
  int count = 4, ell = -1, columns = 3;
  bool quick = false;
  std::string data_dir, model_path, kind, output;
  std::vector<std::string> inputs;

  auto* screens = app.add_subcommand("gen-screens", "write phase screens as raw f64 with JSON sidecars");
  screens->add_option("--cn2", cn2, "turbulence strength (default cn2_fixed)");
  screens->add_option("--count", count, "number of screens")->check(CLI::PositiveNumber);

  auto* dataset = app.add_subcommand("gen-dataset", "write labelled receiver images (train and test)");
  dataset->add_option("--ell", ell, "OAM index (default ell)");

  auto* train_cmd = app.add_subcommand("train-cnn", "train the strength classifier");
  train_cmd->add_option("--data", data_dir, "directory written by gen-dataset (default: generate)");
  train_cmd->add_option("--ell", ell, "OAM index (default ell)");

  auto* correct = app.add_subcommand("correct", "run one feedback correction");
  correct->add_option("--model", model_path, "classifier file (default: use the true strength)");
  correct->add_option("--cn2", cn2, "true strength of the channel (default cn2_fixed)");
  correct->add_option("--cn2-est", cn2_est, "fixed strength estimate, bypasses the classifier");
  correct->add_option("--ell", ell, "OAM index (default ell)");

  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
  sweep->add_option("--kind", kind, "sweep family")
      ->required()
      ->check(CLI::IsMember({"eta", "iterations", "train-size", "oam", "strength"}));
  sweep->add_option("--model", model_path, "classifier file (default: train one)");

  auto* render = app.add_subcommand("render", "tile PGM images into a montage");
  render->add_option("inputs", inputs, "PGM panels in row-major order")->required();
  render->add_option("--columns", columns, "panels per row")->check(CLI::PositiveNumber);
  render->add_option("--output", output, "montage path (default <out>/montage.pgm)");

  auto* validate = app.add_subcommand("validate", "run the oracle and property checks");
  validate->add_flag("--quick", quick, "smaller ensembles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*screens) return cmd_gen_screens(g, cn2, count);
    if (*dataset) return cmd_gen_dataset(g, ell);
    if (*train_cmd) return cmd_train(g, data_dir, ell);
    if (*correct) return cmd_correct(g, model_path, cn2, cn2_est, ell);
    if (*sweep) return cmd_sweep(g, kind, model_path);
    if (*render) return cmd_render(g, inputs, columns, output);
    if (*validate) return cmd_validate(g, quick);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::InvalidGrid ||
                   e.kind() == ErrorKind::InvalidOptics || e.kind() == ErrorKind::InvalidTurbulence
               ? kExitConfig
               : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
