#include "petal/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <json.hpp>
#include <set>

#include "petal/error.hpp"
#include "petal/io.hpp"
#include "petal/parallel.hpp"
#include "petal/rng.hpp"

namespace petal {
namespace {

// Sub-stream tags under a trial seed.
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kGdoStream = 2;
constexpr std::uint64_t kGuessStream = 3;
constexpr std::uint64_t kSubsetStream = 0x5e1ec7;
constexpr std::uint64_t kTrainStream = 0x7a1a;
constexpr std::uint64_t kTrainDataStream = 0xda7a;
constexpr std::uint64_t kTestDataStream = 0x7e57;

using Estimator = std::function<double(const Image8& distorted, std::uint64_t seed)>;

struct TrialOutcome {
  TrialRow row;
  std::vector<TracePoint> trace;
};

TrialOutcome run_trial(const SweepEnv& env, int point_index, double point, int trial, std::uint64_t base, int ell,
                       double cn2, double eta, int max_iter, const Estimator& estimate) {
  const Link& link = *env.link;
  const std::uint64_t seed = trial_seed(base, point_index, trial);
  const ChannelInstance ch = make_channel(link, cn2, derive_seed(seed, kChannelStream));
  const Observation distorted = distorted_pattern(link, ell, ch);
  const double cn2_est = estimate(distorted.image, derive_seed(seed, kGuessStream));

  GdoConfig g = env.gdo;
  g.eta = eta;
  g.max_iter = max_iter;
  g.rng_seed = derive_seed(seed, kGdoStream);
  const CorrectionResult r = run_correction(link, ch, cn2_est, g, ell);

  TrialOutcome out;
  out.row = TrialRow{point_index, point,       trial,      seed,       cn2,
                     cn2_est,     r.uncorrected_mse, r.final_mse, r.best_mse, r.best_iter};
  out.trace = r.trace;
  return out;
}

Estimator cnn_estimator(const CnnModel& model) {
  return [&model](const Image8& img, std::uint64_t) { return predict(model, img).cn2; };
}

void require(const SweepSpec& spec, SweepKind kind) {
  if (spec.kind != kind) throw Error(ErrorKind::InvalidConfig, "sweep kind mismatch");
  if (spec.points.empty() || spec.trials < 1) {
    throw Error(ErrorKind::InvalidConfig, "sweep needs at least one point and one trial");
  }
}

SweepResult collect(const SweepSpec& spec, std::vector<TrialOutcome>& outcomes) {
  SweepResult r;
  r.kind = spec.kind;
  r.ell = spec.ell;
  r.base_seed = spec.base_seed;
  std::sort(outcomes.begin(), outcomes.end(), [](const TrialOutcome& a, const TrialOutcome& b) {
    return std::pair(a.row.point_index, a.row.trial) < std::pair(b.row.point_index, b.row.trial);
  });
  for (const auto& o : outcomes) {
    r.rows.push_back(o.row);
    for (const auto& t : o.trace) r.traces.push_back({o.row.point_index, o.row.trial, t.iter, t.mse, t.best_so_far});
  }
  r.points = point_statistics(r.rows);
  return r;
}

// Runs every (point, trial) pair of the spec on the pool.
template <class Fn>
std::vector<TrialOutcome> run_grid(const SweepEnv& env, const SweepSpec& spec, Fn&& fn) {
  const std::size_t points = spec.points.size();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  std::vector<TrialOutcome> out(points * trials);
  parallel_for(out.size(), env.threads, [&](std::size_t i) {
    out[i] = fn(static_cast<int>(i / trials), static_cast<int>(i % trials));
  });
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void summary_cols(std::string& s, const stats::Summary& m) {
  s += std::to_string(m.count) + "," + num(m.mean) + "," + num(m.std) + "," + num(m.median) + "," + num(m.p10) + "," +
       num(m.p95);
}

nlohmann::json summary_json(const stats::Summary& m) {
  return {{"n", m.count}, {"mean", m.mean}, {"std", m.std}, {"median", m.median}, {"p10", m.p10}, {"p95", m.p95}};
}

}  // namespace

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Eta: return "eta";
    case SweepKind::Iterations: return "iterations";
    case SweepKind::TrainSize: return "train-size";
    case SweepKind::OamIndex: return "oam";
    case SweepKind::Strength: return "strength";
  }
  return "?";
}

SweepKind parse_sweep_kind(const std::string& s) {
  for (auto k : {SweepKind::Eta, SweepKind::Iterations, SweepKind::TrainSize, SweepKind::OamIndex, SweepKind::Strength}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown sweep kind: " + s);
}

Dataset training_set(const Link& link, const Config& cfg, int ell, int per_label) {
  return generate_dataset(link, ell, per_label, derive_seed(cfg.seed, kTrainDataStream, ell), cfg.classes(), cfg.threads);
}

Dataset test_set(const Link& link, const Config& cfg, int ell) {
  const auto classes = cfg.classes();
  return generate_test_dataset(link, ell, cfg.test_per_label * static_cast<int>(classes.size()),
                               derive_seed(cfg.seed, kTestDataStream, ell), classes, cfg.cn2_test_min,
                               cfg.cn2_test_max, cfg.threads);
}

TrainedModel train_model(const Link& link, const Config& cfg, int ell) {
  TrainConfig tc = cfg.train_config();
  tc.rng_seed = derive_seed(cfg.seed, kTrainStream, ell);
  TrainResult tr = train(tc, training_set(link, cfg, ell, cfg.per_label));
  TrainedModel m{std::move(tr.model), std::move(tr.epoch_loss), {}};
  m.test = evaluate(m.model, test_set(link, cfg, ell));
  return m;
}

SweepEnv make_sweep_env(const Link& link, const Config& cfg) {
  SweepEnv env;
  env.link = &link;
  env.gdo = cfg.gdo_config();
  env.train = cfg.train_config();
  env.cn2 = cfg.cn2_fixed;
  env.classes = cfg.classes();
  env.threads = cfg.threads;
  return env;
}

SweepSpec make_sweep_spec(SweepKind kind, const Config& cfg) {
  SweepSpec s;
  s.kind = kind;
  s.trials = cfg.trials;
  s.ell = cfg.ell;
  s.base_seed = cfg.seed;
  switch (kind) {
    case SweepKind::Eta: s.points = cfg.eta_points; break;
    case SweepKind::Iterations: s.points = {static_cast<double>(cfg.max_iter)}; break;
    case SweepKind::TrainSize: s.points = cfg.train_sizes; break;
    case SweepKind::OamIndex:
      s.points = cfg.ell_points;
      s.trials = cfg.channels;
      break;
    case SweepKind::Strength:
      s.points = cfg.strengths();
      s.trials = cfg.channels;
      s.ell = cfg.strength_ell;
      break;
  }
  return s;
}

std::uint64_t trial_seed(std::uint64_t base, int point_index, int trial) {
  return derive_seed(base, static_cast<std::uint64_t>(point_index), static_cast<std::uint64_t>(trial));
}

SweepResult sweep_eta(const SweepEnv& env, const SweepSpec& spec, const CnnModel& model) {
  require(spec, SweepKind::Eta);
  const Estimator est = cnn_estimator(model);
  auto outcomes = run_grid(env, spec, [&](int p, int t) {
    return run_trial(env, p, spec.points[p], t, spec.base_seed, spec.ell, env.cn2, spec.points[p], env.gdo.max_iter,
                     est);
  });
  return collect(spec, outcomes);
}

SweepResult sweep_iterations(const SweepEnv& env, const SweepSpec& spec, const CnnModel& model) {
  require(spec, SweepKind::Iterations);
  const int max_iter = static_cast<int>(spec.points.back());
  const Estimator est = cnn_estimator(model);
  SweepSpec one = spec;
  one.points = {static_cast<double>(max_iter)};
  auto runs = run_grid(env, one, [&](int p, int t) {
    return run_trial(env, p, max_iter, t, spec.base_seed, spec.ell, env.cn2, env.gdo.eta, max_iter, est);
  });

  // Re-express each long run as one row per recorded iteration.
  std::vector<TrialOutcome> outcomes;
  for (const auto& run : runs) {
    for (std::size_t k = 0; k < run.trace.size(); ++k) {
      TrialOutcome o;
      o.row = run.row;
      o.row.point_index = static_cast<int>(k);
      o.row.point = run.trace[k].iter;
      o.row.final_mse = run.trace[k].mse;
      o.row.best_mse = run.trace[k].best_so_far;
      o.row.best_iter = std::min(run.row.best_iter, run.trace[k].iter);
      if (k == 0) o.trace = run.trace;
      outcomes.push_back(std::move(o));
    }
  }
  return collect(one, outcomes);
}

SweepResult sweep_train_size(const SweepEnv& env, const SweepSpec& spec, const Dataset& pool) {
  require(spec, SweepKind::TrainSize);
  const std::size_t n = spec.points.size();
  std::vector<CnnModel> models(n);
  parallel_for(n, env.threads, [&](std::size_t p) {
    const int size = static_cast<int>(spec.points[p]);
    if (size <= 0) return;
    if (size > pool.per_label) throw Error(ErrorKind::InvalidConfig, "train size exceeds the pool");
    const Dataset subset = random_subset(pool, size, derive_seed(spec.base_seed, p, kSubsetStream));
    TrainConfig tc = env.train;
    tc.rng_seed = derive_seed(spec.base_seed, p, kTrainStream);
    models[p] = train(tc, subset).model;
  });

  const auto& classes = pool.classes;
  auto outcomes = run_grid(env, spec, [&](int p, int t) {
    Estimator est;
    if (spec.points[p] <= 0) {
      est = [&classes](const Image8&, std::uint64_t seed) {
        CounterRng rng(seed);
        return classes[rng.below(classes.size())];
      };
    } else {
      est = cnn_estimator(models[p]);
    }
    return run_trial(env, p, spec.points[p], t, spec.base_seed, spec.ell, env.cn2, env.gdo.eta, env.gdo.max_iter, est);
  });
  return collect(spec, outcomes);
}

SweepResult sweep_oam(const SweepEnv& env, const SweepSpec& spec, std::span<const CnnModel> models) {
  require(spec, SweepKind::OamIndex);
  if (models.size() != spec.points.size()) throw Error(ErrorKind::ShapeMismatch, "one model per OAM index required");
  auto outcomes = run_grid(env, spec, [&](int p, int t) {
    return run_trial(env, p, spec.points[p], t, spec.base_seed, static_cast<int>(spec.points[p]), env.cn2, env.gdo.eta,
                     env.gdo.max_iter, cnn_estimator(models[p]));
  });
  SweepResult r = collect(spec, outcomes);
  r.ell = -1;
  return r;
}

SweepResult sweep_strength(const SweepEnv& env, const SweepSpec& spec, const CnnModel& model) {
  require(spec, SweepKind::Strength);
  const Estimator est = cnn_estimator(model);
  auto outcomes = run_grid(env, spec, [&](int p, int t) {
    return run_trial(env, p, spec.points[p], t, spec.base_seed, spec.ell, spec.points[p], env.gdo.eta,
                     env.gdo.max_iter, est);
  });
  return collect(spec, outcomes);
}

std::vector<PointStats> point_statistics(const std::vector<TrialRow>& rows) {
  std::vector<PointStats> out;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    std::vector<double> u, f, b;
    while (j < rows.size() && rows[j].point_index == rows[i].point_index) {
      u.push_back(rows[j].uncorrected_mse);
      f.push_back(rows[j].final_mse);
      b.push_back(rows[j].best_mse);
      ++j;
    }
    out.push_back({rows[i].point_index, rows[i].point, stats::summarize(u), stats::summarize(f), stats::summarize(b)});
    i = j;
  }
  return out;
}

std::string trials_csv(const SweepResult& r) {
  std::string s = "kind,point_index,point,trial,seed,cn2_true,cn2_predicted,uncorrected_mse,final_mse,best_mse,best_iter\n";
  for (const auto& row : r.rows) {
    s += to_string(r.kind) + "," + std::to_string(row.point_index) + "," + num(row.point) + "," +
         std::to_string(row.trial) + "," + std::to_string(row.seed) + "," + num(row.cn2_true) + "," +
         num(row.cn2_predicted) + "," + num(row.uncorrected_mse) + "," + num(row.final_mse) + "," + num(row.best_mse) +
         "," + std::to_string(row.best_iter) + "\n";
  }
  return s;
}

std::string stats_csv(const SweepResult& r) {
  std::string s = "kind,point_index,point,metric,n,mean,std,median,p10,p95\n";
  for (const auto& p : r.points) {
    const std::pair<const char*, const stats::Summary*> metrics[] = {
        {"uncorrected", &p.uncorrected}, {"final", &p.final_mse}, {"best", &p.best_mse}};
    for (const auto& [name, m] : metrics) {
      s += to_string(r.kind) + "," + std::to_string(p.point_index) + "," + num(p.point) + "," + name + ",";
      summary_cols(s, *m);
      s += "\n";
    }
  }
  return s;
}

std::string trace_csv(const SweepResult& r) {
  std::string s = "point_index,trial,iter,mse_index,best_so_far\n";
  for (const auto& t : r.traces) {
    s += std::to_string(t.point_index) + "," + std::to_string(t.trial) + "," + std::to_string(t.iter) + "," +
         num(t.mse) + "," + num(t.best_so_far) + "\n";
  }
  return s;
}

std::string manifest_csv(const SweepResult& r) {
  std::string s = "point_index,trial,seed\n";
  for (const auto& row : r.rows) {
    // An iteration sweep reuses each run across its recorded points; list each run once.
    if (r.kind == SweepKind::Iterations && row.point_index != 0) continue;
    s += std::to_string(row.point_index) + "," + std::to_string(row.trial) + "," + std::to_string(row.seed) + "\n";
  }
  return s;
}

void check_seed_uniqueness(const SweepResult& r) {
  std::set<std::uint64_t> seen;
  for (const auto& row : r.rows) {
    if (r.kind == SweepKind::Iterations && row.point_index != 0) continue;
    if (!seen.insert(row.seed).second) {
      throw Error(ErrorKind::InvalidConfig, "seed reused at point " + std::to_string(row.point_index) + " trial " +
                                                std::to_string(row.trial));
    }
  }
}

void write_sweep(const SweepResult& r, const Config& cfg, const std::filesystem::path& dir) {
  check_seed_uniqueness(r);
  std::filesystem::create_directories(dir);
  write_text(dir / "trials.csv", trials_csv(r));
  write_text(dir / "stats.csv", stats_csv(r));
  write_text(dir / "trace.csv", trace_csv(r));
  write_text(dir / "manifest.csv", manifest_csv(r));
  write_text(dir / "config.txt", cfg.to_text());

  nlohmann::json j;
  j["kind"] = to_string(r.kind);
  j["ell"] = r.ell;
  j["base_seed"] = r.base_seed;
  j["trials"] = r.rows.size();
  for (const auto& p : r.points) {
    j["points"].push_back({{"index", p.point_index},
                           {"value", p.point},
                           {"uncorrected", summary_json(p.uncorrected)},
                           {"final", summary_json(p.final_mse)},
                           {"best", summary_json(p.best_mse)}});
  }
  write_text(dir / "summary.json", j.dump(2) + "\n");
}

}  // namespace petal
