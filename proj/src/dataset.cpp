#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "petal/cnn.hpp"
#include "petal/error.hpp"
#include "petal/io.hpp"
#include "petal/link.hpp"
#include "petal/parallel.hpp"
#include "petal/rng.hpp"

namespace petal {

LabelGrid label_grid() {
  LabelGrid g;
  g.values.reserve(40);
  for (int i = 0; i < 40; ++i) g.values.push_back((0.5 + i * 0.2179) * 1e-11);
  return g;
}

std::vector<double> label_subset(int stride) {
  if (stride < 1) throw Error(ErrorKind::InvalidConfig, "label stride must be >= 1");
  const auto all = label_grid().values;
  std::vector<double> out;
  for (std::size_t i = 0; i < all.size(); i += static_cast<std::size_t>(stride)) out.push_back(all[i]);
  return out;
}

int nearest_label(std::span<const double> classes, double cn2) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(classes.size()); ++i) {
    const double d = std::abs(classes[i] - cn2);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Dataset generate_dataset(const Link& link, int ell, int per_label, std::uint64_t base_seed,
                         std::span<const double> classes, int threads) {
  if (per_label < 1 || classes.empty()) {
    throw Error(ErrorKind::EmptyDataset, "dataset needs per_label >= 1 and at least one class");
  }
  const std::size_t total = classes.size() * static_cast<std::size_t>(per_label);
  Dataset d;
  d.per_label = per_label;
  d.ell = ell;
  d.classes.assign(classes.begin(), classes.end());
  d.images.resize(total);
  d.labels.resize(total);
  d.cn2.resize(total);
  d.screen_seeds.resize(total);

  const ModeMask mask = superposition_phase_mask(link.grid(), ell);
  const ComplexField tx = link.transmit(mask.phase);
  std::vector<SpectrumField> spectra;
  spectra.reserve(classes.size());
  for (double c : classes) spectra.push_back(link.spectrum(c));

  parallel_for(total, threads, [&](std::size_t i) {
    const int label = static_cast<int>(i / static_cast<std::size_t>(per_label));
    const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(label), i);
    const PhaseScreen screen = synthesize_screen(draw_seed(seed, link.grid()), spectra[label]);
    d.images[i] = to_image8(intensity(link.receive(tx, &screen.phase)));
    d.labels[i] = label;
    d.cn2[i] = classes[label];
    d.screen_seeds[i] = seed;
  });
  return d;
}

Dataset generate_test_dataset(const Link& link, int ell, int count, std::uint64_t base_seed,
                              std::span<const double> classes, double cn2_min, double cn2_max, int threads) {
  if (count < 1 || classes.empty()) throw Error(ErrorKind::EmptyDataset, "test set needs count >= 1 and classes");
  if (!(cn2_min > 0.0) || !(cn2_max > cn2_min)) throw Error(ErrorKind::InvalidTurbulence, "bad test strength range");
  const auto grid = label_grid().values;
  const double spacing = grid[1] - grid[0];
  Dataset d;
  d.per_label = count / static_cast<int>(classes.size());
  d.ell = ell;
  d.classes.assign(classes.begin(), classes.end());
  d.images.resize(count);
  d.labels.resize(count);
  d.cn2.resize(count);
  d.screen_seeds.resize(count);

  const ModeMask mask = superposition_phase_mask(link.grid(), ell);
  const ComplexField tx = link.transmit(mask.phase);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(base_seed, 0xC2, i);
    CounterRng rng(derive_seed(seed, 0x57));
    double cn2 = 0.0;
    for (;;) {
      cn2 = cn2_min + (cn2_max - cn2_min) * rng.uniform();
      const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(cn2 - g) < 1e-3 * spacing; });
      if (!on_grid) break;
    }
    const PhaseScreen screen = synthesize_screen(draw_seed(seed, link.grid()), link.spectrum(cn2));
    d.images[i] = to_image8(intensity(link.receive(tx, &screen.phase)));
    d.labels[i] = nearest_label(classes, cn2);
    d.cn2[i] = cn2;
    d.screen_seeds[i] = seed;
  });
  return d;
}

namespace {
Dataset select(const Dataset& data, const std::vector<std::size_t>& idx, int per_label) {
  Dataset out;
  out.per_label = per_label;
  out.ell = data.ell;
  out.classes = data.classes;
  for (std::size_t i : idx) {
    out.images.push_back(data.images[i]);
    out.labels.push_back(data.labels[i]);
    out.cn2.push_back(data.cn2[i]);
    out.screen_seeds.push_back(data.screen_seeds[i]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> by_label(const Dataset& data) {
  std::vector<std::vector<std::size_t>> groups(data.classes.size());
  for (std::size_t i = 0; i < data.size(); ++i) groups[data.labels[i]].push_back(i);
  return groups;
}
}  // namespace

Dataset take_per_label(const Dataset& data, int count) {
  std::vector<std::size_t> idx;
  for (const auto& g : by_label(data)) {
    for (std::size_t k = 0; k < g.size() && k < static_cast<std::size_t>(count); ++k) idx.push_back(g[k]);
  }
  return select(data, idx, count);
}

Dataset random_subset(const Dataset& data, int count, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  CounterRng rng(seed);
  for (auto g : by_label(data)) {
    for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[rng.below(i)]);
    g.resize(std::min(g.size(), static_cast<std::size_t>(count)));
    std::sort(g.begin(), g.end());
    idx.insert(idx.end(), g.begin(), g.end());
  }
  return select(data, idx, count);
}

}  // namespace petal

namespace petal {

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char name[32];
  std::string labels = "image_file,label_index,cn2,screen_seed,ell\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(name, sizeof(name), "img_%05zu.pgm", i);
    write_pgm(data.images[i], dir / name);
    char row[160];
    std::snprintf(row, sizeof(row), "%s,%d,%.17g,%llu,%d\n", name, data.labels[i], data.cn2[i],
                  static_cast<unsigned long long>(data.screen_seeds[i]), data.ell);
    labels += row;
  }
  write_text(dir / "labels.csv", labels);
  std::string classes = "label_index,cn2,ell,per_label\n";
  for (std::size_t c = 0; c < data.classes.size(); ++c) {
    char row[96];
    std::snprintf(row, sizeof(row), "%zu,%.17g,%d,%d\n", c, data.classes[c], data.ell, data.per_label);
    classes += row;
  }
  write_text(dir / "classes.csv", classes);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream cls(dir / "classes.csv");
  std::ifstream lab(dir / "labels.csv");
  if (!cls || !lab) throw Error(ErrorKind::MissingInput, "no dataset at " + dir.string());
  Dataset d;
  std::string line;
  std::getline(cls, line);
  while (std::getline(cls, line)) {
    std::size_t label = 0;
    double cn2 = 0.0;
    if (std::sscanf(line.c_str(), "%zu,%lf,%d,%d", &label, &cn2, &d.ell, &d.per_label) != 4 ||
        label != d.classes.size()) {
      throw Error(ErrorKind::CorruptFile, "bad classes.csv row: " + line);
    }
    d.classes.push_back(cn2);
  }
  std::getline(lab, line);
  while (std::getline(lab, line)) {
    char name[64];
    int label = 0;
    double cn2 = 0.0;
    unsigned long long seed = 0;
    int ell = 0;
    if (std::sscanf(line.c_str(), "%63[^,],%d,%lf,%llu,%d", name, &label, &cn2, &seed, &ell) != 5 || label < 0 ||
        label >= static_cast<int>(d.classes.size())) {
      throw Error(ErrorKind::CorruptFile, "bad labels.csv row: " + line);
    }
    d.images.push_back(read_pgm(dir / name));
    d.labels.push_back(label);
    d.cn2.push_back(cn2);
    d.screen_seeds.push_back(seed);
  }
  if (d.images.empty()) throw Error(ErrorKind::EmptyDataset, "dataset at " + dir.string() + " has no images");
  return d;
}

}  // namespace petal
