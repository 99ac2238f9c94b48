#include "petal/cnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "petal/error.hpp"
#include "petal/rng.hpp"
#include "petal/simd/kernels.hpp"

namespace petal {
namespace {

constexpr int kPad = kConvSize / 2;

void conv_forward(const CnnModel& m, std::span<const double> in, std::span<double> out) {
  const int h = m.arch.height, w = m.arch.width;
  for (int f = 0; f < m.arch.filters; ++f) {
    const double* k = &m.conv_w[static_cast<std::size_t>(f) * kConvSize * kConvSize];
    for (int y = 0; y < h; ++y) {
      double* row = &out[(static_cast<std::size_t>(f) * h + y) * w];
      std::fill(row, row + w, m.conv_b[f]);
      for (int dy = 0; dy < kConvSize; ++dy) {
        const int sy = y + dy - kPad;
        if (sy < 0 || sy >= h) continue;
        const double* src = &in[static_cast<std::size_t>(sy) * w];
        for (int dx = 0; dx < kConvSize; ++dx) {
          const int s = dx - kPad;
          const int x0 = std::max(0, -s), x1 = std::min(w, w - s);
          simd::active().axpy(k[dy * kConvSize + dx], src + x0 + s, row + x0, x1 - x0);
        }
      }
      for (int x = 0; x < w; ++x) row[x] = std::max(row[x], 0.0);
    }
  }
}

void pool_forward(const CnnArch& a, std::span<const double> conv, std::span<double> pooled,
                  std::span<int> index) {
  const int h = a.height, w = a.width, ph = h / 2, pw = w / 2;
  for (int f = 0; f < a.filters; ++f) {
    for (int py = 0; py < ph; ++py) {
      for (int px = 0; px < pw; ++px) {
        int best = -1;
        double best_v = 0.0;
        for (int q = 0; q < 4; ++q) {
          const int y = 2 * py + q / 2, x = 2 * px + q % 2;
          const int idx = (f * h + y) * w + x;
          if (best < 0 || conv[idx] > best_v) {
            best = idx;
            best_v = conv[idx];
          }
        }
        const int o = (f * ph + py) * pw + px;
        pooled[o] = best_v;
        index[o] = best;
      }
    }
  }
}

void zero_like(const CnnModel& m, CnnModel& g) {
  g.arch = m.arch;
  g.class_cn2 = m.class_cn2;
  g.conv_w.assign(m.conv_w.size(), 0.0);
  g.conv_b.assign(m.conv_b.size(), 0.0);
  g.fc1_w.assign(m.fc1_w.size(), 0.0);
  g.fc1_b.assign(m.fc1_b.size(), 0.0);
  g.fc2_w.assign(m.fc2_w.size(), 0.0);
  g.fc2_b.assign(m.fc2_b.size(), 0.0);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw Error(ErrorKind::CorruptFile, "model file truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[8] = {'P', 'E', 'T', 'A', 'L', 'C', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

CnnModel CnnModel::initialized(const CnnArch& arch, std::vector<double> class_cn2, std::uint64_t seed) {
  if (arch.height < 2 || arch.width < 2 || arch.height % 2 || arch.width % 2 || arch.filters < 1 ||
      arch.hidden < 1 || arch.classes < 2) {
    throw Error(ErrorKind::InvalidConfig, "invalid CNN architecture");
  }
  CnnModel m;
  m.arch = arch;
  m.class_cn2 = std::move(class_cn2);
  if (static_cast<int>(m.class_cn2.size()) != arch.classes) {
    throw Error(ErrorKind::InvalidConfig, "class strength list does not match class count");
  }
  CounterRng rng(seed);
  auto fill = [&](std::vector<double>& v, std::size_t n, double stddev) {
    v.resize(n);
    for (auto& x : v) x = rng.normal() * stddev;
  };
  const int taps = kConvSize * kConvSize;
  fill(m.conv_w, static_cast<std::size_t>(arch.filters) * taps, std::sqrt(2.0 / taps));
  m.conv_b.assign(arch.filters, 0.0);
  const std::size_t d = arch.pooled_size();
  fill(m.fc1_w, static_cast<std::size_t>(arch.hidden) * d, std::sqrt(2.0 / static_cast<double>(d)));
  m.fc1_b.assign(arch.hidden, 0.0);
  fill(m.fc2_w, static_cast<std::size_t>(arch.classes) * arch.hidden, std::sqrt(1.0 / arch.hidden));
  m.fc2_b.assign(arch.classes, 0.0);
  return m;
}

std::size_t CnnModel::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](const std::vector<double>& b) { n += b.size(); });
  return n;
}

std::vector<double> image_to_input(const Image8& img) {
  std::vector<double> v(img.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = img.pixels[i] / 255.0;
  return v;
}

std::span<const double> forward(const CnnModel& m, std::span<const double> input, CnnWorkspace& ws) {
  const CnnArch& a = m.arch;
  if (input.size() != static_cast<std::size_t>(a.height) * a.width) {
    throw Error(ErrorKind::ShapeMismatch, "CNN input size does not match architecture");
  }
  const std::size_t d = a.pooled_size();
  ws.conv.resize(static_cast<std::size_t>(a.filters) * a.height * a.width);
  ws.pooled.resize(d);
  ws.pool_index.resize(d);
  ws.hidden.resize(a.hidden);
  ws.probs.resize(a.classes);

  conv_forward(m, input, ws.conv);
  pool_forward(a, ws.conv, ws.pooled, ws.pool_index);
  for (int j = 0; j < a.hidden; ++j) {
    const double z = m.fc1_b[j] + simd::dot({&m.fc1_w[j * d], d}, ws.pooled);
    ws.hidden[j] = std::max(z, 0.0);
  }
  double zmax = -INFINITY;
  for (int c = 0; c < a.classes; ++c) {
    ws.probs[c] = m.fc2_b[c] + simd::dot({&m.fc2_w[static_cast<std::size_t>(c) * a.hidden], static_cast<std::size_t>(a.hidden)}, ws.hidden);
    zmax = std::max(zmax, ws.probs[c]);
  }
  double sum = 0.0;
  for (auto& p : ws.probs) {
    p = std::exp(p - zmax);
    sum += p;
  }
  for (auto& p : ws.probs) p /= sum;
  return ws.probs;
}

double backward(const CnnModel& m, std::span<const double> input, int label, CnnWorkspace& ws, CnnModel& g) {
  forward(m, input, ws);
  const CnnArch& a = m.arch;
  const std::size_t d = a.pooled_size();
  const std::size_t hid = a.hidden;
  const double loss = -std::log(std::max(ws.probs[label], 1e-300));

  std::vector<double> dz(ws.probs.begin(), ws.probs.end());
  dz[label] -= 1.0;
  std::vector<double> dh(hid, 0.0);
  for (int c = 0; c < a.classes; ++c) {
    simd::axpy(dz[c], ws.hidden, {&g.fc2_w[c * hid], hid});
    g.fc2_b[c] += dz[c];
    simd::axpy(dz[c], {&m.fc2_w[c * hid], hid}, dh);
  }
  std::vector<double> dpooled(d, 0.0);
  for (std::size_t j = 0; j < hid; ++j) {
    if (ws.hidden[j] <= 0.0 || dh[j] == 0.0) continue;
    simd::axpy(dh[j], ws.pooled, {&g.fc1_w[j * d], d});
    g.fc1_b[j] += dh[j];
    simd::axpy(dh[j], {&m.fc1_w[j * d], d}, dpooled);
  }

  // Route pooled gradients back to the selected conv outputs (ReLU already applied there).
  const int h = a.height, w = a.width;
  std::vector<double> dconv(ws.conv.size(), 0.0);
  for (std::size_t o = 0; o < d; ++o) {
    const int idx = ws.pool_index[o];
    if (ws.conv[idx] > 0.0) dconv[idx] = dpooled[o];
  }
  for (int f = 0; f < a.filters; ++f) {
    double* gk = &g.conv_w[static_cast<std::size_t>(f) * kConvSize * kConvSize];
    double bsum = 0.0;
    for (int y = 0; y < h; ++y) {
      const double* drow = &dconv[(static_cast<std::size_t>(f) * h + y) * w];
      bool any = false;
      for (int x = 0; x < w; ++x) {
        if (drow[x] != 0.0) {
          any = true;
          bsum += drow[x];
        }
      }
      if (!any) continue;
      for (int dy = 0; dy < kConvSize; ++dy) {
        const int sy = y + dy - kPad;
        if (sy < 0 || sy >= h) continue;
        const double* src = &input[static_cast<std::size_t>(sy) * w];
        for (int dx = 0; dx < kConvSize; ++dx) {
          const int s = dx - kPad;
          const int x0 = std::max(0, -s), x1 = std::min(w, w - s);
          gk[dy * kConvSize + dx] += simd::active().dot(drow + x0, src + x0 + s, x1 - x0);
        }
      }
    }
    g.conv_b[f] += bsum;
  }
  return loss;
}

TrainResult train(const TrainConfig& cfg, const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "training set is empty");
  const std::set<int> present(data.labels.begin(), data.labels.end());
  if (present.size() < 2) throw Error(ErrorKind::DegenerateDataset, "training needs at least two classes");
  if (cfg.epochs < 1 || cfg.batch < 1 || !(cfg.step > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "epochs, batch and step must be positive");
  }

  CnnArch arch{data.images.front().height, data.images.front().width, cfg.filters, cfg.hidden,
               static_cast<int>(data.classes.size())};
  TrainResult result{CnnModel::initialized(arch, data.classes, derive_seed(cfg.rng_seed, 0x1417)), {}};
  CnnModel& model = result.model;

  std::vector<std::vector<double>> inputs;
  inputs.reserve(data.size());
  for (const auto& img : data.images) inputs.push_back(image_to_input(img));

  std::vector<std::size_t> order(data.size());
  CnnWorkspace ws;
  CnnModel grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle(derive_seed(cfg.rng_seed, 0x5eed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      // Gradients accumulate in batch order, so the sum is schedule independent.
      std::sort(order.begin() + start, order.begin() + stop);
      zero_like(model, grad);
      for (std::size_t b = start; b < stop; ++b) {
        loss_sum += backward(model, inputs[order[b]], data.labels[order[b]], ws, grad);
      }
      const double scale = -cfg.step / static_cast<double>(stop - start);
      auto gblocks = std::vector<const std::vector<double>*>{};
      grad.for_each_block([&](const std::vector<double>& v) { gblocks.push_back(&v); });
      std::size_t bi = 0;
      model.for_each_block([&](std::vector<double>& v) { simd::axpy(scale, *gblocks[bi++], v); });
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));
  }
  return result;
}

Prediction predict(const CnnModel& model, const Image8& img) {
  if (img.height != model.arch.height || img.width != model.arch.width) {
    throw Error(ErrorKind::ShapeMismatch, "image size does not match the model input");
  }
  CnnWorkspace ws;
  const auto input = image_to_input(img);
  const auto probs = forward(model, input, ws);
  int best = 0;
  for (int c = 1; c < static_cast<int>(probs.size()); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return {best, model.class_cn2[best]};
}

AccuracyReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted, int classes) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw Error(ErrorKind::EmptyDataset, "evaluation needs matching, non-empty label lists");
  }
  AccuracyReport r;
  r.confusion.assign(classes, std::vector<int>(classes, 0));
  std::size_t hit = 0, near = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    r.confusion[truth[i]][predicted[i]] += 1;
    hit += truth[i] == predicted[i];
    near += std::abs(truth[i] - predicted[i]) <= 1;
  }
  r.top1 = static_cast<double>(hit) / static_cast<double>(truth.size());
  r.within_one = static_cast<double>(near) / static_cast<double>(truth.size());
  return r;
}

AccuracyReport evaluate(const CnnModel& model, const Dataset& data) {
  std::vector<int> predicted;
  predicted.reserve(data.size());
  for (const auto& img : data.images) predicted.push_back(predict(model, img).label);
  return evaluate_predictions(data.labels, predicted, model.arch.classes);
}

void save_model(const CnnModel& m, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  for (int v : {m.arch.height, m.arch.width, m.arch.filters, m.arch.hidden, m.arch.classes}) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  }
  for (double c : m.class_cn2) put_f64(out, c);
  m.for_each_block([&](const std::vector<double>& b) {
    put_le<std::uint64_t>(out, b.size());
    for (double x : b) put_f64(out, x);
  });
  put_le<std::uint64_t>(out, fnv1a(out));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingInput, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

CnnModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingInput, "cannot read " + path.string());
  const std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (s.size() < sizeof(kMagic) + 8 || std::memcmp(s.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::CorruptFile, "not a model file: " + path.string());
  }
  const std::string body = s.substr(0, s.size() - 8);
  Reader tail(s);
  tail.bytes(s.size() - 8);
  if (tail.get<std::uint64_t>() != fnv1a(body)) throw Error(ErrorKind::CorruptFile, "model checksum mismatch");

  Reader r(body);
  r.bytes(sizeof(kMagic));
  if (r.get<std::uint32_t>() != kVersion) throw Error(ErrorKind::CorruptFile, "unsupported model version");
  CnnArch arch;
  arch.height = static_cast<int>(r.get<std::uint32_t>());
  arch.width = static_cast<int>(r.get<std::uint32_t>());
  arch.filters = static_cast<int>(r.get<std::uint32_t>());
  arch.hidden = static_cast<int>(r.get<std::uint32_t>());
  arch.classes = static_cast<int>(r.get<std::uint32_t>());
  std::vector<double> classes(arch.classes);
  for (auto& c : classes) c = r.f64();
  CnnModel m = CnnModel::initialized(arch, classes, 0);
  m.for_each_block([&](std::vector<double>& b) {
    if (r.get<std::uint64_t>() != b.size()) throw Error(ErrorKind::CorruptFile, "weight block size mismatch");
    for (auto& x : b) x = r.f64();
  });
  return m;
}

}  // namespace petal
