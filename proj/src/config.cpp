#include "petal/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "petal/error.hpp"

namespace petal {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorKind::InvalidConfig, "bad value for " + key + ": '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_number<double>(key, item));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <class T>
Field number(T Config::*member) {
  return {[member](Config& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); },
          [member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(c.*member);
            else return std::to_string(c.*member);
          }};
}

Field text(std::string Config::*member) {
  return {[member](Config& c, const std::string&, const std::string& v) { c.*member = trim(v); },
          [member](const Config& c) { return c.*member; }};
}

Field list(std::vector<double> Config::*member) {
  return {[member](Config& c, const std::string& k, const std::string& v) { c.*member = parse_list(k, v); },
          [member](const Config& c) { return join(c.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f{
      {"profile", text(&Config::profile)},
      {"n", number(&Config::n)},
      {"dx", number(&Config::dx)},
      {"lambda", number(&Config::lambda)},
      {"w0", number(&Config::w0)},
      {"z_slm_tx", number(&Config::z_slm_tx)},
      {"z_tx_rx", number(&Config::z_tx_rx)},
      {"l_min", number(&Config::l_min)},
      {"l_max", number(&Config::l_max)},
      {"method_slm_tx", text(&Config::method_slm_tx)},
      {"method_tx_rx", text(&Config::method_tx_rx)},
      {"petal_threshold", number(&Config::petal_threshold)},
      {"label_stride", number(&Config::label_stride)},
      {"per_label", number(&Config::per_label)},
      {"pool_per_label", number(&Config::pool_per_label)},
      {"test_per_label", number(&Config::test_per_label)},
      {"filters", number(&Config::filters)},
      {"hidden", number(&Config::hidden)},
      {"epochs", number(&Config::epochs)},
      {"batch", number(&Config::batch)},
      {"step", number(&Config::step)},
      {"eta", number(&Config::eta)},
      {"max_iter", number(&Config::max_iter)},
      {"record_stride", number(&Config::record_stride)},
      {"eps_angle", number(&Config::eps_angle)},
      {"ell", number(&Config::ell)},
      {"strength_ell", number(&Config::strength_ell)},
      {"trials", number(&Config::trials)},
      {"channels", number(&Config::channels)},
      {"cn2_fixed", number(&Config::cn2_fixed)},
      {"cn2_test_min", number(&Config::cn2_test_min)},
      {"cn2_test_max", number(&Config::cn2_test_max)},
      {"eta_points", list(&Config::eta_points)},
      {"train_sizes", list(&Config::train_sizes)},
      {"ell_points", list(&Config::ell_points)},
      {"strength_points", list(&Config::strength_points)},
      {"seed", number(&Config::seed)},
      {"threads", number(&Config::threads)},
  };
  return f;
}

}  // namespace

Profile parse_profile(const std::string& s) {
  if (s == "paper") return Profile::Paper;
  if (s == "desk") return Profile::Desk;
  throw Error(ErrorKind::InvalidConfig, "unknown profile: " + s);
}

Config Config::for_profile(Profile p) {
  Config c;
  if (p == Profile::Desk) {
    // Same 51.2 mm window at half the sampling; 10 classes (every 4th strength).
    c.profile = "desk";
    c.n = 64;
    c.dx = 8e-4;
    c.label_stride = 4;
    c.per_label = 100;
    c.pool_per_label = 300;
    c.test_per_label = 20;
    c.max_iter = 300;
    c.trials = 20;
    c.channels = 20;
    c.train_sizes = {0, 25, 50, 100, 200, 300};
    c.ell_points = {0, 2, 4, 6, 8, 10};
    c.strength_points = {0.5e-11, 2.1e-11, 3.7e-11, 5.3e-11, 6.9e-11, 8.5e-11};
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(trim(key));
  if (it == fields().end()) throw Error(ErrorKind::InvalidConfig, "unknown config key: " + key);
  it->second.set(*this, trim(key), value);
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot read config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
  return out;
}

LinkConfig Config::link_config() const {
  LinkConfig lc;
  lc.grid = make_grid(n, dx);
  lc.optics = make_optics(lambda, w0, z_slm_tx, z_tx_rx);
  lc.l_min = l_min;
  lc.l_max = l_max;
  lc.slm_tx_method = parse_method(method_slm_tx);
  lc.tx_rx_method = parse_method(method_tx_rx);
  return lc;
}

GdoConfig Config::gdo_config() const {
  GdoConfig g;
  g.eta = eta;
  g.max_iter = max_iter;
  g.record_stride = record_stride;
  g.eps_angle = eps_angle;
  g.rng_seed = seed;
  return g;
}

TrainConfig Config::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch = batch;
  t.step = step;
  t.filters = filters;
  t.hidden = hidden;
  t.rng_seed = seed;
  return t;
}

std::vector<double> Config::classes() const { return label_subset(label_stride); }

std::vector<double> Config::strengths() const {
  std::vector<double> pts = strength_points;
  if (pts.empty()) {
    for (int i = 0; i < 10; ++i) pts.push_back((0.5 + i * 8.0 / 9.0) * 1e-11);
  }
  // Test strengths stay off the training grid: a coincident point moves up a quarter spacing.
  const auto grid = label_grid().values;
  for (auto& p : pts) {
    for (double g : grid) {
      if (std::abs(p - g) < 1e-3 * 0.2179e-11) {
        p += 0.25 * 0.2179e-11;
        break;
      }
    }
  }
  return pts;
}

}  // namespace petal
