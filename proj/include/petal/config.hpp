#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "petal/gdo.hpp"
#include "petal/link.hpp"

namespace petal {

enum class Profile { Paper, Desk };

Profile parse_profile(const std::string& s);

/// Every tunable of the simulator. Serialized as flat `key = value` text, one key per line;
/// `#` starts a comment; lists are comma separated.
struct Config {
  std::string profile = "paper";

  // link geometry
  int n = link_defaults::kGridN;
  double dx = link_defaults::kDx;
  double lambda = link_defaults::kLambda;
  double w0 = link_defaults::kW0;
  double z_slm_tx = link_defaults::kZSlmTx;
  double z_tx_rx = link_defaults::kZTxRx;
  double l_min = link_defaults::kLMin;
  double l_max = link_defaults::kLMax;
  std::string method_slm_tx = "tf";
  std::string method_tx_rx = "tf";
  double petal_threshold = 0.2;

  // classifier
  int label_stride = 1;
  int per_label = 200;
  int pool_per_label = 600;
  int test_per_label = 20;
  int filters = 8;
  int hidden = 100;
  int epochs = 30;
  int batch = 32;
  double step = 0.01;

  // corrector
  double eta = 1.0;
  int max_iter = 700;
  int record_stride = 10;
  double eps_angle = 1e-12;

  // experiments
  int ell = 5;
  int strength_ell = 8;
  int trials = 10;
  int channels = 100;
  double cn2_fixed = 3e-11;
  double cn2_test_min = 0.5e-11;
  double cn2_test_max = 9e-11;
  std::vector<double> eta_points{0.1, 0.25, 0.5, 1, 2.5, 5, 10, 25, 275, 450, 600};
  std::vector<double> train_sizes{0, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500, 550};
  std::vector<double> ell_points{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> strength_points{};  // empty: 10 values evenly spaced in [0.5, 8.5]e-11

  std::uint64_t seed = 20190101;
  int threads = 1;

  static Config for_profile(Profile p);

  /// Applies one `key = value` assignment. Throws InvalidConfig for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::filesystem::path& path);
  std::string to_text() const;

  LinkConfig link_config() const;
  GdoConfig gdo_config() const;
  TrainConfig train_config() const;
  std::vector<double> classes() const;
  std::vector<double> strengths() const;
};

}  // namespace petal
