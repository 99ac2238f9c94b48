#include <doctest.h>

#include <cmath>
#include <numbers>

#include "petal/error.hpp"
#include "petal/io.hpp"
#include "petal/optics.hpp"
#include "petal/link.hpp"
#include "petal/rng.hpp"

using namespace petal;

namespace {
const GridSpec kPaper = make_grid(128, 4e-4);
const OpticalConfig kOptics = make_optics(1550e-9, 7e-3, 1.0, 25.0);

template <class Fn>
void expect_error(ErrorKind kind, Fn&& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}
}  // namespace

TEST_CASE("make_grid") {
  CHECK(kPaper.l == doctest::Approx(0.0512).epsilon(1e-15));
  CHECK(make_grid(8, 1.0).l == 8.0);
  expect_error(ErrorKind::InvalidGrid, [] { make_grid(7, 4e-4); });
  expect_error(ErrorKind::InvalidGrid, [] { make_grid(6, 4e-4); });
  expect_error(ErrorKind::InvalidGrid, [] { make_grid(8, 0.0); });
  CHECK(kPaper.coord(64) == 0.0);
  CHECK(kPaper.coord(0) == doctest::Approx(-0.0256));
}

TEST_CASE("optical config") {
  CHECK(kOptics.k * kOptics.lambda == doctest::Approx(2 * std::numbers::pi).epsilon(1e-15));
  expect_error(ErrorKind::InvalidOptics, [] { make_optics(-1.0, 7e-3, 1.0, 25.0); });
}

TEST_CASE("gaussian beam") {
  const ComplexField g = gaussian_beam(kPaper, kOptics);
  CHECK(g.at(64, 64) == cd(1.0, 0.0));
  // Sample 64 + 17.5 would be exactly w0; check the 1/e law at an exact grid radius instead.
  const double r = kPaper.coord(64 + 17);
  CHECK(g.at(64 + 17, 64).real() == doctest::Approx(std::exp(-r * r / (kOptics.w0 * kOptics.w0))));
  double p = 0.0;
  for (const cd& v : g.values) p += std::norm(v);
  p *= kPaper.dx * kPaper.dx;
  const double oracle = std::numbers::pi * kOptics.w0 * kOptics.w0 / 2.0;
  CHECK(std::abs(p / oracle - 1.0) < 1e-3);
}

TEST_CASE("phase mask") {
  const ModeMask m0 = superposition_phase_mask(kPaper, 0);
  for (double v : m0.phase.values) REQUIRE(v == 0.0);

  const ModeMask m1 = superposition_phase_mask(kPaper, 1);
  CHECK(m1.phase.at(10, 64) == doctest::Approx(std::numbers::pi));  // x < 0
  CHECK(m1.phase.at(120, 64) == 0.0);

  for (int ell = 1; ell <= 10; ++ell) {
    const ModeMask m = superposition_phase_mask(kPaper, ell);
    int mismatched = 0, checked = 0;
    for (int y = 0; y < kPaper.n; ++y) {
      for (int x = 0; x < kPaper.n; ++x) {
        const double v = m.phase.at(x, y);
        REQUIRE((v == 0.0 || v == doctest::Approx(std::numbers::pi)));
        // Rotation by π/ℓ flips the sector sign: compare against the analytic rotated mask.
        const double phi = std::atan2(kPaper.coord(y), kPaper.coord(x));
        const double c = std::cos(ell * phi);
        if (std::abs(c) < 0.05 || (x == 64 && y == 64)) continue;  // boundary pixels
        const double rotated = std::cos(ell * (phi + std::numbers::pi / ell)) >= 0 ? 0.0 : std::numbers::pi;
        ++checked;
        if (std::abs(rotated - (std::numbers::pi - v)) > 1e-12) ++mismatched;
      }
    }
    CHECK(checked > 0);
    CHECK(mismatched == 0);
  }
}

TEST_CASE("intensity and phase") {
  ComplexField u(kPaper, cd(1.0, 0.0));
  for (double v : intensity(u).values) REQUIRE(v == 1.0);

  CounterRng rng(4);
  ComplexField r(kPaper);
  RealField ph(kPaper);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    r.values[i] = rng.complex_normal();
    ph.values[i] = 10.0 * rng.normal();
  }
  const RealField a = intensity(r);
  const RealField b = intensity(apply_phase(r, ph));
  for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-12));

  // |G|² = exp(-2r²/w0²): a Gaussian of waist w0/√2.
  const RealField gi = intensity(gaussian_beam(kPaper, kOptics));
  const double x = kPaper.coord(80);
  const double w = kOptics.w0 / std::sqrt(2.0);
  CHECK(gi.at(80, 64) == doctest::Approx(std::exp(-x * x / (w * w))).epsilon(1e-12));
}

TEST_CASE("to_image8") {
  const GridSpec g = make_grid(8, 1.0);
  RealField f(g, 3.0);
  for (auto p : to_image8(f).pixels) REQUIRE(p == 255);

  f.values.assign(g.size(), 0.5);
  f.values[0] = 2.0;
  f.values[1] = 1.0;
  const Image8 img = to_image8(f);
  CHECK(img.pixels[0] == 255);
  CHECK(img.pixels[1] == 128);  // 127.5 rounds half up
  CHECK(img.pixels[2] == 64);   // 63.75

  RealField scaled = f;
  for (double& v : scaled.values) v *= 17.25;
  CHECK(to_image8(scaled) == img);

  expect_error(ErrorKind::DegenerateField, [&] { to_image8(RealField(g)); });
}

TEST_CASE("mse_index") {
  const Image8 white{8, 8, std::vector<std::uint8_t>(64, 255)};
  const Image8 black{8, 8, std::vector<std::uint8_t>(64, 0)};
  CHECK(mse_index(white, white) == 0.0);
  CHECK(mse_index(white, black) == doctest::Approx(65.025));
  CHECK(raw_mse(white, black) == doctest::Approx(65025.0));
  expect_error(ErrorKind::ShapeMismatch, [&] { mse_index(white, Image8{4, 4, std::vector<std::uint8_t>(16, 0)}); });

  CounterRng rng(9);
  Image8 a = black, b = black, b2 = black;
  for (int i = 0; i < 64; ++i) {
    const int d = static_cast<int>(rng.below(41)) - 20;
    a.pixels[i] = static_cast<std::uint8_t>(100 + rng.below(50));
    b.pixels[i] = static_cast<std::uint8_t>(a.pixels[i] + d);
    b2.pixels[i] = static_cast<std::uint8_t>(a.pixels[i] + 2 * d);
  }
  CHECK(mse_index(a, b) == mse_index(b, a));
  CHECK(mse_index(a, b) > 0.0);
  // Doubling the difference image quadruples the metric.
  CHECK(mse_index(a, b2) == doctest::Approx(4.0 * mse_index(a, b)));
}

TEST_CASE("petal count") {
  const Link link(default_link_config());
  const RealField gauss = link.receiver_intensity(superposition_phase_mask(link.grid(), 0).phase, nullptr);
  CHECK(petal_count(gauss) == 0);
  for (int ell : {1, 5}) {
    const RealField i = link.receiver_intensity(superposition_phase_mask(link.grid(), ell).phase, nullptr);
    CHECK(petal_count(i) == 2 * ell);
  }
  expect_error(ErrorKind::DegenerateField, [&] { petal_count(RealField(link.grid())); });
}

TEST_CASE("PGM and raw field round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "petal_test_io";
  std::filesystem::create_directories(dir);
  Image8 img{5, 3, {}};
  for (int i = 0; i < 15; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 17));
  write_pgm(img, dir / "a.pgm");
  CHECK(read_pgm(dir / "a.pgm") == img);

  RealField f(make_grid(8, 2e-3));
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = std::sin(0.3 * i) * 1e-3;
  write_real_field(f, "phase_screen", dir / "f.f64");
  std::string kind;
  const RealField back = read_real_field(dir / "f.f64", &kind);
  CHECK(kind == "phase_screen");
  CHECK(back.grid == f.grid);
  CHECK(back.values == f.values);

  expect_error(ErrorKind::MissingInput, [&] { read_pgm(dir / "missing.pgm"); });
  write_text(dir / "bad.pgm", "P2\n1 1\n255\n0");
  expect_error(ErrorKind::CorruptFile, [&] { read_pgm(dir / "bad.pgm"); });
  std::filesystem::remove_all(dir);
}
