#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "petal/error.hpp"
#include "petal/link.hpp"
#include "petal/rng.hpp"
#include "petal/stats.hpp"
#include "petal/turbulence.hpp"

using namespace petal;

namespace {
const double kK = 2.0 * std::numbers::pi / 1550e-9;
const GridSpec kPaper = make_grid(128, 4e-4);
}  // namespace

TEST_CASE("counter rng") {
  CounterRng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    REQUIRE(x == b.next_u64());
    REQUIRE(x != c.next_u64());
  }
  CounterRng u(1);
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CounterRng r(2);
  for (int i = 0; i < 1000; ++i) REQUIRE(r.below(7) < 7);

  // Moments of the normal transform.
  CounterRng n(3);
  double s = 0, ss = 0;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double v = n.normal();
    s += v;
    ss += v * v;
  }
  CHECK(std::abs(s / count) < 4.0 / std::sqrt(count));
  CHECK(ss / count == doctest::Approx(1.0).epsilon(0.01));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}

TEST_CASE("fried parameter") {
  const double r0 = fried_parameter(kK, 1e-11, 25.0);
  CHECK(r0 == doctest::Approx(1.14e-2).epsilon(0.005));
  CHECK(r0 == doctest::Approx(std::pow(0.423 * kK * kK * 1e-11 * 25.0, -0.6)).epsilon(1e-12));
  CHECK(fried_parameter(kK, 9e-11, 25.0) == doctest::Approx(3.04e-3).epsilon(0.005));
  CHECK(fried_parameter(kK, 3e-11, 25.0) == doctest::Approx(std::pow(3.0, -0.6) * r0).epsilon(1e-12));
  for (double bad : {0.0, -1e-11}) {
    try {
      fried_parameter(kK, bad, 25.0);
      FAIL("expected InvalidTurbulence");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidTurbulence);
    }
  }
  CHECK_THROWS_AS(make_turbulence(kK, 1e-11, 25.0, 1e-3, 25.0), Error);
}

TEST_CASE("kappa grid") {
  const KappaGrid kg = kappa_grid(kPaper);
  CHECK(kg.magnitude[0] == 0.0);
  CHECK(kg.dkappa == doctest::Approx(122.718).epsilon(1e-4));
  double max_axis = 0.0, max_mag = 0.0;
  for (double a : kg.axis) max_axis = std::max(max_axis, std::abs(a));
  for (double m : kg.magnitude) max_mag = std::max(max_mag, m);
  CHECK(max_axis == doctest::Approx(std::numbers::pi / kPaper.dx));
  CHECK(max_mag == doctest::Approx(std::sqrt(2.0) * std::numbers::pi / kPaper.dx));
  CHECK(max_mag == doctest::Approx(1.11e4).epsilon(0.001));
}

TEST_CASE("von Karman spectrum") {
  const TurbulenceParams p = make_turbulence(kK, 1e-11, 1e-3, 25.0, 25.0);
  CHECK(p.kappa0 == doctest::Approx(2 * std::numbers::pi / 25.0));
  CHECK(p.kappa_m == doctest::Approx(5920.0));
  // κ-density convention: coefficient 0.023·(2π)^{5/3} in place of 0.023.
  const double at0 = kVonKarmanCoefficient * std::pow(p.r0, -5.0 / 3.0) * std::pow(p.kappa0, -11.0 / 3.0);
  CHECK(von_karman_value(0.0, p) == doctest::Approx(at0).epsilon(1e-12));
  CHECK(kVonKarmanCoefficient == doctest::Approx(0.023 * std::pow(2 * std::numbers::pi, 5.0 / 3.0)));
  const double km = p.kappa_m;
  const double no_gauss = kVonKarmanCoefficient * std::pow(p.r0, -5.0 / 3.0) * std::pow(km * km + p.kappa0 * p.kappa0, -11.0 / 6.0);
  CHECK(von_karman_value(km, p) / no_gauss == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  double prev = von_karman_value(0.0, p);
  for (double k = 1.0; k < 2e4; k *= 1.3) {
    const double v = von_karman_value(k, p);
    REQUIRE(v > 0.0);
    REQUIRE(v <= prev);
    prev = v;
  }
  // Linear in cn2.
  const TurbulenceParams p3 = make_turbulence(kK, 3e-11, 1e-3, 25.0, 25.0);
  CHECK(von_karman_value(500.0, p3) == doctest::Approx(3.0 * von_karman_value(500.0, p)).epsilon(1e-12));
}

TEST_CASE("seed statistics") {
  const ScreenSeed a = draw_seed(42, kPaper), b = draw_seed(42, kPaper);
  CHECK(a.values == b.values);
  cd mean = 0.0;
  double power = 0.0, re2 = 0.0;
  for (const cd& c : a.values) {
    mean += c;
    power += std::norm(c);
    re2 += c.real() * c.real();
  }
  const double n = static_cast<double>(a.values.size());
  CHECK(std::abs(mean / n) < 3.0 / std::sqrt(n));
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("screen synthesis is linear") {
  const Link link(default_link_config());
  const SpectrumField spec = link.spectrum(1e-11);
  ScreenSeed zero = draw_seed(1, kPaper);
  for (auto& v : zero.values) v = 0.0;
  for (double v : synthesize_screen(zero, spec).phase.values) REQUIRE(v == 0.0);

  const ScreenSeed s = draw_seed(2, kPaper);
  ScreenSeed s3 = s;
  for (auto& v : s3.values) v *= 3.0;
  const auto a = synthesize_screen(s, spec).phase.values;
  const auto b = synthesize_screen(s3, spec).phase.values;
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(b[i] == doctest::Approx(3.0 * a[i]).epsilon(1e-12));

  CHECK(synthesize_screen(s, spec).phase.values == a);  // bit-for-bit

  ScreenSeed wrong = draw_seed(1, make_grid(64, 8e-4));
  CHECK_THROWS_AS(synthesize_screen(wrong, spec), Error);
}

TEST_CASE("structure function") {
  const Link link(default_link_config());
  const SpectrumField spec = link.spectrum(1e-11);
  std::vector<PhaseScreen> screens;
  for (int i = 0; i < 60; ++i) screens.push_back(synthesize_screen(draw_seed(1000 + i, kPaper), spec));
  CHECK(structure_function_est(screens, 0.0) == 0.0);
  CHECK(oracle_structure_function(spec, 0.0) == 0.0);
  for (int m : {4, 8, 16}) {
    const double r = m * kPaper.dx;
    CHECK(structure_function_est(screens, r) == doctest::Approx(oracle_structure_function(spec, r)).epsilon(0.15));
  }
  // D scales linearly with cn2 through the spectrum.
  const SpectrumField spec2 = link.spectrum(2e-11);
  CHECK(oracle_structure_function(spec2, 8 * kPaper.dx) ==
        doctest::Approx(2.0 * oracle_structure_function(spec, 8 * kPaper.dx)).epsilon(1e-12));

  // Identical screens: ensemble estimate equals the single-screen spatial average.
  const std::vector<PhaseScreen> twin{screens[0], screens[0]};
  const auto& ph = screens[0].phase;
  const int n = kPaper.n;
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dxv = ph.at((x + 4) % n, y) - ph.at(x, y);
      const double dyv = ph.at(x, (y + 4) % n) - ph.at(x, y);
      acc += dxv * dxv + dyv * dyv;
    }
  }
  CHECK(structure_function_est(twin, 4 * kPaper.dx) == doctest::Approx(acc / (2.0 * n * n)).epsilon(1e-12));

  try {
    structure_function_est(std::span(screens.data(), 1), 4 * kPaper.dx);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientEnsemble);
  }
}

TEST_CASE("oracle with one spectral sample") {
  SpectrumField s;
  s.grid = make_grid(16, 1e-3);
  s.dkappa = 2.0 * std::numbers::pi / s.grid.l;
  s.values.assign(s.grid.size(), 0.0);
  s.values[3] = 2.5;  // κx = 3Δκ, κy = 0
  const double r = 2e-3;
  const double expect = 2.0 * 2.5 * (1.0 - std::cos(3.0 * s.dkappa * r)) * s.dkappa * s.dkappa;
  CHECK(oracle_structure_function(s, r) == doctest::Approx(expect).epsilon(1e-12));
}
