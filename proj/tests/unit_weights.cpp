#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "quasim/rng.hpp"
#include "quasim/weights.hpp"

using namespace quasim;

namespace {
constexpr long kRes = 1L << 17;
}

TEST_CASE("generator function values and symmetries") {
  CHECK(eval_f(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_f(0.5) == 0.0);
  CHECK(eval_f(0.25) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    double x = rng.uniform();
    CHECK(eval_f(x) == doctest::Approx(eval_f(1.0 - x)).epsilon(1e-13));
    CHECK(eval_f(x + 3.0) == doctest::Approx(eval_f(x)).epsilon(1e-13));
    CHECK(eval_f(x) >= 0.0);
    CHECK(eval_f(x) <= 1.0);
  }
  CHECK_THROWS_AS(eval_f(std::nan("")), std::invalid_argument);
}

TEST_CASE("weight sequence storage and windowing") {
  WeightSequence w(1, {0.25, 0.5, 0.25});
  CHECK(w.half_width() == 1);
  CHECK(w.a(-1) == 0.25);
  CHECK(w.a(0) == 0.5);
  CHECK(w.a(1) == 0.25);
  CHECK(w.a(2) == 0.0);
  CHECK(w.a(-7) == 0.0);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-16));
  CHECK_THROWS_AS(WeightSequence(1, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(WeightSequence(-1, {}), std::invalid_argument);
  CHECK_THROWS_AS(WeightSequence(0, {std::nan("")}), std::invalid_argument);
}

TEST_CASE("quadrature coefficients match the high-precision oracle") {
  WeightSequence w = fourier_coefficients(5, kRes);
  // frozen independently computed reference values
  CHECK(w.a(0) == doctest::Approx(0.27734276622355483).epsilon(5e-9));
  CHECK(w.a(1) == doctest::Approx(0.20451968322046999).epsilon(5e-9));
  CHECK(w.a(2) == doctest::Approx(0.079542420122436507).epsilon(5e-9));
  CHECK(w.a(3) == doctest::Approx(0.019825781018796061).epsilon(5e-9));
  CHECK(w.a(5) == doctest::Approx(0.0088655585728936181).epsilon(5e-9));
  for (long n = 0; n <= 5; ++n) CHECK(w.a(n) == w.a(-n));
}

TEST_CASE("quadratic decay of the tail") {
  WeightSequence w = fourier_coefficients(64, kRes);
  const double limit = 0.20264236728467554;  // 2 / pi^2
  CHECK(64.0 * 64.0 * w.a(64) == doctest::Approx(0.202652389509).epsilon(5e-6));
  CHECK(std::abs(64.0 * 64.0 * w.a(64) - limit) < 0.2 * limit);
}

TEST_CASE("resolution guards") {
  CHECK_THROWS_AS(fourier_coefficients(-1, kRes), std::invalid_argument);
  CHECK_THROWS_AS(fourier_coefficients(2, 5000), std::invalid_argument);
  CHECK_THROWS_AS(fourier_coefficients(2, 2048), std::invalid_argument);
  CHECK_THROWS_AS(fourier_coefficients(2000, 4096), std::invalid_argument);
  // aliasing at the minimum legal resolution exceeds the agreement tolerance
  CHECK_THROWS_AS(fourier_coefficients(2, 4096), std::runtime_error);
}

TEST_CASE("normalization against frozen values") {
  WeightSequence raw = fourier_coefficients(2, kRes);
  CHECK(raw.sum() == doctest::Approx(0.8454669729093678).epsilon(1e-9));
  WeightSequence w = normalize(raw);
  CHECK(std::abs(w.sum() - 1.0) <= 1e-15);
  CHECK(w.a(0) == doctest::Approx(0.32803500918454606).epsilon(1e-9));
  CHECK(w.a(1) == doctest::Approx(0.24190144591537350).epsilon(1e-9));
  CHECK(w.a(2) == doctest::Approx(0.094081049492353472).epsilon(1e-9));
  CHECK(w.a(1) == w.a(-1));
  CHECK(w.a(2) == w.a(-2));
  CHECK_THROWS_AS(normalize(WeightSequence(0, {0.0})), std::invalid_argument);
}

TEST_CASE("one-sided geometric weights") {
  WeightSequence w = geometric_weights(8);
  CHECK(w.a(0) == 0.5);
  CHECK(w.a(1) == 0.25);
  CHECK(w.a(8) == std::ldexp(1.0, -9));
  CHECK(w.a(-1) == 0.0);
  CHECK(w.a(9) == 0.0);
  // exact in binary: mass 1 - 2^{-9}, deliberately unnormalized
  CHECK(w.sum() == 1.0 - std::ldexp(1.0, -9));
  CHECK_THROWS_AS(geometric_weights(-2), std::invalid_argument);
}

TEST_CASE("convolution operator is the expected Toeplitz band") {
  WeightSequence w(1, {0.25, 0.5, 0.25});
  RealMatrix m = convolution_operator(w, {-1, 1}, {-2, 2});
  REQUIRE(m.rows() == 5);
  REQUIRE(m.cols() == 3);
  // entry (row k, col j) = a(k - j)
  CHECK(m(0, 0) == 0.25);  // k=-2, j=-1
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 0) == 0.5);
  CHECK(m(2, 1) == 0.5);
  CHECK(m(2, 0) == 0.25);
  CHECK(m(4, 2) == 0.25);
  CHECK(m(4, 0) == 0.0);
  // convolving the delta at 0 reads off the kernel
  RealVec delta = RealVec::Zero(3);
  delta(1) = 1.0;
  RealVec out = m * delta;
  CHECK(out(1) == 0.25);
  CHECK(out(2) == 0.5);
  CHECK(out(3) == 0.25);
  CHECK_THROWS_AS(convolution_operator(w, {-1, 1}, {-1, 1}),
                  std::invalid_argument);
}

TEST_CASE("injectivity margins against frozen references") {
  // geometric weights: pure linear algebra, no quadrature in sight
  WeightSequence geom = geometric_weights(8);
  double margin = injectivity_margin(geom, 8, {0});
  CHECK(margin == doctest::Approx(0.000787329233866017).epsilon(1e-9));
  CHECK(injectivity_margin(geom, 8) > margin);

  // the margin really is a lower bound for the restricted convolution
  Rng rng(9);
  IndexWindow in{-8, 8}, out{-16, 16};
  RealMatrix full = convolution_operator(geom, in, out);
  for (int t = 0; t < 10; ++t) {
    RealVec x(in.size());
    for (long i = 0; i < x.size(); ++i) x(i) = rng.gaussian();
    RealVec y = full * x;
    y(16) = 0.0;  // drop the forbidden row 0
    CHECK(y.norm() >= margin * x.norm() - 1e-12);
  }
}

TEST_CASE("injectivity margin of the quadrature weights") {
  WeightSequence w = fourier_coefficients(64, kRes);
  double margin = injectivity_margin(w, 16);
  CHECK(margin == doctest::Approx(3.457416510483742e-05).epsilon(1e-4));
  CHECK(margin > 1e-6);
}
