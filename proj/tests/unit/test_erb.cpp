// tests/unit/test_erb.cpp

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers/test_signals.hpp"
#include "ksnet/dsp/erb.hpp"

using namespace ksnet;
using namespace ksnet_tests;

TEST_CASE("filterbank rows are normalized and supported") {
  StftConfig cfg;
  ErbFilterbank fb = MakeErbFilterbank(64, cfg);
  REQUIRE(fb.weights.dim(0) == 64);
  REQUIRE(fb.weights.dim(1) == 481);
  for (int b = 0; b < 64; ++b) {
    double sum = 0.0, mx = 0.0;
    for (int64_t f = 0; f < 481; ++f) {
      const double w = fb.weights.at(b, f);
      CHECK(w >= 0.0);
      sum += w;
      mx = std::max(mx, w);
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
    CHECK(mx > 0.0);
  }
  // Every linear bin is covered by at least one band.
  for (int64_t f = 0; f < 481; ++f) {
    double col = 0.0;
    for (int b = 0; b < 64; ++b) col += fb.weights.at(b, f);
    CHECK(col > 0.0);
  }
}

TEST_CASE("centers increase and are denser at low frequency") {
  ErbFilterbank fb = MakeErbFilterbank(64, StftConfig{});
  for (size_t i = 1; i < fb.centers_hz.size(); ++i) {
    CHECK(fb.centers_hz[i] > fb.centers_hz[i - 1]);
  }
  int below_1k = 0, above_8k = 0;
  for (double c : fb.centers_hz) {
    if (c < 1000.0) ++below_1k;
    if (c > 8000.0) ++above_8k;
  }
  // 1 kHz spans ~1/3 of the band count on the ERB axis while the 8..24 kHz
  // range spans less; density must reflect that.
  CHECK(below_1k * (24000.0 - 8000.0) > above_8k * 1000.0);
}

TEST_CASE("flat magnitude spectrum maps to a flat band vector") {
  ErbFilterbank fb = MakeErbFilterbank(64, StftConfig{});
  Tensor<double> mag = Tensor<double>::Full({3, 481}, 2.5);
  Tensor<double> bands = ErbApply(fb, mag);
  // Oracle: rows sum to one, so the product with a constant vector is that
  // constant exactly.
  for (int64_t i = 0; i < bands.size(); ++i) {
    CHECK(std::abs(bands[i] - 2.5) < 1e-9);
  }
}

TEST_CASE("filterbank application is linear") {
  Rng rng(31);
  ErbFilterbank fb = MakeErbFilterbank(32, StftConfig{});
  Tensor<double> a = Tensor<double>::RandUniform({2, 481}, rng, 0.0, 1.0);
  Tensor<double> b = Tensor<double>::RandUniform({2, 481}, rng, 0.0, 1.0);
  Tensor<double> sum(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];

  Tensor<double> ea = ErbApply(fb, a), eb = ErbApply(fb, b), es = ErbApply(fb, sum);
  for (int64_t i = 0; i < es.size(); ++i) {
    CHECK(std::abs(es[i] - (ea[i] + eb[i])) < 1e-12);
  }
}

TEST_CASE("expansion of unity gains is unity") {
  ErbFilterbank fb = MakeErbFilterbank(64, StftConfig{});
  Tensor<double> e = ErbExpansion(fb);
  for (int64_t f = 0; f < e.dim(0); ++f) {
    double row = 0.0;
    for (int64_t b = 0; b < e.dim(1); ++b) row += e.at(f, b);
    CHECK(std::abs(row - 1.0) < 1e-9);
  }
}

TEST_CASE("band count bounds are enforced") {
  CHECK_THROWS_AS(MakeErbFilterbank(1, StftConfig{}), ConfigError);
  CHECK_THROWS_AS(MakeErbFilterbank(481, StftConfig{}), ConfigError);
}

TEST_CASE("power-law compression") {
  Tensor<double> x({4});
  x[0] = 0.0;
  x[1] = 1.0;
  x[2] = 2.0;
  x[3] = 0.25;

  SECTION("exponent 1 is the identity") {
    Tensor<double> y = Compress(x, 1.0);
    for (int64_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
  }

  SECTION("fixed points and closed-form value") {
    Tensor<double> y = Compress(x, 0.3);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 1.0);
    CHECK(std::abs(y[2] - std::pow(2.0, 0.3)) < 1e-12);
    CHECK(std::abs(y[2] - 1.2311) < 1e-4);
  }

  SECTION("decompress inverts compress") {
    Tensor<double> y = Decompress(Compress(x, 0.3), 0.3);
    for (int64_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-12);
  }

  SECTION("negative input is rejected") {
    Tensor<double> bad({1});
    bad[0] = -0.5;
    CHECK_THROWS_AS(Compress(bad, 0.3), ValidationError);
  }
}
