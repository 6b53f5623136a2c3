// tests/unit/test_subband.cpp

#include <catch2/catch_amalgamated.hpp>

#include "helpers/test_signals.hpp"
#include "ksnet/dsp/subband.hpp"

using namespace ksnet;
using namespace ksnet_tests;

namespace {

ComplexSpectrogram RandomSpec(int64_t frames, int64_t bins, uint64_t seed) {
  Rng rng(seed);
  ComplexSpectrogram spec;
  spec.config = StftConfig{};
  spec.frames = frames;
  spec.bins = bins;
  spec.source_samples = (frames - 1) * spec.config.HopSamples();
  spec.data.resize(static_cast<size_t>(frames * bins));
  for (auto& v : spec.data) v = {rng.Normal(), rng.Normal()};
  return spec;
}

}  // namespace

TEST_CASE("split produces 3 bands of 160 bins for the default profile") {
  ComplexSpectrogram spec = RandomSpec(11, 481, 42);
  SubbandStack stack = SplitSubbands(spec);
  CHECK(stack.bins_per_band() == 160);
  CHECK(stack.data.dim(2) == 3);
  CHECK(stack.data.dim(3) == 2);
  CHECK(stack.band_edges == std::array<int64_t, 4>{0, 160, 320, 480});
}

TEST_CASE("merge(split(s)) is bit-exact") {
  ComplexSpectrogram spec = RandomSpec(7, 481, 1);
  ComplexSpectrogram back = MergeSubbands(SplitSubbands(spec));
  REQUIRE(back.data.size() == spec.data.size());
  for (size_t i = 0; i < spec.data.size(); ++i) {
    CHECK(back.data[i] == spec.data[i]);  // bitwise, no tolerance
  }
}

TEST_CASE("random stacks round trip through merge then split") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t frames = 1 + static_cast<int64_t>(rng.UniformInt(1, 9));
    SubbandStack stack;
    stack.config = StftConfig{};
    stack.source_samples = (frames - 1) * stack.config.HopSamples();
    stack.data = Tensor<double>::Randn({frames, 160, 3, 2}, rng);
    stack.band_edges = {0, 160, 320, 480};
    stack.nyquist.assign(static_cast<size_t>(frames), {0.0, 0.0});
    for (auto& v : stack.nyquist) v = {rng.Normal(), 0.0};

    SubbandStack again = SplitSubbands(MergeSubbands(stack));
    CHECK(MaxAbsDiff(again.data, stack.data) == 0.0);
    for (int64_t t = 0; t < frames; ++t) {
      CHECK(again.nyquist[static_cast<size_t>(t)] == stack.nyquist[static_cast<size_t>(t)]);
    }
  }
}

TEST_CASE("zero stack and zero nyquist merge to a zero spectrogram") {
  SubbandStack stack;
  stack.config = StftConfig{};
  stack.data = Tensor<double>({5, 160, 3, 2});
  stack.band_edges = {0, 160, 320, 480};
  stack.nyquist.assign(5, {0.0, 0.0});
  ComplexSpectrogram spec = MergeSubbands(stack);
  for (const auto& v : spec.data) CHECK(v == std::complex<double>(0.0, 0.0));
}

TEST_CASE("indivisible bin counts raise a configuration error naming fft sizes") {
  StftConfig cfg;
  cfg.fft_size = 1000;  // 500 retained bins, not divisible by 3
  cfg.win_len_s = 1000.0 / 48000.0;
  ComplexSpectrogram spec = RandomSpec(3, 501, 5);
  spec.config = cfg;
  try {
    SplitSubbands(spec);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("996") != std::string::npos);
    CHECK(msg.find("1002") != std::string::npos);
  }
}

TEST_CASE("merge rejects mismatched edges") {
  ComplexSpectrogram spec = RandomSpec(4, 481, 11);
  SubbandStack stack = SplitSubbands(spec);
  stack.band_edges = {0, 100, 320, 480};
  CHECK_THROWS_AS(MergeSubbands(stack), ValidationError);
}
