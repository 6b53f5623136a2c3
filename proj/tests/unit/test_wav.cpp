// tests/unit/test_wav.cpp

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "helpers/test_signals.hpp"
#include "ksnet/wav.hpp"

using namespace ksnet;
using namespace ksnet_tests;

namespace {

std::string TempPath(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("float32 wav round trip is exact") {
  Waveform x = WhiteNoise(0.1, 48000, 17);
  const std::string path = TempPath("ksnet_f32.wav");
  WriteWav(path, x, WavSampleFormat::kFloat32);
  Waveform y = ReadWav(path, 48000);
  REQUIRE(y.NumSamples() == x.NumSamples());
  CHECK(y.sample_rate_hz == 48000);
  for (int64_t i = 0; i < x.NumSamples(); ++i) {
    CHECK(y.samples[static_cast<size_t>(i)] ==
          static_cast<double>(static_cast<float>(x.samples[static_cast<size_t>(i)])));
  }
  std::remove(path.c_str());
}

TEST_CASE("pcm16 wav round trip is exact to one quantization step") {
  Rng rng(23);
  Waveform x;
  x.sample_rate_hz = 48000;
  x.samples.resize(4800);
  for (auto& v : x.samples) v = rng.Uniform(-0.9, 0.9);
  const std::string path = TempPath("ksnet_p16.wav");
  WriteWav(path, x, WavSampleFormat::kPcm16);
  Waveform y = ReadWav(path);
  REQUIRE(y.NumSamples() == x.NumSamples());
  for (int64_t i = 0; i < x.NumSamples(); ++i) {
    CHECK(std::abs(y.samples[static_cast<size_t>(i)] - x.samples[static_cast<size_t>(i)]) <
          1.0 / 32768.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("non-48 kHz input is rejected when 48 kHz is required") {
  Waveform x = WhiteNoise(0.05, 16000, 3);
  const std::string path = TempPath("ksnet_16k.wav");
  WriteWav(path, x);
  CHECK_THROWS_AS(ReadWav(path, 48000), ValidationError);
  CHECK(ReadWav(path).sample_rate_hz == 16000);  // unconstrained read still works
  std::remove(path.c_str());
}

TEST_CASE("garbage files are rejected") {
  const std::string path = TempPath("ksnet_bad.wav");
  {
    std::ofstream f(path, std::ios::binary);
    f << "this is not audio";
  }
  CHECK_THROWS_AS(ReadWav(path), ValidationError);
  std::remove(path.c_str());
}
