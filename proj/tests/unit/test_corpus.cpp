// tests/unit/test_corpus.cpp

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers/test_signals.hpp"
#include "ksnet/degrade/corpus.hpp"

using namespace ksnet;
using namespace ksnet_tests;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path root;
  std::string clean1, clean2, noise, rir, manifest;

  Fixture() {
    root = fs::temp_directory_path() / ("ksnet_corpus_" + std::to_string(::getpid()));
    fs::create_directories(root);
    clean1 = (root / "clean1.wav").string();
    clean2 = (root / "clean2.wav").string();
    noise = (root / "noise.wav").string();
    rir = (root / "rir.wav").string();
    WriteWav(clean1, SpeechLike(0.25, 48000, 1));
    WriteWav(clean2, SpeechLike(0.25, 48000, 2));
    WriteWav(noise, WhiteNoise(0.2, 48000, 3));
    Waveform r{std::vector<double>(2400, 0.0), 48000};
    Rng rng(4);
    for (size_t i = 0; i < r.samples.size(); ++i) {
      r.samples[i] = rng.Normal() * std::pow(10.0, -3.0 * static_cast<double>(i) / 48000.0 / 0.3);
    }
    r.samples[0] = 2.0;
    WriteWav(rir, r);

    manifest = (root / "manifest.jsonl").string();
    std::ofstream mf(manifest);
    for (const auto& [id, clean] : {std::pair{"utt_a", clean1}, std::pair{"utt_b", clean2}}) {
      nlohmann::json j{{"id", id}, {"clean", clean}, {"noise", {noise}}, {"rir", {rir}}};
      mf << j.dump() << "\n";
    }
  }

  ~Fixture() { fs::remove_all(root); }
};

std::vector<char> Bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

DegradationRecipe ZeroRecipe() {
  DegradationRecipe r;
  r.loudness_prob = r.reverb_prob = r.noise_prob = r.nr_prob = r.codec_prob = 0.0;
  r.lowpass_prob = r.clip_prob = r.packet_loss_prob = r.transient_prob = 0.0;
  return r;
}

}  // namespace

TEST_CASE("all-zero probabilities yield bit-identical clean copies") {
  Fixture fx;
  CorpusManifest m = CorpusManifest::Load(fx.manifest);
  const std::string out = (fx.root / "out_zero").string();
  CorpusResult res = BuildCorpus(m, ZeroRecipe(), out, 7);
  CHECK(res.num_ok == 2);
  CHECK(res.num_failed == 0);
  for (const char* id : {"utt_a", "utt_b"}) {
    const auto degraded = Bytes(out + "/" + id + ".degraded.wav");
    const auto clean = Bytes(out + "/" + id + ".clean.wav");
    REQUIRE(!degraded.empty());
    CHECK(degraded == clean);
  }
}

TEST_CASE("same seed twice builds a bit-identical corpus") {
  Fixture fx;
  CorpusManifest m = CorpusManifest::Load(fx.manifest);
  DegradationRecipe recipe;  // defaults exercise several distortions
  const std::string out1 = (fx.root / "out_s1").string();
  const std::string out2 = (fx.root / "out_s2").string();
  BuildCorpus(m, recipe, out1, 99);
  BuildCorpus(m, recipe, out2, 99);
  for (const char* id : {"utt_a", "utt_b"}) {
    CHECK(Bytes(out1 + "/" + id + ".degraded.wav") == Bytes(out2 + "/" + id + ".degraded.wav"));
    CHECK(Bytes(out1 + "/" + id + ".json") == Bytes(out2 + "/" + id + ".json"));
  }
}

TEST_CASE("worker count does not change the rendered corpus") {
  Fixture fx;
  CorpusManifest m = CorpusManifest::Load(fx.manifest);
  DegradationRecipe recipe;
  const std::string out1 = (fx.root / "out_w1").string();
  const std::string out3 = (fx.root / "out_w3").string();
  BuildCorpus(m, recipe, out1, 5, 1);
  BuildCorpus(m, recipe, out3, 5, 3);
  for (const char* id : {"utt_a", "utt_b"}) {
    CHECK(Bytes(out1 + "/" + id + ".degraded.wav") == Bytes(out3 + "/" + id + ".degraded.wav"));
  }
}

TEST_CASE("replaying a sidecar reproduces the degraded file bit-exactly") {
  Fixture fx;
  CorpusManifest m = CorpusManifest::Load(fx.manifest);
  DegradationRecipe recipe;
  recipe.noise_prob = 1.0;
  recipe.reverb_prob = 1.0;
  recipe.clip_prob = 1.0;
  recipe.packet_loss_prob = 1.0;
  const std::string out = (fx.root / "out_replay").string();
  BuildCorpus(m, recipe, out, 11);

  Waveform replayed = ReplaySidecar(out + "/utt_a.json");
  const std::string replay_wav = (fx.root / "replayed.wav").string();
  WriteWav(replay_wav, replayed, WavSampleFormat::kFloat32);
  CHECK(Bytes(replay_wav) == Bytes(out + "/utt_a.degraded.wav"));
}

TEST_CASE("binomial bound on per-distortion application counts") {
  Fixture fx;
  // 200 records referencing the same clean file under distinct ids.
  const std::string manifest200 = (fx.root / "manifest200.jsonl").string();
  {
    std::ofstream mf(manifest200);
    for (int i = 0; i < 200; ++i) {
      nlohmann::json j{{"id", "utt_" + std::to_string(i)},
                       {"clean", fx.clean1},
                       {"noise", {fx.noise}}};
      mf << j.dump() << "\n";
    }
  }
  CorpusManifest m = CorpusManifest::Load(manifest200);
  DegradationRecipe recipe = ZeroRecipe();
  recipe.noise_prob = 0.5;

  const std::string out = (fx.root / "out_binom").string();
  BuildCorpus(m, recipe, out, 21);

  int applied = 0;
  for (int i = 0; i < 200; ++i) {
    std::ifstream sf(out + "/utt_" + std::to_string(i) + ".json");
    nlohmann::json j;
    sf >> j;
    for (const auto& step : j.at("steps")) {
      if (step.at("kind") == "noise") ++applied;
    }
  }
  const double sigma = std::sqrt(200.0 * 0.25);
  CHECK(std::abs(applied - 100.0) <= 3.0 * sigma);
}

TEST_CASE("missing files are per-record errors and zero successes fail the run") {
  Fixture fx;
  const std::string manifest_bad = (fx.root / "manifest_bad.jsonl").string();
  {
    std::ofstream mf(manifest_bad);
    mf << nlohmann::json{{"id", "ok"}, {"clean", fx.clean1}}.dump() << "\n";
    mf << nlohmann::json{{"id", "broken"}, {"clean", (fx.root / "missing.wav").string()}}.dump()
       << "\n";
  }
  CorpusManifest m = CorpusManifest::Load(manifest_bad);
  const std::string out = (fx.root / "out_bad").string();
  CorpusResult res = BuildCorpus(m, ZeroRecipe(), out, 1);
  CHECK(res.num_ok == 1);
  CHECK(res.num_failed == 1);

  // Output manifest records the failure.
  std::ifstream f(res.output_manifest_path);
  std::string line;
  bool found_error = false;
  while (std::getline(f, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.value("id", "") == "broken") found_error = j.contains("error");
  }
  CHECK(found_error);

  // All-missing manifest fails outright.
  const std::string manifest_all_bad = (fx.root / "manifest_all_bad.jsonl").string();
  {
    std::ofstream mf(manifest_all_bad);
    mf << nlohmann::json{{"id", "broken"}, {"clean", (fx.root / "missing.wav").string()}}.dump()
       << "\n";
  }
  CorpusManifest mb = CorpusManifest::Load(manifest_all_bad);
  CHECK_THROWS_AS(BuildCorpus(mb, ZeroRecipe(), (fx.root / "out_none").string(), 1),
                  ValidationError);
}

TEST_CASE("recipe json round trip and validation") {
  DegradationRecipe r;
  r.noise_prob = 0.33;
  r.lowpass_cutoff_hz = {1500.0, 9000.0};
  DegradationRecipe back = DegradationRecipe::FromJson(r.ToJson());
  CHECK(back.noise_prob == 0.33);
  CHECK(back.lowpass_cutoff_hz.min == 1500.0);
  CHECK(back.lowpass_cutoff_hz.max == 9000.0);

  nlohmann::json bad = r.ToJson();
  bad["noise"]["prob"] = 1.5;
  CHECK_THROWS_AS(DegradationRecipe::FromJson(bad), ConfigError);

  nlohmann::json bad_range = r.ToJson();
  bad_range["noise"]["snr_db"] = {20.0, 5.0};
  CHECK_THROWS_AS(DegradationRecipe::FromJson(bad_range), ConfigError);

  nlohmann::json bad_transient = r.ToJson();
  bad_transient["transient"]["snr_db"] = {-10.0, 10.0};
  CHECK_THROWS_AS(DegradationRecipe::FromJson(bad_transient), ConfigError);
}
