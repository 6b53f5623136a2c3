// ksnet/degrade/recipe.hpp

// Copyright 2026  The ksnet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef KSNET_DEGRADE_RECIPE_HPP_
#define KSNET_DEGRADE_RECIPE_HPP_

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksnet/common.hpp"
#include "ksnet/degrade/distortions.hpp"

namespace ksnet {

struct ParamRange {
  double min = 0.0;
  double max = 0.0;

  void Validate(const char* name) const {
    KSNET_CHECK_CONFIG(min <= max, "recipe: range '" << name << "' has min > max");
  }
};

// Probability-weighted plan of distortions for one corpus build. The draw
// probabilities are not a published quantity; the defaults here are artifact
// defaults and are expected to be tuned per corpus in the recipe file.
struct DegradationRecipe {
  uint64_t seed = 0;

  double loudness_prob = 0.5;
  ParamRange loudness_gain_db{-15.0, 5.0};

  double reverb_prob = 0.5;

  double noise_prob = 0.8;
  ParamRange noise_snr_db{0.0, 25.0};

  double nr_prob = 0.15;
  ParamRange nr_alpha{1.0, 3.0};
  double nr_beta = 0.01;
  ParamRange nr_snr_db{5.0, 20.0};

  double codec_prob = 0.3;
  std::vector<std::string> codec_profiles{"mu_law:6", "bitcrush:6", "spectral_hole:2"};

  double lowpass_prob = 0.4;
  ParamRange lowpass_cutoff_hz{2000.0, 16000.0};

  double clip_prob = 0.25;
  ParamRange clip_threshold{0.25, 0.9};

  double packet_loss_prob = 0.25;
  double packet_ms = 20.0;
  ParamRange packet_loss_rate{0.05, 0.3};

  double transient_prob = 0.0;  // used by the second training stage, not the corpus build
  ParamRange transient_snr_db{-5.0, 10.0};

  void Validate() const {
    auto check_prob = [](double p, const char* name) {
      KSNET_CHECK_CONFIG(p >= 0.0 && p <= 1.0, "recipe: probability '" << name
                         << "' must lie in [0, 1]");
    };
    check_prob(loudness_prob, "loudness");
    check_prob(reverb_prob, "reverb");
    check_prob(noise_prob, "noise");
    check_prob(nr_prob, "nr");
    check_prob(codec_prob, "codec");
    check_prob(lowpass_prob, "lowpass");
    check_prob(clip_prob, "clip");
    check_prob(packet_loss_prob, "packet_loss");
    check_prob(transient_prob, "transient");
    loudness_gain_db.Validate("loudness.gain_db");
    noise_snr_db.Validate("noise.snr_db");
    nr_alpha.Validate("nr.alpha");
    nr_snr_db.Validate("nr.snr_db");
    lowpass_cutoff_hz.Validate("lowpass.cutoff_hz");
    clip_threshold.Validate("clip.threshold");
    packet_loss_rate.Validate("packet_loss.loss_rate");
    transient_snr_db.Validate("transient.snr_db");
    KSNET_CHECK_CONFIG(transient_snr_db.min >= -5.0 && transient_snr_db.max <= 10.0,
                       "recipe: transient snr range must stay inside [-5, 10] dB");
    KSNET_CHECK_CONFIG(nr_beta > 0.0 && nr_beta < 1.0, "recipe: nr.beta must lie in (0, 1)");
    KSNET_CHECK_CONFIG(packet_ms > 0.0, "recipe: packet_ms must be positive");
    KSNET_CHECK_CONFIG(!codec_profiles.empty(), "recipe: codec profile list is empty");
    for (const auto& p : codec_profiles) CodecProfile::Parse(p);
  }

  static DegradationRecipe FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  static DegradationRecipe Load(const std::string& path);
};

namespace recipe_detail {

inline ParamRange RangeFrom(const nlohmann::json& j, const char* field, ParamRange fallback) {
  if (!j.contains(field)) return fallback;
  const auto& r = j.at(field);
  KSNET_CHECK_CONFIG(r.is_array() && r.size() == 2, "recipe: '" << field
                     << "' must be a [min, max] pair");
  return ParamRange{r[0].get<double>(), r[1].get<double>()};
}

}  // namespace recipe_detail

inline DegradationRecipe DegradationRecipe::FromJson(const nlohmann::json& j) {
  using recipe_detail::RangeFrom;
  DegradationRecipe r;
  if (j.contains("seed")) r.seed = j.at("seed").get<uint64_t>();

  auto prob = [&](const char* section, double fallback) {
    if (!j.contains(section)) return fallback;
    const auto& s = j.at(section);
    return s.contains("prob") ? s.at("prob").get<double>() : fallback;
  };
  auto section = [&](const char* name) -> nlohmann::json {
    return j.contains(name) ? j.at(name) : nlohmann::json::object();
  };

  r.loudness_prob = prob("loudness", r.loudness_prob);
  r.loudness_gain_db = RangeFrom(section("loudness"), "gain_db", r.loudness_gain_db);

  r.reverb_prob = prob("reverb", r.reverb_prob);

  r.noise_prob = prob("noise", r.noise_prob);
  r.noise_snr_db = RangeFrom(section("noise"), "snr_db", r.noise_snr_db);

  r.nr_prob = prob("nr", r.nr_prob);
  r.nr_alpha = RangeFrom(section("nr"), "alpha", r.nr_alpha);
  r.nr_snr_db = RangeFrom(section("nr"), "snr_db", r.nr_snr_db);
  if (section("nr").contains("beta")) r.nr_beta = section("nr").at("beta").get<double>();

  r.codec_prob = prob("codec", r.codec_prob);
  if (section("codec").contains("profiles")) {
    r.codec_profiles = section("codec").at("profiles").get<std::vector<std::string>>();
  }

  r.lowpass_prob = prob("lowpass", r.lowpass_prob);
  r.lowpass_cutoff_hz = RangeFrom(section("lowpass"), "cutoff_hz", r.lowpass_cutoff_hz);

  r.clip_prob = prob("clip", r.clip_prob);
  r.clip_threshold = RangeFrom(section("clip"), "threshold", r.clip_threshold);

  r.packet_loss_prob = prob("packet_loss", r.packet_loss_prob);
  if (section("packet_loss").contains("packet_ms")) {
    r.packet_ms = section("packet_loss").at("packet_ms").get<double>();
  }
  r.packet_loss_rate = RangeFrom(section("packet_loss"), "loss_rate", r.packet_loss_rate);

  r.transient_prob = prob("transient", r.transient_prob);
  r.transient_snr_db = RangeFrom(section("transient"), "snr_db", r.transient_snr_db);

  r.Validate();
  return r;
}

inline nlohmann::json DegradationRecipe::ToJson() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["loudness"] = {{"prob", loudness_prob}, {"gain_db", {loudness_gain_db.min, loudness_gain_db.max}}};
  j["reverb"] = {{"prob", reverb_prob}};
  j["noise"] = {{"prob", noise_prob}, {"snr_db", {noise_snr_db.min, noise_snr_db.max}}};
  j["nr"] = {{"prob", nr_prob},
             {"alpha", {nr_alpha.min, nr_alpha.max}},
             {"beta", nr_beta},
             {"snr_db", {nr_snr_db.min, nr_snr_db.max}}};
  j["codec"] = {{"prob", codec_prob}, {"profiles", codec_profiles}};
  j["lowpass"] = {{"prob", lowpass_prob},
                  {"cutoff_hz", {lowpass_cutoff_hz.min, lowpass_cutoff_hz.max}}};
  j["clip"] = {{"prob", clip_prob}, {"threshold", {clip_threshold.min, clip_threshold.max}}};
  j["packet_loss"] = {{"prob", packet_loss_prob},
                      {"packet_ms", packet_ms},
                      {"loss_rate", {packet_loss_rate.min, packet_loss_rate.max}}};
  j["transient"] = {{"prob", transient_prob},
                    {"snr_db", {transient_snr_db.min, transient_snr_db.max}}};
  return j;
}

inline DegradationRecipe DegradationRecipe::Load(const std::string& path) {
  std::ifstream f(path);
  KSNET_CHECK_CONFIG(f.good(), "cannot open recipe: " << path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("recipe parse error in " + path + ": " + e.what());
  }
  return FromJson(j);
}

// One fully realized draw. Everything needed to reproduce the degraded file
// without touching the RNG is recorded here, in application order.
struct RealizedStep {
  std::string kind;
  nlohmann::json params;
};

struct RealizedPlan {
  std::string utterance_id;
  uint64_t stream_seed = 0;
  std::vector<RealizedStep> steps;

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["id"] = utterance_id;
    j["stream_seed"] = stream_seed;
    j["steps"] = nlohmann::json::array();
    for (const auto& s : steps) {
      nlohmann::json e = s.params;
      e["kind"] = s.kind;
      j["steps"].push_back(e);
    }
    return j;
  }

  static RealizedPlan FromJson(const nlohmann::json& j) {
    RealizedPlan p;
    p.utterance_id = j.at("id").get<std::string>();
    p.stream_seed = j.value("stream_seed", uint64_t{0});
    for (const auto& e : j.at("steps")) {
      RealizedStep s;
      s.kind = e.at("kind").get<std::string>();
      s.params = e;
      s.params.erase("kind");
      p.steps.push_back(std::move(s));
    }
    return p;
  }
};

// Resources available to one utterance: candidate noise/RIR/transient files.
struct UtteranceResources {
  std::vector<std::string> noise_paths;
  std::vector<std::string> rir_paths;
  std::vector<std::string> transient_paths;
};

// Draws a concrete plan from the recipe. The gate for each distortion is
// drawn first and parameters only when the gate fires, in a fixed order, so
// the stream layout is stable. The application order mirrors a capture and
// transmission chain: loudness, reverb, noise, NR artifact, codec, lowpass,
// clipping, packet loss.
inline RealizedPlan DrawPlan(const DegradationRecipe& recipe, const std::string& utterance_id,
                             const UtteranceResources& res, double clean_peak) {
  recipe.Validate();
  Rng rng = SubStream(recipe.seed, utterance_id);
  RealizedPlan plan;
  plan.utterance_id = utterance_id;
  plan.stream_seed = SubStream(recipe.seed, utterance_id).NextU64();

  if (rng.Bernoulli(recipe.loudness_prob)) {
    double gain = rng.Uniform(recipe.loudness_gain_db.min, recipe.loudness_gain_db.max);
    // Keep the pre-clip headroom contract: output peak must stay <= 4.
    if (clean_peak > 0.0) {
      const double max_gain = 20.0 * std::log10(4.0 / clean_peak);
      gain = std::min(gain, max_gain);
    }
    plan.steps.push_back({"loudness", {{"gain_db", gain}}});
  }
  if (rng.Bernoulli(recipe.reverb_prob) && !res.rir_paths.empty()) {
    const auto idx = static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(res.rir_paths.size()) - 1));
    plan.steps.push_back({"reverb", {{"rir", res.rir_paths[idx]}}});
  }
  if (rng.Bernoulli(recipe.noise_prob) && !res.noise_paths.empty()) {
    const auto idx = static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(res.noise_paths.size()) - 1));
    const double snr = rng.Uniform(recipe.noise_snr_db.min, recipe.noise_snr_db.max);
    plan.steps.push_back({"noise", {{"noise", res.noise_paths[idx]}, {"snr_db", snr}}});
  }
  if (rng.Bernoulli(recipe.nr_prob) && !res.noise_paths.empty()) {
    const auto idx = static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(res.noise_paths.size()) - 1));
    plan.steps.push_back({"nr",
                          {{"noise", res.noise_paths[idx]},
                           {"alpha", rng.Uniform(recipe.nr_alpha.min, recipe.nr_alpha.max)},
                           {"beta", recipe.nr_beta},
                           {"snr_db", rng.Uniform(recipe.nr_snr_db.min, recipe.nr_snr_db.max)}}});
  }
  if (rng.Bernoulli(recipe.codec_prob)) {
    const auto idx = static_cast<size_t>(
        rng.UniformInt(0, static_cast<int64_t>(recipe.codec_profiles.size()) - 1));
    plan.steps.push_back({"codec", {{"profile", recipe.codec_profiles[idx]}}});
  }
  if (rng.Bernoulli(recipe.lowpass_prob)) {
    plan.steps.push_back(
        {"lowpass",
         {{"cutoff_hz", rng.Uniform(recipe.lowpass_cutoff_hz.min, recipe.lowpass_cutoff_hz.max)}}});
  }
  if (rng.Bernoulli(recipe.clip_prob)) {
    plan.steps.push_back(
        {"clip", {{"threshold", rng.Uniform(recipe.clip_threshold.min, recipe.clip_threshold.max)}}});
  }
  if (rng.Bernoulli(recipe.packet_loss_prob)) {
    plan.steps.push_back(
        {"packet_loss",
         {{"packet_ms", recipe.packet_ms},
          {"loss_rate", rng.Uniform(recipe.packet_loss_rate.min, recipe.packet_loss_rate.max)},
          {"seed", rng.NextU64()}}});
  }
  return plan;
}

// Applies a realized plan. Pure function of (clean audio, plan, referenced
// files); replaying a sidecar reproduces the degraded audio bit-exactly.
inline Waveform ApplyPlan(const Waveform& clean, const RealizedPlan& plan,
                          const std::function<Waveform(const std::string&)>& load_audio) {
  Waveform out = clean;
  for (const auto& step : plan.steps) {
    if (step.kind == "loudness") {
      out = AdjustLoudness(out, step.params.at("gain_db").get<double>());
    } else if (step.kind == "reverb") {
      out = ApplyReverb(out, load_audio(step.params.at("rir").get<std::string>()));
    } else if (step.kind == "noise") {
      out = MixNoise(out, load_audio(step.params.at("noise").get<std::string>()),
                     step.params.at("snr_db").get<double>());
    } else if (step.kind == "nr") {
      NrProfile p;
      p.alpha = step.params.at("alpha").get<double>();
      p.beta = step.params.at("beta").get<double>();
      p.snr_db = step.params.at("snr_db").get<double>();
      out = NrArtifact(out, load_audio(step.params.at("noise").get<std::string>()), p);
    } else if (step.kind == "codec") {
      out = CodecSim(out, CodecProfile::Parse(step.params.at("profile").get<std::string>()));
    } else if (step.kind == "lowpass") {
      out = Lowpass(out, step.params.at("cutoff_hz").get<double>());
    } else if (step.kind == "clip") {
      out = Clip(out, step.params.at("threshold").get<double>());
    } else if (step.kind == "packet_loss") {
      out = DropPackets(out, step.params.at("packet_ms").get<double>(),
                        step.params.at("loss_rate").get<double>(),
                        step.params.at("seed").get<uint64_t>())
                .first;
    } else {
      throw ConfigError("unknown plan step '" + step.kind + "'");
    }
  }
  return out;
}

}  // namespace ksnet

#endif  // KSNET_DEGRADE_RECIPE_HPP_
