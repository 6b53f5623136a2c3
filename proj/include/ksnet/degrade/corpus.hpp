// ksnet/degrade/corpus.hpp

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

#ifndef KSNET_DEGRADE_CORPUS_HPP_
#define KSNET_DEGRADE_CORPUS_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ksnet/degrade/recipe.hpp"
#include "ksnet/wav.hpp"

namespace ksnet {

// One input record of the corpus manifest (JSONL, one object per line).
struct ManifestRecord {
  std::string id;
  std::string clean_path;
  std::vector<std::string> noise_paths;
  std::vector<std::string> rir_paths;
  std::vector<std::string> transient_paths;

  static ManifestRecord FromJson(const nlohmann::json& j) {
    ManifestRecord r;
    r.id = j.at("id").get<std::string>();
    r.clean_path = j.at("clean").get<std::string>();
    if (j.contains("noise")) r.noise_paths = j.at("noise").get<std::vector<std::string>>();
    if (j.contains("rir")) r.rir_paths = j.at("rir").get<std::vector<std::string>>();
    if (j.contains("transient")) {
      r.transient_paths = j.at("transient").get<std::vector<std::string>>();
    }
    return r;
  }
};

struct CorpusManifest {
  std::vector<ManifestRecord> records;

  static CorpusManifest Load(const std::string& path) {
    std::ifstream f(path);
    KSNET_CHECK_CONFIG(f.good(), "cannot open manifest: " << path);
    CorpusManifest m;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        m.records.push_back(ManifestRecord::FromJson(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest parse error at " + path + ":" +
                          std::to_string(line_no) + ": " + e.what());
      }
    }
    KSNET_CHECK_CONFIG(!m.records.empty(), "manifest has no records: " << path);
    return m;
  }
};

struct CorpusResult {
  int num_ok = 0;
  int num_failed = 0;
  std::string output_manifest_path;
};

// Renders the (degraded, clean) pairs described by the manifest. Each
// utterance draws its own RNG stream from hash(seed, id), so results do not
// depend on worker count or completion order. Per-record failures are
// recorded in the output manifest and the run continues; a run with zero
// successful records fails.
inline CorpusResult BuildCorpus(const CorpusManifest& manifest, const DegradationRecipe& recipe,
                                const std::string& out_dir, uint64_t seed, int workers = 1) {
  recipe.Validate();
  KSNET_CHECK_CONFIG(workers >= 1, "corpus: workers must be >= 1");
  std::filesystem::create_directories(out_dir);

  DegradationRecipe seeded = recipe;
  seeded.seed = seed;

  struct Outcome {
    bool ok = false;
    std::string error;
    nlohmann::json record;
  };
  std::vector<Outcome> outcomes(manifest.records.size());

  auto render_one = [&](size_t idx) {
    const ManifestRecord& rec = manifest.records[idx];
    Outcome& out = outcomes[idx];
    try {
      const Waveform clean = ReadWav(rec.clean_path, 48000);
      double peak = 0.0;
      for (double v : clean.samples) peak = std::max(peak, std::abs(v));

      UtteranceResources res;
      res.noise_paths = rec.noise_paths;
      res.rir_paths = rec.rir_paths;
      res.transient_paths = rec.transient_paths;

      RealizedPlan plan = DrawPlan(seeded, rec.id, res, peak);
      auto load = [](const std::string& p) { return ReadWav(p, 48000); };
      const Waveform degraded = ApplyPlan(clean, plan, load);

      const auto base = std::filesystem::path(out_dir) / rec.id;
      const std::string degraded_path = base.string() + ".degraded.wav";
      const std::string clean_path = base.string() + ".clean.wav";
      const std::string sidecar_path = base.string() + ".json";
      WriteWav(degraded_path, degraded, WavSampleFormat::kFloat32);
      WriteWav(clean_path, clean, WavSampleFormat::kFloat32);

      // Audio copies are referenced by basename so a corpus directory stays
      // relocatable and two same-seed builds are byte-identical.
      nlohmann::json sidecar = plan.ToJson();
      sidecar["clean"] = rec.id + ".clean.wav";
      sidecar["degraded"] = rec.id + ".degraded.wav";
      sidecar["source_clean"] = rec.clean_path;
      {
        std::ofstream sf(sidecar_path, std::ios::trunc);
        sf << sidecar.dump(2) << "\n";
      }

      out.record = sidecar;
      out.record["sidecar"] = sidecar_path;
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
      out.record = {{"id", rec.id}, {"error", e.what()}};
    }
  };

  if (workers == 1) {
    for (size_t i = 0; i < manifest.records.size(); ++i) render_one(i);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= manifest.records.size()) return;
        render_one(i);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CorpusResult result;
  result.output_manifest_path =
      (std::filesystem::path(out_dir) / "manifest.out.jsonl").string();
  std::ofstream mf(result.output_manifest_path, std::ios::trunc);
  KSNET_CHECK_VALID(mf.good(), "cannot write output manifest in " << out_dir);
  for (const auto& o : outcomes) {
    mf << o.record.dump() << "\n";
    if (o.ok) {
      ++result.num_ok;
    } else {
      ++result.num_failed;
    }
  }
  KSNET_CHECK_VALID(result.num_ok > 0, "corpus build produced zero successful records");
  return result;
}

// Re-renders one utterance from its sidecar, bypassing the RNG entirely.
inline Waveform ReplaySidecar(const std::string& sidecar_path) {
  std::ifstream f(sidecar_path);
  KSNET_CHECK_CONFIG(f.good(), "cannot open sidecar: " << sidecar_path);
  nlohmann::json j;
  f >> j;
  RealizedPlan plan = RealizedPlan::FromJson(j);
  const Waveform clean = ReadWav(j.at("source_clean").get<std::string>(), 48000);
  auto load = [](const std::string& p) { return ReadWav(p, 48000); };
  return ApplyPlan(clean, plan, load);
}

}  // namespace ksnet

#endif  // KSNET_DEGRADE_CORPUS_HPP_
