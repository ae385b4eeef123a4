/* Copyright 2026 The mixvc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "mixvc/frontend.hpp"
#include "mixvc/probe.hpp"
#include "mixvc/synth.hpp"
#include "testutil.hpp"

using namespace mixvc;
using testutil::TempDir;

namespace {

SpeakerSpec plain_speaker(double base_f0 = 220.0) {
  SpeakerSpec s;
  s.base_f0 = base_f0;
  s.envelope.assign(kNumHarmonics, 0.0);
  for (int h = 0; h < kNumHarmonics; ++h) {
    s.envelope[h] = 1.0 / (1.0 + 0.5 * h);
  }
  s.f0_jitter = 0.0;
  return s;
}

ContentScript one_segment(int symbol, double dur_ms, double offset = 0.0) {
  ContentScript c;
  c.segments.push_back({symbol, dur_ms, offset});
  return c;
}

std::vector<double> file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  std::vector<double> out;
  char b;
  while (f.get(b)) out.push_back(double(static_cast<unsigned char>(b)));
  return out;
}

double median(std::vector<double> v) {
  REQUIRE(!v.empty());
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("steady tone lands on the requested fundamental") {
  ContentScript steady;
  for (int i = 0; i < 4; ++i) steady.segments.push_back({0, 200.0, 0.0});
  Waveform w = synthesize_utterance(plain_speaker(220.0), steady, 3);
  PitchContour pc = estimate_f0(w);
  std::vector<double> voiced;
  for (size_t t = 0; t < pc.f0.size(); ++t) {
    if (pc.voiced[t]) voiced.push_back(pc.f0[t]);
  }
  REQUIRE(voiced.size() > 40);
  CHECK(median(voiced) == doctest::Approx(220.0).epsilon(0.01));
}

TEST_CASE("synthesis is deterministic and peak-normalized") {
  SpeakerSpec spk = plain_speaker(250.0);
  spk.f0_jitter = 0.01;
  ContentScript sc;
  sc.segments = {{2, 120.0, 1.0}, {7, 140.0, -1.5}, {2, 100.0, 0.0}};
  Waveform a = synthesize_utterance(spk, sc, 42);
  Waveform b = synthesize_utterance(spk, sc, 42);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(std::equal(a.samples.begin(), a.samples.end(), b.samples.begin()));
  double peak = 0.0;
  for (double s : a.samples) peak = std::max(peak, std::fabs(s));
  CHECK(peak == doctest::Approx(0.75).epsilon(1e-9));
  Waveform c = synthesize_utterance(spk, sc, 43);
  CHECK(!std::equal(a.samples.begin(), a.samples.end(), c.samples.begin()));
}

TEST_CASE("zero envelope renders exact silence") {
  SpeakerSpec spk = plain_speaker();
  spk.envelope.assign(kNumHarmonics, 0.0);
  Waveform w = synthesize_utterance(spk, one_segment(1, 200.0), 5);
  for (double s : w.samples) CHECK(s == 0.0);
}

TEST_CASE("spec violations are rejected") {
  SpeakerSpec spk = plain_speaker();
  CHECK_THROWS_AS(synthesize_utterance(spk, one_segment(99, 100.0), 1),
                  UsageError);
  CHECK_THROWS_AS(synthesize_utterance(spk, one_segment(0, 30.0), 1),
                  UsageError);
  CHECK_THROWS_AS(synthesize_utterance(spk, one_segment(0, 100.0, 9.0), 1),
                  UsageError);
  spk.base_f0 = 50.0;
  CHECK_THROWS_AS(synthesize_utterance(spk, one_segment(0, 100.0), 1),
                  UsageError);
  // 50 x 240 ms = 12 s > the 10 s budget.
  ContentScript longsc;
  for (int i = 0; i < 50; ++i) longsc.segments.push_back({0, 240.0, 0.0});
  CHECK_THROWS_WITH_AS(
      synthesize_utterance(plain_speaker(), longsc, 1),
      doctest::Contains("10 s"), UsageError);
}

TEST_CASE("ground truth aligns with the analysis frames") {
  SpeakerSpec spk = plain_speaker(240.0);
  ContentScript sc;
  sc.segments = {{3, 150.0, 0.5}, {8, 170.0, -1.0}};
  UtteranceTruth truth = synthesize_with_truth(spk, sc, 11);
  // 15 + 17 synthesis frames; the wave is sized so the 10 ms analysis hop
  // yields exactly one mel frame per synthesis frame.
  CHECK(truth.f0_frames.size() == 32);
  CHECK(truth.sym_frames.size() == 32);
  CHECK(frame_count(truth.wave.samples.size()) == 32);
  CHECK(truth.sym_frames.front() == 3);
  CHECK(truth.sym_frames.back() == 8);
  // Segment pitch follows base * 2^(offset/12).
  CHECK(truth.f0_frames[4] ==
        doctest::Approx(240.0 * std::pow(2.0, 0.5 / 12.0)).epsilon(1e-6));
  CHECK(truth.f0_frames[20] ==
        doctest::Approx(240.0 * std::pow(2.0, -1.0 / 12.0)).epsilon(1e-6));
  // frame_label indexes the window center.
  CHECK(frame_label(truth.sym_frames, 0) == truth.sym_frames[1]);
  CHECK(frame_label(truth.sym_frames, 31) == truth.sym_frames[31]);
}

TEST_CASE("corpus generation: counts, splits, determinism") {
  TempDir d1("corpus_a"), d2("corpus_b");
  CorpusManifest m1 = generate_corpus(4, 2, 7, d1.str());
  CHECK(m1.entries.size() == 8);
  std::set<int> train_spk, test_spk;
  for (const auto& e : m1.entries) {
    (e.split == "test" ? test_spk : train_spk).insert(e.speaker_id);
  }
  CHECK(test_spk.size() >= 1);
  for (int s : test_spk) CHECK(train_spk.count(s) == 0);

  CorpusManifest m2 = generate_corpus(4, 2, 7, d2.str());
  REQUIRE(m2.entries.size() == m1.entries.size());
  for (size_t i = 0; i < m1.entries.size(); ++i) {
    CHECK(m1.entries[i].utt_id == m2.entries[i].utt_id);
    CHECK(m1.entries[i].split == m2.entries[i].split);
    CHECK(m1.entries[i].symbols == m2.entries[i].symbols);
  }
  CHECK(file_bytes(d1.file("wav/spk00_utt00.wav")) ==
        file_bytes(d2.file("wav/spk00_utt00.wav")));
  CHECK(file_bytes(d1.file("manifest.tsv")) ==
        file_bytes(d2.file("manifest.tsv")));

  CHECK_THROWS_AS(generate_corpus(3, 2, 7, d1.str()), UsageError);
}

TEST_CASE("dev split appears once per train speaker from 3 utterances up") {
  TempDir d("corpus_dev");
  CorpusManifest m = generate_corpus(4, 3, 9, d.str());
  std::map<int, int> dev_count, train_count;
  for (const auto& e : m.entries) {
    if (e.split == "dev") dev_count[e.speaker_id]++;
    if (e.split == "train") train_count[e.speaker_id]++;
  }
  CHECK(dev_count.size() == 3);  // one held-out test speaker of 4
  for (auto& [spk, n] : dev_count) {
    CHECK(n == 1);
    CHECK(train_count[spk] == 2);
  }
}

TEST_CASE("generated speakers keep their envelopes apart") {
  std::vector<SpeakerSpec> spk = corpus_speakers(8, 123);
  REQUIRE(spk.size() == 8);
  for (size_t a = 0; a < spk.size(); ++a) {
    REQUIRE(spk[a].envelope.size() == size_t(kNumHarmonics));
    CHECK(spk[a].base_f0 >= 90.0);
    CHECK(spk[a].base_f0 <= 300.0);
    for (size_t b = a + 1; b < spk.size(); ++b) {
      double linf = 0.0;
      for (int h = 0; h < kNumHarmonics; ++h) {
        linf = std::max(linf,
                        std::fabs(spk[a].envelope[h] - spk[b].envelope[h]));
      }
      CHECK(linf >= 0.1);
    }
  }
}

TEST_CASE("utterances cluster by speaker in average-mel space") {
  TempDir d("corpus_cent");
  CorpusManifest m = generate_corpus(6, 6, 31, d.str());
  std::map<int, std::vector<std::vector<double>>> by_spk;
  std::vector<std::pair<int, std::vector<double>>> feats;
  for (const auto& e : m.entries) {
    Waveform w = read_wav(d.str() + "/" + e.path);
    Tensor mel = mel_spectrogram(w);
    std::vector<double> avg(kNumMels, 0.0);
    for (size_t t = 0; t < mel.dim(0); ++t) {
      for (size_t j = 0; j < kNumMels; ++j) avg[j] += mel.at(t, j);
    }
    for (double& v : avg) v /= double(mel.dim(0));
    by_spk[e.speaker_id].push_back(avg);
    feats.push_back({e.speaker_id, avg});
  }
  // Leave-one-out nearest centroid must recover the speaker > 90%.
  int hits = 0;
  for (const auto& [spk, f] : feats) {
    int best = -1;
    double best_d = 1e18;
    for (const auto& [cs, members] : by_spk) {
      std::vector<double> cent(kNumMels, 0.0);
      int n = 0;
      for (const auto& mvec : members) {
        if (cs == spk && mvec == f) continue;  // leave self out
        for (size_t j = 0; j < kNumMels; ++j) cent[j] += mvec[j];
        ++n;
      }
      if (n == 0) continue;
      double dist = 0.0;
      for (size_t j = 0; j < kNumMels; ++j) {
        double z = f[j] - cent[j] / n;
        dist += z * z;
      }
      if (dist < best_d) {
        best_d = dist;
        best = cs;
      }
    }
    hits += (best == spk);
  }
  CHECK(double(hits) / double(feats.size()) > 0.9);
}

TEST_CASE("frame symbols are recoverable from mel by a linear probe") {
  TempDir d("corpus_probe");
  CorpusManifest m = generate_corpus(8, 12, 42, d.str());
  auto aligns = read_alignments(d.file("alignments.tsv"));
  std::map<std::string, Alignment> amap(aligns.begin(), aligns.end());

  // Train on non-dev utterances, score on unseen dev utterances -- the same
  // protocol the evaluation recognizer reports as mel_probe. Utterance-mean
  // subtraction keeps the probe reading symbol shape, not speaker envelope.
  ProbeDataset train, dev;
  for (const auto& e : m.entries) {
    Waveform w = read_wav(d.str() + "/" + e.path);
    Tensor mel = mel_spectrogram(w);
    const Alignment& al = amap.at(e.utt_id);
    REQUIRE(al.symbols.size() == mel.dim(0));
    std::vector<double> mean(kNumMels, 0.0);
    for (size_t t = 0; t < mel.dim(0); ++t) {
      for (size_t j = 0; j < kNumMels; ++j) mean[j] += mel.at(t, j);
    }
    for (double& v : mean) v /= double(mel.dim(0));
    ProbeDataset& dst = e.split == "dev" ? dev : train;
    for (size_t t = 0; t < mel.dim(0); t += 2) {
      std::vector<double> row(kNumMels);
      for (size_t j = 0; j < kNumMels; ++j) row[j] = mel.at(t, j) - mean[j];
      dst.x.push_back(std::move(row));
      dst.y.push_back(al.symbols[t]);
    }
  }
  REQUIRE(!dev.x.empty());
  LinearClassifier clf = train_classifier(train, kNumSymbols, 500, 1.0);
  double acc = classifier_accuracy(clf, dev);
  double base = majority_baseline(dev.y);
  MESSAGE("mel probe: ", acc, " (majority ", base, ")");
  CHECK(acc > 0.8);
  CHECK(acc > base + 0.2);
}

TEST_CASE("manifest and alignments round-trip") {
  TempDir d("corpus_rt");
  CorpusManifest m = generate_corpus(4, 2, 77, d.str());
  write_manifest(m, d.file("copy.tsv"));
  CorpusManifest r = read_manifest(d.file("copy.tsv"));
  REQUIRE(r.entries.size() == m.entries.size());
  for (size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(r.entries[i].utt_id == m.entries[i].utt_id);
    CHECK(r.entries[i].speaker_id == m.entries[i].speaker_id);
    CHECK(r.entries[i].split == m.entries[i].split);
    CHECK(r.entries[i].symbols == m.entries[i].symbols);
    CHECK(r.entries[i].path == m.entries[i].path);
  }
  auto aligns = read_alignments(d.file("alignments.tsv"));
  CHECK(aligns.size() == m.entries.size());
  for (const auto& [utt, al] : aligns) {
    CHECK(al.symbols.size() == al.f0.size());
    CHECK(!al.symbols.empty());
  }
  CHECK_THROWS_AS(read_manifest(d.file("absent.tsv")), DataError);
  CHECK_THROWS_AS(read_alignments(d.file("absent.tsv")), DataError);
}

TEST_CASE("wav io: quantization is idempotent, errors are typed") {
  TempDir d("wavio");
  Waveform w = synthesize_utterance(plain_speaker(), one_segment(4, 150.0), 9);
  write_wav(w, d.file("a.wav"));
  Waveform r1 = read_wav(d.file("a.wav"));
  REQUIRE(r1.samples.size() == w.samples.size());
  CHECK(r1.sample_rate == kSampleRate);
  double max_err = 0.0;
  for (size_t i = 0; i < w.samples.size(); ++i) {
    max_err = std::max(max_err, std::fabs(r1.samples[i] - w.samples[i]));
  }
  CHECK(max_err <= 1.0 / 32767.0);
  write_wav(r1, d.file("b.wav"));
  CHECK(file_bytes(d.file("a.wav")) == file_bytes(d.file("b.wav")));

  CHECK_THROWS_AS(read_wav(d.file("missing.wav")), DataError);
  std::ofstream garbage(d.file("junk.wav"), std::ios::binary);
  garbage << "not really a wav file";
  garbage.close();
  CHECK_THROWS_AS(read_wav(d.file("junk.wav")), DataError);
}
