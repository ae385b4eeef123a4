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
#include <vector>

#include "doctest.h"
#include "mixvc/eval.hpp"
#include "mixvc/frontend.hpp"
#include "mixvc/synth.hpp"
#include "testutil.hpp"

using namespace mixvc;
using testutil::TempDir;

namespace {

SpeakerSpec test_speaker(double base_f0) {
  SpeakerSpec s;
  s.base_f0 = base_f0;
  s.envelope.assign(kNumHarmonics, 0.0);
  for (int h = 0; h < kNumHarmonics; ++h) s.envelope[h] = 1.0 / (1.0 + h);
  s.f0_jitter = 0.0;
  return s;
}

ContentScript steady_script(int symbol, int n_segments = 4) {
  ContentScript c;
  for (int i = 0; i < n_segments; ++i) c.segments.push_back({symbol, 200.0, 0.0});
  return c;
}

Waveform sine(double freq, double seconds, double amp = 0.4) {
  Waveform w;
  size_t n = size_t(seconds * kSampleRate);
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq * double(i) / kSampleRate);
  }
  return w;
}

PitchContour truth_contour(const UtteranceTruth& t) {
  PitchContour pc;
  pc.f0 = t.f0_frames;
  pc.voiced.resize(t.f0_frames.size());
  for (size_t i = 0; i < pc.f0.size(); ++i) pc.voiced[i] = pc.f0[i] > 0.0;
  return pc;
}

}  // namespace

TEST_CASE("frame count follows the window/hop arithmetic") {
  CHECK(frame_count(0) == 0);
  CHECK(frame_count(399) == 0);
  CHECK(frame_count(400) == 1);
  CHECK(frame_count(559) == 1);
  CHECK(frame_count(560) == 2);
  CHECK(frame_count(400 + 160 * 99) == 100);
}

TEST_CASE("mel spectrogram shape, floor, and tone response") {
  Waveform silence;
  silence.samples.assign(2000, 0.0);
  Tensor m0 = mel_spectrogram(silence);
  CHECK(m0.dim(0) == frame_count(2000));
  CHECK(m0.dim(1) == kNumMels);
  for (double v : m0.data) CHECK(v == doctest::Approx(std::log(kLogFloor)));

  // A pure tone concentrates energy in the filter covering its frequency.
  const std::vector<double>& centers = mel_center_frequencies();
  REQUIRE(centers.size() == kNumMels);
  for (double freq : {500.0, 1000.0, 3000.0}) {
    Tensor m = mel_spectrogram(sine(freq, 0.3));
    size_t t = m.dim(0) / 2;
    size_t argmax = 0;
    for (size_t j = 1; j < kNumMels; ++j) {
      if (m.at(t, j) > m.at(t, argmax)) argmax = j;
    }
    size_t nearest = 0;
    for (size_t j = 1; j < kNumMels; ++j) {
      if (std::fabs(centers[j] - freq) < std::fabs(centers[nearest] - freq)) {
        nearest = j;
      }
    }
    CHECK(std::llabs(int64_t(argmax) - int64_t(nearest)) <= 1);
  }
}

TEST_CASE("mel filter centers are monotone within the band") {
  const std::vector<double>& centers = mel_center_frequencies();
  REQUIRE(centers.size() == kNumMels);
  CHECK(centers.front() > 0.0);
  CHECK(centers.back() < 8000.0);
  for (size_t i = 1; i < centers.size(); ++i) {
    CHECK(centers[i] > centers[i - 1]);
  }
}

TEST_CASE("autocorrelation tracker recovers steady fundamentals") {
  for (double f0 : {180.0, 220.0, 291.0}) {
    Waveform w = synthesize_utterance(test_speaker(f0), steady_script(0), 3);
    PitchContour pc = estimate_f0(w);
    std::vector<double> voiced;
    for (size_t t = 0; t < pc.f0.size(); ++t) {
      if (pc.voiced[t]) voiced.push_back(pc.f0[t]);
    }
    REQUIRE(voiced.size() > 30);
    std::sort(voiced.begin(), voiced.end());
    CHECK(voiced[voiced.size() / 2] == doctest::Approx(f0).epsilon(0.01));
  }
}

TEST_CASE("tracker marks silence and gated frames unvoiced") {
  Waveform silence;
  silence.samples.assign(4000, 0.0);
  PitchContour pc = estimate_f0(silence);
  for (size_t t = 0; t < pc.f0.size(); ++t) {
    CHECK(pc.voiced[t] == 0);
    CHECK(pc.f0[t] == 0.0);
  }
  // An aggressive RMS gate silences a quiet but periodic signal.
  Waveform quiet = sine(200.0, 0.2, 1e-5);
  PitchContour gated = estimate_f0(quiet, 0.5, 1e-3);
  for (size_t t = 0; t < gated.f0.size(); ++t) CHECK(gated.voiced[t] == 0);

  Waveform wrong_rate = sine(200.0, 0.1);
  wrong_rate.sample_rate = 8000;
  CHECK_THROWS_AS(estimate_f0(wrong_rate), UsageError);
}

TEST_CASE("tracker follows a moving contour with jitter") {
  SpeakerSpec spk = test_speaker(240.0);
  spk.f0_jitter = 0.005;
  ContentScript sc;
  sc.segments = {{1, 180.0, -2.0}, {4, 200.0, 0.0}, {7, 180.0, 2.0},
                 {2, 200.0, 1.0}};
  UtteranceTruth truth = synthesize_with_truth(spk, sc, 21);
  PitchContour est = estimate_f0(truth.wave);
  double corr = pitch_correlation(truth_contour(truth), est);
  MESSAGE("waveform-domain f0 correlation: ", corr);
  CHECK(corr > 0.9);
}

TEST_CASE("mel-domain pitch agrees with the synthesis ground truth") {
  SpeakerSpec spk = test_speaker(250.0);
  spk.f0_jitter = 0.005;
  ContentScript sc;
  sc.segments = {{3, 200.0, -1.5}, {9, 180.0, 1.0}, {5, 220.0, -0.5},
                 {11, 180.0, 2.0}};
  UtteranceTruth truth = synthesize_with_truth(spk, sc, 33);
  Tensor mel = mel_spectrogram(truth.wave);
  PitchContour est = f0_from_mel(mel);
  PitchContour ref = truth_contour(truth);
  REQUIRE(est.f0.size() == ref.f0.size());

  double corr = pitch_correlation(ref, est);
  MESSAGE("mel-domain f0 correlation: ", corr);
  CHECK(corr > 0.9);

  std::vector<double> rel_errs;
  for (size_t t = 0; t < est.f0.size(); ++t) {
    if (est.voiced[t] && ref.voiced[t]) {
      rel_errs.push_back(std::fabs(est.f0[t] - ref.f0[t]) / ref.f0[t]);
    }
  }
  REQUIRE(rel_errs.size() > 30);
  std::sort(rel_errs.begin(), rel_errs.end());
  CHECK(rel_errs[rel_errs.size() / 2] < 0.02);

  for (size_t t = 0; t < est.f0.size(); ++t) {
    if (est.voiced[t]) {
      CHECK(est.f0[t] >= 165.0);
      CHECK(est.f0[t] <= 400.0);
    }
  }
  CHECK_THROWS_AS(f0_from_mel(Tensor({3, 7})), ShapeError);
}

TEST_CASE("matrix files round-trip exactly") {
  TempDir d("matrix");
  Rng rng(99);
  Tensor m = Tensor::randn({7, 5}, rng);
  m.data[3] = 1e-17;
  m.data[8] = -4.0 / 3.0;
  write_matrix(m, d.file("m.txt"));
  Tensor r = read_matrix(d.file("m.txt"));
  REQUIRE(r.shape == m.shape);
  for (size_t i = 0; i < m.numel(); ++i) CHECK(r.data[i] == m.data[i]);

  CHECK_THROWS_AS(read_matrix(d.file("missing.txt")), DataError);
  {
    std::ofstream f(d.file("ragged.txt"));
    f << "1 2 3\n1 2\n";
  }
  CHECK_THROWS_AS(read_matrix(d.file("ragged.txt")), DataError);
  {
    std::ofstream f(d.file("empty.txt"));
  }
  CHECK_THROWS_AS(read_matrix(d.file("empty.txt")), DataError);
}
