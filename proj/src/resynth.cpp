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
#include "mixvc/resynth.hpp"

#include <algorithm>
#include <cmath>

#include "mixvc/errors.hpp"

namespace mixvc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Linear interpolation of per-filter energies between mel center
// frequencies; zero outside the filterbank span.
double envelope_at(const std::vector<double>& centers,
                   const std::vector<double>& energy, double f) {
  if (f <= centers.front() || f >= centers.back()) return 0.0;
  size_t m = size_t(std::upper_bound(centers.begin(), centers.end(), f) -
                    centers.begin()) - 1;
  double w = (f - centers[m]) / (centers[m + 1] - centers[m]);
  return (1.0 - w) * energy[m] + w * energy[m + 1];
}

}  // namespace

Waveform resynthesize(const Tensor& logmel) {
  if (logmel.shape.size() != 2 || logmel.shape[1] != kNumMels)
    throw ShapeError("resynthesize expects a [T][" +
                     std::to_string(kNumMels) + "] log-mel matrix");
  const size_t T = logmel.shape[0];
  const std::vector<double>& centers = mel_center_frequencies();
  PitchContour pitch = f0_from_mel(logmel);

  std::vector<std::vector<double>> energy(T,
                                          std::vector<double>(kNumMels, 0.0));
  for (size_t t = 0; t < T; ++t)
    for (size_t m = 0; m < kNumMels; ++m)
      energy[t][m] =
          std::max(std::exp(logmel.at(t, m)) - kLogFloor, 0.0);

  // Per-frame harmonic targets: amplitude 0 for unvoiced frames, pitch held
  // through them so phase stays continuous across short gaps.
  constexpr size_t kBank = 24;
  std::vector<double> frame_f0(T, 0.0);
  std::vector<std::vector<double>> amp(T, std::vector<double>(kBank, 0.0));
  double held = 0.0;
  for (size_t t = 0; t < T; ++t) {
    if (pitch.voiced[t]) held = pitch.f0[t];
    frame_f0[t] = held;
    if (!pitch.voiced[t] || held <= 0) continue;
    for (size_t h = 0; h < kBank; ++h) {
      double f = double(h + 1) * held;
      if (f >= 7600.0) break;
      amp[t][h] = std::sqrt(envelope_at(centers, energy[t], f));
    }
  }
  // Backfill leading unvoiced frames so the bank has a pitch from sample 0.
  for (size_t t = T; t-- > 0;) {
    if (frame_f0[t] == 0.0 && t + 1 < T) frame_f0[t] = frame_f0[t + 1];
  }

  const size_t n = (T - 1) * kHopLength + kWindowLength;
  const double center0 = double(kWindowLength) / 2.0;
  Waveform out;
  out.samples.assign(n, 0.0);
  std::vector<double> phase(kBank, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double p = (double(i) - center0) / double(kHopLength);
    p = std::clamp(p, 0.0, double(T - 1));
    size_t t0 = size_t(std::floor(p));
    size_t t1 = std::min(t0 + 1, T - 1);
    double w = p - double(t0);
    double f0 = (1.0 - w) * frame_f0[t0] + w * frame_f0[t1];
    double s = 0.0;
    for (size_t h = 0; h < kBank; ++h) {
      double a = (1.0 - w) * amp[t0][h] + w * amp[t1][h];
      if (a > 0.0) s += a * std::sin(phase[h]);
      phase[h] += kTwoPi * double(h + 1) * f0 / double(kSampleRate);
      if (phase[h] > kTwoPi) phase[h] -= kTwoPi * std::floor(phase[h] / kTwoPi);
    }
    out.samples[i] = s;
  }
  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::fabs(s));
  if (peak > 0.0)
    for (double& s : out.samples) s *= 0.75 / peak;
  return out;
}

}  // namespace mixvc
