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
#ifndef MIXVC_FRONTEND_HPP_
#define MIXVC_FRONTEND_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mixvc/synth.hpp"
#include "mixvc/tensor.hpp"

namespace mixvc {

constexpr size_t kWindowLength = 400;  // 25 ms at 16 kHz
constexpr size_t kHopLength = 160;     // 10 ms
constexpr size_t kFftSize = 512;
constexpr size_t kNumMels = 40;
constexpr double kLogFloor = 1e-8;

struct PitchContour {
  std::vector<double> f0;       // Hz; 0 where unvoiced
  std::vector<uint8_t> voiced;  // f0[t] > 0 iff voiced[t]
};

// Number of analysis frames: floor((n - window)/hop) + 1.
size_t frame_count(size_t n_samples);

// Log-mel spectrogram [T][40]: Hann window 400, hop 160, 512-point FFT,
// 40 triangular mel filters spanning 0..8 kHz, natural log floored at 1e-8.
Tensor mel_spectrogram(const Waveform& wave);

// Per-frame normalized autocorrelation pitch tracker over 70..400 Hz.
// A frame is voiced iff the autocorrelation peak is >= voicing_threshold and
// frame RMS >= rms_gate; the lag is refined by parabolic interpolation.
PitchContour estimate_f0(const Waveform& wave, double voicing_threshold = 0.5,
                         double rms_gate = 1e-4);

// Pitch directly from a log-mel matrix, for converted utterances that exist
// only in the mel domain. Scores a comb of harmonic positions against
// half-offset positions on a triangular-filter reconstruction of the
// spectrum, restricts the candidate band around the utterance median, then
// median-smooths. Search band 165..400 Hz.
PitchContour f0_from_mel(const Tensor& logmel, double voicing_threshold = 0.3,
                         double energy_gate = 1e-6);

// Center frequencies of the mel filterbank.
const std::vector<double>& mel_center_frequencies();

// Debug/feature-dump format: one frame per line, space-separated decimals
// with round-trip precision.
void write_matrix(const Tensor& m, const std::string& path);
Tensor read_matrix(const std::string& path);

}  // namespace mixvc

#endif  // MIXVC_FRONTEND_HPP_
