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
#ifndef MIXVC_SYNTH_HPP_
#define MIXVC_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace mixvc {

constexpr int kSampleRate = 16000;
constexpr int kNumHarmonics = 16;
constexpr int kNumSymbols = 12;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
};

// A synthetic voice: fundamental, per-harmonic spectral envelope, jitter.
struct SpeakerSpec {
  int speaker_id = 0;
  double base_f0 = 220.0;                // Hz, in [90, 300]
  std::vector<double> envelope;          // kNumHarmonics gains in [0, 1]
  double f0_jitter = 0.0;                // fraction in [0, 0.05]
};

struct Segment {
  int symbol = 0;          // in [0, kNumSymbols)
  double dur_ms = 100.0;   // in [80, 240]
  double f0_offset = 0.0;  // semitones in [-4, +4]
};

struct ContentScript {
  std::vector<Segment> segments;  // at least 2 for corpus utterances
};

// Fixed per-symbol harmonic amplitude pattern (global constant table).
const std::vector<double>& symbol_pattern(int symbol);

// Additive-harmonic rendering. Frame rate is 100 Hz: each segment becomes
// round(dur/10ms) frames; per frame f0 = base * 2^(offset/12) * jitter term.
// Deterministic given (spk, script, seed). Peak-normalized to 0.75; an
// all-zero envelope yields exact silence.
Waveform synthesize_utterance(const SpeakerSpec& spk,
                              const ContentScript& script, uint64_t seed);

// Same rendering plus the per-frame ground truth used for alignments.
struct UtteranceTruth {
  Waveform wave;
  std::vector<double> f0_frames;  // one per 10 ms synthesis frame
  std::vector<int> sym_frames;
};
UtteranceTruth synthesize_with_truth(const SpeakerSpec& spk,
                                     const ContentScript& script,
                                     uint64_t seed);

// Ground-truth label for analysis frame t (25 ms window, 10 ms hop): the
// synthesis frame at the window center.
int frame_label(const std::vector<int>& sym_frames, size_t mel_frame);

struct ManifestEntry {
  std::string utt_id;
  int speaker_id = 0;
  std::string split;  // train | dev | test
  std::vector<int> symbols;
  std::string path;   // relative to the manifest directory
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::string root;  // directory holding manifest.tsv
};

// Generates speakers, scripts, audio files, manifest.tsv and alignments.tsv
// under out_dir. Test split holds out max(1, n_speakers/4) speakers never
// seen in train; each train speaker's last utterance goes to dev when
// n_utts_per_speaker >= 3. Deterministic given the seed.
CorpusManifest generate_corpus(int n_speakers, int n_utts_per_speaker,
                               uint64_t seed, const std::string& out_dir);

// The deterministic speaker table used by generate_corpus, exposed so tests
// and experiments can rebuild ground truth without re-reading files.
std::vector<SpeakerSpec> corpus_speakers(int n_speakers, uint64_t seed);

CorpusManifest read_manifest(const std::string& path);
void write_manifest(const CorpusManifest& m, const std::string& path);

// alignments.tsv: utt_id<TAB>per-mel-frame symbols (comma)<TAB>per-frame f0.
struct Alignment {
  std::vector<int> symbols;  // one per mel frame
  std::vector<double> f0;
};
std::vector<std::pair<std::string, Alignment>> read_alignments(
    const std::string& path);

Waveform read_wav(const std::string& path);
void write_wav(const Waveform& w, const std::string& path);

}  // namespace mixvc

#endif  // MIXVC_SYNTH_HPP_
