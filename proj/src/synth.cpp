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
#include "mixvc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixvc/errors.hpp"
#include "mixvc/frontend.hpp"
#include "mixvc/rng.hpp"

namespace mixvc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFrameMs = 10.0;
constexpr double kMaxUttSeconds = 10.0;

void validate_speaker(const SpeakerSpec& spk) {
  if (spk.base_f0 < 90.0 || spk.base_f0 > 300.0) {
    throw UsageError("speaker base_f0 out of [90, 300] Hz");
  }
  if (spk.envelope.size() != kNumHarmonics) {
    throw UsageError("speaker envelope must have 16 gains");
  }
  for (double g : spk.envelope) {
    if (g < 0.0 || g > 1.0) throw UsageError("envelope gain out of [0, 1]");
  }
  if (spk.f0_jitter < 0.0 || spk.f0_jitter > 0.05) {
    throw UsageError("f0_jitter out of [0, 0.05]");
  }
}

void validate_script(const ContentScript& script) {
  if (script.segments.empty()) throw UsageError("empty content script");
  double total_ms = 0.0;
  for (const Segment& s : script.segments) {
    if (s.symbol < 0 || s.symbol >= kNumSymbols) {
      throw UsageError("symbol id out of range");
    }
    if (s.dur_ms < 80.0 || s.dur_ms > 240.0) {
      throw UsageError("segment duration out of [80, 240] ms");
    }
    if (s.f0_offset < -4.0 || s.f0_offset > 4.0) {
      throw UsageError("f0 offset out of [-4, +4] semitones");
    }
    total_ms += s.dur_ms;
  }
  if (total_ms > kMaxUttSeconds * 1000.0) {
    throw UsageError("utterance longer than 10 s");
  }
}

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return out;
}

}  // namespace

const std::vector<double>& symbol_pattern(int symbol) {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t(kNumSymbols);
    for (int k = 0; k < kNumSymbols; ++k) {
      Rng r(0xC0FFEEULL + 131ULL * static_cast<uint64_t>(k));
      t[k].resize(kNumHarmonics);
      for (int h = 0; h < kNumHarmonics; ++h) {
        t[k][h] = 0.25 + 0.75 * r.uniform();
      }
    }
    return t;
  }();
  if (symbol < 0 || symbol >= kNumSymbols) {
    throw UsageError("symbol id out of range");
  }
  return table[symbol];
}

UtteranceTruth synthesize_with_truth(const SpeakerSpec& spk,
                                     const ContentScript& script,
                                     uint64_t seed) {
  validate_speaker(spk);
  validate_script(script);
  Rng rng(seed);

  UtteranceTruth out;
  for (const Segment& seg : script.segments) {
    int nfr = std::max(1, static_cast<int>(std::lround(seg.dur_ms / kFrameMs)));
    double f0_nominal = spk.base_f0 * std::pow(2.0, seg.f0_offset / 12.0);
    for (int i = 0; i < nfr; ++i) {
      double j = 1.0 + spk.f0_jitter * (2.0 * rng.uniform() - 1.0);
      out.f0_frames.push_back(f0_nominal * j);
      out.sym_frames.push_back(seg.symbol);
    }
  }

  size_t n_frames = out.f0_frames.size();
  size_t n = n_frames * kHopLength + (kWindowLength - kHopLength);
  std::vector<double>& x = out.wave.samples;
  x.assign(n, 0.0);

  double phase[kNumHarmonics] = {0.0};
  double peak = 0.0;
  for (size_t t = 0; t < n; ++t) {
    size_t fr = std::min(t / kHopLength, n_frames - 1);
    double f0 = out.f0_frames[fr];
    const std::vector<double>& pat = symbol_pattern(out.sym_frames[fr]);
    double s = 0.0;
    for (int h = 0; h < kNumHarmonics; ++h) {
      double fh = (h + 1) * f0;
      phase[h] += 2.0 * kPi * fh / kSampleRate;
      if (phase[h] > 2.0 * kPi) phase[h] -= 2.0 * kPi;
      if (fh >= kSampleRate / 2.0) continue;
      s += spk.envelope[h] * pat[h] * std::sin(phase[h]);
    }
    x[t] = s;
    peak = std::max(peak, std::fabs(s));
  }
  if (peak > 1e-9) {
    double g = 0.75 / peak;
    for (double& v : x) v *= g;
  } else {
    std::fill(x.begin(), x.end(), 0.0);
  }
  return out;
}

Waveform synthesize_utterance(const SpeakerSpec& spk,
                              const ContentScript& script, uint64_t seed) {
  return synthesize_with_truth(spk, script, seed).wave;
}

int frame_label(const std::vector<int>& sym_frames, size_t mel_frame) {
  if (sym_frames.empty()) throw UsageError("empty frame labels");
  size_t center = std::min(mel_frame + 1, sym_frames.size() - 1);
  return sym_frames[center];
}

std::vector<SpeakerSpec> corpus_speakers(int n_speakers, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5EA4E5));
  std::vector<SpeakerSpec> speakers;
  speakers.reserve(n_speakers);
  for (int s = 0; s < n_speakers; ++s) {
    SpeakerSpec spk;
    spk.speaker_id = s;
    spk.f0_jitter = 0.005;
    // Resample the envelope until it is far enough from every earlier
    // speaker; guarantees the distinctness invariant.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      spk.envelope.assign(kNumHarmonics, 0.0);
      for (int h = 0; h < kNumHarmonics; ++h) {
        spk.envelope[h] = 0.05 + 0.95 * rng.uniform();
      }
      double min_linf = 1e9;
      for (const SpeakerSpec& prev : speakers) {
        double linf = 0.0;
        for (int h = 0; h < kNumHarmonics; ++h) {
          linf = std::max(linf,
                          std::fabs(spk.envelope[h] - prev.envelope[h]));
        }
        min_linf = std::min(min_linf, linf);
      }
      if (min_linf >= 0.15) break;
    }
    spk.base_f0 = 230.0 + 70.0 * rng.uniform();
    speakers.push_back(spk);
  }
  return speakers;
}

CorpusManifest generate_corpus(int n_speakers, int n_utts_per_speaker,
                               uint64_t seed, const std::string& out_dir) {
  if (n_speakers < 4) throw UsageError("need at least 4 speakers");
  if (n_utts_per_speaker < 1) throw UsageError("need at least 1 utterance");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) throw DataError("cannot create corpus directory: " + out_dir);

  std::vector<SpeakerSpec> speakers = corpus_speakers(n_speakers, seed);
  int n_test_speakers = std::max(1, n_speakers / 4);
  int first_test = n_speakers - n_test_speakers;

  CorpusManifest m;
  m.root = out_dir;
  std::ofstream align(fs::path(out_dir) / "alignments.tsv", std::ios::trunc);
  if (!align) throw DataError("cannot write alignments.tsv in " + out_dir);
  align.precision(17);

  for (int s = 0; s < n_speakers; ++s) {
    for (int u = 0; u < n_utts_per_speaker; ++u) {
      Rng rng(mix_seed(seed, 0x5C1297, static_cast<uint64_t>(s) * 1000 + u));
      ContentScript script;
      int n_segments = 6 + static_cast<int>(rng.uniform() * 5.0);
      for (int g = 0; g < n_segments; ++g) {
        Segment seg;
        seg.symbol = static_cast<int>(rng.uniform() * kNumSymbols);
        seg.dur_ms = 100.0 + std::floor(rng.uniform() * 140.0);
        seg.f0_offset = -2.0 + 4.0 * rng.uniform();
        script.segments.push_back(seg);
      }
      uint64_t synth_seed =
          mix_seed(seed, 0x0A0D10, static_cast<uint64_t>(s) * 1000 + u);
      UtteranceTruth truth = synthesize_with_truth(speakers[s], script,
                                                   synth_seed);

      ManifestEntry e;
      e.utt_id = "spk" + two_digits(s) + "_utt" + two_digits(u);
      e.speaker_id = s;
      if (s >= first_test) {
        e.split = "test";
      } else if (n_utts_per_speaker >= 3 && u == n_utts_per_speaker - 1) {
        e.split = "dev";
      } else {
        e.split = "train";
      }
      for (const Segment& seg : script.segments) {
        e.symbols.push_back(seg.symbol);
      }
      e.path = "wav/" + e.utt_id + ".wav";
      write_wav(truth.wave, (fs::path(out_dir) / e.path).string());

      // One analysis frame per synthesis frame: the rendered wave has
      // n_frames*hop + (window-hop) samples, so floor((n-window)/hop)+1
      // equals n_frames exactly.
      size_t t_mel = truth.f0_frames.size();
      align << e.utt_id << '\t';
      for (size_t t = 0; t < t_mel; ++t) {
        if (t) align << ',';
        align << frame_label(truth.sym_frames, t);
      }
      align << '\t';
      for (size_t t = 0; t < t_mel; ++t) {
        if (t) align << ',';
        size_t center = std::min(t + 1, truth.f0_frames.size() - 1);
        align << truth.f0_frames[center];
      }
      align << '\n';

      m.entries.push_back(std::move(e));
    }
  }
  write_manifest(m, (fs::path(out_dir) / "manifest.tsv").string());
  return m;
}

void write_manifest(const CorpusManifest& m, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write manifest: " + path);
  for (const ManifestEntry& e : m.entries) {
    os << e.utt_id << '\t' << e.speaker_id << '\t' << e.split << '\t';
    for (size_t i = 0; i < e.symbols.size(); ++i) {
      if (i) os << ',';
      os << e.symbols[i];
    }
    os << '\t' << e.path << '\n';
  }
}

CorpusManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest: " + path);
  CorpusManifest m;
  m.root = std::filesystem::path(path).parent_path().string();
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 5) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": expected 5 tab-separated fields");
    }
    ManifestEntry e;
    e.utt_id = f[0];
    try {
      e.speaker_id = std::stoi(f[1]);
    } catch (...) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": bad speaker id");
    }
    e.split = f[2];
    if (e.split != "train" && e.split != "dev" && e.split != "test") {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": bad split '" + e.split + "'");
    }
    std::stringstream ss(f[3]);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        e.symbols.push_back(std::stoi(tok));
      } catch (...) {
        throw DataError("manifest line " + std::to_string(line_no) +
                        ": bad symbol list");
      }
    }
    e.path = f[4];
    m.entries.push_back(std::move(e));
  }
  return m;
}

std::vector<std::pair<std::string, Alignment>> read_alignments(
    const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open alignments: " + path);
  std::vector<std::pair<std::string, Alignment>> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 3) {
      throw DataError("alignments line " + std::to_string(line_no) +
                      ": expected 3 tab-separated fields");
    }
    Alignment a;
    std::stringstream ss(f[1]);
    std::string tok;
    while (std::getline(ss, tok, ',')) a.symbols.push_back(std::stoi(tok));
    std::stringstream sf(f[2]);
    while (std::getline(sf, tok, ',')) a.f0.push_back(std::stod(tok));
    out.emplace_back(f[0], std::move(a));
  }
  return out;
}

}  // namespace mixvc
