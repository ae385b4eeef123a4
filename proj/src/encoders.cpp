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
#include "mixvc/encoders.hpp"

#include <cmath>
#include <filesystem>

#include "mixvc/graph.hpp"
#include "mixvc/nn.hpp"

namespace mixvc {

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

RandomFrozenEncoder::RandomFrozenEncoder(uint64_t seed, size_t layers,
                                         size_t dim)
    : layers_(layers), dim_(dim) {
  if (layers < 1) throw UsageError("content encoder needs at least 1 block");
  Rng rng(mix_seed(seed, 0xE4C0DE));
  nn::init_linear(params_, "content_encoder.proj", kNumMels, dim,
                  ParamGroup::frozen, rng);
  for (size_t l = 0; l < layers; ++l) {
    nn::init_transformer_block(params_,
                               "content_encoder.block" + std::to_string(l),
                               dim, 2, 4 * dim, ParamGroup::frozen, rng);
  }
}

Tensor RandomFrozenEncoder::encode(const Waveform& wave,
                                   const std::string&) const {
  Tensor mel = mel_spectrogram(wave);
  size_t t_frames = mel.dim(0);
  Graph g;
  TapedParams tp(params_);
  Node* x = nn::linear(g, tp, "content_encoder.proj", g.input("mel", mel));
  Tensor stack({layers_ + 1, t_frames, dim_});
  auto put_layer = [&](size_t l, const Tensor& v) {
    std::copy(v.data.begin(), v.data.end(),
              stack.data.begin() +
                  static_cast<long>(l * t_frames * dim_));
  };
  put_layer(0, x->value);
  for (size_t l = 0; l < layers_; ++l) {
    x = nn::transformer_block(g, tp,
                              "content_encoder.block" + std::to_string(l), x,
                              2);
    put_layer(l + 1, x->value);
  }
  return stack;
}

Tensor structured_encode(const Tensor& speaker_features,
                         const Tensor& content_features,
                         const StructuredEncoderProfile& profile,
                         uint64_t seed) {
  if (speaker_features.rank() != 2 || content_features.rank() != 2 ||
      !speaker_features.same_shape(content_features)) {
    throw ShapeError("structured_encode: truth feature shapes must match");
  }
  if (profile.alpha.size() != profile.beta.size() || profile.alpha.empty()) {
    throw ShapeError("structured_encode: alpha/beta must have equal size");
  }
  if (profile.noise_sigma < 0.0) {
    throw UsageError("structured_encode: negative noise sigma");
  }
  size_t n_layers = profile.alpha.size();
  size_t t_frames = content_features.dim(0), dim = content_features.dim(1);
  Tensor stack({n_layers, t_frames, dim});
  for (size_t l = 0; l < n_layers; ++l) {
    Rng noise(mix_seed(seed, l));
    for (size_t t = 0; t < t_frames; ++t) {
      for (size_t d = 0; d < dim; ++d) {
        double v = profile.alpha[l] * content_features.at(t, d) +
                   profile.beta[l] * speaker_features.at(t, d);
        if (profile.noise_sigma > 0.0) {
          v += profile.noise_sigma * noise.normal();
        }
        stack.at(l, t, d) = v;
      }
    }
  }
  return stack;
}

StructuredCorpusEncoder::StructuredCorpusEncoder(
    const CorpusManifest& manifest, const StructuredEncoderProfile& profile,
    uint64_t seed, size_t dim)
    : profile_(profile), seed_(seed), dim_(dim) {
  if (profile.alpha.size() != profile.beta.size() ||
      profile.alpha.size() < 2) {
    throw UsageError("structured profile needs alpha/beta of equal size >= 2");
  }
  namespace fs = std::filesystem;
  std::string align_path = (fs::path(manifest.root) / "alignments.tsv").string();
  for (auto& [id, a] : read_alignments(align_path)) {
    alignments_.emplace(id, std::move(a));
  }
  int max_speaker = 0;
  for (const ManifestEntry& e : manifest.entries) {
    utt_speaker_[e.utt_id] = e.speaker_id;
    max_speaker = std::max(max_speaker, e.speaker_id);
  }
  Rng sym_rng(mix_seed(seed, 0x51AB1E));
  params_.add("content_encoder.symbol_table",
              Tensor::randn({static_cast<size_t>(kNumSymbols), dim}, sym_rng),
              ParamGroup::frozen);
  Rng spk_rng(mix_seed(seed, 0x5BEA4E));
  params_.add("content_encoder.speaker_table",
              Tensor::randn({static_cast<size_t>(max_speaker + 1), dim},
                            spk_rng),
              ParamGroup::frozen);
  params_.add("content_encoder.alpha", Tensor::from_vector(profile.alpha),
              ParamGroup::frozen);
  params_.add("content_encoder.beta", Tensor::from_vector(profile.beta),
              ParamGroup::frozen);
  params_.add("content_encoder.sigma",
              Tensor::from_vector({profile.noise_sigma}), ParamGroup::frozen);
}

Tensor StructuredCorpusEncoder::encode(const Waveform& wave,
                                       const std::string& utt_id) const {
  auto ait = alignments_.find(utt_id);
  auto sit = utt_speaker_.find(utt_id);
  if (ait == alignments_.end() || sit == utt_speaker_.end()) {
    throw DataError("no ground-truth alignment for utterance '" + utt_id +
                    "'");
  }
  size_t t_frames = frame_count(wave.samples.size());
  const Alignment& align = ait->second;
  if (align.symbols.size() != t_frames) {
    throw DataError("alignment length mismatch for utterance '" + utt_id +
                    "'");
  }
  const Tensor& sym_table = params_.value("content_encoder.symbol_table");
  const Tensor& spk_table = params_.value("content_encoder.speaker_table");
  Tensor content({t_frames, dim_});
  Tensor speaker({t_frames, dim_});
  for (size_t t = 0; t < t_frames; ++t) {
    int sym = align.symbols[t];
    if (sym < 0 || sym >= kNumSymbols) {
      throw DataError("alignment symbol out of range for '" + utt_id + "'");
    }
    for (size_t d = 0; d < dim_; ++d) {
      content.at(t, d) = sym_table.at(static_cast<size_t>(sym), d);
      speaker.at(t, d) =
          spk_table.at(static_cast<size_t>(sit->second), d);
    }
  }
  return structured_encode(speaker, content, profile_,
                           mix_seed(seed_, 0xA015E, fnv1a64(utt_id)));
}

FrozenSpeakerEncoder::FrozenSpeakerEncoder(uint64_t seed, size_t embed_dim)
    : embed_dim_(embed_dim) {
  Rng rng(mix_seed(seed, 0x5BEDD1));
  double scale = 1.0 / std::sqrt(static_cast<double>(kNumMels));
  Tensor w({embed_dim, kNumMels});
  for (double& x : w.data) x = (2.0 * rng.uniform() - 1.0) * scale;

  // Reference average log-mel from a pinned internal calibration set; the
  // bias recenters inputs so embeddings of different voices spread apart
  // instead of sharing one dominant spectral direction.
  Rng cal(0xCA11B75EEDULL);
  std::vector<double> ref(kNumMels, 0.0);
  const int kCalibrationUtts = 24;
  for (int i = 0; i < kCalibrationUtts; ++i) {
    SpeakerSpec spk;
    spk.speaker_id = i;
    spk.f0_jitter = 0.005;
    spk.envelope.resize(kNumHarmonics);
    for (int h = 0; h < kNumHarmonics; ++h) {
      spk.envelope[h] = 0.05 + 0.95 * cal.uniform();
    }
    spk.base_f0 = 230.0 + 70.0 * cal.uniform();
    ContentScript script;
    int n_segments = 6 + static_cast<int>(cal.uniform() * 5.0);
    for (int s = 0; s < n_segments; ++s) {
      Segment seg;
      seg.symbol = static_cast<int>(cal.uniform() * kNumSymbols);
      seg.dur_ms = 100.0 + std::floor(cal.uniform() * 140.0);
      seg.f0_offset = -2.0 + 4.0 * cal.uniform();
      script.segments.push_back(seg);
    }
    Waveform wave = synthesize_utterance(
        spk, script, mix_seed(0xCA11B, static_cast<uint64_t>(i)));
    Tensor mel = mel_spectrogram(wave);
    for (size_t t = 0; t < mel.dim(0); ++t) {
      for (size_t m = 0; m < kNumMels; ++m) {
        ref[m] += mel.at(t, m) / static_cast<double>(mel.dim(0));
      }
    }
  }
  for (double& x : ref) x /= kCalibrationUtts;

  Tensor b({embed_dim});
  for (size_t e = 0; e < embed_dim; ++e) {
    double s = 0.0;
    for (size_t m = 0; m < kNumMels; ++m) s += w.at(e, m) * ref[m];
    b.at(e) = -s;
  }
  params_.add("speaker_encoder.w", std::move(w), ParamGroup::frozen);
  params_.add("speaker_encoder.b", std::move(b), ParamGroup::frozen);
}

std::vector<double> FrozenSpeakerEncoder::encode(const Waveform& wave) const {
  return encode_mel(mel_spectrogram(wave));
}

std::vector<double> FrozenSpeakerEncoder::encode_mel(const Tensor& mel) const {
  if (mel.shape.size() != 2 || mel.dim(1) != kNumMels || mel.dim(0) == 0)
    throw ShapeError("speaker encoder expects a nonempty [T][" +
                     std::to_string(kNumMels) + "] log-mel matrix");
  std::vector<double> avg(kNumMels, 0.0);
  for (size_t t = 0; t < mel.dim(0); ++t) {
    for (size_t m = 0; m < kNumMels; ++m) avg[m] += mel.at(t, m);
  }
  for (double& x : avg) x /= static_cast<double>(mel.dim(0));

  const Tensor& w = params_.value("speaker_encoder.w");
  const Tensor& b = params_.value("speaker_encoder.b");
  std::vector<double> e(embed_dim_, 0.0);
  for (size_t i = 0; i < embed_dim_; ++i) {
    double s = b.at(i);
    for (size_t m = 0; m < kNumMels; ++m) s += w.at(i, m) * avg[m];
    e[i] = s;
  }
  double norm = 0.0;
  for (double x : e) norm += x * x;
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    std::fill(e.begin(), e.end(), 0.0);
    e[0] = 1.0;
  } else {
    for (double& x : e) x /= norm;
  }
  return e;
}

}  // namespace mixvc
