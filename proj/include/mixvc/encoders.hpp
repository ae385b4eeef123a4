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
#ifndef MIXVC_ENCODERS_HPP_
#define MIXVC_ENCODERS_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mixvc/frontend.hpp"
#include "mixvc/params.hpp"
#include "mixvc/synth.hpp"
#include "mixvc/tensor.hpp"

namespace mixvc {

// A hidden-state stack is a rank-3 tensor [L+1][T][D]: layer 0 is the
// frontend projection, layers 1..L are block outputs. One frame per mel
// frame, so stacks, decoder targets and pitch contours align by index.

// Frozen multi-layer content encoder interface. Implementations are
// immutable after construction; encode() is pure.
class ContentEncoder {
 public:
  virtual ~ContentEncoder() = default;
  // utt_id lets ground-truth-driven encoders look the utterance up; the
  // audio-only encoders ignore it.
  virtual Tensor encode(const Waveform& wave,
                        const std::string& utt_id = "") const = 0;
  virtual size_t layers() const = 0;  // L
  virtual size_t dim() const = 0;     // D
  virtual const Parameters& params() const = 0;
};

// Mel frontend -> linear projection (layer 0) -> L frozen random
// transformer blocks. The stand-in for a pre-trained SSL encoder.
class RandomFrozenEncoder : public ContentEncoder {
 public:
  explicit RandomFrozenEncoder(uint64_t seed, size_t layers = 6,
                               size_t dim = 32);
  Tensor encode(const Waveform& wave,
                const std::string& utt_id = "") const override;
  size_t layers() const override { return layers_; }
  size_t dim() const override { return dim_; }
  const Parameters& params() const override { return params_; }

 private:
  size_t layers_, dim_;
  Parameters params_;
};

// Test fixture with known layer-wise content: layer l is
// alpha[l]*content + beta[l]*speaker + noise_sigma*N(0,1).
struct StructuredEncoderProfile {
  std::vector<double> alpha;  // [L+1] content gains
  std::vector<double> beta;   // [L+1] speaker gains
  double noise_sigma = 0.0;
};

Tensor structured_encode(const Tensor& speaker_features,
                         const Tensor& content_features,
                         const StructuredEncoderProfile& profile,
                         uint64_t seed);

// Wraps structured_encode as a corpus-wide ContentEncoder: per-frame content
// features come from a fixed symbol embedding table driven by the corpus
// ground-truth alignments, speaker features from a fixed per-speaker table.
class StructuredCorpusEncoder : public ContentEncoder {
 public:
  StructuredCorpusEncoder(const CorpusManifest& manifest,
                          const StructuredEncoderProfile& profile,
                          uint64_t seed, size_t dim = 32);
  Tensor encode(const Waveform& wave,
                const std::string& utt_id) const override;
  size_t layers() const override { return profile_.alpha.size() - 1; }
  size_t dim() const override { return dim_; }
  const Parameters& params() const override { return params_; }

 private:
  StructuredEncoderProfile profile_;
  uint64_t seed_;
  size_t dim_;
  Parameters params_;
  std::map<std::string, Alignment> alignments_;
  std::map<std::string, int> utt_speaker_;
};

// Frozen deterministic speaker encoder: utterance-average log-mel through a
// fixed affine map, L2-normalized. The bias centers the input by a reference
// average computed once from an internal pinned calibration set, which plays
// the role of pre-training and spreads the embeddings apart.
class FrozenSpeakerEncoder {
 public:
  explicit FrozenSpeakerEncoder(uint64_t seed, size_t embed_dim = 16);
  std::vector<double> encode(const Waveform& wave) const;
  // Same map applied to an existing log-mel matrix, for utterances (such as
  // conversion outputs) that exist only in the mel domain.
  std::vector<double> encode_mel(const Tensor& mel) const;
  size_t dim() const { return embed_dim_; }
  const Parameters& params() const { return params_; }

 private:
  size_t embed_dim_;
  Parameters params_;
};

}  // namespace mixvc

#endif  // MIXVC_ENCODERS_HPP_
