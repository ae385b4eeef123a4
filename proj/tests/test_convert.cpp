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
#include <string>

#include "doctest.h"
#include "mixvc/convert.hpp"
#include "mixvc/frontend.hpp"
#include "testutil.hpp"

using namespace mixvc;
using testutil::TempDir;

namespace {

ModelConfig small_config() {
  ModelConfig mc;
  mc.encoder_type = "random";
  mc.encoder_seed = 11;
  mc.layers = 2;
  mc.dim = 8;
  mc.embed_dim = 4;
  mc.extractor.blocks = 1;
  mc.extractor.heads = 2;
  mc.decoder.hidden_dim = 16;
  mc.decoder.blocks = 1;
  return mc;
}

struct ConvertFixture {
  TempDir dir;
  CorpusManifest manifest;
  ConvertFixture() : dir("convert"),
                     manifest(generate_corpus(4, 2, 121, dir.str())) {}
  Waveform wav(size_t i) const {
    return read_wav(dir.str() + "/" + manifest.entries[i].path);
  }
};

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape &&
         std::equal(a.data.begin(), a.data.end(), b.data.begin());
}

}  // namespace

TEST_CASE("self-conversion reproduces the reconstruction path bit for bit") {
  ConvertFixture f;
  Model m(small_config());
  Waveform w = f.wav(0);

  Tensor converted = convert_utterance(m, w, w);
  Tensor manual = m.decode_mel(m.mix_content(m.encode_stack(w)),
                               m.speaker_embedding(w));
  CHECK(bitwise_equal(converted, manual));

  REQUIRE(converted.rank() == 2);
  CHECK(converted.dim(0) == mel_spectrogram(w).dim(0));
  CHECK(converted.dim(1) == kNumMels);
  CHECK(std::all_of(converted.data.begin(), converted.data.end(),
                    [](double v) { return std::isfinite(v); }));

  // Repeat calls are bitwise deterministic.
  CHECK(bitwise_equal(convert_utterance(m, w, w), converted));
}

TEST_CASE("the target utterance changes the output, not its length") {
  ConvertFixture f;
  Model m(small_config());
  Waveform src = f.wav(0);
  // entries are speaker-major: index 2 is a different speaker than index 0
  REQUIRE(f.manifest.entries[2].speaker_id != f.manifest.entries[0].speaker_id);
  Waveform tgt_a = f.wav(2);
  Waveform tgt_b = f.wav(4);
  REQUIRE(f.manifest.entries[4].speaker_id != f.manifest.entries[2].speaker_id);

  Tensor self = convert_utterance(m, src, src);
  Tensor to_a = convert_utterance(m, src, tgt_a);
  Tensor to_b = convert_utterance(m, src, tgt_b);
  CHECK(to_a.shape == self.shape);
  CHECK(to_b.shape == self.shape);
  CHECK(!bitwise_equal(to_a, self));
  CHECK(!bitwise_equal(to_b, self));
  CHECK(!bitwise_equal(to_a, to_b));

  // Same source content + same target speaker through different utterances
  // of that speaker: outputs differ only because the embeddings do.
  Waveform tgt_a2 = f.wav(3);
  REQUIRE(f.manifest.entries[3].speaker_id == f.manifest.entries[2].speaker_id);
  Tensor to_a2 = convert_utterance(m, src, tgt_a2);
  double same_spk_gap = 0.0, cross_spk_gap = 0.0;
  for (size_t i = 0; i < to_a.numel(); ++i) {
    same_spk_gap += std::fabs(to_a.data[i] - to_a2.data[i]);
    cross_spk_gap += std::fabs(to_a.data[i] - to_b.data[i]);
  }
  same_spk_gap /= double(to_a.numel());
  cross_spk_gap /= double(to_a.numel());
  MESSAGE("mean |mel delta|: same target speaker ", same_spk_gap,
          ", different target speaker ", cross_spk_gap);
  CHECK(same_spk_gap < cross_spk_gap);
}

TEST_CASE("structured encoders need the source utterance id") {
  ConvertFixture f;
  ModelConfig mc = small_config();
  mc.encoder_type = "structured";
  mc.alpha = {0.0, 1.0, 1.0};
  mc.beta = {1.0, 0.0, 0.0};
  Model m(mc, &f.manifest);

  Waveform src = f.wav(0);
  Waveform tgt = f.wav(2);
  Tensor out = convert_utterance(m, src, tgt, f.manifest.entries[0].utt_id);
  CHECK(out.dim(0) == mel_spectrogram(src).dim(0));
  CHECK(out.dim(1) == kNumMels);
  CHECK_THROWS_AS(convert_utterance(m, src, tgt), DataError);
  CHECK_THROWS_AS(convert_utterance(m, src, tgt, "missing_utt"), DataError);

  // The audio-only encoder ignores the id entirely.
  Model r(small_config());
  Tensor with_id = convert_utterance(r, src, tgt, "anything");
  Tensor without = convert_utterance(r, src, tgt);
  CHECK(bitwise_equal(with_id, without));
}
