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
#ifndef MIXVC_DECODER_HPP_
#define MIXVC_DECODER_HPP_

#include "mixvc/nn.hpp"

namespace mixvc {

struct DecoderConfig {
  size_t hidden_dim = 64;
  size_t blocks = 3;
};

// Per-frame spectral decoder: content frame concatenated with the (tiled)
// speaker embedding -> residual feedforward blocks with layer norm -> log-mel
// frame. No temporal mixing, so each output frame depends only on its own
// content frame plus the utterance-level speaker embedding.
void init_decoder(Parameters& p, size_t content_dim, size_t embed_dim,
                  size_t mel_dim, const DecoderConfig& cfg, Rng& rng);

// content: [T][D]; speaker: [E] (rank-1 node). Returns [T][mel_dim].
Node* decode(Graph& g, TapedParams& tp, const DecoderConfig& cfg,
             Node* content, Node* speaker);

}  // namespace mixvc

#endif  // MIXVC_DECODER_HPP_
