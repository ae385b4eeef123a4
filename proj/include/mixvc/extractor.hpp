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
#ifndef MIXVC_EXTRACTOR_HPP_
#define MIXVC_EXTRACTOR_HPP_

#include "mixvc/nn.hpp"

namespace mixvc {

struct ExtractorConfig {
  size_t blocks = 2;
  size_t heads = 2;
};

// Registers the adversarial speaker extractor's parameters: a learned CLS
// vector, transformer blocks, and the final projection to the speaker
// embedding dimension. Group: speaker_extractor.
void init_extractor(Parameters& p, size_t dim, size_t embed_dim,
                    const ExtractorConfig& cfg, Rng& rng);

// Prepends the CLS vector to the content features, runs the blocks with
// self-attention (no positional information anywhere, so the output is
// invariant to frame permutations), and projects the final CLS state to an
// unnormalized predicted speaker embedding [E].
Node* extract_speaker(Graph& g, TapedParams& tp, const ExtractorConfig& cfg,
                      Node* content);

}  // namespace mixvc

#endif  // MIXVC_EXTRACTOR_HPP_
