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
#include "mixvc/convert.hpp"

namespace mixvc {

Tensor convert_utterance(const Model& model, const Waveform& source,
                         const Waveform& target,
                         const std::string& source_utt_id) {
  Tensor stack = model.encode_stack(source, source_utt_id);
  std::vector<double> spk = model.speaker_embedding(target);
  Graph g;
  TapedParams tp(model.params());
  Node* content = model.content_features(g, tp, stack);
  Node* mel = model.reconstruct(g, tp, content, spk);
  return mel->value;
}

}  // namespace mixvc
