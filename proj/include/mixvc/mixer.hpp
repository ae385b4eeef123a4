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
#ifndef MIXVC_MIXER_HPP_
#define MIXVC_MIXER_HPP_

#include <string>
#include <vector>

#include "mixvc/graph.hpp"

namespace mixvc {

// How hidden-state stacks are turned into content features: the last layer
// alone (posterior-gram style baseline), a fixed average over a layer range,
// or a learned per-dimension softmax-weighted average over all layers.
enum class MixMode { last_layer, fixed_average, chameleon };

const char* mix_mode_name(MixMode m);
MixMode mix_mode_from_name(const std::string& s);

struct MixerConfig {
  MixMode mode = MixMode::chameleon;
  size_t range_lo = 4;  // fixed_average only, inclusive
  size_t range_hi = 6;
};

// stack: rank-3 input node [L+1][T][D]; logits: [L+1][D] leaf for chameleon
// mode (must be null otherwise). Differentiable w.r.t. logits.
Node* mix(Graph& g, Node* stack, const MixerConfig& cfg, Node* logits);

// Per-layer summary of the effective (softmaxed) weights across dimensions.
struct LayerWeightSummary {
  double mean = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0;
};
std::vector<LayerWeightSummary> weight_histogram(const Tensor& logits);

// Text table `layer<TAB>mean<TAB>q25<TAB>median<TAB>q75` with a header row.
void write_weight_histogram(const Tensor& logits, const std::string& path);

}  // namespace mixvc

#endif  // MIXVC_MIXER_HPP_
