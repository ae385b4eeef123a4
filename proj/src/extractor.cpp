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
#include "mixvc/extractor.hpp"

namespace mixvc {

void init_extractor(Parameters& p, size_t dim, size_t embed_dim,
                    const ExtractorConfig& cfg, Rng& rng) {
  p.add("extractor.cls", Tensor::randn({dim}, rng, 0.1),
        ParamGroup::speaker_extractor);
  for (size_t b = 0; b < cfg.blocks; ++b) {
    nn::init_transformer_block(p, "extractor.block" + std::to_string(b), dim,
                               cfg.heads, 4 * dim,
                               ParamGroup::speaker_extractor, rng);
  }
  nn::init_layer_norm(p, "extractor.ln_out", dim,
                      ParamGroup::speaker_extractor);
  nn::init_linear(p, "extractor.proj", dim, embed_dim,
                  ParamGroup::speaker_extractor, rng);
}

Node* extract_speaker(Graph& g, TapedParams& tp, const ExtractorConfig& cfg,
                      Node* content) {
  if (content->value.rank() != 2) {
    throw ShapeError("extract_speaker: content must be [T][D]");
  }
  size_t dim = content->value.dim(1);
  Node* cls = tp.use(g, "extractor.cls");
  if (cls->value.dim(0) != dim) {
    throw ShapeError("extract_speaker: content dim does not match extractor");
  }
  Node* x = g.concat(g.reshape(cls, {1, dim}), content, 0);
  for (size_t b = 0; b < cfg.blocks; ++b) {
    x = nn::transformer_block(g, tp, "extractor.block" + std::to_string(b), x,
                              cfg.heads);
  }
  x = nn::layer_norm(g, tp, "extractor.ln_out", x);
  Node* cls_out = g.reshape(g.row(x, 0), {1, dim});
  Node* projected = nn::linear(g, tp, "extractor.proj", cls_out);
  return g.row(projected, 0);
}

}  // namespace mixvc
