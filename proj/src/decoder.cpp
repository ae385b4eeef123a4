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
#include "mixvc/decoder.hpp"

namespace mixvc {

void init_decoder(Parameters& p, size_t content_dim, size_t embed_dim,
                  size_t mel_dim, const DecoderConfig& cfg, Rng& rng) {
  nn::init_linear(p, "decoder.in", content_dim + embed_dim, cfg.hidden_dim,
                  ParamGroup::decoder, rng);
  for (size_t b = 0; b < cfg.blocks; ++b) {
    std::string prefix = "decoder.block" + std::to_string(b);
    nn::init_layer_norm(p, prefix + ".ln", cfg.hidden_dim,
                        ParamGroup::decoder);
    nn::init_linear(p, prefix + ".ff1", cfg.hidden_dim, cfg.hidden_dim,
                    ParamGroup::decoder, rng);
    nn::init_linear(p, prefix + ".ff2", cfg.hidden_dim, cfg.hidden_dim,
                    ParamGroup::decoder, rng);
  }
  nn::init_layer_norm(p, "decoder.ln_out", cfg.hidden_dim,
                      ParamGroup::decoder);
  nn::init_linear(p, "decoder.out", cfg.hidden_dim, mel_dim,
                  ParamGroup::decoder, rng);
}

Node* decode(Graph& g, TapedParams& tp, const DecoderConfig& cfg,
             Node* content, Node* speaker) {
  if (content->value.rank() != 2) {
    throw ShapeError("decode: content must be [T][D]");
  }
  if (speaker->value.rank() != 1) {
    throw ShapeError("decode: speaker embedding must be rank-1");
  }
  size_t t_frames = content->value.dim(0);
  Node* tiled = g.tile_rows(speaker, t_frames);
  Node* x = nn::linear(g, tp, "decoder.in", g.concat(content, tiled, 1));
  for (size_t b = 0; b < cfg.blocks; ++b) {
    std::string prefix = "decoder.block" + std::to_string(b);
    Node* h = nn::layer_norm(g, tp, prefix + ".ln", x);
    h = nn::linear(g, tp, prefix + ".ff2",
                   g.gelu(nn::linear(g, tp, prefix + ".ff1", h)));
    x = g.add(x, h);
  }
  x = nn::layer_norm(g, tp, "decoder.ln_out", x);
  return nn::linear(g, tp, "decoder.out", x);
}

}  // namespace mixvc
