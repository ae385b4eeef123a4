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
#include "mixvc/nn.hpp"

#include <cmath>

namespace mixvc {

Node* TapedParams::use(Graph& g, const std::string& name) {
  auto it = leaves.find(name);
  if (it != leaves.end()) return it->second;
  const ParamEntry& e = params->entry(name);
  Node* n = e.group == ParamGroup::frozen ? g.input(name, e.value)
                                          : g.leaf(name, e.value);
  leaves.emplace(name, n);
  return n;
}

namespace nn {

void init_linear(Parameters& p, const std::string& prefix, size_t in,
                 size_t out, ParamGroup group, Rng& rng) {
  double scale = 1.0 / std::sqrt(static_cast<double>(in));
  p.add(prefix + ".w", Tensor::randn({in, out}, rng, scale), group);
  p.add(prefix + ".b", Tensor::zeros({out}), group);
}

Node* linear(Graph& g, TapedParams& tp, const std::string& prefix, Node* x) {
  return g.add(g.matmul(x, tp.use(g, prefix + ".w")),
               tp.use(g, prefix + ".b"));
}

void init_layer_norm(Parameters& p, const std::string& prefix, size_t dim,
                     ParamGroup group) {
  p.add(prefix + ".g", Tensor::full({dim}, 1.0), group);
  p.add(prefix + ".b", Tensor::zeros({dim}), group);
}

Node* layer_norm(Graph& g, TapedParams& tp, const std::string& prefix,
                 Node* x) {
  return g.layer_norm(x, tp.use(g, prefix + ".g"), tp.use(g, prefix + ".b"));
}

void init_transformer_block(Parameters& p, const std::string& prefix,
                            size_t dim, size_t heads, size_t ff_dim,
                            ParamGroup group, Rng& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw UsageError("transformer heads must divide the model dim");
  }
  size_t dk = dim / heads;
  init_layer_norm(p, prefix + ".ln1", dim, group);
  for (size_t h = 0; h < heads; ++h) {
    std::string hp = prefix + ".attn.h" + std::to_string(h);
    double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    p.add(hp + ".wq", Tensor::randn({dim, dk}, rng, scale), group);
    p.add(hp + ".wk", Tensor::randn({dim, dk}, rng, scale), group);
    p.add(hp + ".wv", Tensor::randn({dim, dk}, rng, scale), group);
  }
  init_linear(p, prefix + ".attn.out", dim, dim, group, rng);
  init_layer_norm(p, prefix + ".ln2", dim, group);
  init_linear(p, prefix + ".ff1", dim, ff_dim, group, rng);
  init_linear(p, prefix + ".ff2", ff_dim, dim, group, rng);
}

Node* transformer_block(Graph& g, TapedParams& tp, const std::string& prefix,
                        Node* x, size_t heads) {
  Node* h1 = layer_norm(g, tp, prefix + ".ln1", x);
  Node* cat = nullptr;
  for (size_t h = 0; h < heads; ++h) {
    std::string hp = prefix + ".attn.h" + std::to_string(h);
    Node* q = g.matmul(h1, tp.use(g, hp + ".wq"));
    Node* k = g.matmul(h1, tp.use(g, hp + ".wk"));
    Node* v = g.matmul(h1, tp.use(g, hp + ".wv"));
    Node* att = g.attention(q, k, v);
    cat = cat ? g.concat(cat, att, 1) : att;
  }
  Node* x2 = g.add(x, linear(g, tp, prefix + ".attn.out", cat));
  Node* h2 = layer_norm(g, tp, prefix + ".ln2", x2);
  Node* ff = linear(g, tp, prefix + ".ff2",
                    g.gelu(linear(g, tp, prefix + ".ff1", h2)));
  return g.add(x2, ff);
}

}  // namespace nn

}  // namespace mixvc
