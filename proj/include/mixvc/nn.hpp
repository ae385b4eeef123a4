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
#ifndef MIXVC_NN_HPP_
#define MIXVC_NN_HPP_

#include <map>
#include <string>

#include "mixvc/graph.hpp"
#include "mixvc/params.hpp"
#include "mixvc/rng.hpp"

namespace mixvc {

// Binds a Parameters registry to one Graph: each parameter becomes a single
// node per graph (shared across the batch, so gradients accumulate), frozen
// parameters become constant inputs. After backward(), `leaves` holds the
// nodes whose .grad fields carry the parameter gradients.
struct TapedParams {
  const Parameters* params = nullptr;
  std::map<std::string, Node*> leaves;

  explicit TapedParams(const Parameters& p) : params(&p) {}
  Node* use(Graph& g, const std::string& name);
};

namespace nn {

// Linear layer y = x W + b with W: [in][out], b: [out].
void init_linear(Parameters& p, const std::string& prefix, size_t in,
                 size_t out, ParamGroup group, Rng& rng);
Node* linear(Graph& g, TapedParams& tp, const std::string& prefix, Node* x);

void init_layer_norm(Parameters& p, const std::string& prefix, size_t dim,
                     ParamGroup group);
Node* layer_norm(Graph& g, TapedParams& tp, const std::string& prefix,
                 Node* x);

// Pre-norm transformer block: multi-head self-attention (per-head q/k/v
// projections, concatenated, output-projected) and a feedforward of width
// ff_dim, both with residual connections.
void init_transformer_block(Parameters& p, const std::string& prefix,
                            size_t dim, size_t heads, size_t ff_dim,
                            ParamGroup group, Rng& rng);
Node* transformer_block(Graph& g, TapedParams& tp, const std::string& prefix,
                        Node* x, size_t heads);

}  // namespace nn

}  // namespace mixvc

#endif  // MIXVC_NN_HPP_
