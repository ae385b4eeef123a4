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
#ifndef MIXVC_GRAPH_HPP_
#define MIXVC_GRAPH_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mixvc/tensor.hpp"

namespace mixvc {

class Graph;

// One evaluated primitive on the tape. Values are computed eagerly at
// construction; `backprop` scatters this node's gradient into its inputs.
struct Node {
  std::string name;
  Tensor value;
  Tensor grad;
  std::vector<Node*> inputs;
  std::function<void(Node*)> backprop;
  bool needs_grad = false;

  double scalar() const {
    if (value.numel() != 1) throw ShapeError("node '" + name + "' not scalar");
    return value.data[0];
  }
};

// Eager reverse-mode tape over dense double tensors. Nodes are appended in
// evaluation order, which is already a topological order, so backward() is a
// single reverse sweep with gradient accumulation by summation. Any NaN/Inf
// produced in a forward value or a backward gradient aborts with the node
// name. Single-threaded per instance.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves. `input` is constant data; `leaf` participates in gradients
  // unless trainable is false.
  Node* input(const std::string& name, Tensor v);
  Node* leaf(const std::string& name, Tensor v, bool trainable = true);

  // Primitives.
  Node* matmul(Node* a, Node* b);     // [m,k]x[k,n] -> [m,n]
  Node* matmul_nt(Node* a, Node* b);  // [m,k]x[n,k]^T -> [m,n]
  Node* add(Node* a, Node* b);        // same shape, or b rank-1 row broadcast
  Node* sub(Node* a, Node* b);        // same shape
  Node* mul(Node* a, Node* b);        // elementwise, same shape
  Node* scale(Node* a, double c);
  Node* relu(Node* a);
  Node* gelu(Node* a);
  // Normalizes over the last axis; gain/bias are rank-1 of that width.
  Node* layer_norm(Node* x, Node* gain, Node* bias);
  Node* softmax(Node* x, size_t axis);  // rank-2, axis 0 or 1
  Node* concat(Node* a, Node* b, size_t axis);  // rank-2
  Node* mean_axis(Node* x, size_t axis);        // rank-2 -> rank-1
  Node* row(Node* x, size_t i);                 // rank-2 -> rank-1
  Node* tile_rows(Node* v, size_t m);           // rank-1 [n] -> [m,n]
  Node* reshape(Node* x, std::vector<size_t> shape);
  Node* l1_loss(Node* pred, Node* target);            // mean |p-t|, scalar
  Node* l2_distance_squared(Node* a, Node* b);        // sum (a-b)^2, scalar
  // Forward identity (bitwise); backward multiplies the gradient by -lambda.
  Node* grad_reverse(Node* x, double lambda);
  // out[t][d] = sum_l w[l][d] * stack[l][t][d]; w is the softmaxed weights.
  Node* mix_layers(Node* stack, Node* w);
  // softmax(q k^T / sqrt(dk)) v, composed from the primitives above.
  Node* attention(Node* q, Node* k, Node* v);

  // Reverse sweep from a scalar loss. Gradients of all needs_grad nodes are
  // (re)initialized to zero first and accumulate by summation.
  void backward(Node* loss);

  size_t size() const { return nodes_.size(); }

 private:
  Node* make(const std::string& name, Tensor value,
             std::vector<Node*> inputs);
  std::vector<std::unique_ptr<Node>> nodes_;
};

}  // namespace mixvc

#endif  // MIXVC_GRAPH_HPP_
