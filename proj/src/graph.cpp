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
#include "mixvc/graph.hpp"

#include <cmath>

namespace mixvc {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_rank2(const Node* n, const char* op) {
  if (n->value.rank() != 2) {
    throw ShapeError(std::string(op) + ": operand '" + n->name +
                     "' must be rank-2, got " + n->value.shape_str());
  }
}

}  // namespace

Node* Graph::make(const std::string& name, Tensor value,
                  std::vector<Node*> inputs) {
  auto n = std::make_unique<Node>();
  n->name = name;
  n->value = std::move(value);
  n->inputs = std::move(inputs);
  for (Node* in : n->inputs) {
    if (in->needs_grad) n->needs_grad = true;
  }
  if (!n->value.all_finite()) {
    throw NumericError("non-finite value in node '" + name + "'");
  }
  nodes_.push_back(std::move(n));
  return nodes_.back().get();
}

Node* Graph::input(const std::string& name, Tensor v) {
  Node* n = make(name, std::move(v), {});
  n->needs_grad = false;
  return n;
}

Node* Graph::leaf(const std::string& name, Tensor v, bool trainable) {
  Node* n = make(name, std::move(v), {});
  n->needs_grad = trainable;
  return n;
}

Node* Graph::matmul(Node* a, Node* b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  size_t m = a->value.dim(0), k = a->value.dim(1), n = b->value.dim(1);
  if (b->value.dim(0) != k) {
    throw ShapeError("matmul: inner dims " + a->value.shape_str() + " vs " +
                     b->value.shape_str());
  }
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i) {
    for (size_t p = 0; p < k; ++p) {
      double av = a->value.at(i, p);
      if (av == 0.0) continue;
      for (size_t j = 0; j < n; ++j) {
        out.at(i, j) += av * b->value.at(p, j);
      }
    }
  }
  Node* node = make("matmul", std::move(out), {a, b});
  node->backprop = [m, k, n](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    if (a->needs_grad) {
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
          double g = nd->grad.at(i, j);
          if (g == 0.0) continue;
          for (size_t p = 0; p < k; ++p)
            a->grad.at(i, p) += g * b->value.at(p, j);
        }
    }
    if (b->needs_grad) {
      for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) {
          double av = a->value.at(i, p);
          if (av == 0.0) continue;
          for (size_t j = 0; j < n; ++j)
            b->grad.at(p, j) += av * nd->grad.at(i, j);
        }
    }
  };
  return node;
}

Node* Graph::matmul_nt(Node* a, Node* b) {
  check_rank2(a, "matmul_nt");
  check_rank2(b, "matmul_nt");
  size_t m = a->value.dim(0), k = a->value.dim(1), n = b->value.dim(0);
  if (b->value.dim(1) != k) {
    throw ShapeError("matmul_nt: inner dims " + a->value.shape_str() +
                     " vs " + b->value.shape_str());
  }
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (size_t p = 0; p < k; ++p)
        s += a->value.at(i, p) * b->value.at(j, p);
      out.at(i, j) = s;
    }
  Node* node = make("matmul_nt", std::move(out), {a, b});
  node->backprop = [m, k, n](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) {
        double g = nd->grad.at(i, j);
        if (g == 0.0) continue;
        if (a->needs_grad)
          for (size_t p = 0; p < k; ++p)
            a->grad.at(i, p) += g * b->value.at(j, p);
        if (b->needs_grad)
          for (size_t p = 0; p < k; ++p)
            b->grad.at(j, p) += g * a->value.at(i, p);
      }
  };
  return node;
}

Node* Graph::add(Node* a, Node* b) {
  bool broadcast = false;
  if (!a->value.same_shape(b->value)) {
    // Allow rank-1 b broadcast across the rows of rank-2 a.
    if (a->value.rank() == 2 && b->value.rank() == 1 &&
        a->value.dim(1) == b->value.dim(0)) {
      broadcast = true;
    } else {
      throw ShapeError("add: shape mismatch " + a->value.shape_str() +
                       " vs " + b->value.shape_str());
    }
  }
  Tensor out = a->value;
  if (broadcast) {
    size_t m = out.dim(0), n = out.dim(1);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) out.at(i, j) += b->value.at(j);
  } else {
    for (size_t i = 0; i < out.numel(); ++i) out.data[i] += b->value.data[i];
  }
  Node* node = make("add", std::move(out), {a, b});
  node->backprop = [broadcast](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    if (a->needs_grad) {
      for (size_t i = 0; i < nd->grad.numel(); ++i)
        a->grad.data[i] += nd->grad.data[i];
    }
    if (b->needs_grad) {
      if (broadcast) {
        size_t m = nd->grad.dim(0), n = nd->grad.dim(1);
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) b->grad.at(j) += nd->grad.at(i, j);
      } else {
        for (size_t i = 0; i < nd->grad.numel(); ++i)
          b->grad.data[i] += nd->grad.data[i];
      }
    }
  };
  return node;
}

Node* Graph::sub(Node* a, Node* b) {
  if (!a->value.same_shape(b->value)) {
    throw ShapeError("sub: shape mismatch " + a->value.shape_str() + " vs " +
                     b->value.shape_str());
  }
  Tensor out = a->value;
  for (size_t i = 0; i < out.numel(); ++i) out.data[i] -= b->value.data[i];
  Node* node = make("sub", std::move(out), {a, b});
  node->backprop = [](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    for (size_t i = 0; i < nd->grad.numel(); ++i) {
      if (a->needs_grad) a->grad.data[i] += nd->grad.data[i];
      if (b->needs_grad) b->grad.data[i] -= nd->grad.data[i];
    }
  };
  return node;
}

Node* Graph::mul(Node* a, Node* b) {
  if (!a->value.same_shape(b->value)) {
    throw ShapeError("mul: shape mismatch " + a->value.shape_str() + " vs " +
                     b->value.shape_str());
  }
  Tensor out = a->value;
  for (size_t i = 0; i < out.numel(); ++i) out.data[i] *= b->value.data[i];
  Node* node = make("mul", std::move(out), {a, b});
  node->backprop = [](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    for (size_t i = 0; i < nd->grad.numel(); ++i) {
      if (a->needs_grad) a->grad.data[i] += nd->grad.data[i] * b->value.data[i];
      if (b->needs_grad) b->grad.data[i] += nd->grad.data[i] * a->value.data[i];
    }
  };
  return node;
}

Node* Graph::scale(Node* a, double c) {
  if (!std::isfinite(c)) throw NumericError("scale: non-finite constant");
  Tensor out = a->value;
  for (double& x : out.data) x *= c;
  Node* node = make("scale", std::move(out), {a});
  node->backprop = [c](Node* nd) {
    Node* a = nd->inputs[0];
    if (!a->needs_grad) return;
    for (size_t i = 0; i < nd->grad.numel(); ++i)
      a->grad.data[i] += c * nd->grad.data[i];
  };
  return node;
}

Node* Graph::relu(Node* a) {
  Tensor out = a->value;
  for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  Node* node = make("relu", std::move(out), {a});
  node->backprop = [](Node* nd) {
    Node* a = nd->inputs[0];
    if (!a->needs_grad) return;
    for (size_t i = 0; i < nd->grad.numel(); ++i)
      if (a->value.data[i] > 0.0) a->grad.data[i] += nd->grad.data[i];
  };
  return node;
}

Node* Graph::gelu(Node* a) {
  Tensor out = a->value;
  for (double& x : out.data) x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  Node* node = make("gelu", std::move(out), {a});
  node->backprop = [](Node* nd) {
    Node* a = nd->inputs[0];
    if (!a->needs_grad) return;
    for (size_t i = 0; i < nd->grad.numel(); ++i) {
      double x = a->value.data[i];
      double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      a->grad.data[i] += nd->grad.data[i] * (cdf + x * pdf);
    }
  };
  return node;
}

Node* Graph::layer_norm(Node* x, Node* gain, Node* bias) {
  size_t rows, cols;
  if (x->value.rank() == 2) {
    rows = x->value.dim(0);
    cols = x->value.dim(1);
  } else if (x->value.rank() == 1) {
    rows = 1;
    cols = x->value.dim(0);
  } else {
    throw ShapeError("layer_norm: rank must be 1 or 2");
  }
  if (gain->value.rank() != 1 || gain->value.dim(0) != cols ||
      bias->value.rank() != 1 || bias->value.dim(0) != cols) {
    throw ShapeError("layer_norm: gain/bias must be rank-1 of width " +
                     std::to_string(cols));
  }
  Tensor out = x->value;
  for (size_t i = 0; i < rows; ++i) {
    double* rowp = &out.data[i * cols];
    double mu = 0.0;
    for (size_t j = 0; j < cols; ++j) mu += rowp[j];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      double d = rowp[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (size_t j = 0; j < cols; ++j) {
      double xh = (rowp[j] - mu) * inv;
      rowp[j] = gain->value.at(j) * xh + bias->value.at(j);
    }
  }
  Node* node = make("layer_norm", std::move(out), {x, gain, bias});
  node->backprop = [rows, cols](Node* nd) {
    Node* x = nd->inputs[0];
    Node* gain = nd->inputs[1];
    Node* bias = nd->inputs[2];
    double n = static_cast<double>(cols);
    for (size_t i = 0; i < rows; ++i) {
      const double* xr = &x->value.data[i * cols];
      const double* gr = &nd->grad.data[i * cols];
      double mu = 0.0;
      for (size_t j = 0; j < cols; ++j) mu += xr[j];
      mu /= n;
      double var = 0.0;
      for (size_t j = 0; j < cols; ++j) {
        double d = xr[j] - mu;
        var += d * d;
      }
      var /= n;
      double inv = 1.0 / std::sqrt(var + kLayerNormEps);
      // dxh[j] = gr[j]*gain[j]; reduce the two sums needed for dx.
      double sum_dxh = 0.0, sum_dxh_xh = 0.0;
      for (size_t j = 0; j < cols; ++j) {
        double xh = (xr[j] - mu) * inv;
        double dxh = gr[j] * gain->value.at(j);
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh;
        if (gain->needs_grad) gain->grad.at(j) += gr[j] * xh;
        if (bias->needs_grad) bias->grad.at(j) += gr[j];
      }
      if (x->needs_grad) {
        for (size_t j = 0; j < cols; ++j) {
          double xh = (xr[j] - mu) * inv;
          double dxh = gr[j] * gain->value.at(j);
          x->grad.data[i * cols + j] +=
              inv * (dxh - sum_dxh / n - xh * sum_dxh_xh / n);
        }
      }
    }
  };
  return node;
}

Node* Graph::softmax(Node* x, size_t axis) {
  check_rank2(x, "softmax");
  if (axis > 1) throw ShapeError("softmax: axis must be 0 or 1");
  size_t rows = x->value.dim(0), cols = x->value.dim(1);
  size_t groups = axis == 0 ? cols : rows;
  size_t width = axis == 0 ? rows : cols;
  // Captured by value into the backprop closure, so no locals by reference.
  auto idx = [axis, cols](size_t g, size_t w) {
    return axis == 0 ? w * cols + g : g * cols + w;
  };
  Tensor out = x->value;
  for (size_t g = 0; g < groups; ++g) {
    double mx = out.data[idx(g, 0)];
    for (size_t w = 1; w < width; ++w) mx = std::max(mx, out.data[idx(g, w)]);
    double z = 0.0;
    for (size_t w = 0; w < width; ++w) {
      double e = std::exp(out.data[idx(g, w)] - mx);
      out.data[idx(g, w)] = e;
      z += e;
    }
    for (size_t w = 0; w < width; ++w) out.data[idx(g, w)] /= z;
  }
  Node* node = make("softmax", std::move(out), {x});
  node->backprop = [groups, width, idx](Node* nd) {
    Node* x = nd->inputs[0];
    if (!x->needs_grad) return;
    for (size_t g = 0; g < groups; ++g) {
      double dot = 0.0;
      for (size_t w = 0; w < width; ++w) {
        size_t k = idx(g, w);
        dot += nd->grad.data[k] * nd->value.data[k];
      }
      for (size_t w = 0; w < width; ++w) {
        size_t k = idx(g, w);
        x->grad.data[k] += nd->value.data[k] * (nd->grad.data[k] - dot);
      }
    }
  };
  return node;
}

Node* Graph::concat(Node* a, Node* b, size_t axis) {
  check_rank2(a, "concat");
  check_rank2(b, "concat");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  size_t keep = axis == 0 ? 1 : 0;
  if (a->value.dim(keep) != b->value.dim(keep)) {
    throw ShapeError("concat: shape mismatch " + a->value.shape_str() +
                     " vs " + b->value.shape_str());
  }
  size_t am = a->value.dim(0), an = a->value.dim(1);
  size_t bm = b->value.dim(0), bn = b->value.dim(1);
  Tensor out(axis == 0 ? std::vector<size_t>{am + bm, an}
                       : std::vector<size_t>{am, an + bn});
  if (axis == 0) {
    std::copy(a->value.data.begin(), a->value.data.end(), out.data.begin());
    std::copy(b->value.data.begin(), b->value.data.end(),
              out.data.begin() + static_cast<long>(a->value.numel()));
  } else {
    for (size_t i = 0; i < am; ++i) {
      for (size_t j = 0; j < an; ++j) out.at(i, j) = a->value.at(i, j);
      for (size_t j = 0; j < bn; ++j) out.at(i, an + j) = b->value.at(i, j);
    }
  }
  Node* node = make("concat", std::move(out), {a, b});
  node->backprop = [axis, am, an, bn](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    if (axis == 0) {
      size_t na = a->value.numel();
      if (a->needs_grad)
        for (size_t i = 0; i < na; ++i) a->grad.data[i] += nd->grad.data[i];
      if (b->needs_grad)
        for (size_t i = 0; i < b->value.numel(); ++i)
          b->grad.data[i] += nd->grad.data[na + i];
    } else {
      for (size_t i = 0; i < am; ++i) {
        if (a->needs_grad)
          for (size_t j = 0; j < an; ++j)
            a->grad.at(i, j) += nd->grad.at(i, j);
        if (b->needs_grad)
          for (size_t j = 0; j < bn; ++j)
            b->grad.at(i, j) += nd->grad.at(i, an + j);
      }
    }
  };
  return node;
}

Node* Graph::mean_axis(Node* x, size_t axis) {
  check_rank2(x, "mean_axis");
  if (axis > 1) throw ShapeError("mean_axis: axis must be 0 or 1");
  size_t m = x->value.dim(0), n = x->value.dim(1);
  Tensor out({axis == 0 ? n : m});
  if (axis == 0) {
    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (size_t i = 0; i < m; ++i) s += x->value.at(i, j);
      out.at(j) = s / static_cast<double>(m);
    }
  } else {
    for (size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < n; ++j) s += x->value.at(i, j);
      out.at(i) = s / static_cast<double>(n);
    }
  }
  Node* node = make("mean_axis", std::move(out), {x});
  node->backprop = [axis, m, n](Node* nd) {
    Node* x = nd->inputs[0];
    if (!x->needs_grad) return;
    if (axis == 0) {
      for (size_t j = 0; j < n; ++j) {
        double g = nd->grad.at(j) / static_cast<double>(m);
        for (size_t i = 0; i < m; ++i) x->grad.at(i, j) += g;
      }
    } else {
      for (size_t i = 0; i < m; ++i) {
        double g = nd->grad.at(i) / static_cast<double>(n);
        for (size_t j = 0; j < n; ++j) x->grad.at(i, j) += g;
      }
    }
  };
  return node;
}

Node* Graph::row(Node* x, size_t i) {
  check_rank2(x, "row");
  size_t m = x->value.dim(0), n = x->value.dim(1);
  if (i >= m) throw ShapeError("row: index out of range");
  Tensor out({n});
  for (size_t j = 0; j < n; ++j) out.at(j) = x->value.at(i, j);
  Node* node = make("row", std::move(out), {x});
  node->backprop = [i, n](Node* nd) {
    Node* x = nd->inputs[0];
    if (!x->needs_grad) return;
    for (size_t j = 0; j < n; ++j) x->grad.at(i, j) += nd->grad.at(j);
  };
  return node;
}

Node* Graph::tile_rows(Node* v, size_t m) {
  if (v->value.rank() != 1) throw ShapeError("tile_rows: operand must be rank-1");
  size_t n = v->value.dim(0);
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out.at(i, j) = v->value.at(j);
  Node* node = make("tile_rows", std::move(out), {v});
  node->backprop = [m, n](Node* nd) {
    Node* v = nd->inputs[0];
    if (!v->needs_grad) return;
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) v->grad.at(j) += nd->grad.at(i, j);
  };
  return node;
}

Node* Graph::reshape(Node* x, std::vector<size_t> shape) {
  if (Tensor::numel_of(shape) != x->value.numel()) {
    throw ShapeError("reshape: element count mismatch");
  }
  Tensor out(std::move(shape), x->value.data);
  Node* node = make("reshape", std::move(out), {x});
  node->backprop = [](Node* nd) {
    Node* x = nd->inputs[0];
    if (!x->needs_grad) return;
    for (size_t i = 0; i < nd->grad.numel(); ++i)
      x->grad.data[i] += nd->grad.data[i];
  };
  return node;
}

Node* Graph::l1_loss(Node* pred, Node* target) {
  if (!pred->value.same_shape(target->value)) {
    throw ShapeError("l1_loss: shape mismatch " + pred->value.shape_str() +
                     " vs " + target->value.shape_str());
  }
  size_t n = pred->value.numel();
  double s = 0.0;
  for (size_t i = 0; i < n; ++i)
    s += std::fabs(pred->value.data[i] - target->value.data[i]);
  Tensor out({1});
  out.data[0] = s / static_cast<double>(n);
  Node* node = make("l1_loss", std::move(out), {pred, target});
  node->backprop = [n](Node* nd) {
    Node* p = nd->inputs[0];
    Node* t = nd->inputs[1];
    double g = nd->grad.data[0] / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      double d = p->value.data[i] - t->value.data[i];
      double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      if (p->needs_grad) p->grad.data[i] += g * sg;
      if (t->needs_grad) t->grad.data[i] -= g * sg;
    }
  };
  return node;
}

Node* Graph::l2_distance_squared(Node* a, Node* b) {
  if (!a->value.same_shape(b->value)) {
    throw ShapeError("l2_distance_squared: shape mismatch " +
                     a->value.shape_str() + " vs " + b->value.shape_str());
  }
  size_t n = a->value.numel();
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = a->value.data[i] - b->value.data[i];
    s += d * d;
  }
  Tensor out({1});
  out.data[0] = s;
  Node* node = make("l2_distance_squared", std::move(out), {a, b});
  node->backprop = [n](Node* nd) {
    Node* a = nd->inputs[0];
    Node* b = nd->inputs[1];
    double g = nd->grad.data[0];
    for (size_t i = 0; i < n; ++i) {
      double d = a->value.data[i] - b->value.data[i];
      if (a->needs_grad) a->grad.data[i] += g * 2.0 * d;
      if (b->needs_grad) b->grad.data[i] -= g * 2.0 * d;
    }
  };
  return node;
}

Node* Graph::grad_reverse(Node* x, double lambda) {
  if (!std::isfinite(lambda)) {
    throw NumericError("grad_reverse: non-finite lambda");
  }
  Tensor out = x->value;  // exact copy: forward is bitwise identity
  Node* node = make("grad_reverse", std::move(out), {x});
  node->backprop = [lambda](Node* nd) {
    Node* x = nd->inputs[0];
    if (!x->needs_grad) return;
    for (size_t i = 0; i < nd->grad.numel(); ++i)
      x->grad.data[i] += -lambda * nd->grad.data[i];
  };
  return node;
}

Node* Graph::mix_layers(Node* stack, Node* w) {
  if (stack->value.rank() != 3) {
    throw ShapeError("mix_layers: stack must be rank-3");
  }
  size_t L1 = stack->value.dim(0), T = stack->value.dim(1),
         D = stack->value.dim(2);
  if (w->value.rank() != 2 || w->value.dim(0) != L1 || w->value.dim(1) != D) {
    throw ShapeError("mix_layers: weights must be [" + std::to_string(L1) +
                     "," + std::to_string(D) + "], got " +
                     w->value.shape_str());
  }
  Tensor out({T, D});
  for (size_t l = 0; l < L1; ++l)
    for (size_t t = 0; t < T; ++t)
      for (size_t d = 0; d < D; ++d)
        out.at(t, d) += w->value.at(l, d) * stack->value.at(l, t, d);
  Node* node = make("mix_layers", std::move(out), {stack, w});
  node->backprop = [L1, T, D](Node* nd) {
    Node* stack = nd->inputs[0];
    Node* w = nd->inputs[1];
    for (size_t l = 0; l < L1; ++l)
      for (size_t t = 0; t < T; ++t)
        for (size_t d = 0; d < D; ++d) {
          double g = nd->grad.at(t, d);
          if (g == 0.0) continue;
          if (w->needs_grad)
            w->grad.at(l, d) += g * stack->value.at(l, t, d);
          if (stack->needs_grad)
            stack->grad.at(l, t, d) += g * w->value.at(l, d);
        }
  };
  return node;
}

Node* Graph::attention(Node* q, Node* k, Node* v) {
  check_rank2(q, "attention");
  check_rank2(k, "attention");
  check_rank2(v, "attention");
  size_t dk = q->value.dim(1);
  if (k->value.dim(1) != dk || k->value.dim(0) != v->value.dim(0)) {
    throw ShapeError("attention: incompatible q/k/v shapes");
  }
  Node* scores = scale(matmul_nt(q, k), 1.0 / std::sqrt(double(dk)));
  Node* weights = softmax(scores, 1);
  return matmul(weights, v);
}

void Graph::backward(Node* loss) {
  if (loss->value.numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got " +
                     loss->value.shape_str());
  }
  for (auto& n : nodes_) {
    if (n->needs_grad) {
      n->grad = Tensor(n->value.shape);
    }
  }
  if (!loss->needs_grad) return;  // nothing trainable below the loss
  loss->grad.data[0] = 1.0;
  for (size_t i = nodes_.size(); i-- > 0;) {
    Node* n = nodes_[i].get();
    if (!n->needs_grad || !n->backprop) continue;
    if (!n->grad.all_finite()) {
      throw NumericError("non-finite gradient at node '" + n->name + "'");
    }
    n->backprop(n);
  }
}

}  // namespace mixvc
