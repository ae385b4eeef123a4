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
#ifndef MIXVC_TENSOR_HPP_
#define MIXVC_TENSOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "mixvc/errors.hpp"
#include "mixvc/rng.hpp"

namespace mixvc {

// Dense row-major array of doubles. Rank 1..3 is what the pipeline uses.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0);
  }
  Tensor(std::vector<size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel_of(shape)) {
      throw ShapeError("tensor data length does not match shape");
    }
  }

  static size_t numel_of(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
  }

  size_t numel() const { return data.size(); }
  size_t rank() const { return shape.size(); }
  size_t dim(size_t i) const { return shape.at(i); }

  double& at(size_t i) { return data[i]; }
  double at(size_t i) const { return data[i]; }
  double& at(size_t i, size_t j) { return data[i * shape[1] + j]; }
  double at(size_t i, size_t j) const { return data[i * shape[1] + j]; }
  double& at(size_t i, size_t j, size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double at(size_t i, size_t j, size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  static Tensor zeros(std::vector<size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<size_t> s, double v) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = v;
    return t;
  }

  static Tensor from_vector(const std::vector<double>& v) {
    return Tensor({v.size()}, v);
  }

  static Tensor randn(std::vector<size_t> s, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = scale * rng.normal();
    return t;
  }

  static Tensor uniform(std::vector<size_t> s, Rng& rng, double lo,
                        double hi) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = rng.uniform(lo, hi);
    return t;
  }

  std::string shape_str() const;
  bool all_finite() const;
};

}  // namespace mixvc

#endif  // MIXVC_TENSOR_HPP_
