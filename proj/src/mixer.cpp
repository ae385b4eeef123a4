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
#include "mixvc/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mixvc {

namespace {

// Linear-interpolation quantile of a sorted vector, numpy-style.
double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  double pos = q * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

const char* mix_mode_name(MixMode m) {
  switch (m) {
    case MixMode::last_layer: return "last_layer";
    case MixMode::fixed_average: return "fixed_average";
    case MixMode::chameleon: return "chameleon";
  }
  return "chameleon";
}

MixMode mix_mode_from_name(const std::string& s) {
  if (s == "last_layer") return MixMode::last_layer;
  if (s == "fixed_average") return MixMode::fixed_average;
  if (s == "chameleon") return MixMode::chameleon;
  throw UsageError("unknown mixer mode '" + s +
                   "' (want last_layer, fixed_average or chameleon)");
}

Node* mix(Graph& g, Node* stack, const MixerConfig& cfg, Node* logits) {
  if (stack->value.rank() != 3) {
    throw ShapeError("mix: stack must be rank-3 [L+1][T][D]");
  }
  size_t n_layers = stack->value.dim(0);
  size_t dim = stack->value.dim(2);

  if (cfg.mode == MixMode::chameleon) {
    if (logits == nullptr) {
      throw UsageError("chameleon mixing requires layer-weight logits");
    }
    if (logits->value.rank() != 2 || logits->value.dim(0) != n_layers ||
        logits->value.dim(1) != dim) {
      throw ShapeError("mix: logits must be [L+1][D]");
    }
    return g.mix_layers(stack, g.softmax(logits, 0));
  }

  if (logits != nullptr) {
    throw UsageError("layer weights are only valid in chameleon mode");
  }
  Tensor w({n_layers, dim});
  if (cfg.mode == MixMode::last_layer) {
    for (size_t d = 0; d < dim; ++d) w.at(n_layers - 1, d) = 1.0;
  } else {
    if (cfg.range_lo > cfg.range_hi || cfg.range_hi >= n_layers) {
      throw UsageError("fixed_average range out of bounds");
    }
    double share = 1.0 / static_cast<double>(cfg.range_hi - cfg.range_lo + 1);
    for (size_t l = cfg.range_lo; l <= cfg.range_hi; ++l) {
      for (size_t d = 0; d < dim; ++d) w.at(l, d) = share;
    }
  }
  return g.mix_layers(stack, g.input("fixed_weights", std::move(w)));
}

std::vector<LayerWeightSummary> weight_histogram(const Tensor& logits) {
  if (logits.rank() != 2) {
    throw ShapeError("weight_histogram: logits must be [L+1][D]");
  }
  size_t n_layers = logits.dim(0), dim = logits.dim(1);
  // Per-dimension softmax over the layer axis.
  Tensor w = logits;
  for (size_t d = 0; d < dim; ++d) {
    double mx = w.at(0, d);
    for (size_t l = 1; l < n_layers; ++l) mx = std::max(mx, w.at(l, d));
    double z = 0.0;
    for (size_t l = 0; l < n_layers; ++l) {
      double e = std::exp(w.at(l, d) - mx);
      w.at(l, d) = e;
      z += e;
    }
    for (size_t l = 0; l < n_layers; ++l) w.at(l, d) /= z;
  }
  std::vector<LayerWeightSummary> out(n_layers);
  for (size_t l = 0; l < n_layers; ++l) {
    std::vector<double> row(dim);
    double mean = 0.0;
    for (size_t d = 0; d < dim; ++d) {
      row[d] = w.at(l, d);
      mean += row[d];
    }
    std::sort(row.begin(), row.end());
    out[l].mean = mean / static_cast<double>(dim);
    out[l].q25 = quantile_sorted(row, 0.25);
    out[l].median = quantile_sorted(row, 0.5);
    out[l].q75 = quantile_sorted(row, 0.75);
  }
  return out;
}

void write_weight_histogram(const Tensor& logits, const std::string& path) {
  std::vector<LayerWeightSummary> rows = weight_histogram(logits);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path);
  os.precision(17);
  os << "layer\tmean\tq25\tmedian\tq75\n";
  for (size_t l = 0; l < rows.size(); ++l) {
    os << l << '\t' << rows[l].mean << '\t' << rows[l].q25 << '\t'
       << rows[l].median << '\t' << rows[l].q75 << '\n';
  }
}

}  // namespace mixvc
