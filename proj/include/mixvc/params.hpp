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
#ifndef MIXVC_PARAMS_HPP_
#define MIXVC_PARAMS_HPP_

#include <map>
#include <string>

#include "mixvc/tensor.hpp"

namespace mixvc {

// Which optimizer treatment a parameter receives. `frozen` parameters are
// never updated; the other three groups exist because the adversarial loss
// routes gradients with different signs per group.
enum class ParamGroup { frozen, layer_weights, speaker_extractor, decoder };

const char* param_group_name(ParamGroup g);
ParamGroup param_group_from_name(const std::string& s);

struct ParamEntry {
  Tensor value;
  ParamGroup group = ParamGroup::frozen;
};

// Named parameter registry. std::map keeps iteration order deterministic,
// which the bitwise-reproducibility guarantees rely on.
class Parameters {
 public:
  Tensor& add(const std::string& name, Tensor value, ParamGroup group);
  bool has(const std::string& name) const { return items_.count(name) > 0; }
  ParamEntry& entry(const std::string& name);
  const ParamEntry& entry(const std::string& name) const;
  Tensor& value(const std::string& name) { return entry(name).value; }
  const Tensor& value(const std::string& name) const {
    return entry(name).value;
  }
  std::map<std::string, ParamEntry>& items() { return items_; }
  const std::map<std::string, ParamEntry>& items() const { return items_; }
  size_t size() const { return items_.size(); }

  // Checkpoint container: `path` gets the binary described in README.md
  // (name -> shape + raw little-endian float64), `path`.manifest gets a text
  // table `name<TAB>shape<TAB>group`. Round-trip is bit-exact.
  void save(const std::string& path) const;
  static Parameters load(const std::string& path);

 private:
  std::map<std::string, ParamEntry> items_;
};

}  // namespace mixvc

#endif  // MIXVC_PARAMS_HPP_
