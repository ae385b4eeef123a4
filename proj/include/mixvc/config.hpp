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
#ifndef MIXVC_CONFIG_HPP_
#define MIXVC_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

#include "mixvc/eval.hpp"
#include "mixvc/trainer.hpp"

namespace mixvc {

// Flat `section.key = value` configuration with a closed key registry:
// every key must be declared with a default before it can be read or set,
// and files that mention unknown keys are rejected. '#' starts a comment.
class Config {
 public:
  void declare(const std::string& key, const std::string& default_value);
  bool known(const std::string& key) const { return values_.count(key) > 0; }

  // UsageError on syntax errors or unknown keys (with line numbers).
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  uint64_t uint(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;  // comma-sep

  // `key = value` lines, sorted by key; parseable by load_file.
  void write_resolved(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
};

// The registry of every recognized key with its default.
Config default_config();

ModelConfig model_config_from(const Config& c);
TrainConfig train_config_from(const Config& c);
EvalConfig eval_config_from(const Config& c);

}  // namespace mixvc

#endif  // MIXVC_CONFIG_HPP_
