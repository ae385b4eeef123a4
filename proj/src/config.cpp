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
#include "mixvc/config.hpp"

#include <fstream>

#include "mixvc/errors.hpp"

namespace mixvc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void check_key_shape(const std::string& key) {
  size_t dot = key.find('.');
  if (dot == 0 || dot == std::string::npos || dot + 1 == key.size())
    throw UsageError("config key '" + key + "' must look like section.key");
}

}  // namespace

void Config::declare(const std::string& key,
                     const std::string& default_value) {
  check_key_shape(key);
  if (values_.count(key))
    throw UsageError("config key '" + key + "' declared twice");
  values_[key] = default_value;
}

void Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected 'section.key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    check_key_shape(key);
    if (!known(key))
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": unknown config key '" + key + "'");
    values_[key] = value;
  }
}

void Config::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw UsageError("unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& Config::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

double Config::num(const std::string& key) const {
  const std::string& v = str(key);
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not a number: '" + v + "'");
  }
}

long Config::integer(const std::string& key) const {
  const std::string& v = str(key);
  try {
    size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not an integer: '" + v +
                     "'");
  }
}

uint64_t Config::uint(const std::string& key) const {
  const std::string& v = str(key);
  try {
    size_t used = 0;
    unsigned long long x = std::stoull(v, &used);
    if (used != v.size() || v.find('-') != std::string::npos)
      throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key +
                     "' is not an unsigned integer: '" + v + "'");
  }
}

std::vector<double> Config::num_list(const std::string& key) const {
  const std::string& v = str(key);
  std::vector<double> out;
  if (trim(v).empty()) return out;
  size_t start = 0;
  while (true) {
    size_t comma = v.find(',', start);
    std::string item = trim(v.substr(start, comma - start));
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("config key '" + key + "' has a non-numeric item '" +
                       item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void Config::write_resolved(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  for (const auto& [k, v] : values_) f << k << " = " << v << '\n';
}

Config default_config() {
  Config c;
  c.declare("data.n_speakers", "8");
  c.declare("data.n_utts", "12");
  c.declare("data.seed", "42");

  c.declare("model.encoder_type", "random");
  c.declare("model.encoder_seed", "11");
  c.declare("model.layers", "6");
  c.declare("model.dim", "32");
  c.declare("model.alpha", "0,0,0,0,1,1,1");
  c.declare("model.beta", "1,1,1,0,0,0,0");
  c.declare("model.noise_sigma", "0.1");
  c.declare("model.speaker_encoder_seed", "777");
  c.declare("model.embed_dim", "16");
  c.declare("model.mix_mode", "chameleon");
  c.declare("model.range_lo", "4");
  c.declare("model.range_hi", "6");
  c.declare("model.extractor_blocks", "2");
  c.declare("model.extractor_heads", "2");
  c.declare("model.decoder_hidden", "64");
  c.declare("model.decoder_blocks", "3");
  c.declare("model.init_seed", "1");

  c.declare("train.steps", "500");
  c.declare("train.batch_size", "4");
  c.declare("train.lr", "0.05");
  c.declare("train.lr_weights_mult", "50");
  c.declare("train.lambda_l2", "1.5");
  c.declare("train.lambda_warmup", "100");
  c.declare("train.seed", "1");
  c.declare("train.ckpt_every", "0");

  c.declare("eval.system", "");
  c.declare("eval.max_targets", "2");
  c.declare("eval.probe_stride", "2");
  return c;
}

ModelConfig model_config_from(const Config& c) {
  ModelConfig m;
  m.encoder_type = c.str("model.encoder_type");
  m.encoder_seed = c.uint("model.encoder_seed");
  long layers = c.integer("model.layers");
  long dim = c.integer("model.dim");
  if (layers < 1 || dim < 1)
    throw UsageError("model.layers and model.dim must be positive");
  m.layers = size_t(layers);
  m.dim = size_t(dim);
  m.alpha = c.num_list("model.alpha");
  m.beta = c.num_list("model.beta");
  m.noise_sigma = c.num("model.noise_sigma");
  m.speaker_encoder_seed = c.uint("model.speaker_encoder_seed");
  long embed = c.integer("model.embed_dim");
  if (embed < 1) throw UsageError("model.embed_dim must be positive");
  m.embed_dim = size_t(embed);
  m.mixer.mode = mix_mode_from_name(c.str("model.mix_mode"));
  long lo = c.integer("model.range_lo"), hi = c.integer("model.range_hi");
  if (lo < 0 || hi < 0) throw UsageError("layer range must be nonnegative");
  m.mixer.range_lo = size_t(lo);
  m.mixer.range_hi = size_t(hi);
  long eb = c.integer("model.extractor_blocks");
  long eh = c.integer("model.extractor_heads");
  long dh = c.integer("model.decoder_hidden");
  long db = c.integer("model.decoder_blocks");
  if (eb < 1 || eh < 1 || dh < 1 || db < 1)
    throw UsageError("extractor/decoder sizes must be positive");
  m.extractor.blocks = size_t(eb);
  m.extractor.heads = size_t(eh);
  m.decoder.hidden_dim = size_t(dh);
  m.decoder.blocks = size_t(db);
  m.init_seed = c.uint("model.init_seed");
  return m;
}

TrainConfig train_config_from(const Config& c) {
  TrainConfig t;
  long steps = c.integer("train.steps");
  long batch = c.integer("train.batch_size");
  if (steps < 0 || batch < 1)
    throw UsageError("train.steps must be >= 0 and train.batch_size >= 1");
  t.steps = size_t(steps);
  t.batch_size = size_t(batch);
  t.learning_rate = c.num("train.lr");
  t.lr_weights_mult = c.num("train.lr_weights_mult");
  if (!(t.lr_weights_mult > 0.0))
    throw UsageError("train.lr_weights_mult must be > 0");
  t.lambda_l2 = c.num("train.lambda_l2");
  long warm = c.integer("train.lambda_warmup");
  if (warm < 0) throw UsageError("train.lambda_warmup must be >= 0");
  t.lambda_warmup = size_t(warm);
  t.seed = c.uint("train.seed");
  long every = c.integer("train.ckpt_every");
  if (every < 0) throw UsageError("train.ckpt_every must be >= 0");
  t.ckpt_every = size_t(every);
  return t;
}

EvalConfig eval_config_from(const Config& c) {
  EvalConfig e;
  e.system = c.str("eval.system");
  long mt = c.integer("eval.max_targets");
  long ps = c.integer("eval.probe_stride");
  if (mt < 1 || ps < 1)
    throw UsageError("eval.max_targets and eval.probe_stride must be >= 1");
  e.max_targets = size_t(mt);
  e.probe_stride = size_t(ps);
  return e;
}

}  // namespace mixvc
