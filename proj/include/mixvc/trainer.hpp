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
#ifndef MIXVC_TRAINER_HPP_
#define MIXVC_TRAINER_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mixvc/decoder.hpp"
#include "mixvc/encoders.hpp"
#include "mixvc/extractor.hpp"
#include "mixvc/mixer.hpp"

namespace mixvc {

struct ModelConfig {
  std::string encoder_type = "random";  // random | structured
  uint64_t encoder_seed = 11;
  size_t layers = 6;
  size_t dim = 32;
  // structured encoder fixture; sizes must be layers+1 when set
  std::vector<double> alpha;
  std::vector<double> beta;
  double noise_sigma = 0.1;

  uint64_t speaker_encoder_seed = 777;
  size_t embed_dim = 16;

  MixerConfig mixer;
  ExtractorConfig extractor;
  DecoderConfig decoder;
  uint64_t init_seed = 1;
};

// The full voice-conversion model: frozen encoders plus the three trainable
// groups (layer-weight logits, speaker extractor, decoder), together with
// one Parameters registry that owns every tensor and backs checkpointing.
class Model {
 public:
  // corpus is required when encoder_type == structured (ground-truth
  // alignments drive that fixture); ignored otherwise.
  Model(const ModelConfig& cfg, const CorpusManifest* corpus = nullptr);

  const ModelConfig& config() const { return cfg_; }
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  const ContentEncoder& content_encoder() const { return *content_encoder_; }
  const FrozenSpeakerEncoder& speaker_encoder() const {
    return *speaker_encoder_;
  }

  Tensor encode_stack(const Waveform& wave,
                      const std::string& utt_id = "") const {
    return content_encoder_->encode(wave, utt_id);
  }
  std::vector<double> speaker_embedding(const Waveform& wave) const {
    return speaker_encoder_->encode(wave);
  }

  // Graph builders; tp must wrap params(). The logits leaf is created on
  // demand in chameleon mode.
  Node* content_features(Graph& g, TapedParams& tp,
                         const Tensor& stack) const;
  Node* predict_speaker(Graph& g, TapedParams& tp, Node* content) const;
  Node* reconstruct(Graph& g, TapedParams& tp, Node* content,
                    const std::vector<double>& speaker) const;

  // Inference-path conveniences (fresh throwaway graph per call).
  Tensor mix_content(const Tensor& stack) const;
  Tensor decode_mel(const Tensor& content,
                    const std::vector<double>& speaker) const;

  // Checkpointing. Loading verifies that frozen parameters match the
  // configured encoders bit-for-bit and that the trainable shapes agree;
  // a mismatch raises DataError.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  ModelConfig cfg_;
  Parameters params_;
  std::unique_ptr<ContentEncoder> content_encoder_;
  std::unique_ptr<FrozenSpeakerEncoder> speaker_encoder_;
};

struct TrainConfig {
  size_t steps = 500;
  size_t batch_size = 4;
  double learning_rate = 0.05;
  double lr_weights_mult = 50.0; // extra rate factor for the mixing logits
  double lambda_l2 = 1.5;        // weight of the adversarial L2 term
  size_t lambda_warmup = 100;   // steps to ramp lambda from 0 to lambda_l2
  uint64_t seed = 1;
  size_t ckpt_every = 0;        // 0: only the final checkpoint
  std::string out_dir;          // loss log + checkpoints
};

// Per-step loss record; total == recon + lambda*l2 as logged. The per-group
// gradient signs are applied by the graph wiring, not by this bookkeeping.
struct LossBreakdown {
  double recon = 0.0;
  double l2 = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

// lambda(t) = lambda_l2 * min(1, t/warmup), with t 1-based; nondecreasing.
double lambda_at_step(const TrainConfig& cfg, size_t step);

// One cached training utterance.
struct TrainItem {
  std::string utt_id;
  Tensor stack;                 // [L+1][T][D]
  Tensor mel;                   // [T][M] reconstruction target
  std::vector<double> speaker;  // frozen target embedding
};

class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& cfg);

  // Loads and caches the train split, then runs cfg.steps steps, writing
  // loss_log.tsv and checkpoints under cfg.out_dir. Resumes from
  // `resume_from` (a checkpoint path base) when given.
  void train(const CorpusManifest& manifest,
             const std::string& resume_from = "");

  // Single optimization step on explicit items (testing hook).
  LossBreakdown step(const std::vector<const TrainItem*>& batch,
                     size_t step_index);

  // Deterministic batch selection: stateless in the step index, so a resumed
  // run picks the same batches as an unbroken one.
  std::vector<size_t> batch_indices(size_t step_index, size_t n_items) const;

  const Parameters& momentum() const { return momentum_; }

 private:
  void ensure_momentum();
  void apply_sgd();

  Model& model_;
  TrainConfig cfg_;
  Parameters momentum_;
  std::map<std::string, Tensor> grads_;
};

// Builds the cached items for a split ("train", "dev" or "test").
std::vector<TrainItem> load_split(const Model& model,
                                  const CorpusManifest& manifest,
                                  const std::string& split);

}  // namespace mixvc

#endif  // MIXVC_TRAINER_HPP_
