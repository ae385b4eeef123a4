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
#include "mixvc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "mixvc/errors.hpp"
#include "mixvc/frontend.hpp"

namespace mixvc {

namespace {

constexpr uint64_t kBatchStream = 0xBA7C4;

// Scalar marker tensors saved with every checkpoint so that loading a
// checkpoint into a differently configured model fails loudly instead of
// silently misinterpreting the weights.
Tensor meta(double v) { return Tensor::full({1}, v); }

}  // namespace

Model::Model(const ModelConfig& cfg, const CorpusManifest* corpus)
    : cfg_(cfg) {
  if (cfg.encoder_type == "random") {
    content_encoder_ = std::make_unique<RandomFrozenEncoder>(
        cfg.encoder_seed, cfg.layers, cfg.dim);
  } else if (cfg.encoder_type == "structured") {
    if (corpus == nullptr)
      throw UsageError("structured encoder requires a corpus manifest");
    StructuredEncoderProfile prof;
    prof.alpha = cfg.alpha;
    prof.beta = cfg.beta;
    prof.noise_sigma = cfg.noise_sigma;
    if (prof.alpha.size() != cfg.layers + 1 ||
        prof.beta.size() != cfg.layers + 1)
      throw UsageError("structured encoder needs layers+1 alpha and beta gains");
    content_encoder_ = std::make_unique<StructuredCorpusEncoder>(
        *corpus, prof, cfg.encoder_seed, cfg.dim);
  } else {
    throw UsageError("unknown encoder_type '" + cfg.encoder_type +
                     "' (expected random or structured)");
  }
  speaker_encoder_ =
      std::make_unique<FrozenSpeakerEncoder>(cfg.speaker_encoder_seed,
                                             cfg.embed_dim);

  for (const auto& [name, e] : content_encoder_->params().items())
    params_.add(name, e.value, ParamGroup::frozen);
  for (const auto& [name, e] : speaker_encoder_->params().items())
    params_.add(name, e.value, ParamGroup::frozen);

  const size_t n_layers = content_encoder_->layers() + 1;
  if (cfg.mixer.mode == MixMode::fixed_average) {
    if (cfg.mixer.range_lo > cfg.mixer.range_hi ||
        cfg.mixer.range_hi >= n_layers)
      throw UsageError("fixed_average layer range out of bounds");
  }
  if (cfg.mixer.mode == MixMode::chameleon) {
    params_.add("mixer.logits", Tensor::zeros({n_layers, cfg.dim}),
                ParamGroup::layer_weights);
  }
  {
    Rng rng(mix_seed(cfg.init_seed, 1));
    init_extractor(params_, cfg.dim, cfg.embed_dim, cfg.extractor, rng);
  }
  {
    Rng rng(mix_seed(cfg.init_seed, 2));
    init_decoder(params_, cfg.dim, cfg.embed_dim, kNumMels, cfg.decoder, rng);
  }

  params_.add("__meta.layers", meta(double(cfg.layers)), ParamGroup::frozen);
  params_.add("__meta.dim", meta(double(cfg.dim)), ParamGroup::frozen);
  params_.add("__meta.embed_dim", meta(double(cfg.embed_dim)),
              ParamGroup::frozen);
  params_.add("__meta.mode", meta(double(int(cfg.mixer.mode))),
              ParamGroup::frozen);
  params_.add("__meta.range_lo", meta(double(cfg.mixer.range_lo)),
              ParamGroup::frozen);
  params_.add("__meta.range_hi", meta(double(cfg.mixer.range_hi)),
              ParamGroup::frozen);
}

Node* Model::content_features(Graph& g, TapedParams& tp,
                              const Tensor& stack) const {
  Node* s = g.input("stack", stack);
  Node* logits = nullptr;
  if (cfg_.mixer.mode == MixMode::chameleon) logits = tp.use(g, "mixer.logits");
  return mix(g, s, cfg_.mixer, logits);
}

Node* Model::predict_speaker(Graph& g, TapedParams& tp, Node* content) const {
  // The reversal layer sits between the shared content features and the
  // extractor: the extractor itself receives plain gradients (it learns to
  // predict the speaker), while everything upstream receives them negated.
  Node* rev = g.grad_reverse(content, 1.0);
  return extract_speaker(g, tp, cfg_.extractor, rev);
}

Node* Model::reconstruct(Graph& g, TapedParams& tp, Node* content,
                         const std::vector<double>& speaker) const {
  if (speaker.size() != cfg_.embed_dim)
    throw ShapeError("speaker embedding size mismatch");
  Node* spk = g.input("speaker", Tensor::from_vector(speaker));
  return decode(g, tp, cfg_.decoder, content, spk);
}

Tensor Model::mix_content(const Tensor& stack) const {
  Graph g;
  TapedParams tp(params_);
  return content_features(g, tp, stack)->value;
}

Tensor Model::decode_mel(const Tensor& content,
                         const std::vector<double>& speaker) const {
  Graph g;
  TapedParams tp(params_);
  Node* c = g.input("content", content);
  return reconstruct(g, tp, c, speaker)->value;
}

void Model::save(const std::string& path) const { params_.save(path); }

void Model::load(const std::string& path) {
  Parameters loaded = Parameters::load(path);
  if (loaded.size() != params_.size())
    throw DataError("checkpoint/config mismatch: parameter count differs");
  for (auto& [name, e] : params_.items()) {
    if (!loaded.has(name))
      throw DataError("checkpoint/config mismatch: missing parameter '" +
                      name + "'");
    const ParamEntry& le = loaded.entry(name);
    if (le.group != e.group)
      throw DataError("checkpoint/config mismatch: group differs for '" +
                      name + "'");
    if (le.value.shape != e.value.shape)
      throw DataError("checkpoint/config mismatch: shape differs for '" +
                      name + "'");
    if (e.group == ParamGroup::frozen) {
      // Frozen weights are derived from config seeds; a checkpoint written
      // under any other configuration cannot match bit-for-bit.
      if (std::memcmp(le.value.data.data(), e.value.data.data(),
                      e.value.numel() * sizeof(double)) != 0)
        throw DataError("checkpoint/config mismatch: frozen parameter '" +
                        name + "' differs");
    } else {
      e.value = le.value;
    }
  }
}

double lambda_at_step(const TrainConfig& cfg, size_t step) {
  if (cfg.lambda_warmup == 0) return cfg.lambda_l2;
  double ramp = std::min(1.0, double(step) / double(cfg.lambda_warmup));
  return cfg.lambda_l2 * ramp;
}

std::vector<TrainItem> load_split(const Model& model,
                                  const CorpusManifest& manifest,
                                  const std::string& split) {
  std::vector<TrainItem> items;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    Waveform w = read_wav(manifest.root + "/" + e.path);
    TrainItem it;
    it.utt_id = e.utt_id;
    it.stack = model.encode_stack(w, e.utt_id);
    it.mel = mel_spectrogram(w);
    it.speaker = model.speaker_embedding(w);
    items.push_back(std::move(it));
  }
  return items;
}

Trainer::Trainer(Model& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg) {
  if (cfg.batch_size == 0) throw UsageError("batch_size must be positive");
  if (cfg.lambda_l2 < 0) throw UsageError("lambda_l2 must be >= 0");
}

void Trainer::ensure_momentum() {
  if (momentum_.size() > 0) return;
  for (const auto& [name, e] : model_.params().items()) {
    if (e.group == ParamGroup::frozen) continue;
    momentum_.add(name, Tensor::zeros(e.value.shape), e.group);
  }
  momentum_.add("__step", Tensor::zeros({1}), ParamGroup::frozen);
}

std::vector<size_t> Trainer::batch_indices(size_t step_index,
                                           size_t n_items) const {
  if (n_items == 0) throw DataError("empty training set");
  // Stateless in the step index: a resumed run draws the exact batches the
  // unbroken run would have drawn.
  Rng rng(mix_seed(cfg_.seed, kBatchStream, step_index));
  size_t b = std::min(cfg_.batch_size, n_items);
  std::vector<size_t> idx(n_items);
  for (size_t i = 0; i < n_items; ++i) idx[i] = i;
  for (size_t i = 0; i < b; ++i) {
    size_t j = i + size_t(rng.below(uint64_t(n_items - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(b);
  return idx;
}

namespace {

// First t frames of a [L][T][D] stack.
Tensor truncate_stack(const Tensor& s, size_t t) {
  size_t L = s.shape[0], T = s.shape[1], D = s.shape[2];
  Tensor out = Tensor::zeros({L, t, D});
  for (size_t l = 0; l < L; ++l)
    std::copy(s.data.data() + (l * T) * D, s.data.data() + (l * T + t) * D,
              out.data.data() + (l * t) * D);
  return out;
}

Tensor truncate_rows(const Tensor& m, size_t t) {
  size_t D = m.shape[1];
  Tensor out = Tensor::zeros({t, D});
  std::copy(m.data.begin(), m.data.begin() + t * D, out.data.begin());
  return out;
}

}  // namespace

LossBreakdown Trainer::step(const std::vector<const TrainItem*>& batch,
                            size_t step_index) {
  if (batch.empty()) throw UsageError("empty batch");
  ensure_momentum();
  const double lambda = lambda_at_step(cfg_, step_index);

  // Batch items are truncated to the shortest utterance so the per-item
  // losses average over the same frame horizon.
  size_t tmin = batch[0]->stack.shape[1];
  for (const TrainItem* it : batch)
    tmin = std::min(tmin, it->stack.shape[1]);

  Graph g;
  TapedParams tp(model_.params());
  Node* recon_sum = nullptr;
  Node* l2_sum = nullptr;
  for (const TrainItem* it : batch) {
    Tensor stack = truncate_stack(it->stack, tmin);
    Tensor mel = truncate_rows(it->mel, tmin);
    Node* content = model_.content_features(g, tp, stack);
    Node* pred = model_.reconstruct(g, tp, content, it->speaker);
    Node* target = g.input("mel:" + it->utt_id, mel);
    Node* recon = g.l1_loss(pred, target);
    Node* spk_pred = model_.predict_speaker(g, tp, content);
    Node* spk_true = g.input("spk:" + it->utt_id,
                             Tensor::from_vector(it->speaker));
    Node* l2 = g.l2_distance_squared(spk_pred, spk_true);
    recon_sum = recon_sum ? g.add(recon_sum, recon) : recon;
    l2_sum = l2_sum ? g.add(l2_sum, l2) : l2;
  }
  const double inv_b = 1.0 / double(batch.size());
  Node* recon_mean = g.scale(recon_sum, inv_b);
  Node* l2_mean = g.scale(l2_sum, inv_b);
  // With lambda exactly zero the objective node *is* the reconstruction
  // node, so the backward pass matches a reconstruction-only run bit for
  // bit; the adversarial branch then only contributes zero-valued grads.
  Node* total = lambda == 0.0
                    ? recon_mean
                    : g.add(recon_mean, g.scale(l2_mean, lambda));
  g.backward(total);

  grads_.clear();
  for (const auto& [name, node] : tp.leaves) {
    if (model_.params().entry(name).group == ParamGroup::frozen) continue;
    grads_.emplace(name, node->grad);
  }
  apply_sgd();

  LossBreakdown lb;
  lb.recon = recon_mean->scalar();
  lb.l2 = l2_mean->scalar();
  lb.lambda = lambda;
  lb.total = total->scalar();
  return lb;
}

void Trainer::apply_sgd() {
  constexpr double kMomentum = 0.9;
  for (auto& [name, e] : model_.params().items()) {
    if (e.group == ParamGroup::frozen) continue;
    auto gi = grads_.find(name);
    if (gi == grads_.end())
      throw NumericError("no gradient for trainable parameter '" + name + "'");
    Tensor& v = momentum_.value(name);
    Tensor& theta = e.value;
    const Tensor& grad = gi->second;
    // The mixing logits form a tiny parameter group fed by gradients that
    // pass through a softmax and two downstream networks, so their natural
    // update scale is much smaller than the dense layers'. A separate rate
    // multiplier lets them converge on the same schedule.
    double lr = cfg_.learning_rate;
    if (e.group == ParamGroup::layer_weights) lr *= cfg_.lr_weights_mult;
    for (size_t i = 0; i < theta.numel(); ++i) {
      v.data[i] = kMomentum * v.data[i] + grad.data[i];
      theta.data[i] -= lr * v.data[i];
    }
  }
}

void Trainer::train(const CorpusManifest& manifest,
                    const std::string& resume_from) {
  std::vector<TrainItem> items = load_split(model_, manifest, "train");
  if (items.empty()) throw DataError("no train-split utterances in manifest");

  size_t done = 0;
  if (!resume_from.empty()) {
    model_.load(resume_from);
    momentum_ = Parameters::load(resume_from + ".opt");
    if (!momentum_.has("__step"))
      throw DataError("optimizer state missing __step");
    done = size_t(std::llround(momentum_.value("__step").data[0]));
  } else {
    ensure_momentum();
  }

  std::ofstream log;
  if (!cfg_.out_dir.empty()) {
    const std::string log_path = cfg_.out_dir + "/loss_log.tsv";
    log.open(log_path, done > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw DataError("cannot write " + log_path);
    log << std::setprecision(17);
  }

  auto save_ckpt = [&](const std::string& path, size_t step) {
    model_.save(path);
    momentum_.value("__step").data[0] = double(step);
    momentum_.save(path + ".opt");
  };

  for (size_t t = done + 1; t <= cfg_.steps; ++t) {
    std::vector<size_t> idx = batch_indices(t, items.size());
    std::vector<const TrainItem*> batch;
    for (size_t i : idx) batch.push_back(&items[i]);
    LossBreakdown lb = step(batch, t);
    if (log.is_open())
      log << t << '\t' << lb.recon << '\t' << lb.l2 << '\t' << lb.lambda
          << '\t' << lb.total << '\n';
    if (cfg_.ckpt_every > 0 && t % cfg_.ckpt_every == 0 && t < cfg_.steps &&
        !cfg_.out_dir.empty())
      save_ckpt(cfg_.out_dir + "/ckpt_step" + std::to_string(t) + ".bin", t);
  }
  if (!cfg_.out_dir.empty())
    save_ckpt(cfg_.out_dir + "/model.ckpt", cfg_.steps);
}

}  // namespace mixvc
