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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mixvc/trainer.hpp"
#include "testutil.hpp"

using namespace mixvc;
using testutil::TempDir;

namespace {

ModelConfig small_model_config() {
  ModelConfig mc;
  mc.encoder_type = "random";
  mc.encoder_seed = 11;
  mc.layers = 2;
  mc.dim = 8;
  mc.embed_dim = 4;
  mc.extractor.blocks = 1;
  mc.extractor.heads = 2;
  mc.decoder.hidden_dim = 16;
  mc.decoder.blocks = 1;
  mc.init_seed = 1;
  return mc;
}

struct TrainFixture {
  TempDir dir;
  CorpusManifest manifest;
  TrainFixture() : dir("trainer"),
                   manifest(generate_corpus(4, 2, 91, dir.str())) {}
};

std::string file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(is), "missing file: " << path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
  std::ifstream is(path);
  REQUIRE_MESSAGE(bool(is), "missing file: " << path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("adversarial objective routes signed gradients per group") {
  TrainFixture f;
  Model m(small_model_config());
  auto items = load_split(m, f.manifest, "train");
  REQUIRE(items.size() == 6);
  const TrainItem& it = items[0];
  Tensor spk_true = Tensor::from_vector(it.speaker);

  Graph g;
  TapedParams tp(m.params());
  Node* content = m.content_features(g, tp, it.stack);
  Node* pred = m.reconstruct(g, tp, content, it.speaker);
  Node* recon = g.l1_loss(pred, g.input("mel", it.mel));
  Node* spk_pred = m.predict_speaker(g, tp, content);
  Node* l2 = g.l2_distance_squared(spk_pred, g.input("spk", spk_true));
  const double lambda = 0.7;
  Node* total = g.add(recon, g.scale(l2, lambda));

  auto grad_snapshot = [&]() {
    std::map<std::string, Tensor> out;
    for (const auto& [name, node] : tp.leaves) {
      if (m.params().entry(name).group != ParamGroup::frozen) {
        out.emplace(name, node->grad);
      }
    }
    return out;
  };
  g.backward(total);
  auto g_tot = grad_snapshot();
  g.backward(recon);
  auto g_rec = grad_snapshot();
  g.backward(l2);
  auto g_l2 = grad_snapshot();

  // The adversarial term reaches the logits and the extractor but feeds the
  // decoder exactly nothing; the reconstruction term never touches the
  // extractor.
  auto group_max_abs = [&](const std::map<std::string, Tensor>& grads,
                           ParamGroup grp) {
    double mx = 0.0;
    for (const auto& [name, t] : grads) {
      if (m.params().entry(name).group != grp) continue;
      for (double v : t.data) mx = std::max(mx, std::fabs(v));
    }
    return mx;
  };
  CHECK(group_max_abs(g_l2, ParamGroup::decoder) == 0.0);
  CHECK(group_max_abs(g_l2, ParamGroup::speaker_extractor) > 0.0);
  CHECK(group_max_abs(g_l2, ParamGroup::layer_weights) > 0.0);
  CHECK(group_max_abs(g_rec, ParamGroup::speaker_extractor) == 0.0);
  CHECK(group_max_abs(g_rec, ParamGroup::decoder) > 0.0);
  CHECK(group_max_abs(g_rec, ParamGroup::layer_weights) > 0.0);

  // total-loss gradients decompose linearly: g_tot = g_rec + lambda * g_l2.
  double lin_err = 0.0;
  for (const auto& [name, t] : g_tot) {
    const Tensor& r = g_rec.at(name);
    const Tensor& a = g_l2.at(name);
    for (size_t i = 0; i < t.numel(); ++i) {
      lin_err = std::max(lin_err, testutil::rel_err(
                                      t.data[i], r.data[i] + lambda * a.data[i]));
    }
  }
  MESSAGE("per-group linearity max rel err ", lin_err);
  CHECK(lin_err <= 1e-9);

  // Sign probes. The l2 gradient at the logits passed through the reversal
  // layer, so a plain descent step on it *raises* the adversary's loss; the
  // extractor sits below the reversal and its step lowers it; a decoder step
  // on the reconstruction gradient lowers reconstruction.
  auto eval_l2 = [&]() {
    Graph h;
    TapedParams th(m.params());
    Node* c = m.content_features(h, th, it.stack);
    Node* sp = m.predict_speaker(h, th, c);
    return h.l2_distance_squared(sp, h.input("spk", spk_true))->scalar();
  };
  auto eval_recon = [&]() {
    Graph h;
    TapedParams th(m.params());
    Node* c = m.content_features(h, th, it.stack);
    Node* pr = m.reconstruct(h, th, c, it.speaker);
    return h.l1_loss(pr, h.input("mel", it.mel))->scalar();
  };

  auto step_group = [&](ParamGroup grp,
                        const std::map<std::string, Tensor>& grads) {
    double gmax = group_max_abs(grads, grp);
    REQUIRE(gmax > 0.0);
    double eta = 1e-2 / gmax;
    std::map<std::string, Tensor> saved;
    for (const auto& [name, t] : grads) {
      if (m.params().entry(name).group != grp) continue;
      Tensor& theta = m.params().value(name);
      saved.emplace(name, theta);
      for (size_t i = 0; i < theta.numel(); ++i) {
        theta.data[i] -= eta * t.data[i];
      }
    }
    return saved;
  };
  auto restore = [&](const std::map<std::string, Tensor>& saved) {
    for (const auto& [name, t] : saved) m.params().value(name) = t;
  };

  double l2_base = eval_l2();
  double recon_base = eval_recon();

  auto s1 = step_group(ParamGroup::layer_weights, g_l2);
  CHECK(eval_l2() > l2_base);
  restore(s1);
  auto s2 = step_group(ParamGroup::speaker_extractor, g_l2);
  CHECK(eval_l2() < l2_base);
  restore(s2);
  auto s3 = step_group(ParamGroup::decoder, g_rec);
  CHECK(eval_recon() < recon_base);
  restore(s3);
}

TEST_CASE("lambda ramps linearly over the warmup and then clamps") {
  TrainConfig c;
  c.lambda_l2 = 0.1;
  c.lambda_warmup = 100;
  CHECK(lambda_at_step(c, 1) == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(lambda_at_step(c, 50) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(lambda_at_step(c, 100) == 0.1);
  CHECK(lambda_at_step(c, 101) == 0.1);
  CHECK(lambda_at_step(c, 100000) == 0.1);
  double prev = 0.0;
  for (size_t t = 1; t <= 150; ++t) {
    double v = lambda_at_step(c, t);
    CHECK(v >= prev);
    prev = v;
  }
  c.lambda_warmup = 0;
  CHECK(lambda_at_step(c, 1) == 0.1);
}

TEST_CASE("lambda zero leaves the extractor untouched while others move") {
  TrainFixture f;
  Model m(small_model_config());
  auto items = load_split(m, f.manifest, "train");
  TrainConfig tc;
  tc.steps = 3;
  tc.batch_size = 2;
  tc.learning_rate = 0.02;
  tc.lambda_l2 = 0.0;
  tc.lambda_warmup = 0;
  tc.seed = 5;
  Trainer tr(m, tc);

  std::map<std::string, Tensor> before;
  for (const auto& [name, e] : m.params().items()) {
    if (e.group != ParamGroup::frozen) before.emplace(name, e.value);
  }
  for (size_t t = 1; t <= 3; ++t) {
    std::vector<size_t> idx = tr.batch_indices(t, items.size());
    std::vector<const TrainItem*> batch;
    for (size_t i : idx) batch.push_back(&items[i]);
    LossBreakdown lb = tr.step(batch, t);
    CHECK(lb.lambda == 0.0);
    CHECK(lb.total == lb.recon);
  }
  for (const auto& [name, t0] : before) {
    const Tensor& now = m.params().value(name);
    bool same = std::equal(t0.data.begin(), t0.data.end(), now.data.begin());
    ParamGroup grp = m.params().entry(name).group;
    if (grp == ParamGroup::speaker_extractor) {
      CHECK_MESSAGE(same, name << " moved despite a zero adversarial weight");
    }
  }
  CHECK(!std::equal(before.at("mixer.logits").data.begin(),
                    before.at("mixer.logits").data.end(),
                    m.params().value("mixer.logits").data.begin()));
  CHECK(!std::equal(before.at("decoder.in.w").data.begin(),
                    before.at("decoder.in.w").data.end(),
                    m.params().value("decoder.in.w").data.begin()));
}

TEST_CASE("training resumes bit-exactly and logs a parseable breakdown") {
  TrainFixture f;
  ModelConfig mc = small_model_config();
  TrainConfig base;
  base.steps = 6;
  base.batch_size = 2;
  base.learning_rate = 0.02;
  base.lambda_l2 = 0.5;
  base.lambda_warmup = 3;
  base.seed = 7;

  TempDir da("trA"), db("trB"), dc("trC");
  {
    Model ma(mc);
    TrainConfig ca = base;
    ca.ckpt_every = 2;
    ca.out_dir = da.str();
    Trainer(ma, ca).train(f.manifest);
  }
  CHECK(std::filesystem::exists(da.file("ckpt_step2.bin")));
  CHECK(std::filesystem::exists(da.file("ckpt_step4.bin")));
  CHECK(!std::filesystem::exists(da.file("ckpt_step6.bin")));

  // Stop at step 3, then resume to 6 in a fresh process-equivalent.
  {
    Model mb(mc);
    TrainConfig cb = base;
    cb.steps = 3;
    cb.out_dir = db.str();
    Trainer(mb, cb).train(f.manifest);
  }
  {
    Model mb2(mc);
    TrainConfig cb2 = base;
    cb2.out_dir = db.str();
    Trainer(mb2, cb2).train(f.manifest, db.file("model.ckpt"));
  }
  for (const char* name : {"model.ckpt", "model.ckpt.manifest",
                           "model.ckpt.opt", "loss_log.tsv"}) {
    CHECK_MESSAGE(file_bytes(da.file(name)) == file_bytes(db.file(name)),
                  "resumed artifact differs: " << name);
  }

  // Resuming from an intermediate snapshot lands on the same final weights.
  {
    Model mcod(mc);
    TrainConfig cc = base;
    cc.out_dir = dc.str();
    Trainer(mcod, cc).train(f.manifest, da.file("ckpt_step4.bin"));
  }
  CHECK(file_bytes(dc.file("model.ckpt")) == file_bytes(da.file("model.ckpt")));

  // Log format: step, recon, l2, lambda, total; total reproduces the
  // documented combination bit-for-bit through the precision-17 text.
  auto rows = read_tsv(da.file("loss_log.tsv"));
  REQUIRE(rows.size() == 6);
  for (size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 5);
    CHECK(rows[i][0] == std::to_string(i + 1));
    double recon = std::stod(rows[i][1]);
    double l2 = std::stod(rows[i][2]);
    double lam = std::stod(rows[i][3]);
    double tot = std::stod(rows[i][4]);
    CHECK(lam == lambda_at_step(base, i + 1));
    CHECK(tot == recon + lam * l2);
    CHECK(std::isfinite(recon));
    CHECK(l2 >= 0.0);
  }
}

TEST_CASE("checkpoint/config mismatches are refused") {
  TrainFixture f;
  ModelConfig mc = small_model_config();
  Model m(mc);
  TempDir dir("ckpt");
  std::string path = dir.file("m.bin");
  m.save(path);

  Model same(mc);
  same.load(path);  // clean round-trip

  ModelConfig other_seed = mc;
  other_seed.encoder_seed = 12;
  Model m2(other_seed);
  CHECK_THROWS_WITH_AS(m2.load(path),
                       doctest::Contains("checkpoint/config mismatch"),
                       DataError);

  ModelConfig other_mode = mc;
  other_mode.mixer.mode = MixMode::last_layer;
  Model m3(other_mode);
  CHECK_THROWS_WITH_AS(m3.load(path),
                       doctest::Contains("parameter count differs"),
                       DataError);

  ModelConfig other_width = mc;
  other_width.decoder.hidden_dim = 24;
  Model m4(other_width);
  CHECK_THROWS_WITH_AS(m4.load(path), doctest::Contains("shape differs"),
                       DataError);
}

TEST_CASE("resume requires a complete optimizer state") {
  TrainFixture f;
  ModelConfig mc = small_model_config();
  TempDir dir("resume");
  std::string path = dir.file("solo.ckpt");
  {
    Model m(mc);
    m.save(path);  // a model snapshot without any .opt next to it
  }
  Model m(mc);
  TrainConfig tc;
  tc.steps = 2;
  tc.batch_size = 2;
  CHECK_THROWS_AS(Trainer(m, tc).train(f.manifest, path), DataError);

  Parameters bogus;
  bogus.add("junk", Tensor::zeros({2}), ParamGroup::decoder);
  bogus.save(path + ".opt");
  Model m2(mc);
  CHECK_THROWS_WITH_AS(Trainer(m2, tc).train(f.manifest, path),
                       doctest::Contains("__step"), DataError);
}

TEST_CASE("divergent training raises a numeric error") {
  TrainFixture f;
  Model m(small_model_config());
  TrainConfig tc;
  tc.steps = 4;
  tc.batch_size = 2;
  tc.learning_rate = 1e155;
  tc.lambda_l2 = 0.5;
  tc.lambda_warmup = 0;
  CHECK_THROWS_AS(Trainer(m, tc).train(f.manifest), NumericError);
}

TEST_CASE("batch selection is deterministic, unique, in range") {
  Model m(small_model_config());
  TrainConfig tc;
  tc.batch_size = 3;
  tc.seed = 9;
  Trainer tr(m, tc);
  for (size_t step : {size_t(1), size_t(2), size_t(10), size_t(999)}) {
    std::vector<size_t> idx = tr.batch_indices(step, 7);
    CHECK(idx.size() == 3);
    std::set<size_t> uniq(idx.begin(), idx.end());
    CHECK(uniq.size() == idx.size());
    for (size_t i : idx) CHECK(i < 7);
    CHECK(tr.batch_indices(step, 7) == idx);
  }
  CHECK(tr.batch_indices(1, 2).size() == 2);
  bool any_differ = false;
  std::vector<size_t> first = tr.batch_indices(1, 7);
  for (size_t step = 2; step <= 5; ++step) {
    if (tr.batch_indices(step, 7) != first) any_differ = true;
  }
  CHECK(any_differ);
  CHECK_THROWS_AS(tr.batch_indices(1, 0), DataError);

  TrainConfig bad = tc;
  bad.batch_size = 0;
  CHECK_THROWS_AS(Trainer(m, bad), UsageError);
  TrainConfig neg = tc;
  neg.lambda_l2 = -0.1;
  CHECK_THROWS_AS(Trainer(m, neg), UsageError);
}

TEST_CASE("model construction validates its configuration") {
  ModelConfig mc = small_model_config();
  Model cham(mc);
  CHECK(cham.params().has("mixer.logits"));
  const Tensor& lg = cham.params().value("mixer.logits");
  CHECK(lg.shape == std::vector<size_t>{3, 8});
  CHECK(std::all_of(lg.data.begin(), lg.data.end(),
                    [](double v) { return v == 0.0; }));
  CHECK(cham.params().entry("mixer.logits").group ==
        ParamGroup::layer_weights);

  ModelConfig fa = mc;
  fa.mixer.mode = MixMode::fixed_average;
  fa.mixer.range_lo = 0;
  fa.mixer.range_hi = 2;
  Model mfa(fa);
  CHECK(!mfa.params().has("mixer.logits"));
  ModelConfig last = mc;
  last.mixer.mode = MixMode::last_layer;
  CHECK(!Model(last).params().has("mixer.logits"));

  ModelConfig bad_range = fa;
  bad_range.mixer.range_hi = 5;
  CHECK_THROWS_AS(Model{bad_range}, UsageError);
  ModelConfig bad_type = mc;
  bad_type.encoder_type = "wavlm";
  CHECK_THROWS_WITH_AS(Model{bad_type}, doctest::Contains("encoder_type"),
                       UsageError);
  ModelConfig structured = mc;
  structured.encoder_type = "structured";
  structured.alpha = {1.0, 0.0, 0.0};
  structured.beta = {0.0, 1.0, 1.0};
  CHECK_THROWS_WITH_AS(Model{structured}, doctest::Contains("corpus"),
                       UsageError);
  TrainFixture f;
  ModelConfig ragged = structured;
  ragged.alpha = {1.0, 0.0};
  CHECK_THROWS_AS(Model(ragged, &f.manifest), UsageError);
  Model ok(structured, &f.manifest);
  CHECK(ok.params().has("content_encoder.symbol_table"));
}

TEST_CASE("reconstruction loss trends down over a short run") {
  TrainFixture f;
  Model m(small_model_config());
  TrainConfig tc;
  tc.steps = 150;
  tc.batch_size = 2;
  tc.learning_rate = 0.05;
  tc.lambda_l2 = 0.5;
  tc.lambda_warmup = 50;
  tc.seed = 3;
  TempDir out("smoke");
  tc.out_dir = out.str();
  Trainer(m, tc).train(f.manifest);

  auto rows = read_tsv(out.file("loss_log.tsv"));
  REQUIRE(rows.size() == 150);
  double first = 0.0, last = 0.0;
  for (size_t i = 0; i < 20; ++i) {
    first += std::stod(rows[i][1]);
    last += std::stod(rows[rows.size() - 20 + i][1]);
  }
  MESSAGE("mean recon, first 20 steps ", first / 20, " vs last 20 ",
          last / 20);
  CHECK(last < first);
}
