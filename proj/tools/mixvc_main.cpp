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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixvc/config.hpp"
#include "mixvc/convert.hpp"
#include "mixvc/errors.hpp"
#include "mixvc/resynth.hpp"

namespace fs = std::filesystem;
using namespace mixvc;

namespace {

// Relative output paths land under $MIXVC_OUT_ROOT when it is set.
std::string resolve_out(const std::string& path) {
  const char* root = std::getenv("MIXVC_OUT_ROOT");
  if (root == nullptr || *root == '\0' || path.empty() ||
      fs::path(path).is_absolute())
    return path;
  return (fs::path(root) / path).string();
}

void ensure_parent_dir(const std::string& file_path) {
  fs::path p = fs::path(file_path).parent_path();
  if (!p.empty()) fs::create_directories(p);
}

CorpusManifest load_corpus(const std::string& data_arg) {
  fs::path p(data_arg);
  if (fs::is_directory(p)) p /= "manifest.tsv";
  if (!fs::exists(p)) throw DataError("no manifest at " + p.string());
  return read_manifest(p.string());
}

// Shared --config/--set plumbing: file first, then individual overrides.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "configuration file");
    cmd->add_option("--set", sets,
                    "override one key, e.g. --set train.steps=100");
  }

  Config resolve() const {
    Config c = default_config();
    if (!file.empty()) c.load_file(file);
    for (const std::string& s : sets) {
      size_t eq = s.find('=');
      if (eq == std::string::npos)
        throw UsageError("--set expects key=value, got '" + s + "'");
      auto trim = [](std::string v) {
        size_t a = v.find_first_not_of(" \t");
        size_t b = v.find_last_not_of(" \t");
        return a == std::string::npos ? std::string()
                                      : v.substr(a, b - a + 1);
      };
      c.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return c;
  }
};

Model build_model(const Config& cfg, const CorpusManifest* corpus) {
  return Model(model_config_from(cfg), corpus);
}

int run(int argc, char** argv) {
  CLI::App app{"voice conversion on synthetic speech with layer-mixed "
               "self-supervised features"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "synthesize a labeled corpus");
  ConfigArgs gen_cfg;
  gen_cfg.attach(gen);
  std::string gen_out;
  gen->add_option("--out", gen_out, "corpus directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train a conversion model");
  ConfigArgs train_cfg;
  train_cfg.attach(train);
  std::string train_data, train_out, train_resume;
  train->add_option("--data", train_data, "corpus dir or manifest.tsv")
      ->required();
  train->add_option("--out", train_out, "run directory")->required();
  train->add_option("--resume", train_resume, "checkpoint to resume from");

  // convert
  auto* conv = app.add_subcommand("convert", "zero-shot voice conversion");
  ConfigArgs conv_cfg;
  conv_cfg.attach(conv);
  std::string conv_src, conv_tgt, conv_ckpt, conv_out, conv_wav;
  conv->add_option("--source", conv_src, "source utterance wav")->required();
  conv->add_option("--target", conv_tgt, "target speaker wav")->required();
  conv->add_option("--ckpt", conv_ckpt, "model checkpoint")->required();
  conv->add_option("--out", conv_out, "output log-mel matrix")->required();
  conv->add_option("--wav", conv_wav, "optional resynthesized audio");

  // eval
  auto* ev = app.add_subcommand("eval", "score a trained model on a corpus");
  ConfigArgs ev_cfg;
  ev_cfg.attach(ev);
  std::string ev_data, ev_ckpt, ev_out;
  ev->add_option("--data", ev_data, "corpus dir or manifest.tsv")->required();
  ev->add_option("--ckpt", ev_ckpt, "model checkpoint")->required();
  ev->add_option("--out", ev_out, "output directory")->required();

  // report
  auto* rep = app.add_subcommand("report", "significance report from scores");
  std::vector<std::string> rep_scores;
  std::string rep_out;
  rep->add_option("--scores", rep_scores, "score file (repeatable)")
      ->required();
  rep->add_option("--out", rep_out, "report file")->required();

  // weights-hist
  auto* wh = app.add_subcommand("weights-hist",
                                "layer-weight summary of a checkpoint");
  std::string wh_ckpt, wh_out;
  wh->add_option("--ckpt", wh_ckpt, "model checkpoint")->required();
  wh->add_option("--out", wh_out, "output table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    Config c = gen_cfg.resolve();
    long n_spk = c.integer("data.n_speakers");
    long n_utt = c.integer("data.n_utts");
    if (n_spk < 1 || n_utt < 1)
      throw UsageError("data.n_speakers and data.n_utts must be positive");
    std::string out = resolve_out(gen_out);
    fs::create_directories(out);
    CorpusManifest m = generate_corpus(int(n_spk), int(n_utt),
                                       c.uint("data.seed"), out);
    c.write_resolved(out + "/resolved.cfg");
    std::cout << "wrote " << m.entries.size() << " utterances under " << out
              << "\n";
    return 0;
  }

  if (train->parsed()) {
    Config c = train_cfg.resolve();
    CorpusManifest m = load_corpus(train_data);
    std::string out = resolve_out(train_out);
    fs::create_directories(out);
    c.write_resolved(out + "/resolved.cfg");
    Model model = build_model(c, &m);
    TrainConfig tc = train_config_from(c);
    tc.out_dir = out;
    Trainer trainer(model, tc);
    trainer.train(m, train_resume);
    std::cout << "trained " << tc.steps << " steps; checkpoint at " << out
              << "/model.ckpt\n";
    return 0;
  }

  if (conv->parsed()) {
    Config c = conv_cfg.resolve();
    if (c.str("model.encoder_type") != "random")
      throw UsageError(
          "convert supports encoder_type=random; the structured encoder "
          "needs corpus ground truth and is driven through eval");
    Model model = build_model(c, nullptr);
    model.load(conv_ckpt);
    Waveform src = read_wav(conv_src);
    Waveform tgt = read_wav(conv_tgt);
    Tensor mel = convert_utterance(model, src, tgt);
    std::string out = resolve_out(conv_out);
    ensure_parent_dir(out);
    write_matrix(mel, out);
    if (!conv_wav.empty()) {
      std::string wav_out = resolve_out(conv_wav);
      ensure_parent_dir(wav_out);
      write_wav(resynthesize(mel), wav_out);
    }
    std::cout << "wrote " << mel.dim(0) << "-frame log-mel to " << out
              << "\n";
    return 0;
  }

  if (ev->parsed()) {
    Config c = ev_cfg.resolve();
    CorpusManifest m = load_corpus(ev_data);
    std::string out = resolve_out(ev_out);
    fs::create_directories(out);
    c.write_resolved(out + "/resolved.cfg");
    Model model = build_model(c, &m);
    model.load(ev_ckpt);
    EvalOutputs res = evaluate_model(model, m, eval_config_from(c));
    write_scores(res.conv_wer, out + "/scores_wer.tsv");
    write_scores(res.conv_f0, out + "/scores_f0.tsv");
    write_scores(res.conv_sim, out + "/scores_sim.tsv");
    write_scores(res.recon_wer, out + "/scores_recon_wer.tsv");
    write_eval_summary(res, out + "/summary.tsv");
    std::cout << "evaluated " << res.n_conversions << " conversions; "
              << "summary at " << out << "/summary.tsv\n";
    return 0;
  }

  if (rep->parsed()) {
    std::string out = resolve_out(rep_out);
    ensure_parent_dir(out);
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out);
    for (const std::string& s : rep_scores) {
      std::vector<ScoreRow> rows = read_scores(s);
      f << build_report(rows, fs::path(s).filename().string()) << "\n";
    }
    std::cout << "wrote report to " << out << "\n";
    return 0;
  }

  if (wh->parsed()) {
    Parameters p = Parameters::load(wh_ckpt);
    if (!p.has("mixer.logits"))
      throw UsageError(
          "checkpoint has no learned layer weights (not a chameleon run)");
    std::string out = resolve_out(wh_out);
    ensure_parent_dir(out);
    write_weight_histogram(p.value("mixer.logits"), out);
    std::cout << "wrote layer-weight summary to " << out << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
