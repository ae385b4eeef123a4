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
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mixvc/config.hpp"
#include "mixvc/convert.hpp"
#include "mixvc/errors.hpp"
#include "mixvc/resynth.hpp"

namespace py = pybind11;
using namespace mixvc;

namespace {

using Options = std::map<std::string, std::string>;

Config make_config(const Options& options) {
  Config c = default_config();
  for (const auto& [k, v] : options) c.set(k, v);
  return c;
}

std::vector<std::vector<double>> tensor_to_rows(const Tensor& t) {
  if (t.rank() != 2) throw ShapeError("expected a rank-2 tensor");
  std::vector<std::vector<double>> rows(t.dim(0),
                                        std::vector<double>(t.dim(1)));
  for (size_t i = 0; i < t.dim(0); ++i)
    for (size_t j = 0; j < t.dim(1); ++j) rows[i][j] = t.at(i, j);
  return rows;
}

Tensor rows_to_tensor(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("empty matrix");
  Tensor t({rows.size(), rows[0].size()});
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ShapeError("ragged matrix");
    for (size_t j = 0; j < rows[i].size(); ++j) t.at(i, j) = rows[i][j];
  }
  return t;
}

CorpusManifest manifest_at(const std::string& data) {
  std::string path = data;
  if (path.size() < 4 || path.substr(path.size() - 4) != ".tsv")
    path += "/manifest.tsv";
  return read_manifest(path);
}

}  // namespace

PYBIND11_MODULE(mixvc, m) {
  m.doc() = "voice conversion on synthetic speech with layer-mixed "
            "self-supervised features";

  py::register_exception<UsageError>(m, "UsageError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<ShapeError>(m, "ShapeError");

  m.def(
      "gen_data",
      [](const std::string& out_dir, int n_speakers, int n_utts,
         uint64_t seed) {
        CorpusManifest man = generate_corpus(n_speakers, n_utts, seed,
                                             out_dir);
        return man.entries.size();
      },
      py::arg("out_dir"), py::arg("n_speakers") = 8, py::arg("n_utts") = 10,
      py::arg("seed") = 42,
      "Synthesize a labeled corpus; returns the utterance count.");

  m.def(
      "train",
      [](const std::string& data, const std::string& out_dir,
         const Options& options) {
        Config c = make_config(options);
        CorpusManifest man = manifest_at(data);
        Model model(model_config_from(c), &man);
        TrainConfig tc = train_config_from(c);
        tc.out_dir = out_dir;
        std::filesystem::create_directories(out_dir);
        c.write_resolved(out_dir + "/resolved.cfg");
        Trainer trainer(model, tc);
        trainer.train(man);
        return out_dir + "/model.ckpt";
      },
      py::arg("data"), py::arg("out_dir"), py::arg("options") = Options{},
      "Train a model; returns the checkpoint path.");

  m.def(
      "convert",
      [](const std::string& source_wav, const std::string& target_wav,
         const std::string& ckpt, const Options& options) {
        Config c = make_config(options);
        if (c.str("model.encoder_type") != "random")
          throw UsageError("convert supports encoder_type=random");
        Model model(model_config_from(c), nullptr);
        model.load(ckpt);
        Tensor mel = convert_utterance(model, read_wav(source_wav),
                                       read_wav(target_wav));
        return tensor_to_rows(mel);
      },
      py::arg("source_wav"), py::arg("target_wav"), py::arg("ckpt"),
      py::arg("options") = Options{},
      "Zero-shot conversion; returns the log-mel matrix as nested lists.");

  m.def(
      "evaluate",
      [](const std::string& data, const std::string& ckpt,
         const Options& options) {
        Config c = make_config(options);
        CorpusManifest man = manifest_at(data);
        Model model(model_config_from(c), &man);
        model.load(ckpt);
        EvalOutputs out = evaluate_model(model, man, eval_config_from(c));
        py::dict d;
        d["recon_l1"] = out.recon_l1;
        if (out.speaker_probe_ok) {
          d["speaker_probe"] = out.speaker_probe;
          d["speaker_probe_chance"] = out.speaker_probe_chance;
        }
        d["content_probe"] = out.content_probe;
        d["content_probe_chance"] = out.content_probe_chance;
        d["mel_probe"] = out.mel_probe;
        d["real_wer"] = out.real_wer;
        d["n_conversions"] = out.n_conversions;
        if (!out.recon_wer.empty()) d["mean_recon_wer"] = mean_score(out.recon_wer);
        if (!out.conv_wer.empty()) d["mean_conv_wer"] = mean_score(out.conv_wer);
        if (!out.conv_f0.empty()) d["mean_f0_corr"] = mean_score(out.conv_f0);
        if (!out.conv_sim.empty())
          d["mean_speaker_sim"] = mean_score(out.conv_sim);
        return d;
      },
      py::arg("data"), py::arg("ckpt"), py::arg("options") = Options{},
      "Score a trained model on a corpus; returns summary metrics.");

  m.def(
      "mel_spectrogram",
      [](const std::vector<double>& samples) {
        Waveform w;
        w.samples = samples;
        return tensor_to_rows(mel_spectrogram(w));
      },
      py::arg("samples"), "Log-mel matrix of 16 kHz samples.");

  m.def(
      "read_wav",
      [](const std::string& path) { return read_wav(path).samples; },
      py::arg("path"));

  m.def(
      "write_wav",
      [](const std::vector<double>& samples, const std::string& path) {
        Waveform w;
        w.samples = samples;
        write_wav(w, path);
      },
      py::arg("samples"), py::arg("path"));

  m.def(
      "resynthesize",
      [](const std::vector<std::vector<double>>& mel) {
        return resynthesize(rows_to_tensor(mel)).samples;
      },
      py::arg("mel"), "Listening-grade audio from a log-mel matrix.");

  m.def(
      "f0_from_mel",
      [](const std::vector<std::vector<double>>& mel) {
        PitchContour p = f0_from_mel(rows_to_tensor(mel));
        std::vector<bool> voiced(p.voiced.begin(), p.voiced.end());
        return py::make_tuple(p.f0, voiced);
      },
      py::arg("mel"), "Pitch track (f0, voiced) from a log-mel matrix.");

  m.def("word_error_rate", &word_error_rate, py::arg("ref"), py::arg("hyp"));

  m.def(
      "paired_ttest",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        TTestResult r = paired_ttest(a, b);
        return py::make_tuple(r.t, r.p);
      },
      py::arg("a"), py::arg("b"), "Two-sided paired t-test; returns (t, p).");

  m.def("holm_correct", &holm_correct, py::arg("pvals"));
}
